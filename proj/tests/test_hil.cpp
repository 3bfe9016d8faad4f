/*
 *  snnbench -- ANN-to-SNN conversion workbench
 *
 *  This program is free software: you can redistribute it and/or modify
 *  it under the terms of the GNU General Public License as published by
 *  the Free Software Foundation, either version 3 of the License, or
 *  (at your option) any later version.
 *
 *  This program is distributed in the hope that it will be useful,
 *  but WITHOUT ANY WARRANTY; without even the implied warranty of
 *  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
 *  GNU General Public License for more details.
 */

#include <doctest.h>

#include <fstream>

#include "snnbench/hil.hpp"
#include "test_util.hpp"

using namespace snnbench;

namespace {

struct HilFixture {
	MnistBundle data;
	Dataset train_set;
	AnnModel model;
	LifParams lif;
	ConversionConfig cfg;

	HilFixture()
	{
		PoolSpec pool;
		data = load_mnist(mnist_dir(), &pool);
		train_set = data.train.head(3000);
		model = make_mlp({data.train.input_dim(), 20, 10},
		                 OutputHead::softmax, Loss::cross_entropy, 3);
		TrainConfig tc;
		tc.epochs = 5;
		tc.learning_rate = 0.1;
		train(model, train_set, tc);
		lif.tau_m = 50.0;
		lif.v_thresh = -57.0;
		lif.e_rev_i = -115.0;
		lif.t_refrac = 0.0;
		cfg.w_max = 0.004;
		cfg.f_max = 100.0;
		cfg.t_present = 200.0;
	}
};

}  // namespace

TEST_CASE("the trace has one loss/accuracy entry per epoch")
{
	HilFixture f;
	DeviceInstance dev = instantiate(HardwareProfile{}, 7);
	HilConfig hc;
	hc.epochs = 2;
	hc.samples_per_epoch = 100;
	HilTrace trace = hil_retrain(f.model, dev, f.train_set, f.lif, f.cfg, hc);
	CHECK(trace.epoch_loss.size() == 2);
	CHECK(trace.epoch_accuracy.size() == 2);
	for (double a : trace.epoch_accuracy) {
		CHECK(a >= 0.0);
		CHECK(a <= 100.0);
	}
	CHECK(trace.rate_normalizer > 0.0);
}

TEST_CASE("an explicit rate normalizer is used as given")
{
	HilFixture f;
	DeviceInstance dev = instantiate(HardwareProfile{}, 7);
	HilConfig hc;
	hc.epochs = 1;
	hc.samples_per_epoch = 50;
	hc.rate_normalizer = 123.0;
	HilTrace trace = hil_retrain(f.model, dev, f.train_set, f.lif, f.cfg, hc);
	CHECK(trace.rate_normalizer == 123.0);
}

TEST_CASE("output_only leaves the hidden weights untouched")
{
	HilFixture f;
	AnnModel before = f.model;
	DeviceInstance dev = instantiate(HardwareProfile{}, 7);
	HilConfig hc;
	hc.epochs = 1;
	hc.samples_per_epoch = 100;
	hc.output_only = true;
	hil_retrain(f.model, dev, f.train_set, f.lif, f.cfg, hc);
	CHECK((f.model.weights[0] - before.weights[0]).cwiseAbs().maxCoeff() ==
	      0.0);
	CHECK((f.model.weights[1] - before.weights[1]).cwiseAbs().maxCoeff() >
	      0.0);
}

TEST_CASE("retraining is deterministic in the seed")
{
	HilFixture f;
	AnnModel a = f.model, b = f.model;
	DeviceInstance dev = instantiate(HardwareProfile{}, 7);
	HilConfig hc;
	hc.epochs = 1;
	hc.samples_per_epoch = 80;
	hc.seed = 5;
	HilTrace ta = hil_retrain(a, dev, f.train_set, f.lif, f.cfg, hc);
	HilTrace tb = hil_retrain(b, dev, f.train_set, f.lif, f.cfg, hc);
	for (size_t p = 0; p < a.weights.size(); p++) {
		CHECK((a.weights[p] - b.weights[p]).cwiseAbs().maxCoeff() == 0.0);
	}
	CHECK(ta.epoch_loss == tb.epoch_loss);
}

TEST_CASE("retraining recovers accuracy lost to device mismatch")
{
	HilFixture f;
	HardwareProfile prof;
	prof.mismatch_cv = 0.25;
	DeviceInstance dev = instantiate(prof, 12);
	SnnNetwork net = convert(f.model, f.lif, f.cfg);
	Dataset probe = f.data.eval.head(200);
	ClassifiedBatch pre = run_on_device(dev, net, probe, f.cfg, nullptr, 100);
	const double pre_acc = pre.accuracy(probe.labels);

	HilConfig hc;
	hc.epochs = 4;
	hc.samples_per_epoch = 300;
	hil_retrain(f.model, dev, f.train_set, f.lif, f.cfg, hc);
	SnnNetwork post_net = convert(f.model, f.lif, f.cfg);
	ClassifiedBatch post =
	    run_on_device(dev, post_net, probe, f.cfg, nullptr, 100);
	const double post_acc = post.accuracy(probe.labels);
	CHECK(post_acc > pre_acc + 5.0);
}

TEST_CASE("the trace exports as a parseable CSV")
{
	HilTrace trace;
	trace.epoch_loss = {0.5, 0.25};
	trace.epoch_accuracy = {80.0, 90.0};
	trace.rate_normalizer = 42.0;
	const std::string path = "/tmp/snnbench_hil_trace_test.csv";
	export_hil_trace_csv(trace, path);
	std::ifstream in(path);
	REQUIRE(in.good());
	std::string header, row1, row2;
	std::getline(in, header);
	std::getline(in, row1);
	std::getline(in, row2);
	CHECK(header.find("epoch") != std::string::npos);
	CHECK(row1.find("0.5") != std::string::npos);
	CHECK(row2.find("90") != std::string::npos);
}
