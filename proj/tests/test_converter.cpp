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

#include "snnbench/converter.hpp"
#include "test_util.hpp"

using namespace snnbench;

namespace {

AnnModel two_weight_model(std::initializer_list<double> w)
{
	// 2 -> 2 -> 1 so one matrix holds the first two values and the
	// second matrix the rest
	AnnModel m;
	m.layer_dims = {2, 2, 1};
	auto it = w.begin();
	Eigen::MatrixXd w0 = Eigen::MatrixXd::Zero(2, 2);
	w0(0, 0) = *it++;
	w0(1, 1) = *it++;
	Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(1, 2);
	w1(0, 0) = *it++;
	if (it != w.end()) {
		w1(0, 1) = *it++;
	}
	m.weights = {w0, w1};
	return m;
}

}  // namespace

TEST_CASE("normalization divides by the global maximum")
{
	AnnModel m = two_weight_model({2.0, -1.0, 0.5});
	ConversionConfig cfg;
	cfg.w_max = 15.0;
	auto w = normalize_weights(m, cfg);
	CHECK(w[0](0, 0) == doctest::Approx(15.0));
	CHECK(w[0](1, 1) == doctest::Approx(-7.5));
	CHECK(w[1](0, 0) == doctest::Approx(3.75));
}

TEST_CASE("normalization is invariant to a common weight scale")
{
	AnnModel a = two_weight_model({0.3, -0.1, 0.25, 0.05});
	AnnModel b = two_weight_model({0.3 * 7, -0.1 * 7, 0.25 * 7, 0.05 * 7});
	ConversionConfig cfg;
	cfg.w_max = 0.002;
	auto wa = normalize_weights(a, cfg);
	auto wb = normalize_weights(b, cfg);
	for (size_t p = 0; p < wa.size(); p++) {
		CHECK((wa[p] - wb[p]).cwiseAbs().maxCoeff() < 1e-15);
	}
}

TEST_CASE("quantization snaps to equally spaced levels, ties away from zero")
{
	AnnModel m = two_weight_model({2.0, -1.0, 0.5});
	ConversionConfig cfg;
	cfg.w_max = 15.0;
	cfg.weight_levels = 16;
	// step 1: 15 -> 15, -7.5 -> -8 (tie away from zero), 3.75 -> 4
	auto w = normalize_weights(m, cfg);
	CHECK(w[0](0, 0) == doctest::Approx(15.0));
	CHECK(w[0](1, 1) == doctest::Approx(-8.0));
	CHECK(w[1](0, 0) == doctest::Approx(4.0));
}

TEST_CASE("all-zero networks cannot be normalized")
{
	AnnModel m = two_weight_model({0.0, 0.0, 0.0});
	ConversionConfig cfg;
	CHECK_THROWS_AS(normalize_weights(m, cfg), DegenerateModelError);
	CHECK_THROWS_AS(convert(m, LifParams{}, cfg), DegenerateModelError);
}

TEST_CASE("regular encoding produces floor(p * f_max * T / 1000) spikes")
{
	ConversionConfig cfg;
	cfg.f_max = 60.0;
	cfg.t_present = 200.0;
	Eigen::VectorXd x(3);
	x << 1.0, 0.5, 0.0;
	SpikeTrains trains = encode(x, cfg);
	CHECK(trains[0].size() == 12);  // 60 Hz over 0.2 s
	CHECK(trains[1].size() == 6);
	CHECK(trains[2].empty());
	for (const auto &train : trains) {
		for (size_t k = 0; k < train.size(); k++) {
			CHECK(train[k] > 0.0);
			CHECK(train[k] <= cfg.t_present);
			if (k > 0) {
				CHECK(train[k] > train[k - 1]);
			}
		}
	}
	// spacing of the full-rate train is the exact period
	CHECK(trains[0][1] - trains[0][0] ==
	      doctest::Approx(1000.0 / cfg.f_max));
}

TEST_CASE("poisson encoding is seeded and rate-consistent")
{
	ConversionConfig cfg;
	cfg.f_max = 100.0;
	cfg.t_present = 1000.0;
	cfg.poisson = true;
	cfg.encoder_seed = 7;
	Eigen::VectorXd x = Eigen::VectorXd::Constant(200, 0.5);
	SpikeTrains a = encode(x, cfg);
	SpikeTrains b = encode(x, cfg);
	double total = 0.0;
	for (size_t i = 0; i < a.size(); i++) {
		REQUIRE(a[i].size() == b[i].size());
		for (size_t k = 0; k < a[i].size(); k++) {
			CHECK(a[i][k] == b[i][k]);
		}
		total += double(a[i].size());
	}
	// 200 neurons at 50 Hz for 1 s: 10000 expected, sd = 100
	CHECK(total > 9500);
	CHECK(total < 10500);
	cfg.encoder_seed = 8;
	SpikeTrains c = encode(x, cfg);
	bool differs = false;
	for (size_t i = 0; i < a.size() && !differs; i++) {
		differs = a[i].size() != c[i].size();
	}
	CHECK(differs);
}

TEST_CASE("decode inverts encode up to rate quantization")
{
	ConversionConfig cfg;
	cfg.f_max = 100.0;
	cfg.t_present = 200.0;
	PoolSpec pool;
	MnistBundle data = load_mnist(mnist_dir(), &pool);
	const double bound = 1000.0 / (cfg.f_max * cfg.t_present);
	for (int s = 0; s < 5; s++) {
		Eigen::VectorXd x = data.test.images.row(s).transpose();
		SpikeTrains trains = encode(x, cfg);
		Eigen::VectorXi counts(x.size());
		for (Eigen::Index i = 0; i < x.size(); i++) {
			counts(i) = int(trains[i].size());
		}
		Eigen::VectorXd back = decode(counts, cfg);
		CHECK((back - x).cwiseAbs().maxCoeff() <= bound + 1e-12);
	}
}

TEST_CASE("conversion keeps the layer structure and LIF parameters")
{
	AnnModel m = two_weight_model({0.3, -0.1, 0.25, 0.05});
	LifParams lif;
	lif.tau_m = 100.0;
	lif.v_thresh = -60.0;
	ConversionConfig cfg;
	cfg.w_max = 0.0015;
	SnnNetwork net = convert(m, lif, cfg);
	CHECK(net.layers == m.layer_dims);
	CHECK(net.lif.tau_m == 100.0);
	CHECK(net.lif.v_thresh == -60.0);
	CHECK(net.weights[0](0, 0) == doctest::Approx(0.0015));
}

TEST_CASE("argmax prediction flags ties and silent samples")
{
	Eigen::VectorXi counts(3);
	counts << 4, 9, 2;
	bool tie = true;
	CHECK(predict_from_counts(counts, tie) == 1);
	CHECK_FALSE(tie);
	counts << 5, 5, 1;
	CHECK(predict_from_counts(counts, tie) == 0);
	CHECK(tie);
	counts << 0, 0, 0;
	CHECK(predict_from_counts(counts, tie) == 0);
	CHECK(tie);
}

TEST_CASE("batch accuracy is a percentage over matching labels")
{
	ClassifiedBatch batch;
	batch.predicted = {1, 0, 2, 2};
	batch.output_counts = Eigen::MatrixXi::Zero(4, 3);
	batch.tie = {false, false, false, false};
	CHECK(batch.accuracy({1, 0, 2, 1}) == doctest::Approx(75.0));
	CHECK_THROWS_AS(batch.accuracy({1, 0}), std::invalid_argument);
}

TEST_CASE("config validation rejects non-positive rates and windows")
{
	ConversionConfig cfg;
	cfg.f_max = 0.0;
	CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
	ConversionConfig cfg2;
	cfg2.weight_levels = 1;
	CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
}
