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

#include <random>

#include "snnbench/lif.hpp"
#include "test_util.hpp"

using namespace snnbench;

namespace {

SpikeTrains regular_train(int n_neurons, int neuron, double rate_hz,
                          double duration_ms)
{
	SpikeTrains trains(n_neurons);
	const double period = 1000.0 / rate_hz;
	for (double t = period; t < duration_ms; t += period) {
		trains[neuron].push_back(t);
	}
	return trains;
}

/// Single neuron fed by one input at the given weight.
SnnNetwork one_neuron_net(double weight, const LifParams &p, double dt = 1.0)
{
	SnnNetwork net;
	net.layers = {1, 1};
	net.weights.push_back(Eigen::MatrixXd::Constant(1, 1, weight));
	net.lif = p;
	net.dt = dt;
	return net;
}

}  // namespace

TEST_CASE("resting state is a fixed point")
{
	LifParams p;
	LifLayerState s(3, p, 1.0);
	const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(3);
	for (int t = 0; t < 100; t++) {
		auto fired = s.step(zero, zero);
		CHECK(fired.empty());
	}
	CHECK((s.voltage() - p.v_rest).abs().maxCoeff() == 0.0);
}

TEST_CASE("membrane decay follows the closed-form exponential")
{
	// displace V with a single sharp impulse; tau_syn is tiny so the
	// conductance is gone after the first step and the free decay
	// toward rest can be compared to the analytic solution
	LifParams p;
	p.tau_syn_e = 0.05;
	p.tau_m = 20.0;
	LifLayerState s(1, p, 1.0);
	Eigen::ArrayXd exc(1), zero = Eigen::ArrayXd::Zero(1);
	exc << 0.05;
	s.step(exc, zero);
	const double v0 = s.voltage()(0) - p.v_rest;
	REQUIRE(v0 > 1.0);  // displaced but below threshold
	REQUIRE(s.voltage()(0) < p.v_thresh);

	const int steps = int(p.tau_m);
	for (int t = 0; t < steps; t++) {
		s.step(zero, zero);
	}
	const double expect = p.v_rest + v0 * std::exp(-1.0);
	const double got = s.voltage()(0);
	CHECK(std::abs(got - expect) / std::abs(v0 * std::exp(-1.0)) < 0.02);
}

TEST_CASE("sustained drive fires at the fine-step reference rate")
{
	LifParams p;
	p.t_refrac = 0.0;
	SnnNetwork coarse = one_neuron_net(0.01, p, 1.0);
	SnnNetwork fine = one_neuron_net(0.01, p, 0.01);
	SpikeTrains input = regular_train(1, 0, 300.0, 1000.0);

	SpikeRecord rc = run(coarse, input, 1000.0);
	SpikeRecord rf = run(fine, input, 1000.0);
	const double nc = rc.output_counts()(0);
	const double nf = rf.output_counts()(0);
	REQUIRE(nf > 20);
	CHECK(std::abs(nc - nf) / nf < 0.05);
}

TEST_CASE("20-neuron random network matches the dt=0.01 ms oracle")
{
	std::mt19937_64 rng(4);
	std::uniform_real_distribution<double> uni(-1.0, 1.0);
	LifParams p;
	p.t_refrac = 0.0;
	p.tau_m = 50.0;
	p.v_thresh = -57.0;
	SnnNetwork net;
	net.layers = {10, 20};
	Eigen::MatrixXd w(20, 10);
	for (Eigen::Index i = 0; i < w.size(); i++) {
		// mostly excitatory, some inhibition
		w(i) = 0.004 * std::max(-0.3, uni(rng));
	}
	net.weights.push_back(w);
	net.lif = p;

	SpikeTrains input(10);
	std::uniform_real_distribution<double> rate(20.0, 120.0);
	for (int i = 0; i < 10; i++) {
		const double period = 1000.0 / rate(rng);
		for (double t = period; t < 1000.0; t += period) {
			input[i].push_back(t);
		}
	}
	SnnNetwork fine = net;
	fine.dt = 0.01;
	SpikeRecord rc = run(net, input, 1000.0);
	SpikeRecord rf = run(fine, input, 1000.0);
	const double total_c = rc.output_counts().sum();
	const double total_f = rf.output_counts().sum();
	REQUIRE(total_f > 100);
	CHECK(std::abs(total_c - total_f) / total_f < 0.05);
}

TEST_CASE("refractory and conductance invariants on random input")
{
	LifParams p;
	p.t_refrac = 3.0;
	LifLayerState s(5, p, 1.0);
	std::mt19937_64 rng(9);
	std::uniform_real_distribution<double> uni(0.0, 0.02);
	std::vector<double> last_spike(5, -1e9);
	double t = 0.0;
	for (int step = 0; step < 10000; step++) {
		Eigen::ArrayXd exc(5), inh(5);
		for (int i = 0; i < 5; i++) {
			exc(i) = uni(rng);
			inh(i) = uni(rng) * 0.3;
		}
		auto fired = s.step(exc, inh);
		t += 1.0;
		CHECK(s.g_exc().minCoeff() >= 0.0);
		CHECK(s.g_inh().minCoeff() >= 0.0);
		for (int i : fired) {
			CHECK(t - last_spike[i] >= p.t_refrac);
			last_spike[i] = t;
		}
	}
}

TEST_CASE("spike record times are increasing and refractory-separated")
{
	LifParams p;
	p.t_refrac = 2.0;
	SnnNetwork net = one_neuron_net(0.015, p);
	SpikeTrains input = regular_train(1, 0, 300.0, 500.0);
	SimOptions opts;
	opts.record = {true};
	SpikeRecord rec = run(net, input, 500.0, opts);
	REQUIRE(rec.recorded[0]);
	const auto &times = rec.times[0][0];
	REQUIRE(times.size() >= 3);
	for (size_t k = 1; k < times.size(); k++) {
		CHECK(times[k] - times[k - 1] >= p.t_refrac);
	}
	CHECK(int(times.size()) == rec.counts[0](0));
}

TEST_CASE("silent and zero-weight networks stay silent")
{
	LifParams p;
	SnnNetwork net = one_neuron_net(0.0, p);
	SpikeRecord quiet = run(net, SpikeTrains(1), 300.0);
	CHECK(quiet.output_counts()(0) == 0);
	SpikeRecord wired = run(net, regular_train(1, 0, 60.0, 300.0), 300.0);
	CHECK(wired.output_counts()(0) == 0);
}

TEST_CASE("output rate is monotone in the input rate (ReLU-like curve)")
{
	LifParams p;
	p.t_refrac = 0.0;
	SnnNetwork net = one_neuron_net(0.006, p);
	int prev = 0;
	bool onset_seen = false;
	for (double rate : {5.0, 20.0, 50.0, 100.0, 200.0, 400.0}) {
		SpikeRecord rec =
		    run(net, regular_train(1, 0, rate, 1000.0), 1000.0);
		const int n = rec.output_counts()(0);
		CHECK(n >= prev);
		if (prev == 0 && n > 0) {
			onset_seen = true;
		}
		prev = n;
	}
	CHECK(onset_seen);  // zero below onset, increasing above
}

TEST_CASE("per-neuron perturbations and rate caps act as configured")
{
	LifParams p;
	p.t_refrac = 0.0;
	SnnNetwork net;
	net.layers = {1, 2};
	net.weights.push_back(Eigen::MatrixXd::Constant(2, 1, 0.01));
	net.lif = p;
	SpikeTrains input = regular_train(1, 0, 400.0, 1000.0);

	SimOptions opts;
	LayerPerturbation pert;
	pert.tau_m = Eigen::ArrayXd(2);
	pert.tau_m << p.tau_m, p.tau_m;
	pert.v_thresh = Eigen::ArrayXd(2);
	pert.v_thresh << p.v_thresh, p.v_thresh + 40.0;  // second nearly mute
	opts.perturbations = {pert};
	SpikeRecord rec = run(net, input, 1000.0, opts);
	CHECK(rec.output_counts()(0) > 10 * std::max(1, rec.output_counts()(1)));

	SimOptions capped;
	capped.neuron_rate_cap = 20.0;
	SimStats stats;
	SpikeRecord rc = run(net, input, 1000.0, capped, &stats);
	CHECK(rc.output_counts().maxCoeff() <= 20);
	uint64_t dropped = 0;
	for (uint64_t d : stats.dropped) {
		dropped += d;
	}
	CHECK(dropped > 0);
}

TEST_CASE("input thinning is seeded and reduces delivered spikes")
{
	LifParams p;
	SnnNetwork net = one_neuron_net(0.01, p);
	SpikeTrains input = regular_train(1, 0, 400.0, 1000.0);
	SimOptions opts;
	opts.input_keep_prob = 0.5;
	opts.noise_seed = 42;
	SimStats a, b;
	run(net, input, 1000.0, opts, &a);
	run(net, input, 1000.0, opts, &b);
	CHECK(a.delivered[0] == b.delivered[0]);
	CHECK(a.delivered[0] < input[0].size());
	CHECK(a.dropped[0] > 0);
	CHECK(a.delivered[0] + a.dropped[0] == input[0].size());
}

TEST_CASE("parameter validation rejects inconsistent settings")
{
	LifParams p;
	p.tau_m = -1.0;
	CHECK_THROWS_AS(p.validate(), std::invalid_argument);
	LifParams q;
	q.v_thresh = q.v_reset - 1.0;
	CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
