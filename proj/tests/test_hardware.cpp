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

#include "snnbench/hardware.hpp"
#include "test_util.hpp"

using namespace snnbench;

namespace {

SnnNetwork small_net(uint64_t seed = 3)
{
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> uni(0.0, 1.0);
	SnnNetwork net;
	net.layers = {20, 15, 4};
	net.weights.push_back(Eigen::MatrixXd::NullaryExpr(
	    15, 20, [&]() { return 0.002 * uni(rng); }));
	net.weights.push_back(Eigen::MatrixXd::NullaryExpr(
	    4, 15, [&]() { return 0.002 * uni(rng); }));
	net.lif = LifParams{};
	return net;
}

Dataset random_batch(int n, int dim, uint64_t seed = 11)
{
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> uni(0.0, 1.0);
	Dataset d;
	d.images = Eigen::MatrixXd::NullaryExpr(n, dim,
	                                        [&]() { return uni(rng); });
	d.labels.assign(n, 0);
	return d;
}

}  // namespace

TEST_CASE("profile JSON roundtrip preserves every field")
{
	HardwareProfile p;
	p.name = "testchip";
	p.weight_levels = 16;
	p.mismatch_cv = 0.1;
	p.trial_noise_cv = 0.02;
	p.membrane_noise_sigma = 0.2;
	p.input_bw_cap = 3000.0;
	p.neuron_rate_cap = 1000.0;
	p.speedup = 10000.0;
	p.capacity_neurons = 384;
	p.max_instances = 1;
	p.batch_overhead_ms = 100.0;
	p.energy.kind = EnergyModel::Kind::event_based;
	p.energy.e_per_event_j = 1e-8;
	p.energy.idle_power_w = 0.5;
	HardwareProfile q = profile_from_json(profile_to_json(p));
	CHECK(q.name == p.name);
	CHECK(q.weight_levels == p.weight_levels);
	CHECK(q.mismatch_cv == p.mismatch_cv);
	CHECK(q.trial_noise_cv == p.trial_noise_cv);
	CHECK(q.membrane_noise_sigma == p.membrane_noise_sigma);
	CHECK(q.input_bw_cap == p.input_bw_cap);
	CHECK(q.neuron_rate_cap == p.neuron_rate_cap);
	CHECK(q.speedup == p.speedup);
	CHECK(q.capacity_neurons == p.capacity_neurons);
	CHECK(q.max_instances == p.max_instances);
	CHECK(q.batch_overhead_ms == p.batch_overhead_ms);
	CHECK(q.energy.kind == EnergyModel::Kind::event_based);
	CHECK(q.energy.e_per_event_j == p.energy.e_per_event_j);
	CHECK(q.energy.idle_power_w == p.energy.idle_power_w);
	CHECK_FALSE(q.is_ideal());

	// unbounded caps survive as absent keys
	HardwareProfile ideal;
	HardwareProfile ideal2 = profile_from_json(profile_to_json(ideal));
	CHECK(ideal2.is_ideal());
	CHECK(std::isinf(ideal2.input_bw_cap));
	CHECK(ideal2.capacity_neurons == std::numeric_limits<int>::max());
}

TEST_CASE("shipped profiles load by name and validate")
{
	const std::string dir = source_dir() + "/data/profiles";
	for (const std::string name :
	     {"ideal", "spikey", "brainscales", "spinn3", "spinn5", "nest",
	      "genn_cpu", "genn_gpu"}) {
		HardwareProfile p = load_profile(name, dir);
		CHECK(p.name == name);
	}
	CHECK(load_profile("ideal", dir).is_ideal());
	CHECK_FALSE(load_profile("spikey", dir).is_ideal());
	CHECK_THROWS(load_profile("no_such_chip", dir));
	// an explicit path wins over the directory lookup
	HardwareProfile p = load_profile(dir + "/spikey.json", "/nonexistent");
	CHECK(p.name == "spikey");
}

TEST_CASE("mismatch draws are lognormal with the configured CV")
{
	HardwareProfile prof;
	prof.mismatch_cv = 0.2;
	SnnNetwork net;
	net.layers = {1, 20000, 10};
	net.weights.push_back(Eigen::MatrixXd::Zero(20000, 1));
	net.weights.push_back(Eigen::MatrixXd::Zero(10, 20000));
	DeviceInstance dev = instantiate(prof, 5);
	auto perts = dev.mismatch(net);
	REQUIRE(perts.size() == 2);
	const Eigen::ArrayXd f = perts[0].tau_m / net.lif.tau_m;
	CHECK(f.minCoeff() > 0.0);
	const double mean = f.mean();
	const double cv = std::sqrt((f - mean).square().mean()) / mean;
	CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
	CHECK(cv == doctest::Approx(0.2).epsilon(0.05));
	// v_thresh is perturbed on the rest-to-threshold span
	const Eigen::ArrayXd g = (perts[0].v_thresh - net.lif.v_rest) /
	                         (net.lif.v_thresh - net.lif.v_rest);
	CHECK(g.mean() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("mismatch is frozen per instance, trial noise re-jitters per run")
{
	HardwareProfile prof;
	prof.mismatch_cv = 0.1;
	prof.trial_noise_cv = 0.02;
	SnnNetwork net = small_net();
	DeviceInstance dev = instantiate(prof, 42);
	auto a = dev.mismatch(net);
	auto b = dev.mismatch(net);
	CHECK((a[0].tau_m - b[0].tau_m).abs().maxCoeff() == 0.0);
	CHECK((a[1].v_thresh - b[1].v_thresh).abs().maxCoeff() == 0.0);

	DeviceInstance other = instantiate(prof, 43);
	auto c = other.mismatch(net);
	CHECK((a[0].tau_m - c[0].tau_m).abs().maxCoeff() > 0.0);

	auto r1 = dev.trial_perturbation(net, 1);
	auto r1b = dev.trial_perturbation(net, 1);
	auto r2 = dev.trial_perturbation(net, 2);
	CHECK((r1[0].tau_m - r1b[0].tau_m).abs().maxCoeff() == 0.0);
	CHECK((r1[0].tau_m - r2[0].tau_m).abs().maxCoeff() > 0.0);
	// trial jitter stays close to the frozen factors
	CHECK(((r1[0].tau_m - a[0].tau_m) / a[0].tau_m).abs().maxCoeff() < 0.2);
}

TEST_CASE("the ideal profile reproduces the ideal simulator bit for bit")
{
	SnnNetwork net = small_net();
	Dataset batch = random_batch(8, 20);
	ConversionConfig cfg;
	cfg.f_max = 100.0;
	cfg.t_present = 200.0;
	HardwareProfile ideal;
	DeviceInstance dev = instantiate(ideal, 123);
	RunStats stats;
	ClassifiedBatch hw = run_on_device(dev, net, batch, cfg, &stats);
	ClassifiedBatch sim = classify(net, batch, cfg);
	CHECK((hw.output_counts - sim.output_counts).cwiseAbs().maxCoeff() == 0);
	CHECK(hw.predicted == sim.predicted);
	CHECK(stats.n_samples == 8);
	CHECK(stats.wall_clock_ms == doctest::Approx(8 * 200.0));
}

TEST_CASE("device quantization matches offline quantization")
{
	SnnNetwork net = small_net();
	Dataset batch = random_batch(4, 20);
	ConversionConfig cfg;
	HardwareProfile prof;
	prof.weight_levels = 16;
	DeviceInstance dev = instantiate(prof, 1);
	ClassifiedBatch hw = run_on_device(dev, net, batch, cfg, nullptr);

	AnnModel tmp;
	tmp.layer_dims = net.layers;
	tmp.weights = net.weights;
	tmp.non_negative = true;
	ConversionConfig qc = cfg;
	qc.w_max = 0.0;
	for (const auto &w : net.weights) {
		qc.w_max = std::max(qc.w_max, w.cwiseAbs().maxCoeff());
	}
	qc.weight_levels = 16;
	SnnNetwork qnet = net;
	qnet.weights = normalize_weights(tmp, qc);
	ClassifiedBatch sim = classify(qnet, batch, cfg);
	CHECK((hw.output_counts - sim.output_counts).cwiseAbs().maxCoeff() == 0);

	// conflicting explicit quantization is rejected
	ConversionConfig conflict;
	conflict.weight_levels = 8;
	CHECK_THROWS_AS(
	    run_on_device(dev, net, batch, conflict, nullptr),
	    std::invalid_argument);
}

TEST_CASE("capacity limits are enforced")
{
	SnnNetwork net = small_net();  // 19 device neurons
	HardwareProfile prof;
	prof.capacity_neurons = 18;
	DeviceInstance dev = instantiate(prof, 1);
	Dataset batch = random_batch(2, 20);
	ConversionConfig cfg;
	CHECK_THROWS_AS(run_on_device(dev, net, batch, cfg, nullptr),
	                CapacityError);
	prof.capacity_neurons = 19;
	CHECK_NOTHROW(run_on_device(instantiate(prof, 1), net, batch, cfg,
	                            nullptr));
}

TEST_CASE("wall clock scales with speedup plus a fixed batch overhead")
{
	SnnNetwork net = small_net();
	Dataset batch = random_batch(10, 20);
	ConversionConfig cfg;
	cfg.t_present = 200.0;
	cfg.t_gap = 50.0;
	HardwareProfile prof;
	prof.speedup = 10000.0;
	prof.batch_overhead_ms = 100.0;
	RunStats stats;
	run_on_device(instantiate(prof, 1), net, batch, cfg, &stats);
	CHECK(stats.wall_clock_ms == doctest::Approx(10 * 250.0 / 10000.0 + 100.0));
}

TEST_CASE("metered energy is power times wall clock per inference")
{
	HardwareProfile prof;
	prof.energy.kind = EnergyModel::Kind::metered;
	prof.energy.active_power_w = 10.0;
	RunStats stats;
	stats.wall_clock_ms = 5070.0;
	stats.n_samples = 5000;
	// 10 W * 5.07 s / 5000 = 10.14 mJ
	CHECK(estimate_energy(stats, prof) == doctest::Approx(10.14e-3));
	stats.n_samples = 0;
	CHECK_THROWS_AS(estimate_energy(stats, prof), std::invalid_argument);
}

TEST_CASE("event-based energy counts presynaptic events plus idle power")
{
	HardwareProfile prof;
	prof.energy.kind = EnergyModel::Kind::event_based;
	prof.energy.e_per_event_j = 1e-8;
	prof.energy.idle_power_w = 0.5;
	RunStats stats;
	stats.wall_clock_ms = 2000.0;
	stats.presyn_events = 4000000;
	stats.n_samples = 100;
	// (4e6 * 1e-8 + 0.5 * 2) / 100 = 10.4 mJ
	CHECK(estimate_energy(stats, prof) == doctest::Approx(10.4e-3));
}

TEST_CASE("bandwidth caps thin the input and degrade gracefully")
{
	SnnNetwork net = small_net();
	Dataset batch = random_batch(6, 20);
	ConversionConfig cfg;
	cfg.f_max = 400.0;
	cfg.t_present = 500.0;
	HardwareProfile capped;
	capped.input_bw_cap = 500.0;
	RunStats full, thin;
	run_on_device(instantiate(HardwareProfile{}, 4), net, batch, cfg, &full);
	run_on_device(instantiate(capped, 4), net, batch, cfg, &thin);
	CHECK(thin.dropped[0] > 0);
	CHECK(thin.delivered[0] < full.delivered[0]);
	// delivered aggregate rate respects the cap (within sampling noise)
	const double rate = double(thin.delivered[0]) * 1000.0 /
	                    (6 * cfg.t_present);
	CHECK(rate < 1.2 * capped.input_bw_cap);
}

TEST_CASE("device runs are reproducible for a fixed seed and run index")
{
	SnnNetwork net = small_net();
	Dataset batch = random_batch(5, 20);
	ConversionConfig cfg;
	HardwareProfile prof;
	prof.mismatch_cv = 0.1;
	prof.trial_noise_cv = 0.02;
	prof.membrane_noise_sigma = 0.2;
	DeviceInstance dev = instantiate(prof, 77);
	ClassifiedBatch a = run_on_device(dev, net, batch, cfg, nullptr, 3);
	ClassifiedBatch b = run_on_device(dev, net, batch, cfg, nullptr, 3);
	CHECK((a.output_counts - b.output_counts).cwiseAbs().maxCoeff() == 0);
}
