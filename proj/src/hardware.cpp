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

#include "snnbench/hardware.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace snnbench {

bool HardwareProfile::is_ideal() const
{
	return weight_levels == 0 && mismatch_cv == 0.0 && trial_noise_cv == 0.0 &&
	       membrane_noise_sigma == 0.0 && !std::isfinite(input_bw_cap) &&
	       !std::isfinite(neuron_rate_cap);
}

void HardwareProfile::validate() const
{
	if (weight_levels == 1 || weight_levels < 0) {
		throw std::invalid_argument("weight_levels must be 0 or >= 2");
	}
	if (input_bw_cap <= 0 || neuron_rate_cap <= 0 || speedup <= 0) {
		throw std::invalid_argument("caps and speedup must be positive");
	}
	if (mismatch_cv < 0 || trial_noise_cv < 0 || membrane_noise_sigma < 0) {
		throw std::invalid_argument("noise magnitudes must be non-negative");
	}
}

namespace {
double get_or(const nlohmann::json &j, const std::string &key, double dflt)
{
	if (!j.contains(key)) {
		return dflt;
	}
	if (j[key].is_string() && j[key] == "inf") {
		return std::numeric_limits<double>::infinity();
	}
	return j[key].get<double>();
}
}  // namespace

HardwareProfile profile_from_json(const nlohmann::json &j)
{
	HardwareProfile p;
	p.name = j.value("name", "unnamed");
	p.weight_levels = j.value("weight_levels", 0);
	p.mismatch_cv = get_or(j, "mismatch_cv", 0.0);
	p.trial_noise_cv = get_or(j, "trial_noise_cv", 0.0);
	p.membrane_noise_sigma = get_or(j, "membrane_noise_sigma", 0.0);
	p.input_bw_cap = get_or(j, "input_bw_cap",
	                        std::numeric_limits<double>::infinity());
	p.neuron_rate_cap = get_or(j, "neuron_rate_cap",
	                           std::numeric_limits<double>::infinity());
	p.speedup = get_or(j, "speedup", 1.0);
	p.capacity_neurons =
	    j.value("capacity_neurons", std::numeric_limits<int>::max());
	p.max_instances = j.value("max_instances", std::numeric_limits<int>::max());
	p.batch_overhead_ms = get_or(j, "batch_overhead_ms", 0.0);
	if (j.contains("energy")) {
		const auto &e = j["energy"];
		p.energy.kind = e.value("kind", "metered") == "event_based"
		                    ? EnergyModel::Kind::event_based
		                    : EnergyModel::Kind::metered;
		p.energy.active_power_w = get_or(e, "active_power_w", 0.0);
		p.energy.e_per_event_j = get_or(e, "e_per_event_j", 0.0);
		p.energy.idle_power_w = get_or(e, "idle_power_w", 0.0);
	}
	p.validate();
	return p;
}

nlohmann::json profile_to_json(const HardwareProfile &p)
{
	nlohmann::json j;
	j["name"] = p.name;
	j["weight_levels"] = p.weight_levels;
	j["mismatch_cv"] = p.mismatch_cv;
	j["trial_noise_cv"] = p.trial_noise_cv;
	j["membrane_noise_sigma"] = p.membrane_noise_sigma;
	if (std::isfinite(p.input_bw_cap)) {
		j["input_bw_cap"] = p.input_bw_cap;
	}
	if (std::isfinite(p.neuron_rate_cap)) {
		j["neuron_rate_cap"] = p.neuron_rate_cap;
	}
	j["speedup"] = p.speedup;
	if (p.capacity_neurons != std::numeric_limits<int>::max()) {
		j["capacity_neurons"] = p.capacity_neurons;
	}
	if (p.max_instances != std::numeric_limits<int>::max()) {
		j["max_instances"] = p.max_instances;
	}
	j["batch_overhead_ms"] = p.batch_overhead_ms;
	j["energy"]["kind"] = p.energy.kind == EnergyModel::Kind::event_based
	                          ? "event_based"
	                          : "metered";
	j["energy"]["active_power_w"] = p.energy.active_power_w;
	j["energy"]["e_per_event_j"] = p.energy.e_per_event_j;
	j["energy"]["idle_power_w"] = p.energy.idle_power_w;
	return j;
}

HardwareProfile load_profile(const std::string &name_or_path,
                             const std::string &profile_dir)
{
	namespace fs = std::filesystem;
	fs::path path = name_or_path;
	if (!fs::exists(path)) {
		path = fs::path(profile_dir) / (name_or_path + ".json");
	}
	std::ifstream in(path);
	if (!in) {
		throw std::runtime_error("cannot resolve profile '" + name_or_path +
		                         "'");
	}
	nlohmann::json j;
	in >> j;
	return profile_from_json(j);
}

DeviceInstance::DeviceInstance(HardwareProfile profile, uint64_t seed)
    : m_profile(std::move(profile)), m_seed(seed)
{
	m_profile.validate();
}

DeviceInstance instantiate(const HardwareProfile &profile, uint64_t seed)
{
	return DeviceInstance(profile, seed);
}

namespace {
/// Lognormal factors with mean 1 and the given CV.
Eigen::ArrayXd lognormal_factors(int n, double cv, std::mt19937_64 &rng)
{
	if (cv <= 0.0) {
		return Eigen::ArrayXd::Ones(n);
	}
	const double sigma2 = std::log(1.0 + cv * cv);
	const double sigma = std::sqrt(sigma2);
	const double mu = -0.5 * sigma2;
	std::normal_distribution<double> dist(mu, sigma);
	Eigen::ArrayXd f(n);
	for (int i = 0; i < n; i++) {
		f(i) = std::exp(dist(rng));
	}
	return f;
}
}  // namespace

std::vector<LayerPerturbation> DeviceInstance::mismatch(
    const SnnNetwork &net) const
{
	std::vector<LayerPerturbation> perts;
	for (size_t p = 0; p + 1 < net.layers.size(); p++) {
		// one stream per layer so the draw is independent of other layers
		std::mt19937_64 rng(m_seed ^ (0xD1CEB00CULL + 7919 * (p + 1)));
		const int n = net.layers[p + 1];
		LayerPerturbation lp;
		lp.tau_m = net.lif.tau_m *
		           lognormal_factors(n, m_profile.mismatch_cv, rng);
		const double span = net.lif.v_thresh - net.lif.v_rest;
		lp.v_thresh =
		    net.lif.v_rest +
		    span * lognormal_factors(n, m_profile.mismatch_cv, rng);
		perts.push_back(std::move(lp));
	}
	return perts;
}

std::vector<LayerPerturbation> DeviceInstance::trial_perturbation(
    const SnnNetwork &net, uint64_t run_index) const
{
	auto perts = mismatch(net);
	if (m_profile.trial_noise_cv <= 0.0) {
		return perts;
	}
	for (size_t p = 0; p < perts.size(); p++) {
		std::mt19937_64 rng(m_seed ^
		                    (0x7A1A1ULL + 104729 * (p + 1) +
		                     0x51ED270B * (run_index + 1)));
		const int n = int(perts[p].tau_m.size());
		perts[p].tau_m *= lognormal_factors(n, m_profile.trial_noise_cv, rng);
		const double span = net.lif.v_thresh - net.lif.v_rest;
		perts[p].v_thresh =
		    net.lif.v_rest +
		    (perts[p].v_thresh - net.lif.v_rest) *
		        lognormal_factors(n, m_profile.trial_noise_cv, rng);
	}
	return perts;
}

ClassifiedBatch run_on_device(const DeviceInstance &dev, const SnnNetwork &net,
                              const Dataset &batch,
                              const ConversionConfig &cfg, RunStats *stats,
                              uint64_t run_index,
                              std::vector<Eigen::MatrixXi> *layer_counts)
{
	const HardwareProfile &prof = dev.profile();
	int total_neurons = 0;
	for (size_t p = 1; p < net.layers.size(); p++) {
		total_neurons += net.layers[p];
	}
	if (total_neurons > prof.capacity_neurons) {
		throw CapacityError("network needs " + std::to_string(total_neurons) +
		                    " neurons, device capacity is " +
		                    std::to_string(prof.capacity_neurons));
	}
	if (cfg.weight_levels != 0 && prof.weight_levels != 0 &&
	    cfg.weight_levels != prof.weight_levels) {
		throw std::invalid_argument(
		    "conversion weight_levels conflicts with profile");
	}

	// quantize weights to the device resolution
	SnnNetwork dev_net = net;
	if (prof.weight_levels >= 2 && cfg.weight_levels == 0) {
		AnnModel tmp;
		tmp.layer_dims = net.layers;
		tmp.weights = net.weights;
		tmp.non_negative = true;
		for (const auto &w : net.weights) {
			if (w.minCoeff() < 0.0) {
				tmp.non_negative = false;
				break;
			}
		}
		ConversionConfig qc = cfg;
		qc.w_max = 0.0;
		for (const auto &w : net.weights) {
			qc.w_max = std::max(qc.w_max, w.cwiseAbs().maxCoeff());
		}
		qc.weight_levels = prof.weight_levels;
		dev_net.weights = normalize_weights(tmp, qc);
	}

	SimOptions opts;
	opts.perturbations = dev.trial_perturbation(dev_net, run_index);
	opts.membrane_noise_sigma = prof.membrane_noise_sigma;
	opts.neuron_rate_cap = prof.neuron_rate_cap;
	opts.noise_seed = dev.seed() * 0x2545F4914F6CDD1DULL + run_index;

	ClassifiedBatch result;
	const int n_classes = dev_net.layers.back();
	result.output_counts.resize(batch.size(), n_classes);
	result.predicted.resize(batch.size());
	result.tie.resize(batch.size());
	if (layer_counts) {
		layer_counts->clear();
		for (size_t p = 0; p + 1 < dev_net.layers.size(); p++) {
			layer_counts->emplace_back(
			    Eigen::MatrixXi::Zero(batch.size(), dev_net.layers[p + 1]));
		}
	}

	RunStats total;
	total.generated.assign(dev_net.layers.size(), 0);
	total.delivered.assign(dev_net.layers.size(), 0);
	total.dropped.assign(dev_net.layers.size(), 0);
	for (Eigen::Index i = 0; i < batch.size(); i++) {
		ConversionConfig per_sample = cfg;
		per_sample.encoder_seed = cfg.encoder_seed + uint64_t(i);
		SpikeTrains input = encode(batch.images.row(i), per_sample);

		SimOptions per_opts = opts;
		per_opts.noise_seed = opts.noise_seed * 0x9e3779b97f4a7c15ULL +
		                      uint64_t(i) + 1;
		if (layer_counts) {
			per_opts.record.assign(dev_net.layers.size() - 1, true);
		}
		// thin input spikes so the delivered aggregate rate fits the cap
		if (std::isfinite(prof.input_bw_cap)) {
			uint64_t n_spikes = 0;
			for (const auto &train : input) {
				n_spikes += train.size();
			}
			const double rate = double(n_spikes) * 1000.0 / cfg.t_present;
			if (rate > prof.input_bw_cap) {
				per_opts.input_keep_prob = prof.input_bw_cap / rate;
			}
		}

		SimStats sim_stats;
		SpikeRecord rec = run(dev_net, input, cfg.t_present, per_opts,
		                      &sim_stats);
		result.output_counts.row(i) = rec.output_counts().transpose();
		bool tie = false;
		result.predicted[i] = predict_from_counts(rec.output_counts(), tie);
		result.tie[i] = tie;
		if (layer_counts) {
			for (size_t p = 0; p + 1 < dev_net.layers.size(); p++) {
				(*layer_counts)[p].row(i) = rec.counts[p].transpose();
			}
		}
		total.presyn_events += sim_stats.presyn_events;
		for (size_t p = 0; p < dev_net.layers.size(); p++) {
			total.generated[p] += sim_stats.generated[p];
			total.delivered[p] += sim_stats.delivered[p];
			total.dropped[p] += sim_stats.dropped[p];
		}
	}
	total.n_samples = batch.size();
	total.wall_clock_ms = double(batch.size()) *
	                          (cfg.t_present + cfg.t_gap) / prof.speedup +
	                      prof.batch_overhead_ms;
	if (stats) {
		*stats = total;
	}
	return result;
}

double estimate_energy(const RunStats &stats, const HardwareProfile &profile)
{
	if (stats.n_samples <= 0) {
		throw std::invalid_argument("energy estimate needs >= 1 sample");
	}
	const double wall_s = stats.wall_clock_ms / 1000.0;
	switch (profile.energy.kind) {
		case EnergyModel::Kind::metered:
			return profile.energy.active_power_w * wall_s /
			       double(stats.n_samples);
		case EnergyModel::Kind::event_based:
			return (double(stats.presyn_events) *
			            profile.energy.e_per_event_j +
			        profile.energy.idle_power_w * wall_s) /
			       double(stats.n_samples);
	}
	return 0.0;
}

}  // namespace snnbench
