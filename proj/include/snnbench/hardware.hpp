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

#pragma once

#include <json.hpp>
#include <optional>

#include "snnbench/converter.hpp"

namespace snnbench {

struct CapacityError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

struct EnergyModel {
	enum class Kind { metered, event_based };
	Kind kind = Kind::metered;
	double active_power_w = 0.0;   // metered
	double e_per_event_j = 0.0;    // event_based
	double idle_power_w = 0.0;     // event_based
};

/**
 * Declarative device model; every constant is a calibration input, not a
 * measurement claim.
 */
struct HardwareProfile {
	std::string name = "ideal";
	int weight_levels = 0;             // 0 = full resolution
	double mismatch_cv = 0.0;          // lognormal CV on tau_m, v_thresh
	double trial_noise_cv = 0.0;       // per-run re-jitter of the mismatch
	double membrane_noise_sigma = 0.0; // mV per sqrt(ms)
	double input_bw_cap =
	    std::numeric_limits<double>::infinity();  // Hz aggregate
	double neuron_rate_cap =
	    std::numeric_limits<double>::infinity();  // Hz per neuron
	double speedup = 1.0;
	int capacity_neurons = std::numeric_limits<int>::max();
	int max_instances = std::numeric_limits<int>::max();
	double batch_overhead_ms = 0.0;
	EnergyModel energy;

	bool is_ideal() const;
	void validate() const;
};

HardwareProfile profile_from_json(const nlohmann::json &j);
nlohmann::json profile_to_json(const HardwareProfile &p);

/// Resolve `<name|path>`: a file path wins, otherwise `<dir>/<name>.json`.
HardwareProfile load_profile(const std::string &name_or_path,
                             const std::string &profile_dir = "data/profiles");

/**
 * A concrete device: frozen per-neuron mismatch drawn from the profile
 * seed. Factors materialize lazily per network shape and stay fixed
 * across runs; trial noise re-draws per run.
 */
class DeviceInstance {
public:
	DeviceInstance(HardwareProfile profile, uint64_t seed);

	const HardwareProfile &profile() const { return m_profile; }
	uint64_t seed() const { return m_seed; }

	/// Frozen mismatch perturbations for a network shape (deterministic
	/// in the instance seed).
	std::vector<LayerPerturbation> mismatch(const SnnNetwork &net) const;

	/// Mismatch with a fresh multiplicative trial-noise re-jitter.
	std::vector<LayerPerturbation> trial_perturbation(const SnnNetwork &net,
	                                                  uint64_t run_index) const;

private:
	HardwareProfile m_profile;
	uint64_t m_seed;
};

struct RunStats {
	double wall_clock_ms = 0.0;  // modeled platform time
	uint64_t presyn_events = 0;
	std::vector<uint64_t> generated;
	std::vector<uint64_t> delivered;
	std::vector<uint64_t> dropped;
	Eigen::Index n_samples = 0;
};

DeviceInstance instantiate(const HardwareProfile &profile, uint64_t seed);

/**
 * Classify a batch under the device's imperfections: weight
 * quantization, frozen mismatch + per-run trial noise, membrane noise,
 * bandwidth-limited input thinning and per-neuron output caps.
 */
ClassifiedBatch run_on_device(const DeviceInstance &dev, const SnnNetwork &net,
                              const Dataset &batch,
                              const ConversionConfig &cfg, RunStats *stats,
                              uint64_t run_index = 0,
                              std::vector<Eigen::MatrixXi> *layer_counts =
                                  nullptr);

/// Joules per inference from the profile's energy model.
double estimate_energy(const RunStats &stats, const HardwareProfile &profile);

}  // namespace snnbench
