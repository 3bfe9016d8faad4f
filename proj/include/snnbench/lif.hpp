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

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace snnbench {

struct NumericalError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

/**
 * Conductance-based LIF neuron parameters. Units: nF, ms, mV, uS.
 */
struct LifParams {
	double cm = 0.2;
	double tau_m = 20.0;
	double tau_syn_e = 5.0;
	double tau_syn_i = 5.0;
	double v_rest = -65.0;
	double v_reset = -65.0;
	double v_thresh = -50.0;
	double e_rev_e = 0.0;
	double e_rev_i = -90.0;
	double t_refrac = 1.0;

	void validate() const;
};

/**
 * Layered spiking network. weights[p] connects layer p to layer p+1;
 * the sign of an entry selects the excitatory (w > 0) or inhibitory
 * (w < 0) channel of the target, |w| is the conductance step in uS.
 */
struct SnnNetwork {
	std::vector<int> layers;
	std::vector<Eigen::MatrixXd> weights;
	LifParams lif;
	double dt = 1.0;

	void validate() const;
};

/// Spike trains per neuron, times in ms.
using SpikeTrains = std::vector<std::vector<double>>;

struct SpikeRecord {
	// per non-input layer: spike times per neuron (only for recorded
	// layers; counts are always kept)
	std::vector<SpikeTrains> times;
	std::vector<Eigen::VectorXi> counts;  // per non-input layer, per neuron
	std::vector<bool> recorded;

	Eigen::VectorXi output_counts() const { return counts.back(); }
};

/// Per-neuron overrides of tau_m / v_thresh for one layer (device
/// mismatch); empty arrays mean the nominal value.
struct LayerPerturbation {
	Eigen::ArrayXd tau_m;
	Eigen::ArrayXd v_thresh;
};

/**
 * Extra knobs used by the hardware emulator. The defaults reproduce the
 * ideal simulator exactly.
 */
struct SimOptions {
	std::vector<bool> record;  // per non-input layer; empty = record output only
	std::vector<LayerPerturbation> perturbations;  // per non-input layer
	double membrane_noise_sigma = 0.0;  // mV per sqrt(ms)
	double input_keep_prob = 1.0;       // uniform thinning of input spikes
	double neuron_rate_cap =
	    std::numeric_limits<double>::infinity();  // Hz, per neuron
	uint64_t noise_seed = 0;
};

struct SimStats {
	uint64_t presyn_events = 0;  // delivered spike * fan-out
	std::vector<uint64_t> generated;  // spikes per layer (input first)
	std::vector<uint64_t> delivered;
	std::vector<uint64_t> dropped;
};

/**
 * Mutable state of one layer; step() advances it by one dt with
 * exponential-Euler updates (conductances first, then the membrane with
 * the conductances held fixed).
 */
class LifLayerState {
public:
	LifLayerState(int n, const LifParams &params, double dt);

	void set_perturbation(const LayerPerturbation &p);
	void reset();

	/// One timestep; `exc`/`inh` are conductance increments (uS) per
	/// neuron, returns indices of neurons that fired.
	std::vector<int> step(const Eigen::ArrayXd &exc, const Eigen::ArrayXd &inh,
	                      double noise_sigma = 0.0,
	                      std::mt19937_64 *noise_rng = nullptr);

	const Eigen::ArrayXd &voltage() const { return m_v; }
	const Eigen::ArrayXd &g_exc() const { return m_ge; }
	const Eigen::ArrayXd &g_inh() const { return m_gi; }
	int size() const { return int(m_v.size()); }

private:
	LifParams m_params;
	double m_dt;
	int m_refrac_steps;
	Eigen::ArrayXd m_tau_m;     // per neuron (mismatch)
	Eigen::ArrayXd m_v_thresh;  // per neuron
	Eigen::ArrayXd m_v, m_ge, m_gi;
	Eigen::ArrayXi m_refrac;
	double m_decay_e, m_decay_i;
};

/**
 * Run a layered network for `duration` ms on the given input spike
 * trains. State starts from rest.
 */
SpikeRecord run(const SnnNetwork &net, const SpikeTrains &input,
                double duration, const SimOptions &opts = {},
                SimStats *stats = nullptr);

void export_spikes_csv(const SpikeRecord &rec, const std::string &path);
void export_spike_summary_json(const SpikeRecord &rec,
                               const std::string &path);

}  // namespace snnbench
