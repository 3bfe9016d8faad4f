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

#include "snnbench/lif.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

namespace snnbench {

void LifParams::validate() const
{
	if (tau_m <= 0 || tau_syn_e <= 0 || tau_syn_i <= 0 || cm <= 0) {
		throw std::invalid_argument("time constants and cm must be positive");
	}
	if (v_thresh <= v_reset) {
		throw std::invalid_argument("v_thresh must exceed v_reset");
	}
	if (e_rev_e <= v_thresh) {
		throw std::invalid_argument("e_rev_e must exceed v_thresh");
	}
	if (e_rev_i > v_rest) {
		throw std::invalid_argument("e_rev_i must not exceed v_rest");
	}
	if (t_refrac < 0) {
		throw std::invalid_argument("t_refrac must be non-negative");
	}
}

void SnnNetwork::validate() const
{
	if (dt <= 0) {
		throw std::invalid_argument("dt must be positive");
	}
	lif.validate();
	if (weights.size() != layers.size() - 1) {
		throw std::invalid_argument("projection count does not chain");
	}
	for (size_t p = 0; p < weights.size(); p++) {
		if (weights[p].rows() != layers[p + 1] ||
		    weights[p].cols() != layers[p]) {
			throw std::invalid_argument("projection " + std::to_string(p) +
			                            " has inconsistent shape");
		}
	}
}

LifLayerState::LifLayerState(int n, const LifParams &params, double dt)
    : m_params(params), m_dt(dt)
{
	params.validate();
	m_refrac_steps = int(std::ceil(params.t_refrac / dt));
	m_tau_m = Eigen::ArrayXd::Constant(n, params.tau_m);
	m_v_thresh = Eigen::ArrayXd::Constant(n, params.v_thresh);
	m_decay_e = std::exp(-dt / params.tau_syn_e);
	m_decay_i = std::exp(-dt / params.tau_syn_i);
	m_v.resize(n);
	m_ge.resize(n);
	m_gi.resize(n);
	m_refrac.resize(n);
	reset();
}

void LifLayerState::set_perturbation(const LayerPerturbation &p)
{
	if (p.tau_m.size() > 0) {
		if (p.tau_m.size() != m_tau_m.size()) {
			throw std::invalid_argument("perturbation size mismatch");
		}
		m_tau_m = p.tau_m;
	}
	if (p.v_thresh.size() > 0) {
		if (p.v_thresh.size() != m_v_thresh.size()) {
			throw std::invalid_argument("perturbation size mismatch");
		}
		m_v_thresh = p.v_thresh;
	}
}

void LifLayerState::reset()
{
	m_v.setConstant(m_params.v_rest);
	m_ge.setZero();
	m_gi.setZero();
	m_refrac.setZero();
}

std::vector<int> LifLayerState::step(const Eigen::ArrayXd &exc,
                                     const Eigen::ArrayXd &inh,
                                     double noise_sigma,
                                     std::mt19937_64 *noise_rng)
{
	m_ge = m_ge * m_decay_e + exc;
	m_gi = m_gi * m_decay_i + inh;

	// leak conductance per neuron; exponential Euler on V with g fixed
	const Eigen::ArrayXd g_leak = m_params.cm / m_tau_m;
	const Eigen::ArrayXd g_tot = g_leak + m_ge + m_gi;
	const Eigen::ArrayXd v_inf = (g_leak * m_params.v_rest +
	                              m_ge * m_params.e_rev_e +
	                              m_gi * m_params.e_rev_i) /
	                             g_tot;
	m_v = v_inf + (m_v - v_inf) * (-g_tot * m_dt / m_params.cm).exp();

	if (noise_sigma > 0.0 && noise_rng) {
		std::normal_distribution<double> dist(0.0,
		                                      noise_sigma * std::sqrt(m_dt));
		for (Eigen::Index i = 0; i < m_v.size(); i++) {
			m_v(i) += dist(*noise_rng);
		}
	}

	std::vector<int> fired;
	for (Eigen::Index i = 0; i < m_v.size(); i++) {
		if (m_refrac(i) > 0) {
			m_v(i) = m_params.v_reset;
			m_refrac(i)--;
			continue;
		}
		if (!std::isfinite(m_v(i))) {
			throw NumericalError("non-finite membrane potential at neuron " +
			                     std::to_string(i));
		}
		if (m_v(i) >= m_v_thresh(i)) {
			fired.push_back(int(i));
			m_v(i) = m_params.v_reset;
			m_refrac(i) = m_refrac_steps;
		}
	}
	return fired;
}

SpikeRecord run(const SnnNetwork &net, const SpikeTrains &input,
                double duration, const SimOptions &opts, SimStats *stats)
{
	net.validate();
	if (int(input.size()) != net.layers.front()) {
		throw std::invalid_argument("input train count does not match layer 0");
	}
	const int n_steps = int(std::llround(duration / net.dt));
	const size_t n_proj = net.weights.size();

	std::vector<LifLayerState> states;
	for (size_t p = 0; p < n_proj; p++) {
		states.emplace_back(net.layers[p + 1], net.lif, net.dt);
		if (p < opts.perturbations.size()) {
			states[p].set_perturbation(opts.perturbations[p]);
		}
	}

	// split each projection into excitatory/inhibitory channels
	std::vector<Eigen::MatrixXd> w_exc(n_proj), w_inh(n_proj);
	for (size_t p = 0; p < n_proj; p++) {
		w_exc[p] = net.weights[p].cwiseMax(0.0);
		w_inh[p] = (-net.weights[p]).cwiseMax(0.0);
	}

	std::mt19937_64 noise_rng(opts.noise_seed);

	// input spikes bucketed per step, with optional bandwidth thinning
	std::vector<std::vector<int>> input_at(n_steps);
	uint64_t in_generated = 0, in_delivered = 0;
	for (size_t i = 0; i < input.size(); i++) {
		for (double t : input[i]) {
			const int s = int(t / net.dt);
			if (s < 0 || s >= n_steps) {
				continue;
			}
			in_generated++;
			if (opts.input_keep_prob < 1.0) {
				std::uniform_real_distribution<double> u(0.0, 1.0);
				if (u(noise_rng) >= opts.input_keep_prob) {
					continue;
				}
			}
			in_delivered++;
			input_at[s].push_back(int(i));
		}
	}

	SpikeRecord rec;
	rec.recorded.resize(n_proj, false);
	for (size_t p = 0; p < n_proj; p++) {
		rec.recorded[p] = p < opts.record.size() ? bool(opts.record[p])
		                                         : (p + 1 == n_proj);
		rec.counts.push_back(Eigen::VectorXi::Zero(net.layers[p + 1]));
		rec.times.emplace_back(rec.recorded[p] ? net.layers[p + 1] : 0);
	}

	// per-neuron spike budget under the output-rate cap
	std::vector<std::vector<int>> emitted(n_proj);
	const bool capped =
	    std::isfinite(opts.neuron_rate_cap);
	const int budget =
	    capped ? int(opts.neuron_rate_cap * duration / 1000.0) : 0;
	for (size_t p = 0; p < n_proj; p++) {
		emitted[p].assign(net.layers[p + 1], 0);
	}

	SimStats local;
	local.generated.assign(n_proj + 1, 0);
	local.delivered.assign(n_proj + 1, 0);
	local.dropped.assign(n_proj + 1, 0);
	local.generated[0] = in_generated;
	local.delivered[0] = in_delivered;
	local.dropped[0] = in_generated - in_delivered;

	for (int s = 0; s < n_steps; s++) {
		// spikes delivered to projection p in this step
		std::vector<int> pre = input_at[s];
		for (size_t p = 0; p < n_proj; p++) {
			Eigen::ArrayXd exc = Eigen::ArrayXd::Zero(net.layers[p + 1]);
			Eigen::ArrayXd inh = Eigen::ArrayXd::Zero(net.layers[p + 1]);
			for (int j : pre) {
				exc += w_exc[p].col(j).array();
				inh += w_inh[p].col(j).array();
			}
			local.presyn_events += uint64_t(pre.size()) *
			                       uint64_t(net.layers[p + 1]);
			std::vector<int> fired;
			try {
				fired = states[p].step(exc, inh, opts.membrane_noise_sigma,
				                       &noise_rng);
			}
			catch (const NumericalError &e) {
				throw NumericalError(std::string(e.what()) + " in layer " +
				                     std::to_string(p + 1));
			}
			local.generated[p + 1] += fired.size();
			pre.clear();
			for (int i : fired) {
				if (capped && emitted[p][i] >= budget) {
					local.dropped[p + 1]++;  // silent loss above the cap
					continue;
				}
				emitted[p][i]++;
				local.delivered[p + 1]++;
				pre.push_back(i);
				rec.counts[p](i)++;
				if (rec.recorded[p]) {
					rec.times[p][i].push_back((s + 1) * net.dt);
				}
			}
		}
	}
	if (stats) {
		*stats = local;
	}
	return rec;
}

void export_spikes_csv(const SpikeRecord &rec, const std::string &path)
{
	std::ofstream out(path);
	out << "layer,neuron_id,time_ms\n";
	for (size_t p = 0; p < rec.times.size(); p++) {
		for (size_t i = 0; i < rec.times[p].size(); i++) {
			for (double t : rec.times[p][i]) {
				out << p + 1 << "," << i << "," << t << "\n";
			}
		}
	}
}

void export_spike_summary_json(const SpikeRecord &rec, const std::string &path)
{
	nlohmann::json j;
	for (size_t p = 0; p < rec.counts.size(); p++) {
		j["layer_counts"].push_back(rec.counts[p].sum());
	}
	std::ofstream out(path);
	out << j.dump(2) << "\n";
}

}  // namespace snnbench
