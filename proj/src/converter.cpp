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

#include "snnbench/converter.hpp"

#include <cmath>
#include <random>

namespace snnbench {

void ConversionConfig::validate() const
{
	if (w_max <= 0 || f_max <= 0 || t_present <= 0) {
		throw std::invalid_argument(
		    "w_max, f_max and t_present must be positive");
	}
	if (weight_levels == 1 || weight_levels < 0) {
		throw std::invalid_argument("weight_levels must be 0 or >= 2");
	}
}

double ClassifiedBatch::accuracy(const std::vector<int> &labels) const
{
	if (labels.size() != predicted.size()) {
		throw std::invalid_argument("label count mismatch");
	}
	size_t ok = 0;
	for (size_t i = 0; i < labels.size(); i++) {
		if (predicted[i] == labels[i]) {
			ok++;
		}
	}
	return labels.empty() ? 0.0 : 100.0 * double(ok) / double(labels.size());
}

namespace {
double quantize_level(double w, double w_max, int levels, bool non_negative)
{
	// equally spaced levels in [-w_max, w_max] ([0, w_max] when
	// non-negative); nearest level, ties away from zero
	const double step =
	    non_negative ? w_max / (levels - 1) : 2.0 * w_max / (levels - 1);
	const double mag = std::abs(w);
	double k = std::floor(mag / step + 0.5);
	double q = k * step;
	if (q > w_max) {
		q = w_max;
	}
	return w < 0 ? -q : q;
}
}  // namespace

std::vector<Eigen::MatrixXd> normalize_weights(const AnnModel &m,
                                               const ConversionConfig &cfg)
{
	cfg.validate();
	double max_abs = 0.0;
	for (const auto &w : m.weights) {
		max_abs = std::max(max_abs, w.cwiseAbs().maxCoeff());
	}
	if (max_abs == 0.0) {
		throw DegenerateModelError("all model weights are zero");
	}
	std::vector<Eigen::MatrixXd> out;
	for (const auto &w : m.weights) {
		Eigen::MatrixXd scaled = w * (cfg.w_max / max_abs);
		if (cfg.weight_levels >= 2) {
			for (Eigen::Index i = 0; i < scaled.rows(); i++) {
				for (Eigen::Index j = 0; j < scaled.cols(); j++) {
					scaled(i, j) = quantize_level(scaled(i, j), cfg.w_max,
					                              cfg.weight_levels,
					                              m.non_negative);
				}
			}
		}
		out.push_back(std::move(scaled));
	}
	return out;
}

SpikeTrains encode(const Eigen::VectorXd &x, const ConversionConfig &cfg)
{
	cfg.validate();
	SpikeTrains trains(x.size());
	std::mt19937_64 rng(cfg.encoder_seed);
	for (Eigen::Index i = 0; i < x.size(); i++) {
		const double p = x(i);
		if (p < 0.0 || p > 1.0) {
			throw std::invalid_argument("pixel value outside [0,1]");
		}
		const double rate = p * cfg.f_max;  // Hz
		if (rate <= 0.0) {
			continue;
		}
		if (cfg.poisson) {
			std::exponential_distribution<double> isi(rate / 1000.0);
			double t = isi(rng);
			while (t < cfg.t_present) {
				trains[i].push_back(t);
				t += isi(rng);
			}
		}
		else {
			// evenly spaced, phase 0; count = floor(rate * t_present / 1000)
			const double period = 1000.0 / rate;
			const int count = int(rate * cfg.t_present / 1000.0 + 1e-9);
			for (int k = 1; k <= count; k++) {
				double t = k * period;
				if (t >= cfg.t_present) {
					t = cfg.t_present - 1e-6;  // keep inside the window
				}
				trains[i].push_back(t);
			}
		}
	}
	return trains;
}

Eigen::VectorXd decode(const Eigen::VectorXi &counts,
                       const ConversionConfig &cfg)
{
	cfg.validate();
	Eigen::VectorXd out(counts.size());
	const double denom = cfg.f_max * cfg.t_present / 1000.0;
	for (Eigen::Index i = 0; i < counts.size(); i++) {
		out(i) = std::clamp(double(counts(i)) / denom, 0.0, 1.0);
	}
	return out;
}

SnnNetwork convert(const AnnModel &m, const LifParams &lif,
                   const ConversionConfig &cfg)
{
	m.validate();
	SnnNetwork net;
	net.layers = m.layer_dims;
	net.weights = normalize_weights(m, cfg);
	net.lif = lif;
	net.dt = 1.0;
	net.validate();
	return net;
}

int predict_from_counts(const Eigen::VectorXi &counts, bool &tie)
{
	int best = 0;
	for (Eigen::Index c = 1; c < counts.size(); c++) {
		if (counts(c) > counts(best)) {
			best = int(c);
		}
	}
	tie = false;
	for (Eigen::Index c = 0; c < counts.size(); c++) {
		if (int(c) != best && counts(c) == counts(best)) {
			tie = true;
			break;
		}
	}
	return best;
}

ClassifiedBatch classify(const SnnNetwork &net, const Dataset &batch,
                         const ConversionConfig &cfg, const SimOptions &opts,
                         SimStats *accumulated,
                         std::vector<Eigen::MatrixXi> *layer_counts)
{
	cfg.validate();
	if (batch.input_dim() != net.layers.front()) {
		throw ShapeError("dataset input_dim does not match the network");
	}
	const int n_classes = net.layers.back();
	ClassifiedBatch result;
	result.output_counts.resize(batch.size(), n_classes);
	result.predicted.resize(batch.size());
	result.tie.resize(batch.size());

	if (layer_counts) {
		layer_counts->clear();
		for (size_t p = 0; p + 1 < net.layers.size(); p++) {
			layer_counts->emplace_back(
			    Eigen::MatrixXi::Zero(batch.size(), net.layers[p + 1]));
		}
	}

	SimStats total;
	total.generated.assign(net.layers.size(), 0);
	total.delivered.assign(net.layers.size(), 0);
	total.dropped.assign(net.layers.size(), 0);

	// state reset between samples; t_gap only adds modeled silence
	const double duration = cfg.t_present;
	for (Eigen::Index i = 0; i < batch.size(); i++) {
		ConversionConfig per_sample = cfg;
		per_sample.encoder_seed = cfg.encoder_seed + uint64_t(i);
		SpikeTrains input = encode(batch.images.row(i), per_sample);
		SimOptions per_opts = opts;
		per_opts.noise_seed = opts.noise_seed * 0x9e3779b97f4a7c15ULL +
		                      uint64_t(i) + 1;
		if (layer_counts) {
			per_opts.record.assign(net.layers.size() - 1, true);
		}
		SimStats stats;
		SpikeRecord rec = run(net, input, duration, per_opts, &stats);
		result.output_counts.row(i) = rec.output_counts().transpose();
		bool tie = false;
		result.predicted[i] = predict_from_counts(rec.output_counts(), tie);
		result.tie[i] = tie;
		if (layer_counts) {
			for (size_t p = 0; p + 1 < net.layers.size(); p++) {
				(*layer_counts)[p].row(i) = rec.counts[p].transpose();
			}
		}
		total.presyn_events += stats.presyn_events;
		for (size_t p = 0; p < net.layers.size(); p++) {
			total.generated[p] += stats.generated[p];
			total.delivered[p] += stats.delivered[p];
			total.dropped[p] += stats.dropped[p];
		}
	}
	if (accumulated) {
		*accumulated = total;
	}
	return result;
}

}  // namespace snnbench
