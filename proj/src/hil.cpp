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

#include "snnbench/hil.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace snnbench {

namespace {

/// Batched layer activations from the analytic model (no output head).
std::vector<Eigen::MatrixXd> ann_activations(const AnnModel &m,
                                             const Eigen::MatrixXd &x)
{
	std::vector<Eigen::MatrixXd> acts;
	acts.push_back(x);
	for (size_t l = 0; l < m.weights.size(); l++) {
		Eigen::MatrixXd z = acts.back() * m.weights[l].transpose();
		if (l + 1 < m.weights.size()) {
			z = z.cwiseMax(0.0);
		}
		acts.push_back(std::move(z));
	}
	return acts;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd &z)
{
	Eigen::MatrixXd p = z;
	for (Eigen::Index i = 0; i < p.rows(); i++) {
		Eigen::RowVectorXd row = p.row(i);
		row.array() -= row.maxCoeff();
		Eigen::RowVectorXd e = row.array().exp();
		p.row(i) = e / e.sum();
	}
	return p;
}

}  // namespace

HilTrace hil_retrain(AnnModel &m, const DeviceInstance &dev,
                     const Dataset &train, const LifParams &lif,
                     const ConversionConfig &cfg, const HilConfig &hil)
{
	m.validate();
	if (hil.samples_per_epoch <= 0 || hil.epochs <= 0) {
		throw std::invalid_argument("hil needs positive epochs and samples");
	}
	const Eigen::Index chunk =
	    std::min<Eigen::Index>(hil.samples_per_epoch, train.size());
	const size_t n_weights = m.weights.size();

	HilTrace trace;
	trace.rate_normalizer = hil.rate_normalizer;
	std::mt19937_64 rng(hil.seed);
	std::vector<Eigen::Index> order(train.size());
	std::iota(order.begin(), order.end(), 0);

	for (int epoch = 0; epoch < hil.epochs; epoch++) {
		for (Eigen::Index i = train.size() - 1; i > 0; i--) {
			std::swap(order[i], order[rng() % uint64_t(i + 1)]);
		}
		Dataset sub;
		sub.images.resize(chunk, train.images.cols());
		sub.labels.resize(chunk);
		sub.split = train.split;
		for (Eigen::Index i = 0; i < chunk; i++) {
			sub.images.row(i) = train.images.row(order[i]);
			sub.labels[i] = train.labels[order[i]];
		}

		SnnNetwork net = convert(m, lif, cfg);
		std::vector<Eigen::MatrixXi> counts;
		ClassifiedBatch cls = run_on_device(dev, net, sub, cfg, nullptr,
		                                    uint64_t(epoch), &counts);

		// device rates in Hz per layer
		std::vector<Eigen::MatrixXd> rates;
		for (const auto &c : counts) {
			rates.push_back(c.cast<double>() * 1000.0 / cfg.t_present);
		}

		if (trace.rate_normalizer <= 0.0) {
			// match mean hidden rate to mean analytic hidden activation
			auto acts = ann_activations(m, sub.images);
			double act_sum = 0.0, rate_sum = 0.0;
			for (size_t l = 0; l + 1 < n_weights; l++) {
				act_sum += acts[l + 1].sum();
				rate_sum += rates[l].sum();
			}
			if (act_sum <= 0.0 || rate_sum <= 0.0) {
				throw DegenerateModelError(
				    "hil calibration saw a silent network");
			}
			trace.rate_normalizer = rate_sum / act_sum;
		}

		// substituted activations, input included
		std::vector<Eigen::MatrixXd> a;
		a.push_back(sub.images);
		for (const auto &r : rates) {
			a.push_back(r / trace.rate_normalizer);
		}

		// output delta for the configured loss
		const Eigen::MatrixXd &out = a.back();
		Eigen::MatrixXd delta;
		double loss = 0.0;
		switch (m.loss) {
			case Loss::cross_entropy: {
				Eigen::MatrixXd p = softmax_rows(out);
				delta = p;
				for (Eigen::Index i = 0; i < chunk; i++) {
					delta(i, sub.labels[i]) -= 1.0;
					loss -= std::log(std::max(p(i, sub.labels[i]), 1e-12));
				}
				break;
			}
			case Loss::mse: {
				delta = out;
				for (Eigen::Index i = 0; i < chunk; i++) {
					delta(i, sub.labels[i]) -= 1.0;
				}
				loss = 0.5 * delta.squaredNorm();
				break;
			}
			case Loss::hinge_winner_runnerup: {
				delta = Eigen::MatrixXd::Zero(out.rows(), out.cols());
				for (Eigen::Index i = 0; i < chunk; i++) {
					const int y = sub.labels[i];
					int rival = y == 0 ? 1 : 0;
					for (int c = 0; c < out.cols(); c++) {
						if (c != y && out(i, c) > out(i, rival)) {
							rival = c;
						}
					}
					const double viol =
					    hil.hinge_margin - (out(i, y) - out(i, rival));
					if (viol > 0.0) {
						delta(i, y) -= 1.0;
						delta(i, rival) += 1.0;
						loss += viol;
					}
				}
				break;
			}
		}
		loss /= double(chunk);

		// backprop through the substituted rates
		std::vector<Eigen::MatrixXd> grads(n_weights);
		for (size_t l = n_weights; l-- > 0;) {
			grads[l] = delta.transpose() * a[l] / double(chunk);
			if (l > 0) {
				Eigen::MatrixXd mask =
				    (a[l].array() > 0.0).cast<double>();
				delta = (delta * m.weights[l]).cwiseProduct(mask);
			}
		}
		const size_t first = hil.output_only ? n_weights - 1 : 0;
		for (size_t l = first; l < n_weights; l++) {
			m.weights[l] -= hil.learning_rate * grads[l];
			if (m.non_negative) {
				m.weights[l] = m.weights[l].cwiseMax(0.0);
			}
		}

		trace.epoch_loss.push_back(loss);
		trace.epoch_accuracy.push_back(cls.accuracy(sub.labels));
	}
	return trace;
}

void export_hil_trace_csv(const HilTrace &trace, const std::string &path)
{
	std::ofstream out(path);
	if (!out) {
		throw std::runtime_error("cannot write " + path);
	}
	out << "epoch,loss,accuracy\n";
	for (size_t e = 0; e < trace.epoch_loss.size(); e++) {
		out << e << "," << trace.epoch_loss[e] << ","
		    << trace.epoch_accuracy[e] << "\n";
	}
}

}  // namespace snnbench
