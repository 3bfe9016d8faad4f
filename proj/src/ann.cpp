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

#include "snnbench/ann.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

namespace snnbench {

size_t AnnModel::parameter_count() const
{
	size_t n = 0;
	for (const auto &w : weights) {
		n += size_t(w.size());
	}
	return n;
}

void AnnModel::validate() const
{
	if (layer_dims.size() < 2) {
		throw ShapeError("model needs at least input and output layers");
	}
	if (weights.size() != layer_dims.size() - 1) {
		throw ShapeError("weight matrix count does not chain with layer_dims");
	}
	for (size_t l = 0; l < weights.size(); l++) {
		if (weights[l].rows() != layer_dims[l + 1] ||
		    weights[l].cols() != layer_dims[l]) {
			throw ShapeError("weight matrix " + std::to_string(l) +
			                 " has inconsistent shape");
		}
	}
}

AnnModel make_mlp(const std::vector<int> &layer_dims, OutputHead head,
                  Loss loss, uint64_t seed, bool non_negative)
{
	AnnModel m;
	m.layer_dims = layer_dims;
	m.output_head = head;
	m.loss = loss;
	m.non_negative = non_negative;
	std::mt19937_64 rng(seed);
	for (size_t l = 0; l + 1 < layer_dims.size(); l++) {
		const double lim =
		    std::sqrt(6.0 / (layer_dims[l] + layer_dims[l + 1]));
		std::uniform_real_distribution<double> dist(-lim, lim);
		Eigen::MatrixXd w(layer_dims[l + 1], layer_dims[l]);
		for (Eigen::Index i = 0; i < w.rows(); i++) {
			for (Eigen::Index j = 0; j < w.cols(); j++) {
				w(i, j) = dist(rng);
			}
		}
		if (non_negative) {
			w = w.cwiseAbs();
		}
		m.weights.push_back(std::move(w));
	}
	m.validate();
	return m;
}

namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd &z)
{
	Eigen::MatrixXd p = z;
	for (Eigen::Index i = 0; i < p.rows(); i++) {
		const double mx = p.row(i).maxCoeff();
		p.row(i) = (p.row(i).array() - mx).exp();
		p.row(i) /= p.row(i).sum();
	}
	return p;
}

/// Hidden activations per layer (one sample per row), last entry are the
/// pre-head scores.
std::vector<Eigen::MatrixXd> forward_batch(const AnnModel &m,
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

Eigen::MatrixXd apply_head(const AnnModel &m, const Eigen::MatrixXd &scores)
{
	switch (m.output_head) {
		case OutputHead::relu:
			return scores.cwiseMax(0.0);
		case OutputHead::softmax:
			return softmax_rows(scores);
	}
	return scores;
}

/// d(loss)/d(scores), averaged over the batch.
Eigen::MatrixXd output_delta(const AnnModel &m, const Eigen::MatrixXd &scores,
                             const std::vector<int> &labels,
                             double hinge_margin)
{
	const Eigen::Index n = scores.rows();
	Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, scores.cols());
	switch (m.loss) {
		case Loss::cross_entropy: {
			// softmax head assumed; the fused form is used either way
			Eigen::MatrixXd p = softmax_rows(scores);
			delta = p;
			for (Eigen::Index i = 0; i < n; i++) {
				delta(i, labels[i]) -= 1.0;
			}
			break;
		}
		case Loss::mse: {
			Eigen::MatrixXd out = apply_head(m, scores);
			for (Eigen::Index i = 0; i < n; i++) {
				Eigen::RowVectorXd target =
				    Eigen::RowVectorXd::Zero(scores.cols());
				target(labels[i]) = 1.0;
				Eigen::RowVectorXd d =
				    2.0 * (out.row(i) - target) / scores.cols();
				if (m.output_head == OutputHead::relu) {
					d = d.cwiseProduct(
					    (scores.row(i).array() > 0.0).cast<double>().matrix());
				}
				delta.row(i) = d;
			}
			break;
		}
		case Loss::hinge_winner_runnerup: {
			// gradient restricted to the true class and the strongest
			// wrong class
			for (Eigen::Index i = 0; i < n; i++) {
				const int y = labels[i];
				int runner = -1;
				double best = -std::numeric_limits<double>::infinity();
				for (Eigen::Index c = 0; c < scores.cols(); c++) {
					if (int(c) != y && scores(i, c) > best) {
						best = scores(i, c);
						runner = int(c);
					}
				}
				if (scores(i, y) - best < hinge_margin) {
					delta(i, y) = -1.0;
					delta(i, runner) = 1.0;
				}
			}
			break;
		}
	}
	return delta / double(n);
}

}  // namespace

std::vector<Eigen::VectorXd> forward(const AnnModel &m,
                                     const Eigen::VectorXd &x)
{
	if (x.size() != m.input_dim()) {
		throw ShapeError("input length " + std::to_string(x.size()) +
		                 " does not match input_dim " +
		                 std::to_string(m.input_dim()));
	}
	auto acts = forward_batch(m, x.transpose());
	std::vector<Eigen::VectorXd> out;
	for (size_t l = 0; l < acts.size(); l++) {
		if (l + 1 == acts.size()) {
			out.push_back(apply_head(m, acts[l]).row(0));
		}
		else {
			out.push_back(acts[l].row(0));
		}
	}
	return out;
}

Eigen::VectorXd forward_scores(const AnnModel &m, const Eigen::VectorXd &x)
{
	if (x.size() != m.input_dim()) {
		throw ShapeError("input dimension mismatch");
	}
	return forward_batch(m, x.transpose()).back().row(0);
}

Eigen::MatrixXd forward_scores(const AnnModel &m, const Eigen::MatrixXd &x)
{
	if (x.cols() != m.input_dim()) {
		throw ShapeError("input dimension mismatch");
	}
	return forward_batch(m, x).back();
}

std::vector<Eigen::MatrixXd> gradient(const AnnModel &m,
                                      const Eigen::MatrixXd &x,
                                      const std::vector<int> &labels,
                                      double hinge_margin)
{
	if (x.rows() == 0) {
		throw std::invalid_argument("gradient over an empty batch");
	}
	auto acts = forward_batch(m, x);
	Eigen::MatrixXd delta = output_delta(m, acts.back(), labels, hinge_margin);
	std::vector<Eigen::MatrixXd> grads(m.weights.size());
	for (int l = int(m.weights.size()) - 1; l >= 0; l--) {
		grads[l] = delta.transpose() * acts[l];
		if (l > 0) {
			delta = (delta * m.weights[l])
			            .cwiseProduct((acts[l].array() > 0.0)
			                              .cast<double>()
			                              .matrix());
		}
	}
	return grads;
}

double batch_loss(const AnnModel &m, const Eigen::MatrixXd &x,
                  const std::vector<int> &labels, double hinge_margin)
{
	auto scores = forward_batch(m, x).back();
	const Eigen::Index n = scores.rows();
	double total = 0.0;
	switch (m.loss) {
		case Loss::cross_entropy: {
			Eigen::MatrixXd p = softmax_rows(scores);
			for (Eigen::Index i = 0; i < n; i++) {
				total -= std::log(std::max(p(i, labels[i]), 1e-300));
			}
			break;
		}
		case Loss::mse: {
			Eigen::MatrixXd out = apply_head(m, scores);
			for (Eigen::Index i = 0; i < n; i++) {
				Eigen::RowVectorXd target =
				    Eigen::RowVectorXd::Zero(scores.cols());
				target(labels[i]) = 1.0;
				total += (out.row(i) - target).squaredNorm() / scores.cols();
			}
			break;
		}
		case Loss::hinge_winner_runnerup: {
			for (Eigen::Index i = 0; i < n; i++) {
				const int y = labels[i];
				double best = -std::numeric_limits<double>::infinity();
				for (Eigen::Index c = 0; c < scores.cols(); c++) {
					if (int(c) != y) {
						best = std::max(best, scores(i, c));
					}
				}
				total += std::max(0.0, hinge_margin - (scores(i, y) - best));
			}
			break;
		}
	}
	return total / double(n);
}

TrainTrace train(AnnModel &m, const Dataset &data, const TrainConfig &cfg)
{
	if (data.input_dim() != m.input_dim()) {
		throw ShapeError("dataset input_dim does not match the model");
	}
	if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1) {
		throw std::invalid_argument("bad training configuration");
	}
	TrainTrace trace;
	std::mt19937_64 rng(cfg.rng_seed);
	const Eigen::Index n = data.size();
	std::vector<Eigen::Index> order(n);
	for (Eigen::Index i = 0; i < n; i++) {
		order[i] = i;
	}
	for (int epoch = 0; epoch < cfg.epochs; epoch++) {
		// explicit Fisher-Yates so the permutation is pinned to the seed
		for (Eigen::Index i = n - 1; i > 0; i--) {
			const Eigen::Index j = Eigen::Index(rng() % uint64_t(i + 1));
			std::swap(order[i], order[j]);
		}
		double epoch_loss = 0.0;
		int n_batches = 0;
		for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
			const Eigen::Index b =
			    std::min<Eigen::Index>(cfg.batch_size, n - start);
			Eigen::MatrixXd x(b, data.input_dim());
			std::vector<int> y(b);
			for (Eigen::Index i = 0; i < b; i++) {
				x.row(i) = data.images.row(order[start + i]);
				y[i] = data.labels[order[start + i]];
			}
			auto grads = gradient(m, x, y, cfg.hinge_margin);
			const double loss = batch_loss(m, x, y, cfg.hinge_margin);
			// log-sum-exp keeps the loss finite even for absurd
			// weights, so blow-up shows as magnitude, not NaN
			if (!std::isfinite(loss) || loss > 1e12) {
				throw DivergenceError(
				    "diverged loss at epoch " + std::to_string(epoch) +
				    ", batch " + std::to_string(n_batches));
			}
			epoch_loss += loss;
			n_batches++;
			for (size_t l = 0; l < m.weights.size(); l++) {
				m.weights[l] -=
				    cfg.learning_rate * (grads[l] + cfg.l2 * m.weights[l]);
				if (m.non_negative) {
					m.weights[l] = m.weights[l].cwiseMax(0.0);
				}
				// an exploded step can leave the loss finite (dead
				// ReLUs) while the weights are unusable
				const double peak = m.weights[l].cwiseAbs().maxCoeff();
				if (!std::isfinite(peak) || peak > 1e6) {
					throw DivergenceError(
					    "diverged weights at epoch " +
					    std::to_string(epoch) + ", batch " +
					    std::to_string(n_batches) + ", layer " +
					    std::to_string(l));
				}
			}
		}
		trace.epoch_loss.push_back(n_batches ? epoch_loss / n_batches : 0.0);
	}
	return trace;
}

double accuracy(const AnnModel &m, const Dataset &data)
{
	Eigen::MatrixXd scores = forward_scores(m, data.images);
	Eigen::Index correct = 0;
	for (Eigen::Index i = 0; i < scores.rows(); i++) {
		Eigen::Index pred;
		scores.row(i).maxCoeff(&pred);
		if (int(pred) == data.labels[i]) {
			correct++;
		}
	}
	return 100.0 * double(correct) / double(scores.rows());
}

void save_model(const AnnModel &m, const std::string &path)
{
	nlohmann::json header;
	header["layer_dims"] = m.layer_dims;
	header["output_head"] =
	    m.output_head == OutputHead::softmax ? "softmax" : "relu";
	header["loss"] = m.loss == Loss::cross_entropy ? "cross_entropy"
	                 : m.loss == Loss::mse         ? "mse"
	                                              : "hinge_winner_runnerup";
	header["non_negative"] = m.non_negative;
	const std::string h = header.dump();
	std::ofstream out(path, std::ios::binary);
	const uint32_t hlen = uint32_t(h.size());
	out.write(reinterpret_cast<const char *>(&hlen), 4);
	out.write(h.data(), h.size());
	for (const auto &w : m.weights) {
		// row-major little-endian float32
		for (Eigen::Index i = 0; i < w.rows(); i++) {
			for (Eigen::Index j = 0; j < w.cols(); j++) {
				const float v = float(w(i, j));
				out.write(reinterpret_cast<const char *>(&v), 4);
			}
		}
	}
}

AnnModel load_model(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw FormatError("cannot open model file " + path);
	}
	uint32_t hlen = 0;
	in.read(reinterpret_cast<char *>(&hlen), 4);
	std::string h(hlen, '\0');
	in.read(h.data(), hlen);
	if (!in) {
		throw FormatError("truncated model header in " + path);
	}
	nlohmann::json header = nlohmann::json::parse(h);
	AnnModel m;
	m.layer_dims = header["layer_dims"].get<std::vector<int>>();
	m.output_head = header["output_head"] == "softmax" ? OutputHead::softmax
	                                                   : OutputHead::relu;
	const std::string loss = header["loss"];
	m.loss = loss == "cross_entropy" ? Loss::cross_entropy
	         : loss == "mse"         ? Loss::mse
	                                 : Loss::hinge_winner_runnerup;
	m.non_negative = header["non_negative"].get<bool>();
	for (size_t l = 0; l + 1 < m.layer_dims.size(); l++) {
		Eigen::MatrixXd w(m.layer_dims[l + 1], m.layer_dims[l]);
		for (Eigen::Index i = 0; i < w.rows(); i++) {
			for (Eigen::Index j = 0; j < w.cols(); j++) {
				float v;
				in.read(reinterpret_cast<char *>(&v), 4);
				w(i, j) = v;
			}
		}
		m.weights.push_back(std::move(w));
	}
	if (!in) {
		throw FormatError("truncated weight data in " + path);
	}
	m.validate();
	return m;
}

}  // namespace snnbench
