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
#include <stdexcept>
#include <string>
#include <vector>

#include "snnbench/dataset.hpp"

namespace snnbench {

enum class OutputHead { relu, softmax };
enum class Loss { cross_entropy, mse, hinge_winner_runnerup };

struct ShapeError : std::runtime_error {
	using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

/**
 * Bias-free dense feed-forward network. weights[l] maps layer l to
 * layer l+1 and has shape layer_dims[l+1] x layer_dims[l]; ReLU on all
 * hidden layers, the configured head on the output.
 */
struct AnnModel {
	std::vector<int> layer_dims;
	std::vector<Eigen::MatrixXd> weights;
	OutputHead output_head = OutputHead::softmax;
	Loss loss = Loss::cross_entropy;
	bool non_negative = false;

	int input_dim() const { return layer_dims.front(); }
	int output_dim() const { return layer_dims.back(); }
	size_t parameter_count() const;
	void validate() const;
};

struct TrainConfig {
	double learning_rate = 0.05;
	int batch_size = 64;
	int epochs = 30;
	uint64_t rng_seed = 1;
	double l2 = 0.0;
	double hinge_margin = 1.0;
};

struct TrainTrace {
	std::vector<double> epoch_loss;
};

/// Seeded uniform init in +/- sqrt(6/(fan_in+fan_out)); non_negative
/// models start from the absolute value.
AnnModel make_mlp(const std::vector<int> &layer_dims, OutputHead head,
                  Loss loss, uint64_t seed, bool non_negative = false);

/**
 * Activations of every layer for one input; index 0 is the input itself,
 * the last entry has the output head applied.
 */
std::vector<Eigen::VectorXd> forward(const AnnModel &m,
                                     const Eigen::VectorXd &x);

/// Pre-head output scores (linear combination of the last hidden layer).
Eigen::VectorXd forward_scores(const AnnModel &m, const Eigen::VectorXd &x);

/// Batched pre-head scores, one sample per row.
Eigen::MatrixXd forward_scores(const AnnModel &m, const Eigen::MatrixXd &x);

/**
 * Analytic gradient of the configured loss over a batch (one sample per
 * row of `x`), averaged over the batch.
 */
std::vector<Eigen::MatrixXd> gradient(const AnnModel &m,
                                      const Eigen::MatrixXd &x,
                                      const std::vector<int> &labels,
                                      double hinge_margin = 1.0);

/// Batch loss value for the configured loss (for gradient checking).
double batch_loss(const AnnModel &m, const Eigen::MatrixXd &x,
                  const std::vector<int> &labels, double hinge_margin = 1.0);

/// Batch gradient descent; mutates the model, returns the loss curve.
TrainTrace train(AnnModel &m, const Dataset &data, const TrainConfig &cfg);

double accuracy(const AnnModel &m, const Dataset &data);

/// JSON header + row-major little-endian float32 weight blobs.
void save_model(const AnnModel &m, const std::string &path);
AnnModel load_model(const std::string &path);

}  // namespace snnbench
