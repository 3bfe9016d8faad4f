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

#include <optional>

#include "snnbench/ann.hpp"
#include "snnbench/dataset.hpp"
#include "snnbench/lif.hpp"

namespace snnbench {

struct DegenerateModelError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

struct ConversionConfig {
	double w_max = 0.0015;   // uS (or digital ceiling when quantized)
	double f_max = 100.0;    // Hz
	double t_present = 200;  // ms
	double t_gap = 0.0;      // ms of silence between samples
	int weight_levels = 0;   // 0 = no quantization; 16 for 4-bit platforms
	bool poisson = false;    // seeded Poisson instead of regular trains
	uint64_t encoder_seed = 0;

	void validate() const;
};

struct ClassifiedBatch {
	std::vector<int> predicted;
	Eigen::MatrixXi output_counts;  // n_samples x n_classes
	std::vector<bool> tie;          // argmax tie (incl. all-silent samples)

	double accuracy(const std::vector<int> &labels) const;
};

/**
 * Divide every weight by the maximal |w| of the full network, scale to
 * w_max, optionally quantize to equally spaced levels (ties away from
 * zero).
 */
std::vector<Eigen::MatrixXd> normalize_weights(const AnnModel &m,
                                               const ConversionConfig &cfg);

/// Rate-code one input vector: pixel p becomes a regular train at
/// p * f_max Hz over t_present ms.
SpikeTrains encode(const Eigen::VectorXd &x, const ConversionConfig &cfg);

/// Inverse of encode up to rate quantization: counts back to [0,1].
Eigen::VectorXd decode(const Eigen::VectorXi &counts,
                       const ConversionConfig &cfg);

SnnNetwork convert(const AnnModel &m, const LifParams &lif,
                   const ConversionConfig &cfg);

/// Classify a batch on the ideal simulator; state is reset per sample.
ClassifiedBatch classify(const SnnNetwork &net, const Dataset &batch,
                         const ConversionConfig &cfg,
                         const SimOptions &opts = {},
                         SimStats *accumulated = nullptr,
                         std::vector<Eigen::MatrixXi> *layer_counts = nullptr);

/// argmax with lowest-index tie-break; flags the tie.
int predict_from_counts(const Eigen::VectorXi &counts, bool &tie);

}  // namespace snnbench
