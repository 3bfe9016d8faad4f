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

namespace snnbench {

enum class Split { train, eval, test };

/**
 * A set of images with class labels. Images are stored one per row with
 * pixel intensities in [0,1].
 */
struct Dataset {
	Eigen::MatrixXd images;   // n_samples x input_dim
	std::vector<int> labels;  // class index 0..9
	Split split = Split::train;
	int height = 0;  // 0 once the spatial layout is gone (after pruning)
	int width = 0;

	Eigen::Index size() const { return images.rows(); }
	int input_dim() const { return static_cast<int>(images.cols()); }
	void validate() const;
	Dataset head(Eigen::Index n) const;
};

struct PoolSpec {
	int window_h = 3;
	int window_w = 3;
	int stride_h = 3;
	int stride_w = 3;
	bool prune_constant_pixels = true;
};

struct FormatError : std::runtime_error {
	using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

/**
 * Read an IDX image/label file pair (big-endian magic 0x803/0x801),
 * intensities divided by 255.
 */
Dataset load_idx(const std::string &images_path,
                 const std::string &labels_path);

/**
 * Average-pool every image with the given window/stride. Images are
 * zero-padded on the right/bottom to a multiple of the stride.
 */
Dataset downscale(const Dataset &d, const PoolSpec &spec);

/// Indices of pooled pixels that are nonzero somewhere in `d`.
std::vector<int> nonzero_pixel_mask(const Dataset &d);

/// Keep only the listed pixel columns.
Dataset apply_pixel_mask(const Dataset &d, const std::vector<int> &kept);

void save_pixel_mask(const std::vector<int> &kept, const std::string &path);
std::vector<int> load_pixel_mask(const std::string &path);

/**
 * The three MNIST splits used throughout: train = first 50000 of the
 * train file, eval = last 10000 of the train file, test = the test file.
 */
struct MnistBundle {
	Dataset train;
	Dataset eval;
	Dataset test;
	std::vector<int> pixel_mask;  // empty when no pooling/pruning applied
};

/**
 * Load MNIST from `dir` (standard file names). With `pool` set, every
 * split is down-scaled; the pruning mask is computed on the train split
 * and applied to all three.
 */
MnistBundle load_mnist(const std::string &dir, const PoolSpec *pool = nullptr);

}  // namespace snnbench
