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

#include "snnbench/dataset.hpp"

#include <fstream>
#include <json.hpp>

namespace snnbench {

namespace {
uint32_t read_be32(std::istream &in)
{
	unsigned char b[4];
	in.read(reinterpret_cast<char *>(b), 4);
	if (!in) {
		throw ConsistencyError("unexpected end of file in IDX header");
	}
	return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
	       (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}
}  // namespace

void Dataset::validate() const
{
	if (images.rows() != Eigen::Index(labels.size())) {
		throw ConsistencyError("image/label count mismatch");
	}
	for (int l : labels) {
		if (l < 0 || l > 9) {
			throw ConsistencyError("label out of range 0..9");
		}
	}
	if (images.size() > 0 &&
	    (images.minCoeff() < 0.0 || images.maxCoeff() > 1.0)) {
		throw ConsistencyError("pixel value outside [0,1]");
	}
}

Dataset Dataset::head(Eigen::Index n) const
{
	n = std::min(n, size());
	Dataset out;
	out.images = images.topRows(n);
	out.labels.assign(labels.begin(), labels.begin() + n);
	out.split = split;
	out.height = height;
	out.width = width;
	return out;
}

Dataset load_idx(const std::string &images_path, const std::string &labels_path)
{
	std::ifstream imgs(images_path, std::ios::binary);
	if (!imgs) {
		throw FormatError("cannot open " + images_path);
	}
	if (read_be32(imgs) != 0x00000803) {
		throw FormatError("bad magic number in " + images_path);
	}
	const uint32_t n = read_be32(imgs);
	const uint32_t rows = read_be32(imgs);
	const uint32_t cols = read_be32(imgs);

	std::ifstream labs(labels_path, std::ios::binary);
	if (!labs) {
		throw FormatError("cannot open " + labels_path);
	}
	if (read_be32(labs) != 0x00000801) {
		throw FormatError("bad magic number in " + labels_path);
	}
	const uint32_t n_labels = read_be32(labs);
	if (n != n_labels) {
		throw ConsistencyError("image/label count mismatch: " +
		                       std::to_string(n) + " vs " +
		                       std::to_string(n_labels));
	}

	Dataset d;
	d.height = int(rows);
	d.width = int(cols);
	d.images.resize(n, rows * cols);
	std::vector<unsigned char> buf(rows * cols);
	for (uint32_t i = 0; i < n; i++) {
		imgs.read(reinterpret_cast<char *>(buf.data()), buf.size());
		if (!imgs) {
			throw ConsistencyError("truncated image file " + images_path);
		}
		for (size_t j = 0; j < buf.size(); j++) {
			d.images(i, j) = double(buf[j]) / 255.0;
		}
	}
	d.labels.resize(n);
	std::vector<unsigned char> lbuf(n);
	labs.read(reinterpret_cast<char *>(lbuf.data()), n);
	if (!labs) {
		throw ConsistencyError("truncated label file " + labels_path);
	}
	for (uint32_t i = 0; i < n; i++) {
		d.labels[i] = int(lbuf[i]);
	}
	d.validate();
	return d;
}

Dataset downscale(const Dataset &d, const PoolSpec &spec)
{
	if (spec.window_h <= 0 || spec.window_w <= 0 || spec.stride_h <= 0 ||
	    spec.stride_w <= 0) {
		throw std::invalid_argument("pool window and stride must be positive");
	}
	const int h = d.height, w = d.width;
	// pad right/bottom to a multiple of the stride
	const int ph = (h + spec.stride_h - 1) / spec.stride_h * spec.stride_h;
	const int pw = (w + spec.stride_w - 1) / spec.stride_w * spec.stride_w;
	const int oh = (ph - spec.window_h) / spec.stride_h + 1;
	const int ow = (pw - spec.window_w) / spec.stride_w + 1;

	Dataset out;
	out.labels = d.labels;
	out.split = d.split;
	out.height = oh;
	out.width = ow;
	out.images.resize(d.size(), oh * ow);
	const double inv_area = 1.0 / (spec.window_h * spec.window_w);
	for (Eigen::Index i = 0; i < d.size(); i++) {
		for (int oy = 0; oy < oh; oy++) {
			for (int ox = 0; ox < ow; ox++) {
				double sum = 0.0;
				for (int ky = 0; ky < spec.window_h; ky++) {
					for (int kx = 0; kx < spec.window_w; kx++) {
						const int y = oy * spec.stride_h + ky;
						const int x = ox * spec.stride_w + kx;
						if (y < h && x < w) {
							sum += d.images(i, y * w + x);
						}
					}
				}
				out.images(i, oy * ow + ox) = sum * inv_area;
			}
		}
	}
	return out;
}

std::vector<int> nonzero_pixel_mask(const Dataset &d)
{
	std::vector<int> kept;
	for (int j = 0; j < d.input_dim(); j++) {
		if (d.images.col(j).maxCoeff() > 0.0) {
			kept.push_back(j);
		}
	}
	return kept;
}

Dataset apply_pixel_mask(const Dataset &d, const std::vector<int> &kept)
{
	Dataset out;
	out.labels = d.labels;
	out.split = d.split;
	out.images.resize(d.size(), Eigen::Index(kept.size()));
	for (size_t j = 0; j < kept.size(); j++) {
		out.images.col(j) = d.images.col(kept[j]);
	}
	return out;
}

void save_pixel_mask(const std::vector<int> &kept, const std::string &path)
{
	nlohmann::json j = kept;
	std::ofstream out(path);
	out << j.dump() << "\n";
}

std::vector<int> load_pixel_mask(const std::string &path)
{
	std::ifstream in(path);
	if (!in) {
		throw FormatError("cannot open pixel mask " + path);
	}
	nlohmann::json j;
	in >> j;
	return j.get<std::vector<int>>();
}

MnistBundle load_mnist(const std::string &dir, const PoolSpec *pool)
{
	Dataset train_file = load_idx(dir + "/train-images-idx3-ubyte",
	                              dir + "/train-labels-idx1-ubyte");
	Dataset test = load_idx(dir + "/t10k-images-idx3-ubyte",
	                        dir + "/t10k-labels-idx1-ubyte");
	test.split = Split::test;

	MnistBundle b;
	const Eigen::Index n_train = 50000;
	Dataset train = train_file.head(n_train);
	Dataset eval;
	eval.images = train_file.images.bottomRows(train_file.size() - n_train);
	eval.labels.assign(train_file.labels.begin() + n_train,
	                   train_file.labels.end());
	eval.split = Split::eval;
	eval.height = train_file.height;
	eval.width = train_file.width;

	if (pool) {
		train = downscale(train, *pool);
		eval = downscale(eval, *pool);
		test = downscale(test, *pool);
		if (pool->prune_constant_pixels) {
			b.pixel_mask = nonzero_pixel_mask(train);
			train = apply_pixel_mask(train, b.pixel_mask);
			eval = apply_pixel_mask(eval, b.pixel_mask);
			test = apply_pixel_mask(test, b.pixel_mask);
		}
	}
	b.train = std::move(train);
	b.eval = std::move(eval);
	b.test = std::move(test);
	return b;
}

}  // namespace snnbench
