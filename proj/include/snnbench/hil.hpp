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

#include "snnbench/hardware.hpp"

namespace snnbench {

struct HilConfig {
	int epochs = 10;
	double learning_rate = 0.05;
	Eigen::Index samples_per_epoch = 1000;  // drawn from the train split
	double rate_normalizer = 0.0;  // 0 = calibrate from the first forward pass
	double hinge_margin = 1.0;
	uint64_t seed = 1;
	bool output_only = false;  // update only the last weight matrix
};

struct HilTrace {
	std::vector<double> epoch_loss;
	std::vector<double> epoch_accuracy;  // on the training chunk, measured
	                                     // in the loop (device rates)
	double rate_normalizer = 0.0;
};

/**
 * In-the-loop retraining: every forward pass runs on the device, the
 * recorded spike rates replace the analytic activations in the backward
 * pass, and the updated weights are re-uploaded for the next chunk.
 * Mutates `m`; the converted network is rebuilt from it each epoch.
 */
HilTrace hil_retrain(AnnModel &m, const DeviceInstance &dev,
                     const Dataset &train, const LifParams &lif,
                     const ConversionConfig &cfg, const HilConfig &hil);

void export_hil_trace_csv(const HilTrace &trace, const std::string &path);

}  // namespace snnbench
