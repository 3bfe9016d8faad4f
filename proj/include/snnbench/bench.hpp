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

struct SweepParam {
	std::string path;  // dotted, e.g. "conversion.f_max" or "lif.tau_m"
	std::vector<double> values;
};

/**
 * One experiment = network x platform x conversion settings, optionally
 * swept over one or two parameter paths into the config tree.
 */
struct ExperimentSpec {
	std::string network;           // model file (or preset name in the CLI)
	std::string platform = "ideal";
	ConversionConfig conversion;
	LifParams lif;
	std::vector<SweepParam> sweep;
	Eigen::Index n_samples = 2000;  // test samples per cell
	int batch_size = 10000;
	int repetitions = 1;
	uint64_t seed = 1;

	void validate() const;
};

ExperimentSpec spec_from_json(const nlohmann::json &j);
nlohmann::json spec_to_json(const ExperimentSpec &spec);

/// Apply one dotted-path assignment; unknown paths throw.
void set_config_path(ExperimentSpec &spec, const std::string &path,
                     double value);

struct InstancePlan {
	int instances = 1;
	// contiguous (start, count) sample shares, one per instance
	std::vector<std::pair<Eigen::Index, Eigen::Index>> shares;
};

/**
 * Batch-parallel plan: as many parallel copies of the network as
 * capacity allows, but no more than the batch count asks for.
 */
InstancePlan schedule(int network_neurons, Eigen::Index n_samples,
                      int batch_size, const HardwareProfile &profile);

struct RunResult {
	std::map<std::string, double> swept;  // path -> value for this cell
	std::string network;
	std::string platform;
	double ann_accuracy = 0.0;      // percent, same sample subset
	double accuracy = 0.0;          // percent, mean over repetitions
	double accuracy_sd = 0.0;
	double conversion_loss = 0.0;   // ann_accuracy - accuracy, exactly
	double wall_clock_ms = 0.0;     // modeled, max over parallel instances
	double energy_mj = 0.0;         // per inference
	int batch_size = 0;
	int instances = 0;
	uint64_t presyn_events = 0;
	uint64_t dropped_spikes = 0;
	std::string error;  // non-empty if the cell failed
};

/**
 * Cartesian sweep grid; every cell converts, schedules and runs the
 * model. Cell errors are recorded in the result (grid completeness)
 * and rethrown afterwards unless keep_going is set.
 */
std::vector<RunResult> run_experiment(const AnnModel &model,
                                      const Dataset &test,
                                      const ExperimentSpec &spec,
                                      bool keep_going = false);

/**
 * results.csv + results.json + table.txt under `dir`; per-network best
 * values (max accuracy, min loss/wall/energy) are marked, ties all.
 */
void report(const std::vector<RunResult> &results, const std::string &dir);

}  // namespace snnbench
