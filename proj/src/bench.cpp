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

#include "snnbench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace snnbench {

void ExperimentSpec::validate() const
{
	if (sweep.size() > 2) {
		throw std::invalid_argument("at most 2 swept parameters");
	}
	for (const auto &p : sweep) {
		if (p.values.empty()) {
			throw std::invalid_argument("sweep values must be non-empty");
		}
	}
	if (n_samples <= 0 || batch_size <= 0 || repetitions <= 0) {
		throw std::invalid_argument(
		    "n_samples, batch_size, repetitions must be positive");
	}
	conversion.validate();
	lif.validate();
}

ExperimentSpec spec_from_json(const nlohmann::json &j)
{
	ExperimentSpec s;
	s.network = j.value("network", "");
	s.platform = j.value("platform", "ideal");
	if (j.contains("conversion")) {
		const auto &c = j["conversion"];
		s.conversion.w_max = c.value("w_max", s.conversion.w_max);
		s.conversion.f_max = c.value("f_max", s.conversion.f_max);
		s.conversion.t_present =
		    c.value("t_present", s.conversion.t_present);
		s.conversion.t_gap = c.value("t_gap", s.conversion.t_gap);
		s.conversion.weight_levels =
		    c.value("weight_levels", s.conversion.weight_levels);
		s.conversion.poisson = c.value("poisson", s.conversion.poisson);
	}
	if (j.contains("lif")) {
		const auto &l = j["lif"];
		s.lif.cm = l.value("cm", s.lif.cm);
		s.lif.tau_m = l.value("tau_m", s.lif.tau_m);
		s.lif.tau_syn_e = l.value("tau_syn_e", s.lif.tau_syn_e);
		s.lif.tau_syn_i = l.value("tau_syn_i", s.lif.tau_syn_i);
		s.lif.v_rest = l.value("v_rest", s.lif.v_rest);
		s.lif.v_reset = l.value("v_reset", s.lif.v_reset);
		s.lif.v_thresh = l.value("v_thresh", s.lif.v_thresh);
		s.lif.e_rev_e = l.value("e_rev_e", s.lif.e_rev_e);
		s.lif.e_rev_i = l.value("e_rev_i", s.lif.e_rev_i);
		s.lif.t_refrac = l.value("t_refrac", s.lif.t_refrac);
	}
	for (const auto &p : j.value("sweep", nlohmann::json::array())) {
		SweepParam sp;
		sp.path = p.at("path").get<std::string>();
		sp.values = p.at("values").get<std::vector<double>>();
		s.sweep.push_back(std::move(sp));
	}
	s.n_samples = j.value("n_samples", int64_t(s.n_samples));
	s.batch_size = j.value("batch_size", s.batch_size);
	s.repetitions = j.value("repetitions", s.repetitions);
	s.seed = j.value("seed", s.seed);
	s.validate();
	return s;
}

nlohmann::json spec_to_json(const ExperimentSpec &s)
{
	nlohmann::json j;
	j["network"] = s.network;
	j["platform"] = s.platform;
	j["conversion"] = {{"w_max", s.conversion.w_max},
	                   {"f_max", s.conversion.f_max},
	                   {"t_present", s.conversion.t_present},
	                   {"t_gap", s.conversion.t_gap},
	                   {"weight_levels", s.conversion.weight_levels},
	                   {"poisson", s.conversion.poisson}};
	j["lif"] = {{"cm", s.lif.cm},
	            {"tau_m", s.lif.tau_m},
	            {"tau_syn_e", s.lif.tau_syn_e},
	            {"tau_syn_i", s.lif.tau_syn_i},
	            {"v_rest", s.lif.v_rest},
	            {"v_reset", s.lif.v_reset},
	            {"v_thresh", s.lif.v_thresh},
	            {"e_rev_e", s.lif.e_rev_e},
	            {"e_rev_i", s.lif.e_rev_i},
	            {"t_refrac", s.lif.t_refrac}};
	j["sweep"] = nlohmann::json::array();
	for (const auto &p : s.sweep) {
		j["sweep"].push_back({{"path", p.path}, {"values", p.values}});
	}
	j["n_samples"] = int64_t(s.n_samples);
	j["batch_size"] = s.batch_size;
	j["repetitions"] = s.repetitions;
	j["seed"] = s.seed;
	return j;
}

void set_config_path(ExperimentSpec &spec, const std::string &path,
                     double value)
{
	if (path == "conversion.w_max") {
		spec.conversion.w_max = value;
	}
	else if (path == "conversion.f_max") {
		spec.conversion.f_max = value;
	}
	else if (path == "conversion.t_present") {
		spec.conversion.t_present = value;
	}
	else if (path == "conversion.t_gap") {
		spec.conversion.t_gap = value;
	}
	else if (path == "conversion.weight_levels") {
		spec.conversion.weight_levels = int(value);
	}
	else if (path == "lif.cm") {
		spec.lif.cm = value;
	}
	else if (path == "lif.tau_m") {
		spec.lif.tau_m = value;
	}
	else if (path == "lif.tau_syn_e") {
		spec.lif.tau_syn_e = value;
	}
	else if (path == "lif.tau_syn_i") {
		spec.lif.tau_syn_i = value;
	}
	else if (path == "lif.v_rest") {
		spec.lif.v_rest = value;
	}
	else if (path == "lif.v_reset") {
		spec.lif.v_reset = value;
	}
	else if (path == "lif.v_thresh") {
		spec.lif.v_thresh = value;
	}
	else if (path == "lif.e_rev_e") {
		spec.lif.e_rev_e = value;
	}
	else if (path == "lif.e_rev_i") {
		spec.lif.e_rev_i = value;
	}
	else if (path == "lif.t_refrac") {
		spec.lif.t_refrac = value;
	}
	else {
		throw std::invalid_argument("unknown sweep path '" + path + "'");
	}
}

InstancePlan schedule(int network_neurons, Eigen::Index n_samples,
                      int batch_size, const HardwareProfile &profile)
{
	if (network_neurons > profile.capacity_neurons) {
		throw CapacityError("network of " + std::to_string(network_neurons) +
		                    " neurons exceeds capacity " +
		                    std::to_string(profile.capacity_neurons));
	}
	const int64_t by_capacity =
	    int64_t(profile.capacity_neurons) / std::max(network_neurons, 1);
	const int64_t by_batches =
	    (int64_t(n_samples) + batch_size - 1) / batch_size;
	int64_t instances =
	    std::max<int64_t>(1, std::min(by_capacity, by_batches));
	instances = std::min<int64_t>(instances, profile.max_instances);
	instances = std::min<int64_t>(instances, n_samples);

	InstancePlan plan;
	plan.instances = int(instances);
	const Eigen::Index base = n_samples / instances;
	const Eigen::Index extra = n_samples % instances;
	Eigen::Index start = 0;
	for (int64_t i = 0; i < instances; i++) {
		const Eigen::Index count = base + (i < extra ? 1 : 0);
		plan.shares.emplace_back(start, count);
		start += count;
	}
	return plan;
}

namespace {

struct CellOutcome {
	double accuracy = 0.0;  // percent
	double wall_clock_ms = 0.0;
	double energy_mj = 0.0;
	uint64_t presyn_events = 0;
	uint64_t dropped = 0;
	int instances = 1;
};

CellOutcome run_cell(const AnnModel &model, const Dataset &sub,
                     const ExperimentSpec &cell, const HardwareProfile &prof,
                     int repetition)
{
	SnnNetwork net = convert(model, cell.lif, cell.conversion);
	int neurons = 0;
	for (size_t l = 1; l < net.layers.size(); l++) {
		neurons += net.layers[l];
	}
	InstancePlan plan =
	    schedule(neurons, sub.size(), cell.batch_size, prof);

	CellOutcome out;
	out.instances = plan.instances;
	int correct = 0;
	double wall_sum_ms = 0.0;
	RunStats pooled;
	for (int inst = 0; inst < plan.instances; inst++) {
		const auto [start, count] = plan.shares[inst];
		Dataset share;
		share.images = sub.images.middleRows(start, count);
		share.labels.assign(sub.labels.begin() + start,
		                    sub.labels.begin() + start + count);
		share.split = sub.split;

		// per-sample seeds follow the global index so the plan shape
		// cannot change ideal-simulator results
		ConversionConfig cfg = cell.conversion;
		cfg.encoder_seed = cell.seed + uint64_t(start);

		DeviceInstance dev =
		    instantiate(prof, cell.seed + 977 * uint64_t(inst));
		RunStats stats;
		ClassifiedBatch cls = run_on_device(
		    dev, net, share, cfg, &stats,
		    uint64_t(repetition) * 131 + uint64_t(inst));
		for (Eigen::Index i = 0; i < share.size(); i++) {
			if (cls.predicted[i] == share.labels[i]) {
				correct++;
			}
		}
		out.wall_clock_ms = std::max(out.wall_clock_ms, stats.wall_clock_ms);
		wall_sum_ms += stats.wall_clock_ms;
		pooled.presyn_events += stats.presyn_events;
		for (uint64_t d : stats.dropped) {
			out.dropped += d;
		}
	}
	pooled.wall_clock_ms = wall_sum_ms;  // device-seconds, for energy
	pooled.n_samples = sub.size();
	out.presyn_events = pooled.presyn_events;
	out.energy_mj = estimate_energy(pooled, prof) * 1000.0;
	out.accuracy = 100.0 * double(correct) / double(sub.size());
	return out;
}

}  // namespace

std::vector<RunResult> run_experiment(const AnnModel &model,
                                      const Dataset &test,
                                      const ExperimentSpec &spec,
                                      bool keep_going)
{
	spec.validate();
	model.validate();
	HardwareProfile prof = spec.platform == "ideal"
	                           ? HardwareProfile{}
	                           : load_profile(spec.platform);
	Dataset sub = test.head(std::min(spec.n_samples, test.size()));
	const double ann_acc = accuracy(model, sub);

	// cartesian cell list (1 cell when no sweep)
	std::vector<std::vector<double>> grid{{}};
	for (const auto &p : spec.sweep) {
		std::vector<std::vector<double>> next;
		for (const auto &prefix : grid) {
			for (double v : p.values) {
				auto cell = prefix;
				cell.push_back(v);
				next.push_back(std::move(cell));
			}
		}
		grid = std::move(next);
	}

	std::vector<RunResult> results;
	std::string first_error;
	for (const auto &values : grid) {
		RunResult r;
		r.network = spec.network;
		r.platform = spec.platform;
		r.batch_size = spec.batch_size;
		r.ann_accuracy = ann_acc;
		ExperimentSpec cell = spec;
		for (size_t k = 0; k < values.size(); k++) {
			set_config_path(cell, spec.sweep[k].path, values[k]);
			r.swept[spec.sweep[k].path] = values[k];
		}
		try {
			cell.conversion.validate();
			cell.lif.validate();
			double acc_sum = 0.0, acc_sq = 0.0;
			for (int rep = 0; rep < spec.repetitions; rep++) {
				CellOutcome out = run_cell(model, sub, cell, prof, rep);
				acc_sum += out.accuracy;
				acc_sq += out.accuracy * out.accuracy;
				r.wall_clock_ms += out.wall_clock_ms / spec.repetitions;
				r.energy_mj += out.energy_mj / spec.repetitions;
				r.presyn_events += out.presyn_events;
				r.dropped_spikes += out.dropped;
				r.instances = out.instances;
			}
			r.accuracy = acc_sum / spec.repetitions;
			const double var =
			    std::max(0.0, acc_sq / spec.repetitions -
			                      r.accuracy * r.accuracy);
			r.accuracy_sd =
			    spec.repetitions > 1 ? std::sqrt(var) : 0.0;
			r.conversion_loss = r.ann_accuracy - r.accuracy;
		}
		catch (const std::exception &e) {
			r.error = e.what();
			if (first_error.empty()) {
				first_error = e.what();
			}
		}
		results.push_back(std::move(r));
	}
	if (!first_error.empty() && !keep_going) {
		throw std::runtime_error("sweep cell failed: " + first_error);
	}
	return results;
}

namespace {

std::string fmt(double v, int prec = 2)
{
	std::ostringstream os;
	os << std::fixed << std::setprecision(prec) << v;
	return os.str();
}

nlohmann::json result_json(const RunResult &r)
{
	nlohmann::json j;
	j["network"] = r.network;
	j["platform"] = r.platform;
	j["swept"] = r.swept;
	j["ann_accuracy"] = r.ann_accuracy;
	j["accuracy"] = r.accuracy;
	j["accuracy_sd"] = r.accuracy_sd;
	j["conversion_loss"] = r.conversion_loss;
	j["wall_clock_ms"] = r.wall_clock_ms;
	j["energy_mj"] = r.energy_mj;
	j["batch_size"] = r.batch_size;
	j["instances"] = r.instances;
	j["presyn_events"] = r.presyn_events;
	j["dropped_spikes"] = r.dropped_spikes;
	j["error"] = r.error;
	return j;
}

}  // namespace

void report(const std::vector<RunResult> &results, const std::string &dir)
{
	if (results.empty()) {
		throw std::invalid_argument("nothing to report");
	}
	namespace fs = std::filesystem;
	fs::create_directories(dir);

	// per-network best values (errors excluded)
	std::map<std::string, std::array<double, 4>> best;  // acc,loss,wall,energy
	for (const auto &r : results) {
		if (!r.error.empty()) {
			continue;
		}
		auto it = best.find(r.network);
		if (it == best.end()) {
			best[r.network] = {r.accuracy, r.conversion_loss, r.wall_clock_ms,
			                   r.energy_mj};
		}
		else {
			it->second[0] = std::max(it->second[0], r.accuracy);
			it->second[1] = std::min(it->second[1], r.conversion_loss);
			it->second[2] = std::min(it->second[2], r.wall_clock_ms);
			it->second[3] = std::min(it->second[3], r.energy_mj);
		}
	}
	auto mark = [&](const RunResult &r, int col, double v) {
		if (!r.error.empty() || best.count(r.network) == 0) {
			return std::string("");
		}
		return v == best[r.network][col] ? std::string("*") : std::string("");
	};

	std::ofstream csv(fs::path(dir) / "results.csv");
	csv << "network,platform,swept,accuracy,accuracy_sd,conversion_loss,"
	       "wall_clock_ms,energy_mj,batch_size,instances,presyn_events,"
	       "dropped,error\n";
	nlohmann::json jall = nlohmann::json::array();
	for (const auto &r : results) {
		std::string swept;
		for (const auto &[k, v] : r.swept) {
			swept += (swept.empty() ? "" : ";") + k + "=" + fmt(v, 4);
		}
		csv << r.network << "," << r.platform << "," << swept << ","
		    << fmt(r.accuracy) << "," << fmt(r.accuracy_sd) << ","
		    << fmt(r.conversion_loss) << "," << fmt(r.wall_clock_ms) << ","
		    << fmt(r.energy_mj, 4) << "," << r.batch_size << ","
		    << r.instances << "," << r.presyn_events << ","
		    << r.dropped_spikes << "," << r.error << "\n";
		jall.push_back(result_json(r));
	}
	csv.close();
	std::ofstream js(fs::path(dir) / "results.json");
	js << jall.dump(2) << "\n";
	js.close();

	std::ofstream tab(fs::path(dir) / "table.txt");
	tab << std::left << std::setw(24) << "Network" << std::setw(16)
	    << "Platform" << std::setw(12) << "Accuracy" << std::setw(12)
	    << "Loss" << std::setw(14) << "Wall [ms]" << std::setw(14)
	    << "E/inf [mJ]" << std::setw(10) << "Batch"
	    << "\n";
	tab << std::string(102, '-') << "\n";
	for (const auto &r : results) {
		if (!r.error.empty()) {
			tab << std::left << std::setw(24) << r.network << std::setw(16)
			    << r.platform << "error: " << r.error << "\n";
			continue;
		}
		tab << std::left << std::setw(24) << r.network << std::setw(16)
		    << r.platform << std::setw(12)
		    << (fmt(r.accuracy) + mark(r, 0, r.accuracy)) << std::setw(12)
		    << (fmt(r.conversion_loss) + mark(r, 1, r.conversion_loss))
		    << std::setw(14) << (fmt(r.wall_clock_ms) + mark(r, 2, r.wall_clock_ms))
		    << std::setw(14) << (fmt(r.energy_mj, 4) + mark(r, 3, r.energy_mj))
		    << std::setw(10) << r.batch_size << "\n";
	}
}

}  // namespace snnbench
