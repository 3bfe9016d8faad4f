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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "snnbench/bench.hpp"
#include "snnbench/hil.hpp"
#include "snnbench/nas.hpp"

using namespace snnbench;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
	std::string data_dir = "data/mnist";
	std::string out_dir = "out";
	std::string profile_dir = "data/profiles";
	uint64_t seed = 1;
};

MnistBundle load_data(const CommonOpts &common, bool pooled)
{
	if (pooled) {
		PoolSpec pool;
		return load_mnist(common.data_dir, &pool);
	}
	return load_mnist(common.data_dir);
}

/// Models trained on the pooled encoding carry their pixel mask in a
/// side file so the raw splits can be preprocessed the same way.
std::string mask_path(const std::string &model_path)
{
	return model_path + ".mask.json";
}

MnistBundle data_for_model(const CommonOpts &common, const AnnModel &m,
                           const std::string &model_path)
{
	if (m.input_dim() == 28 * 28) {
		return load_data(common, false);
	}
	MnistBundle b = load_data(common, true);
	if (m.input_dim() != b.train.input_dim()) {
		throw ConsistencyError("model input dim " +
		                       std::to_string(m.input_dim()) +
		                       " matches neither the raw nor the pooled "
		                       "encoding (mask file: " +
		                       mask_path(model_path) + ")");
	}
	return b;
}

HardwareProfile resolve_profile(const CommonOpts &common,
                                const std::string &name)
{
	if (name == "ideal" || name.empty()) {
		return HardwareProfile{};
	}
	return load_profile(name, common.profile_dir);
}

int cmd_train(const CommonOpts &common, const std::string &preset,
              std::vector<int> hidden, int epochs, double lr,
              const std::string &out_model)
{
	TrainConfig cfg;
	cfg.rng_seed = common.seed;
	AnnModel m;
	bool pooled = false;
	if (preset == "spikey") {
		pooled = true;
		MnistBundle b = load_data(common, true);
		m = make_mlp({b.train.input_dim(), 100, 10}, OutputHead::relu,
		             Loss::hinge_winner_runnerup, common.seed, true);
		cfg.learning_rate = 0.02;
		cfg.epochs = 60;
		cfg.l2 = 5e-3;
		cfg.hinge_margin = 4.0;
		if (epochs > 0) {
			cfg.epochs = epochs;
		}
		if (lr > 0) {
			cfg.learning_rate = lr;
		}
		train(m, b.train, cfg);
		save_model(m, out_model);
		save_pixel_mask(b.pixel_mask, mask_path(out_model));
		std::cout << "test accuracy: " << accuracy(m, b.test)
		          << " %\n";
		return 0;
	}
	if (preset == "nas129") {
		hidden = {129};
	}
	else if (!preset.empty()) {
		std::cerr << "unknown preset '" << preset << "'\n";
		return 1;
	}
	if (hidden.empty()) {
		hidden = {129};
	}
	MnistBundle b = load_data(common, pooled);
	std::vector<int> dims{b.train.input_dim()};
	dims.insert(dims.end(), hidden.begin(), hidden.end());
	dims.push_back(10);
	m = make_mlp(dims, OutputHead::softmax, Loss::cross_entropy,
	             common.seed);
	cfg.learning_rate = lr > 0 ? lr : 0.05;
	cfg.epochs = epochs > 0 ? epochs : 30;
	train(m, b.train, cfg);
	save_model(m, out_model);
	std::cout << "test accuracy: " << accuracy(m, b.test) << " %\n";
	return 0;
}

ExperimentSpec spec_from_cli(const CommonOpts &common,
                             const std::string &config,
                             const std::string &model,
                             const std::string &profile, int n_samples)
{
	ExperimentSpec spec;
	if (!config.empty()) {
		std::ifstream in(config);
		if (!in) {
			throw std::runtime_error("cannot read config " + config);
		}
		nlohmann::json j;
		in >> j;
		spec = spec_from_json(j);
	}
	if (!model.empty()) {
		spec.network = model;
	}
	if (!profile.empty()) {
		spec.platform = profile;
	}
	if (n_samples > 0) {
		spec.n_samples = n_samples;
	}
	spec.seed = common.seed;
	return spec;
}

int cmd_run(const CommonOpts &common, const ExperimentSpec &spec_in,
            bool keep_going)
{
	ExperimentSpec spec = spec_in;
	AnnModel m = load_model(spec.network);
	MnistBundle b = data_for_model(common, m, spec.network);
	if (spec.platform != "ideal" && !fs::exists(spec.platform)) {
		// resolve profile names against the configured directory
		fs::path p = fs::path(common.profile_dir) / (spec.platform + ".json");
		if (fs::exists(p)) {
			spec.platform = p.string();
		}
	}
	fs::create_directories(common.out_dir);
	{
		std::ofstream out(fs::path(common.out_dir) / "spec.json");
		out << spec_to_json(spec).dump(2) << "\n";
	}
	int ret = 0;
	std::vector<RunResult> results;
	try {
		results = run_experiment(m, b.test, spec, keep_going);
	}
	catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
	for (const auto &r : results) {
		if (!r.error.empty()) {
			ret = keep_going ? ret : 1;
		}
	}
	report(results, common.out_dir);
	std::cout << "wrote " << results.size() << " result rows to "
	          << common.out_dir << "\n";
	return ret;
}

int cmd_hil(const CommonOpts &common, const ExperimentSpec &spec, int epochs,
            double lr, int samples, int n_eval)
{
	AnnModel m = load_model(spec.network);
	MnistBundle b = data_for_model(common, m, spec.network);
	HardwareProfile prof = resolve_profile(common, spec.platform);
	DeviceInstance dev = instantiate(prof, common.seed);

	ConversionConfig cfg = spec.conversion;
	cfg.encoder_seed = common.seed;
	LifParams lif = spec.lif;
	Dataset sub = b.test.head(n_eval);
	SnnNetwork net = convert(m, lif, cfg);
	RunStats stats;
	ClassifiedBatch pre = run_on_device(dev, net, sub, cfg, &stats);

	HilConfig hil;
	hil.epochs = epochs;
	hil.learning_rate = lr;
	hil.samples_per_epoch = samples;
	hil.seed = common.seed;
	HilTrace trace = hil_retrain(m, dev, b.train, lif, cfg, hil);

	net = convert(m, lif, cfg);
	ClassifiedBatch post = run_on_device(dev, net, sub, cfg, &stats);

	fs::create_directories(common.out_dir);
	export_hil_trace_csv(trace,
	                     (fs::path(common.out_dir) / "hil_trace.csv").string());
	save_model(m, (fs::path(common.out_dir) / "model_hil.bin").string());
	nlohmann::json j;
	j["pre_accuracy"] = pre.accuracy(sub.labels);
	j["post_accuracy"] = post.accuracy(sub.labels);
	j["rate_normalizer"] = trace.rate_normalizer;
	std::ofstream out(fs::path(common.out_dir) / "hil.json");
	out << j.dump(2) << "\n";
	std::cout << "accuracy " << j["pre_accuracy"] << " % -> "
	          << j["post_accuracy"] << " %\n";
	return 0;
}

int cmd_nas(const CommonOpts &common, int population, int generations,
            int train_epochs, int train_samples)
{
	MnistBundle b = load_data(common, false);
	Dataset train_sub =
	    train_samples > 0 ? b.train.head(train_samples) : b.train;

	NasConfig cfg;
	cfg.population = population;
	cfg.parents = std::max(2, population / 2);
	cfg.generations = generations;
	cfg.seed = common.seed;

	TrainConfig tc;
	tc.epochs = train_epochs;
	tc.rng_seed = common.seed;

	fs::create_directories(common.out_dir);
	const std::string trace_path =
	    (fs::path(common.out_dir) / "nas_trace.jsonl").string();
	std::ofstream(trace_path, std::ios::trunc).close();

	Evaluator eval = [&](const Genome &g) {
		return evaluate_genome(g, train_sub, b.eval, tc);
	};
	NasResult res = evolve(b.train.input_dim(), cfg, eval, trace_path);
	export_pareto_csv(res.pareto,
	                  (fs::path(common.out_dir) / "pareto.csv").string());
	if (res.best.is_sequential()) {
		AnnModel best = genome_to_model(res.best, common.seed);
		TrainConfig full = tc;
		train(best, b.train, full);
		save_model(best,
		           (fs::path(common.out_dir) / "model_best.bin").string());
	}
	std::cout << "best: " << res.best.fitness->eval_accuracy * 100.0
	          << " % eval accuracy, " << res.best.fitness->neuron_count
	          << " neurons\n";
	return 0;
}

int cmd_report(const CommonOpts &common, const std::string &results_path)
{
	std::ifstream in(results_path);
	if (!in) {
		std::cerr << "cannot read " << results_path << "\n";
		return 1;
	}
	nlohmann::json j;
	in >> j;
	std::vector<RunResult> results;
	for (const auto &e : j) {
		RunResult r;
		r.network = e.value("network", "");
		r.platform = e.value("platform", "");
		for (const auto &[k, v] : e.value("swept", nlohmann::json::object())
		                              .items()) {
			r.swept[k] = v.get<double>();
		}
		r.ann_accuracy = e.value("ann_accuracy", 0.0);
		r.accuracy = e.value("accuracy", 0.0);
		r.accuracy_sd = e.value("accuracy_sd", 0.0);
		r.conversion_loss = e.value("conversion_loss", 0.0);
		r.wall_clock_ms = e.value("wall_clock_ms", 0.0);
		r.energy_mj = e.value("energy_mj", 0.0);
		r.batch_size = e.value("batch_size", 0);
		r.instances = e.value("instances", 0);
		r.presyn_events = e.value("presyn_events", uint64_t(0));
		r.dropped_spikes = e.value("dropped_spikes", uint64_t(0));
		r.error = e.value("error", "");
		results.push_back(std::move(r));
	}
	report(results, common.out_dir);
	return 0;
}

}  // namespace

int main(int argc, char **argv)
{
	CLI::App app{"snnbench -- ANN-to-SNN conversion workbench"};
	app.require_subcommand(1);
	CommonOpts common;
	app.add_option("--data", common.data_dir, "MNIST directory");
	app.add_option("--out", common.out_dir, "output directory");
	app.add_option("--profile-dir", common.profile_dir,
	               "hardware profile directory");
	app.add_option("--seed", common.seed, "global RNG seed");

	// train
	auto *train_cmd = app.add_subcommand("train", "train an MLP");
	std::string preset, out_model = "model.bin";
	std::vector<int> hidden;
	int epochs = 0;
	double lr = 0.0;
	train_cmd->add_option("--preset", preset, "spikey | nas129");
	train_cmd->add_option("--hidden", hidden, "hidden layer widths");
	train_cmd->add_option("--epochs", epochs, "override epoch count");
	train_cmd->add_option("--lr", lr, "override learning rate");
	train_cmd->add_option("--model", out_model, "output model file");

	// convert / run / sweep share the experiment options
	std::string config, model_path, profile_name;
	int n_samples = 0;
	bool keep_going = false;
	auto add_exp_opts = [&](CLI::App *cmd) {
		cmd->add_option("--config", config, "experiment JSON");
		cmd->add_option("--model", model_path, "trained model file");
		cmd->add_option("--profile", profile_name, "platform profile");
		cmd->add_option("-n,--samples", n_samples, "test samples");
		cmd->add_flag("--keep-going", keep_going,
		              "record cell errors instead of failing");
	};
	auto *convert_cmd =
	    app.add_subcommand("convert", "convert + ideal-simulator check");
	add_exp_opts(convert_cmd);
	auto *run_cmd = app.add_subcommand("run", "run one experiment");
	add_exp_opts(run_cmd);
	auto *sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
	add_exp_opts(sweep_cmd);

	// hil
	auto *hil_cmd = app.add_subcommand("hil", "in-the-loop retraining");
	int hil_epochs = 10, hil_samples = 1000, hil_eval = 2000;
	double hil_lr = 0.05;
	hil_cmd->add_option("--config", config, "experiment JSON");
	hil_cmd->add_option("--model", model_path, "trained model file");
	hil_cmd->add_option("--profile", profile_name, "platform profile");
	hil_cmd->add_option("--epochs", hil_epochs, "retraining epochs");
	hil_cmd->add_option("--lr", hil_lr, "retraining learning rate");
	hil_cmd->add_option("--samples", hil_samples, "samples per epoch");
	hil_cmd->add_option("--eval-samples", hil_eval, "test samples");

	// nas
	auto *nas_cmd = app.add_subcommand("nas", "architecture search");
	int pop = 12, gens = 10, nas_epochs = 5, nas_train = 0;
	nas_cmd->add_option("--population", pop, "population size");
	nas_cmd->add_option("--generations", gens, "generations");
	nas_cmd->add_option("--train-epochs", nas_epochs, "epochs per genome");
	nas_cmd->add_option("--train-samples", nas_train,
	                    "train subset size (0 = all)");

	// report
	auto *report_cmd = app.add_subcommand("report", "regenerate artifacts");
	std::string results_path = "out/results.json";
	report_cmd->add_option("--results", results_path, "results.json file");

	CLI11_PARSE(app, argc, argv);

	try {
		if (*train_cmd) {
			return cmd_train(common, preset, hidden, epochs, lr, out_model);
		}
		if (*convert_cmd || *run_cmd || *sweep_cmd) {
			ExperimentSpec spec = spec_from_cli(common, config, model_path,
			                                    profile_name, n_samples);
			if (*convert_cmd) {
				spec.sweep.clear();
				spec.platform = "ideal";
			}
			return cmd_run(common, spec, keep_going);
		}
		if (*hil_cmd) {
			ExperimentSpec spec = spec_from_cli(common, config, model_path,
			                                    profile_name, 0);
			return cmd_hil(common, spec, hil_epochs, hil_lr, hil_samples,
			               hil_eval);
		}
		if (*nas_cmd) {
			return cmd_nas(common, pop, gens, nas_epochs, nas_train);
		}
		if (*report_cmd) {
			return cmd_report(common, results_path);
		}
	}
	catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
	return 0;
}
