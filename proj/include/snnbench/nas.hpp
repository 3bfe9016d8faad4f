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

#include <functional>
#include <map>
#include <optional>
#include <random>

#include "snnbench/ann.hpp"

namespace snnbench {

struct StateError : std::logic_error {
	using std::logic_error::logic_error;
};

struct FitnessRecord {
	double eval_accuracy = 0.0;  // fraction in [0,1]
	int neuron_count = 0;        // hidden neurons only
};

/**
 * Architecture genome: DAG of dense ReLU layer nodes between the fixed
 * input node (id 0) and output node (id 1, 10 units). Node ids are
 * globally unique across a search so meta graphs can union by id.
 */
struct Genome {
	std::map<int, int> node_width;           // id -> width (incl. 0 and 1)
	std::vector<std::pair<int, int>> edges;  // (src, dst), acyclic
	std::optional<FitnessRecord> fitness;

	int input_id() const { return 0; }
	int output_id() const { return 1; }
	int hidden_neurons() const;
	bool is_sequential() const;  // a single input->output chain
	/// Hidden widths in topological order (throws for non-sequential).
	std::vector<int> chain_widths() const;
	std::vector<int> topological_order() const;  // throws on cycles
	void validate() const;
	uint64_t hash() const;
};

struct NasConfig;

struct MetaElement {
	FitnessRecord best;
	int last_used = 0;
	bool examined = false;  // some evaluated architecture contained it
};

/**
 * Union DAG of the structural elements of contributing genomes, with
 * the best fitness any containing architecture achieved and a step
 * counter driving the forgetting rule.
 */
struct MetaGraph {
	std::map<int, int> node_width;
	std::map<int, MetaElement> nodes;
	std::map<std::pair<int, int>, MetaElement> edge_elems;
	int step = 0;

	void absorb(const Genome &g, const FitnessRecord &fit,
	            const NasConfig &cfg);
	/// Insert missing elements and reset last_used without a fitness
	/// claim (used while breeding, before the child is evaluated).
	void touch(const Genome &g);
	void merge(const MetaGraph &other, const NasConfig &cfg);
	/// Drop elements unused for `horizon` or more steps.
	void prune(int horizon = 5);
	bool contains_node(int id) const { return nodes.count(id) > 0; }
	bool contains_edge(int u, int v) const
	{
		return edge_elems.count({u, v}) > 0;
	}
};

struct NasConfig {
	int population = 36;
	int parents = 20;
	int elitism = 2;
	int generations = 75;
	double accuracy_threshold = 0.97;   // fraction
	double neurons_per_percent = 100.0;
	double ranking_base = 0.9;
	double novelty_bonus = 0.3;   // weight share of never-examined elements
	double skip_edge_prob = 0.25; // chance of a non-sequential child
	int forget_horizon = 5;
	int min_width = 10;
	int max_width = 1500;
	int max_depth = 4;  // hidden layers per sampled path
	uint64_t seed = 1;

	void validate() const;
};

/// True if `a` beats `b` under the threshold/trade-off rule.
bool fitness_better(const FitnessRecord &a, const FitnessRecord &b,
                    const NasConfig &cfg);

/// Ordered fitness key for an evaluated genome (higher is better);
/// pair of (tier score, -neurons) for tie-breaking.
std::pair<double, double> fitness_key(const Genome &g, const NasConfig &cfg);

/// Exponential-ranking draw of cfg.parents indices without replacement.
std::vector<int> select(const std::vector<Genome> &pop, const NasConfig &cfg,
                        std::mt19937_64 &rng);

struct BredGenome {
	Genome genome;
	MetaGraph meta;
};

/**
 * Child from two parents: meta graphs are merged, a fresh input->output
 * path is sampled with rank-quality edge weights and a novelty bonus,
 * optionally a skip edge makes the child non-sequential. `next_id`
 * supplies fresh node ids and is advanced.
 */
BredGenome recombine(const Genome &a, const MetaGraph &ma, const Genome &b,
                     const MetaGraph &mb, const NasConfig &cfg,
                     std::mt19937_64 &rng, int &next_id);

/// Random sequential seed genome (1-3 hidden layers, log-uniform widths).
Genome random_genome(int input_dim, const NasConfig &cfg,
                     std::mt19937_64 &rng, int &next_id);

using Evaluator = std::function<FitnessRecord(const Genome &)>;

struct NasTraceEntry {
	int generation;
	uint64_t hash;
	std::vector<int> dims;  // hidden widths, topological (empty if DAG)
	bool sequential;
	double eval_accuracy;
	int neuron_count;
};

struct NasResult {
	std::vector<NasTraceEntry> trace;
	std::vector<NasTraceEntry> pareto;  // accuracy vs neurons front
	Genome best;
};

/**
 * Full search loop with elitism replacement. The trace is appended as
 * JSON-lines to `trace_path` after every generation (empty = no file),
 * so an evaluator failure leaves a partial trace behind.
 */
NasResult evolve(int input_dim, const NasConfig &cfg,
                 const Evaluator &evaluator,
                 const std::string &trace_path = "");

void export_pareto_csv(const std::vector<NasTraceEntry> &pareto,
                       const std::string &path);

/// Sequential genomes map 1:1 onto the dense model format.
AnnModel genome_to_model(const Genome &g, uint64_t seed);

/**
 * Train/evaluate a genome directly on its DAG (per-edge dense weights,
 * ReLU nodes, softmax cross-entropy); handles non-sequential genomes
 * that the dense model format cannot express.
 */
FitnessRecord evaluate_genome(const Genome &g, const Dataset &train,
                              const Dataset &eval, const TrainConfig &cfg);

}  // namespace snnbench
