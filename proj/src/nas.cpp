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

#include "snnbench/nas.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace snnbench {

/*
 * Genome
 */

int Genome::hidden_neurons() const
{
	int n = 0;
	for (const auto &[id, w] : node_width) {
		if (id != input_id() && id != output_id()) {
			n += w;
		}
	}
	return n;
}

std::vector<int> Genome::topological_order() const
{
	std::map<int, int> in_degree;
	std::map<int, std::vector<int>> succ;
	for (const auto &[id, w] : node_width) {
		in_degree[id];
	}
	for (const auto &[u, v] : edges) {
		succ[u].push_back(v);
		in_degree[v]++;
	}
	std::vector<int> ready, order;
	for (const auto &[id, d] : in_degree) {
		if (d == 0) {
			ready.push_back(id);
		}
	}
	while (!ready.empty()) {
		const int u = ready.back();
		ready.pop_back();
		order.push_back(u);
		for (int v : succ[u]) {
			if (--in_degree[v] == 0) {
				ready.push_back(v);
			}
		}
	}
	if (order.size() != node_width.size()) {
		throw std::invalid_argument("genome graph has a cycle");
	}
	return order;
}

bool Genome::is_sequential() const
{
	std::map<int, int> out_deg, in_deg;
	for (const auto &[u, v] : edges) {
		out_deg[u]++;
		in_deg[v]++;
	}
	for (const auto &[id, w] : node_width) {
		if (id != output_id() && out_deg[id] != 1) {
			return false;
		}
		if (id != input_id() && in_deg[id] != 1) {
			return false;
		}
	}
	return true;
}

std::vector<int> Genome::chain_widths() const
{
	if (!is_sequential()) {
		throw StateError("genome is not a sequential chain");
	}
	std::map<int, int> next;
	for (const auto &[u, v] : edges) {
		next[u] = v;
	}
	std::vector<int> widths;
	int cur = input_id();
	while (cur != output_id()) {
		cur = next.at(cur);
		if (cur != output_id()) {
			widths.push_back(node_width.at(cur));
		}
	}
	return widths;
}

void Genome::validate() const
{
	if (node_width.count(input_id()) == 0 ||
	    node_width.count(output_id()) == 0) {
		throw std::invalid_argument("genome misses input or output node");
	}
	for (const auto &[u, v] : edges) {
		if (node_width.count(u) == 0 || node_width.count(v) == 0) {
			throw std::invalid_argument("edge references unknown node");
		}
	}
	topological_order();  // throws on cycles

	// every node must sit on some input->output path
	std::map<int, std::vector<int>> succ, pred;
	for (const auto &[u, v] : edges) {
		succ[u].push_back(v);
		pred[v].push_back(u);
	}
	auto reach = [&](int start, std::map<int, std::vector<int>> &adj) {
		std::set<int> seen{start};
		std::vector<int> stack{start};
		while (!stack.empty()) {
			int u = stack.back();
			stack.pop_back();
			for (int v : adj[u]) {
				if (seen.insert(v).second) {
					stack.push_back(v);
				}
			}
		}
		return seen;
	};
	auto fwd = reach(input_id(), succ);
	auto bwd = reach(output_id(), pred);
	for (const auto &[id, w] : node_width) {
		if (fwd.count(id) == 0 || bwd.count(id) == 0) {
			throw std::invalid_argument(
			    "node off every input->output path");
		}
	}
}

uint64_t Genome::hash() const
{
	uint64_t h = 1469598103934665603ULL;
	auto mix = [&h](uint64_t x) {
		h ^= x;
		h *= 1099511628211ULL;
	};
	for (const auto &[id, w] : node_width) {
		mix(uint64_t(id));
		mix(uint64_t(w));
	}
	for (const auto &[u, v] : edges) {
		mix(uint64_t(u) << 32 | uint64_t(uint32_t(v)));
	}
	return h;
}

/*
 * Fitness
 */

void NasConfig::validate() const
{
	if (parents > population || elitism >= population) {
		throw std::invalid_argument(
		    "need parents <= population and elitism < population");
	}
	if (ranking_base < 0.0 || ranking_base > 1.0) {
		throw std::invalid_argument("ranking_base must lie in [0,1]");
	}
	if (min_width < 1 || max_width < min_width || max_depth < 1) {
		throw std::invalid_argument("bad width/depth bounds");
	}
}

bool fitness_better(const FitnessRecord &a, const FitnessRecord &b,
                    const NasConfig &cfg)
{
	const bool a_ok = a.eval_accuracy >= cfg.accuracy_threshold;
	const bool b_ok = b.eval_accuracy >= cfg.accuracy_threshold;
	if (a_ok != b_ok) {
		return a_ok;
	}
	if (!a_ok) {
		// both below threshold: accuracy only, neurons break ties
		if (a.eval_accuracy != b.eval_accuracy) {
			return a.eval_accuracy > b.eval_accuracy;
		}
		return a.neuron_count < b.neuron_count;
	}
	// 1% accuracy is worth cfg.neurons_per_percent neurons
	const double sa =
	    a.eval_accuracy * 100.0 - a.neuron_count / cfg.neurons_per_percent;
	const double sb =
	    b.eval_accuracy * 100.0 - b.neuron_count / cfg.neurons_per_percent;
	if (sa != sb) {
		return sa > sb;
	}
	return a.neuron_count < b.neuron_count;
}

std::pair<double, double> fitness_key(const Genome &g, const NasConfig &cfg)
{
	if (!g.fitness) {
		throw StateError("fitness of an unevaluated genome");
	}
	const FitnessRecord &f = *g.fitness;
	double primary;
	if (f.eval_accuracy >= cfg.accuracy_threshold) {
		primary = 1000.0 + f.eval_accuracy * 100.0 -
		          f.neuron_count / cfg.neurons_per_percent;
	}
	else {
		primary = f.eval_accuracy * 100.0;
	}
	return {primary, -double(f.neuron_count)};
}

std::vector<int> select(const std::vector<Genome> &pop, const NasConfig &cfg,
                        std::mt19937_64 &rng)
{
	std::vector<int> order(pop.size());
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
		return fitness_key(pop[a], cfg) > fitness_key(pop[b], cfg);
	});

	std::vector<double> weight(pop.size());
	for (size_t r = 0; r < order.size(); r++) {
		weight[r] = std::pow(cfg.ranking_base, double(r));
	}
	std::vector<int> picked;
	std::vector<char> taken(pop.size(), 0);
	const int n_parents = std::min<int>(cfg.parents, int(pop.size()));
	std::uniform_real_distribution<double> uni(0.0, 1.0);
	while (int(picked.size()) < n_parents) {
		double total = 0.0;
		for (size_t r = 0; r < weight.size(); r++) {
			if (!taken[r]) {
				total += weight[r];
			}
		}
		size_t chosen = weight.size();
		if (total > 0.0) {
			double x = uni(rng) * total;
			for (size_t r = 0; r < weight.size(); r++) {
				if (taken[r]) {
					continue;
				}
				chosen = r;  // fp leftovers land on the last untaken
				if (x < weight[r]) {
					break;
				}
				x -= weight[r];
			}
		}
		else {
			// degenerate base: deterministic best-first
			for (size_t r = 0; r < weight.size(); r++) {
				if (!taken[r]) {
					chosen = r;
					break;
				}
			}
		}
		taken[chosen] = 1;
		picked.push_back(order[chosen]);
	}
	return picked;
}

/*
 * MetaGraph
 */

void MetaGraph::touch(const Genome &g)
{
	for (const auto &[id, w] : g.node_width) {
		node_width[id] = w;
		auto &e = nodes[id];
		e.last_used = step;
	}
	for (const auto &edge : g.edges) {
		edge_elems[edge].last_used = step;
	}
}

void MetaGraph::absorb(const Genome &g, const FitnessRecord &fit,
                       const NasConfig &cfg)
{
	touch(g);
	auto update = [&](MetaElement &e) {
		if (!e.examined || fitness_better(fit, e.best, cfg)) {
			e.best = fit;
		}
		e.examined = true;
	};
	for (const auto &[id, w] : g.node_width) {
		update(nodes[id]);
	}
	for (const auto &edge : g.edges) {
		update(edge_elems[edge]);
	}
}

void MetaGraph::merge(const MetaGraph &other, const NasConfig &cfg)
{
	step = std::max(step, other.step);
	for (const auto &[id, w] : other.node_width) {
		node_width[id] = w;
	}
	auto fold = [&](MetaElement &mine, const MetaElement &theirs) {
		mine.last_used = std::max(mine.last_used, theirs.last_used);
		if (theirs.examined &&
		    (!mine.examined || fitness_better(theirs.best, mine.best, cfg))) {
			mine.best = theirs.best;
			mine.examined = true;
		}
	};
	for (const auto &[id, e] : other.nodes) {
		fold(nodes[id], e);
	}
	for (const auto &[edge, e] : other.edge_elems) {
		fold(edge_elems[edge], e);
	}
}

void MetaGraph::prune(int horizon)
{
	for (auto it = edge_elems.begin(); it != edge_elems.end();) {
		if (step - it->second.last_used >= horizon) {
			it = edge_elems.erase(it);
		}
		else {
			++it;
		}
	}
	for (auto it = nodes.begin(); it != nodes.end();) {
		const int id = it->first;
		if (id != 0 && id != 1 && step - it->second.last_used >= horizon) {
			node_width.erase(id);
			it = nodes.erase(it);
		}
		else {
			++it;
		}
	}
	// edges to forgotten nodes go too
	for (auto it = edge_elems.begin(); it != edge_elems.end();) {
		if (nodes.count(it->first.first) == 0 ||
		    nodes.count(it->first.second) == 0) {
			it = edge_elems.erase(it);
		}
		else {
			++it;
		}
	}
}

/*
 * Breeding
 */

namespace {

int log_uniform_width(const NasConfig &cfg, std::mt19937_64 &rng)
{
	std::uniform_real_distribution<double> uni(std::log(double(cfg.min_width)),
	                                           std::log(double(cfg.max_width)));
	return std::max(cfg.min_width,
	                std::min(cfg.max_width, int(std::exp(uni(rng)) + 0.5)));
}

/// Rank-based positive quality of meta edges among `candidates`
/// (best rank gets the largest weight).
std::vector<double> rank_weights(
    const MetaGraph &mg, const std::vector<std::pair<int, int>> &candidates,
    const NasConfig &cfg)
{
	const size_t n = candidates.size();
	std::vector<size_t> order(n);
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
		const MetaElement &ea = mg.edge_elems.at(candidates[a]);
		const MetaElement &eb = mg.edge_elems.at(candidates[b]);
		if (ea.examined != eb.examined) {
			return ea.examined;
		}
		return fitness_better(ea.best, eb.best, cfg);
	});
	std::vector<double> w(n);
	for (size_t r = 0; r < n; r++) {
		w[order[r]] = double(n - r);
	}
	return w;
}

}  // namespace

Genome random_genome(int input_dim, const NasConfig &cfg,
                     std::mt19937_64 &rng, int &next_id)
{
	Genome g;
	g.node_width[0] = input_dim;
	g.node_width[1] = 10;
	const int depth = 1 + int(rng() % 3);
	int prev = 0;
	for (int d = 0; d < depth; d++) {
		const int id = next_id++;
		g.node_width[id] = log_uniform_width(cfg, rng);
		g.edges.emplace_back(prev, id);
		prev = id;
	}
	g.edges.emplace_back(prev, 1);
	g.validate();
	return g;
}

BredGenome recombine(const Genome &a, const MetaGraph &ma, const Genome &b,
                     const MetaGraph &mb, const NasConfig &cfg,
                     std::mt19937_64 &rng, int &next_id)
{
	BredGenome child;
	MetaGraph &mg = child.meta;
	mg = ma;
	mg.merge(mb, cfg);
	mg.step++;

	// sample an input->output path, quality-weighted with a novelty
	// share for fresh (never-examined) material
	Genome &g = child.genome;
	g.node_width[0] = a.node_width.at(0);
	g.node_width[1] = 10;
	std::set<int> visited{0, 1};
	std::uniform_real_distribution<double> uni(0.0, 1.0);
	int cur = 0;
	int depth = 0;
	while (cur != 1) {
		std::vector<std::pair<int, int>> cand;
		if (depth < cfg.max_depth) {
			for (const auto &[edge, elem] : mg.edge_elems) {
				if (edge.first == cur && visited.count(edge.second) == 0) {
					cand.push_back(edge);
				}
			}
			if (mg.contains_edge(cur, 1)) {
				cand.emplace_back(cur, 1);
			}
		}
		std::vector<double> w =
		    cand.empty() ? std::vector<double>{} : rank_weights(mg, cand, cfg);
		double total = std::accumulate(w.begin(), w.end(), 0.0);
		// fresh node / direct-exit options, sized relative to the rest
		const double fresh_w =
		    depth < cfg.max_depth
		        ? cfg.novelty_bonus * std::max(total, 1.0)
		        : 0.0;
		const double exit_w = mg.contains_edge(cur, 1) || total > 0.0
		                          ? 0.0
		                          : 1.0;  // nothing known: allow closing
		double x = uni(rng) * (total + fresh_w + exit_w);
		int next = -1;
		for (size_t i = 0; i < cand.size(); i++) {
			if (x < w[i]) {
				next = cand[i].second;
				break;
			}
			x -= w[i];
		}
		if (next == -1) {
			if (x < fresh_w) {
				next = next_id++;
				g.node_width[next] = log_uniform_width(cfg, rng);
			}
			else {
				next = 1;
			}
		}
		if (next != 1 && g.node_width.count(next) == 0) {
			g.node_width[next] = mg.node_width.at(next);
		}
		g.edges.emplace_back(cur, next);
		visited.insert(next);
		cur = next;
		depth++;
	}

	// occasionally splice a skip edge: the child becomes a
	// non-sequential DAG (still acyclic, edge follows path order)
	if (g.edges.size() >= 2 && uni(rng) < cfg.skip_edge_prob) {
		std::vector<int> path{0};
		for (const auto &[u, v] : g.edges) {
			path.push_back(v);
		}
		const size_t i = rng() % (path.size() - 2);
		const size_t j =
		    i + 2 + rng() % (path.size() - i - 2);
		const std::pair<int, int> skip{path[i], path[j]};
		if (std::find(g.edges.begin(), g.edges.end(), skip) ==
		    g.edges.end()) {
			g.edges.push_back(skip);
		}
	}
	g.validate();

	mg.touch(g);
	mg.prune(cfg.forget_horizon);
	return child;
}

/*
 * Evolution loop
 */

namespace {

nlohmann::json trace_json(const NasTraceEntry &e)
{
	nlohmann::json j;
	j["generation"] = e.generation;
	j["hash"] = e.hash;
	j["dims"] = e.dims;
	j["sequential"] = e.sequential;
	j["eval_accuracy"] = e.eval_accuracy;
	j["neurons"] = e.neuron_count;
	return j;
}

NasTraceEntry make_entry(int gen, const Genome &g)
{
	NasTraceEntry e;
	e.generation = gen;
	e.hash = g.hash();
	e.sequential = g.is_sequential();
	if (e.sequential) {
		e.dims = g.chain_widths();
	}
	e.eval_accuracy = g.fitness->eval_accuracy;
	e.neuron_count = g.fitness->neuron_count;
	return e;
}

}  // namespace

NasResult evolve(int input_dim, const NasConfig &cfg,
                 const Evaluator &evaluator, const std::string &trace_path)
{
	cfg.validate();
	NasResult res;
	std::mt19937_64 master(cfg.seed);
	int next_id = 2;

	std::vector<BredGenome> pop;
	for (int i = 0; i < cfg.population; i++) {
		BredGenome m;
		m.genome = random_genome(input_dim, cfg, master, next_id);
		m.meta.touch(m.genome);
		pop.push_back(std::move(m));
	}

	bool have_best = false;
	auto flush_trace = [&](const std::vector<NasTraceEntry> &entries) {
		if (trace_path.empty()) {
			return;
		}
		std::ofstream out(trace_path, std::ios::app);
		for (const auto &e : entries) {
			out << trace_json(e).dump() << "\n";
		}
	};

	for (int gen = 0; gen < cfg.generations; gen++) {
		std::vector<NasTraceEntry> gen_entries;
		for (auto &m : pop) {
			if (!m.genome.fitness) {
				try {
					m.genome.fitness = evaluator(m.genome);
				}
				catch (...) {
					flush_trace(gen_entries);
					throw;
				}
				m.meta.absorb(m.genome, *m.genome.fitness, cfg);
			}
			if (!have_best ||
			    fitness_better(*m.genome.fitness, *res.best.fitness, cfg)) {
				res.best = m.genome;
				have_best = true;
			}
			gen_entries.push_back(make_entry(gen, m.genome));
		}
		flush_trace(gen_entries);
		res.trace.insert(res.trace.end(), gen_entries.begin(),
		                 gen_entries.end());
		if (gen + 1 == cfg.generations) {
			break;
		}

		std::vector<Genome> plain;
		for (const auto &m : pop) {
			plain.push_back(m.genome);
		}
		std::vector<int> parents = select(plain, cfg, master);

		std::vector<int> order(pop.size());
		std::iota(order.begin(), order.end(), 0);
		std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
			return fitness_key(plain[a], cfg) > fitness_key(plain[b], cfg);
		});
		std::vector<BredGenome> next;
		for (int e = 0; e < cfg.elitism; e++) {
			next.push_back(pop[order[e]]);
		}
		for (int slot = cfg.elitism; slot < cfg.population; slot++) {
			// independent stream per child: reproducible regardless of
			// evaluation scheduling
			std::mt19937_64 rng(cfg.seed ^
			                    (0xC0FFEEULL + 2654435761ULL * (gen + 1) +
			                     uint64_t(slot)));
			const int pa = parents[rng() % parents.size()];
			int pb = parents[rng() % parents.size()];
			if (parents.size() > 1) {
				while (pb == pa) {
					pb = parents[rng() % parents.size()];
				}
			}
			next.push_back(recombine(pop[pa].genome, pop[pa].meta,
			                         pop[pb].genome, pop[pb].meta, cfg, rng,
			                         next_id));
		}
		pop = std::move(next);
	}

	// accuracy-vs-neurons front over everything ever evaluated
	std::vector<NasTraceEntry> all = res.trace;
	std::stable_sort(all.begin(), all.end(),
	                 [](const NasTraceEntry &a, const NasTraceEntry &b) {
		                 if (a.neuron_count != b.neuron_count) {
			                 return a.neuron_count < b.neuron_count;
		                 }
		                 return a.eval_accuracy > b.eval_accuracy;
	                 });
	double best_acc = -1.0;
	std::set<uint64_t> seen;
	for (const auto &e : all) {
		if (e.eval_accuracy > best_acc && seen.insert(e.hash).second) {
			res.pareto.push_back(e);
			best_acc = e.eval_accuracy;
		}
	}
	return res;
}

void export_pareto_csv(const std::vector<NasTraceEntry> &pareto,
                       const std::string &path)
{
	std::ofstream out(path);
	if (!out) {
		throw std::runtime_error("cannot write " + path);
	}
	out << "neurons,eval_accuracy,sequential,dims,hash\n";
	for (const auto &e : pareto) {
		out << e.neuron_count << "," << e.eval_accuracy << ","
		    << (e.sequential ? 1 : 0) << ",";
		for (size_t i = 0; i < e.dims.size(); i++) {
			out << (i ? "x" : "") << e.dims[i];
		}
		out << "," << e.hash << "\n";
	}
}

AnnModel genome_to_model(const Genome &g, uint64_t seed)
{
	std::vector<int> dims;
	dims.push_back(g.node_width.at(0));
	for (int w : g.chain_widths()) {
		dims.push_back(w);
	}
	dims.push_back(10);
	return make_mlp(dims, OutputHead::softmax, Loss::cross_entropy, seed);
}

/*
 * DAG trainer (handles non-sequential genomes)
 */

FitnessRecord evaluate_genome(const Genome &g, const Dataset &train,
                              const Dataset &eval, const TrainConfig &cfg)
{
	g.validate();
	const std::vector<int> topo = g.topological_order();
	std::map<int, std::vector<size_t>> in_edges;  // node -> edge indices
	for (size_t e = 0; e < g.edges.size(); e++) {
		in_edges[g.edges[e].second].push_back(e);
	}

	// per-edge dense weights, fan-in summed over all incoming edges
	std::mt19937_64 rng(cfg.rng_seed);
	std::vector<Eigen::MatrixXd> w(g.edges.size());
	for (size_t e = 0; e < g.edges.size(); e++) {
		const auto &[u, v] = g.edges[e];
		int fan_in = 0;
		for (size_t e2 : in_edges[v]) {
			fan_in += g.node_width.at(g.edges[e2].first);
		}
		const double bound =
		    std::sqrt(6.0 / double(fan_in + g.node_width.at(v)));
		std::uniform_real_distribution<double> uni(-bound, bound);
		w[e].resize(g.node_width.at(v), g.node_width.at(u));
		for (Eigen::Index r = 0; r < w[e].rows(); r++) {
			for (Eigen::Index c = 0; c < w[e].cols(); c++) {
				w[e](r, c) = uni(rng);
			}
		}
	}

	auto forward = [&](const Eigen::MatrixXd &x,
	                   std::map<int, Eigen::MatrixXd> &acts) {
		acts[0] = x;
		for (int v : topo) {
			if (v == 0) {
				continue;
			}
			Eigen::MatrixXd z =
			    Eigen::MatrixXd::Zero(x.rows(), g.node_width.at(v));
			for (size_t e : in_edges[v]) {
				z += acts.at(g.edges[e].first) * w[e].transpose();
			}
			acts[v] = v == 1 ? z : z.cwiseMax(0.0);
		}
	};

	std::vector<Eigen::Index> order(train.size());
	std::iota(order.begin(), order.end(), 0);
	for (int epoch = 0; epoch < cfg.epochs; epoch++) {
		for (Eigen::Index i = train.size() - 1; i > 0; i--) {
			std::swap(order[i], order[rng() % uint64_t(i + 1)]);
		}
		for (Eigen::Index start = 0; start < train.size();
		     start += cfg.batch_size) {
			const Eigen::Index nb =
			    std::min<Eigen::Index>(cfg.batch_size, train.size() - start);
			Eigen::MatrixXd x(nb, train.images.cols());
			std::vector<int> y(nb);
			for (Eigen::Index i = 0; i < nb; i++) {
				x.row(i) = train.images.row(order[start + i]);
				y[i] = train.labels[order[start + i]];
			}
			std::map<int, Eigen::MatrixXd> acts;
			forward(x, acts);

			// softmax cross-entropy delta at the output node
			std::map<int, Eigen::MatrixXd> delta;
			Eigen::MatrixXd p = acts.at(1);
			for (Eigen::Index i = 0; i < nb; i++) {
				Eigen::RowVectorXd row = p.row(i);
				row.array() -= row.maxCoeff();
				Eigen::RowVectorXd ex = row.array().exp();
				p.row(i) = ex / ex.sum();
				p(i, y[i]) -= 1.0;
			}
			delta[1] = p;

			std::vector<Eigen::MatrixXd> grad(g.edges.size());
			for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
				const int v = *it;
				if (v == 0 || delta.count(v) == 0) {
					continue;
				}
				if (v != 1) {
					delta[v] = delta[v].cwiseProduct(
					    (acts.at(v).array() > 0.0).cast<double>().matrix());
				}
				for (size_t e : in_edges[v]) {
					const int u = g.edges[e].first;
					grad[e] = delta[v].transpose() * acts.at(u) / double(nb);
					if (u != 0) {
						Eigen::MatrixXd back = delta[v] * w[e];
						if (delta.count(u)) {
							delta[u] += back;
						}
						else {
							delta[u] = std::move(back);
						}
					}
				}
			}
			for (size_t e = 0; e < g.edges.size(); e++) {
				if (grad[e].size() > 0) {
					w[e] -= cfg.learning_rate * grad[e];
				}
			}
		}
	}

	std::map<int, Eigen::MatrixXd> acts;
	forward(eval.images, acts);
	const Eigen::MatrixXd &scores = acts.at(1);
	int correct = 0;
	for (Eigen::Index i = 0; i < eval.size(); i++) {
		Eigen::Index arg;
		scores.row(i).maxCoeff(&arg);
		if (int(arg) == eval.labels[i]) {
			correct++;
		}
	}
	FitnessRecord fit;
	fit.eval_accuracy = double(correct) / double(eval.size());
	fit.neuron_count = g.hidden_neurons();
	return fit;
}

}  // namespace snnbench
