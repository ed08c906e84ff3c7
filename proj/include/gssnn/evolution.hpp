/* Copyright 2026 The gssnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// The evolutionary loop over graph-generating programs.
//
// Each iteration: evaluate fitness of new entries, discard the bottom half by
// training accuracy once the population reaches the selection threshold,
// compress the surviving programs into new library abstractions, fit and
// flatten the unigram model, and search for structurally novel programs to
// refill the population.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gssnn/compression.hpp"
#include "gssnn/dsl.hpp"
#include "gssnn/embedding.hpp"
#include "gssnn/graph.hpp"
#include "gssnn/hash.hpp"
#include "gssnn/isomorphism.hpp"
#include "gssnn/search.hpp"

namespace gssnn {

struct FitnessRecord {
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
  std::string evaluator_id;

  friend bool operator==(const FitnessRecord&, const FitnessRecord&) = default;
};

struct PopulationEntry {
  Expr program;
  FeatureGraph graph;
  std::optional<FitnessRecord> fitness;

  friend bool operator==(const PopulationEntry&, const PopulationEntry&) = default;
};

enum class FitnessBackendKind : std::uint8_t { Surrogate, External };

struct EvolutionConfig {
  std::size_t pop_cap = 50;
  std::size_t selection_threshold = 25;
  std::string heuristic = "rank-LTP-50";
  double budget_secs = 15.0;
  /// When set, search stops after this many enumerated programs; runs are
  /// then reproducible regardless of machine speed.
  std::optional<std::size_t> max_enumerated;
  std::size_t max_size = kMaxProgramSize;
  std::size_t compression_rounds = 3;
  std::size_t max_arity = kMaxAbstractionArity;
  double max_spread = 0.5;
  std::size_t iterations = 1;
  FitnessBackendKind fitness_backend = FitnessBackendKind::Surrogate;
  std::uint64_t seed = 0;
  /// Embedding spec handed to fitness jobs; graphs larger than embed_m
  /// elements are not admitted.
  std::size_t embed_m = 512;
  std::size_t embed_q = 512;
  EvalLimits limits{};

  void check() const {
    if (selection_threshold < 1 || pop_cap < selection_threshold) {
      throw Error("config: need pop_cap >= selection_threshold >= 1");
    }
    if (heuristic != "rank-LTP-50") throw Error("config: unsupported heuristic '" + heuristic + "'");
    if (max_arity > kMaxAbstractionArity) throw Error("config: max_arity must be <= 2");
    if (max_size == 0 || max_spread < 0.0 || budget_secs < 0.0) {
      throw Error("config: budgets must be non-negative");
    }
    if (embed_q == 0 || embed_q % 4 != 0) throw Error("config: embed_q must be a multiple of 4");
  }
};

struct FitnessJob {
  std::string id;
  FeatureGraph graph;
  EmbeddingSpec spec;
  std::uint64_t seed = 0;
};

class FitnessUnavailable : public Error {
 public:
  using Error::Error;
};

class FitnessBackend {
 public:
  virtual ~FitnessBackend() = default;
  /// One record per job, in job order. Throws FitnessUnavailable.
  virtual std::vector<FitnessRecord> evaluate(std::span<const FitnessJob> jobs) = 0;
};

inline std::string canonical_form(const FeatureGraph& g) {
  std::string out;
  for (const auto& e : g.elements()) {
    if (e.is_node()) {
      out += "n" + std::to_string(e.rank) + ";";
    } else {
      out += "e" + std::to_string(e.rank) + ":" + std::to_string(std::min(e.u, e.v)) + "-" +
             std::to_string(std::max(e.u, e.v)) + ";";
    }
  }
  return out;
}

/// Deterministic stand-in for training: accuracies in [0.5, 1.0) hashed from
/// the graph's canonical featured form.
inline FitnessRecord surrogate_fitness(const FeatureGraph& g) {
  const auto h = fnv1a(canonical_form(g));
  return FitnessRecord{0.5 + 0.5 * unit_interval(h), 0.5 + 0.5 * unit_interval(splitmix64(h)),
                       "surrogate-v1"};
}

class SurrogateFitness final : public FitnessBackend {
 public:
  std::vector<FitnessRecord> evaluate(std::span<const FitnessJob> jobs) override {
    std::vector<FitnessRecord> out;
    out.reserve(jobs.size());
    for (const auto& j : jobs) out.push_back(surrogate_fitness(j.graph));
    return out;
  }
};

/// Population in selection order: training accuracy descending, then program
/// size ascending, then s-expression.
inline std::vector<PopulationEntry> rank_population(std::vector<PopulationEntry> entries,
                                                    const Library& lib) {
  struct Keyed {
    double acc;
    std::size_t size;
    std::string text;
    std::size_t index;
  };
  std::vector<Keyed> keys;
  keys.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].fitness) throw Error("selection: entry " + std::to_string(i) + " has no fitness");
    keys.push_back({entries[i].fitness->train_accuracy, program_size(entries[i].program),
                    to_sexpr(entries[i].program, lib), i});
  }
  std::sort(keys.begin(), keys.end(), [](const Keyed& a, const Keyed& b) {
    if (a.acc != b.acc) return a.acc > b.acc;
    if (a.size != b.size) return a.size < b.size;
    return a.text < b.text;
  });
  std::vector<PopulationEntry> out;
  out.reserve(entries.size());
  for (const auto& k : keys) out.push_back(std::move(entries[k.index]));
  return out;
}

/// rank-LTP-50: keeps the top ceil(n/2) entries by training accuracy.
inline std::vector<PopulationEntry> select_rank_ltp_50(std::vector<PopulationEntry> entries,
                                                       const Library& lib) {
  auto ranked = rank_population(std::move(entries), lib);
  ranked.resize(ranked.size() - ranked.size() / 2);
  return ranked;
}

struct EvolutionState {
  std::size_t iteration = 0;
  Library library = Library::initial();
  std::vector<PopulationEntry> population;
};

struct EvaluatedEntry {
  std::string program;
  std::size_t size = 0;
  FitnessRecord fitness;
};

struct AdoptedAbstraction {
  std::string name;
  std::string body;
  std::size_t arity = 0;
  long utility = 0;
};

struct ShorteningRecord {
  std::string before;
  std::string after;
};

struct IterationReport {
  std::size_t iteration = 0;
  std::size_t population_before = 0;
  /// The population after fitness evaluation, in rank order.
  std::vector<EvaluatedEntry> evaluated;
  bool selection_applied = false;
  std::size_t after_selection = 0;
  std::vector<EvaluatedEntry> discarded;
  std::size_t corpus_size_before = 0;
  std::size_t corpus_size_after = 0;
  std::vector<AdoptedAbstraction> abstractions;
  std::size_t search_requested = 0;
  SearchStats search;
  std::vector<ShorteningRecord> shortenings;
  std::size_t novel_added = 0;
  std::size_t population_after = 0;
  bool aborted = false;
  std::string abort_reason;
};

namespace detail {

inline std::vector<EvaluatedEntry> describe(std::span<const PopulationEntry> entries,
                                            const Library& lib) {
  std::vector<EvaluatedEntry> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back({to_sexpr(e.program, lib), program_size(e.program),
                   e.fitness.value_or(FitnessRecord{})});
  }
  return out;
}

}  // namespace detail

/// Advances `state` by one iteration. If the fitness backend fails, `state`
/// is left untouched and the report is marked aborted.
inline IterationReport run_iteration(EvolutionState& state, const EvolutionConfig& config,
                                     FitnessBackend& backend) {
  config.check();
  IterationReport report;
  report.iteration = state.iteration;
  report.population_before = state.population.size();

  EvolutionState next = state;
  auto& pop = next.population;

  // 1. Fitness for new entries.
  std::vector<FitnessJob> jobs;
  std::vector<std::size_t> job_owner;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (pop[i].fitness) continue;
    FitnessJob job;
    job.id = "it" + std::to_string(state.iteration) + "-e" + std::to_string(i);
    job.graph = pop[i].graph;
    job.spec = make_spec(pop[i].graph, config.embed_m, config.embed_q);
    job.seed = derive_seed(config.seed, "fitness", fnv1a(job.id));
    jobs.push_back(std::move(job));
    job_owner.push_back(i);
  }
  if (!jobs.empty()) {
    std::vector<FitnessRecord> records;
    try {
      records = backend.evaluate(jobs);
    } catch (const FitnessUnavailable& e) {
      report.aborted = true;
      report.abort_reason = e.what();
      report.population_after = state.population.size();
      return report;
    }
    if (records.size() != jobs.size()) throw Error("fitness backend returned wrong record count");
    for (std::size_t k = 0; k < jobs.size(); ++k) pop[job_owner[k]].fitness = records[k];
  }
  pop = rank_population(std::move(pop), next.library);
  report.evaluated = detail::describe(pop, next.library);

  // 2. Selection.
  if (pop.size() >= config.selection_threshold) {
    report.selection_applied = true;
    const auto keep = pop.size() - pop.size() / 2;
    report.discarded = detail::describe(std::span(pop).subspan(keep), next.library);
    pop = select_rank_ltp_50(std::move(pop), next.library);
  }
  report.after_selection = pop.size();

  // 3. Compression.
  std::vector<Expr> corpus;
  corpus.reserve(pop.size());
  for (const auto& e : pop) corpus.push_back(e.program);
  report.corpus_size_before = corpus_size(corpus);
  if (!corpus.empty() && config.compression_rounds > 0) {
    auto compressed = compress(corpus, next.library, config.compression_rounds, config.max_arity);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const auto regraph = evaluate(compressed.corpus[i], compressed.library, config.limits);
      if (!isomorphic_featured(regraph, pop[i].graph)) {
        throw Error("compression changed the semantics of " +
                    to_sexpr(pop[i].program, next.library));
      }
      pop[i].program = std::move(compressed.corpus[i]);
    }
    next.library = std::move(compressed.library);
    for (const auto& a : compressed.adopted) {
      report.abstractions.push_back({a.name, a.text, a.arity(), a.utility});
    }
    corpus.clear();
    for (const auto& e : pop) corpus.push_back(e.program);
  }
  report.corpus_size_after = corpus_size(corpus);

  // 4. Distribution.
  const auto model = reweight(infer_unigrams(corpus, next.library), config.max_spread);
  next.library.set_logps(model.logp);

  // 5. Search.
  SearchBudget budget;
  budget.seconds = config.max_enumerated ? std::numeric_limits<double>::infinity()
                                         : config.budget_secs;
  budget.max_enumerated = config.max_enumerated;
  budget.max_size = config.max_size;
  budget.max_results = config.pop_cap > pop.size() ? config.pop_cap - pop.size() : 0;
  budget.max_elements = config.embed_m;
  budget.limits = config.limits;
  report.search_requested = budget.max_results;

  std::vector<SearchMember> members;
  members.reserve(pop.size());
  for (const auto& e : pop) members.push_back({program_size(e.program), e.graph});
  auto found = heap_search(model, next.library, budget, {}, members);
  report.search = found.stats;
  for (auto& s : found.shortenings) {
    auto& entry = pop[s.member];
    report.shortenings.push_back({to_sexpr(entry.program, next.library), s.replacement.text});
    entry.program = std::move(s.replacement.program);
  }

  // 6. Admit novel programs.
  for (auto& c : found.programs) {
    pop.push_back(PopulationEntry{std::move(c.program), std::move(c.graph), std::nullopt});
  }
  report.novel_added = found.programs.size();
  report.population_after = pop.size();

  ++next.iteration;
  state = std::move(next);
  return report;
}

}  // namespace gssnn
