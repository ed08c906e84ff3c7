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

// Command-line front end: evolve, search, compress, emit-embedding, isocheck,
// validate and stats-csv.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gssnn.hpp"

namespace {

using gssnn::Json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntimeError = 2;

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string default_state_dir() {
  const char* env = std::getenv("GSSNN_STATE_DIR");
  return env != nullptr && *env != '\0' ? env : "state";
}

gssnn::Library load_library(const std::string& path) {
  if (path.empty()) return gssnn::Library::initial();
  return gssnn::library_from_json(gssnn::read_json_file(path));
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    gssnn::write_json_file(out_path, j);
  }
}

// ---------------------------------------------------------------------------

struct EvolveArgs {
  std::string config_path;
  std::string state_dir = default_state_dir();
  std::string jobs_dir = "jobs";
  std::string fitness;
  double poll_timeout_secs = 3600.0;
  double poll_interval_secs = 0.2;
  std::optional<std::size_t> iterations, pop_cap, selection_threshold, max_size,
      compression_rounds, max_programs, m, q;
  std::optional<double> budget_secs;
  std::optional<std::uint64_t> seed;
};

void add_evolve(CLI::App& app, EvolveArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("evolve", "Run evolutionary iterations, resuming from the state dir");
  cmd->add_option("--config", a.config_path, "JSON config; flags override it");
  cmd->add_option("--state-dir", a.state_dir, "State directory (default $GSSNN_STATE_DIR or ./state)");
  cmd->add_option("--iterations", a.iterations, "Iterations to run");
  cmd->add_option("--fitness", a.fitness, "surrogate | external")
      ->check(CLI::IsMember({"surrogate", "external"}));
  cmd->add_option("--jobs-dir", a.jobs_dir, "Job directory for the external backend");
  cmd->add_option("--poll-timeout-secs", a.poll_timeout_secs, "External backend timeout");
  cmd->add_option("--poll-interval-secs", a.poll_interval_secs, "External backend poll period");
  cmd->add_option("--pop-cap", a.pop_cap);
  cmd->add_option("--selection-threshold", a.selection_threshold);
  cmd->add_option("--budget-secs", a.budget_secs, "Search wall-clock budget");
  cmd->add_option("--max-programs", a.max_programs,
                  "Search budget in enumerated programs (replaces --budget-secs)");
  cmd->add_option("--max-size", a.max_size);
  cmd->add_option("--compression-rounds", a.compression_rounds);
  cmd->add_option("--seed", a.seed);
  cmd->add_option("--m", a.m, "Input dimensionality for fitness jobs");
  cmd->add_option("--q", a.q, "Element feature dimensionality for fitness jobs");

  cmd->callback([&a, &run] {
    run = [&a] {
      gssnn::EvolutionConfig config;
      if (!a.config_path.empty()) config = gssnn::config_from_json(gssnn::read_json_file(a.config_path));
      if (a.iterations) config.iterations = *a.iterations;
      if (!a.fitness.empty()) {
        config.fitness_backend = a.fitness == "surrogate" ? gssnn::FitnessBackendKind::Surrogate
                                                          : gssnn::FitnessBackendKind::External;
      }
      if (a.pop_cap) config.pop_cap = *a.pop_cap;
      if (a.selection_threshold) config.selection_threshold = *a.selection_threshold;
      if (a.budget_secs) config.budget_secs = *a.budget_secs;
      if (a.max_programs) config.max_enumerated = *a.max_programs;
      if (a.max_size) config.max_size = *a.max_size;
      if (a.compression_rounds) config.compression_rounds = *a.compression_rounds;
      if (a.seed) config.seed = *a.seed;
      if (a.m) config.embed_m = *a.m;
      if (a.q) config.embed_q = *a.q;
      config.check();

      std::unique_ptr<gssnn::FitnessBackend> backend;
      if (config.fitness_backend == gssnn::FitnessBackendKind::Surrogate) {
        backend = std::make_unique<gssnn::SurrogateFitness>();
      } else {
        backend = std::make_unique<gssnn::ExternalFitness>(a.jobs_dir, a.poll_timeout_secs,
                                                           a.poll_interval_secs);
      }

      const fs::path root = a.state_dir;
      auto state = gssnn::load_latest_state(root).value_or(gssnn::EvolutionState{});
      if (state.iteration > 0) {
        std::cerr << "resuming after iteration " << state.iteration - 1 << " from " << root << "\n";
      }
      fs::create_directories(root);
      gssnn::write_json_file(root / "config.json", gssnn::config_to_json(config));
      for (std::size_t k = 0; k < config.iterations; ++k) {
        const auto report = gssnn::run_iteration(state, config, *backend);
        if (report.aborted) {
          std::cerr << "iteration " << report.iteration << " aborted: " << report.abort_reason
                    << "\n";
          return kRuntimeError;
        }
        gssnn::save_iteration(root, state, report);
        std::cout << Json{{"iteration", report.iteration},
                          {"population_before", report.population_before},
                          {"selection_applied", report.selection_applied},
                          {"after_selection", report.after_selection},
                          {"abstractions", report.abstractions.size()},
                          {"shortenings", report.shortenings.size()},
                          {"novel_added", report.novel_added},
                          {"population_after", report.population_after}}
                         .dump()
                  << "\n";
      }
      return kOk;
    };
  });
}

// ---------------------------------------------------------------------------

struct SearchArgs {
  std::string lib_path, population_path;
  double budget_secs = 15.0;
  std::size_t max_size = gssnn::kMaxProgramSize;
  std::optional<std::size_t> max_results, max_programs;
  double max_spread = 0.5;
};

void add_search(CLI::App& app, SearchArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("search", "Enumerate novel programs, most likely first");
  cmd->add_option("--lib", a.lib_path, "Library JSON (default: initial DSL)");
  cmd->add_option("--population", a.population_path,
                  "Population JSON; guides the distribution and novelty");
  cmd->add_option("--budget-secs", a.budget_secs);
  cmd->add_option("--max-size", a.max_size);
  cmd->add_option("--max-results", a.max_results, "Default: 50 minus the population size");
  cmd->add_option("--max-programs", a.max_programs, "Stop after this many enumerated programs");
  cmd->add_option("--max-spread", a.max_spread);

  cmd->callback([&a, &run] {
    run = [&a] {
      const auto lib = load_library(a.lib_path);
      std::vector<gssnn::PopulationEntry> pop;
      if (!a.population_path.empty()) {
        pop = gssnn::population_from_json(gssnn::read_json_file(a.population_path), lib);
      }
      std::vector<gssnn::Expr> corpus;
      std::vector<gssnn::FeatureGraph> seen;
      for (const auto& e : pop) {
        corpus.push_back(e.program);
        seen.push_back(e.graph);
      }
      const auto model = pop.empty() ? gssnn::model_from_library(lib)
                                     : gssnn::reweight(gssnn::infer_unigrams(corpus, lib),
                                                       a.max_spread);
      gssnn::SearchBudget budget;
      budget.seconds = a.max_programs ? std::numeric_limits<double>::infinity() : a.budget_secs;
      budget.max_enumerated = a.max_programs;
      budget.max_size = a.max_size;
      budget.max_results = a.max_results.value_or(pop.size() < 50 ? 50 - pop.size() : 0);
      const auto result = gssnn::heap_search(model, lib, budget, seen);
      for (const auto& c : result.programs) {
        std::cout << Json{{"program", c.text},
                          {"logp", c.logp},
                          {"size", c.size},
                          {"graph", gssnn::graph_to_json(c.graph)}}
                         .dump()
                  << "\n";
      }
      std::cerr << gssnn::search_stats_to_json(result.stats).dump() << "\n";
      return kOk;
    };
  });
}

// ---------------------------------------------------------------------------

struct CompressArgs {
  std::string corpus_path, lib_path, out_lib, out_corpus;
  std::size_t rounds = 3;
  std::size_t max_arity = 2;
};

void add_compress(CLI::App& app, CompressArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("compress", "Learn abstractions that compress a corpus");
  cmd->add_option("--corpus", a.corpus_path, "Programs: JSON array, population JSON, or one per line")->required();
  cmd->add_option("--lib", a.lib_path, "Library JSON (default: initial DSL)");
  cmd->add_option("--rounds", a.rounds);
  cmd->add_option("--max-arity", a.max_arity)->check(CLI::Range(0, 2));
  cmd->add_option("--out-lib", a.out_lib, "Write the extended library here");
  cmd->add_option("--out-corpus", a.out_corpus, "Write the rewritten programs here");

  cmd->callback([&a, &run] {
    run = [&a] {
      const auto lib = load_library(a.lib_path);
      const auto corpus = gssnn::read_corpus_file(a.corpus_path, lib);
      const auto result = gssnn::compress(corpus, lib, a.rounds, a.max_arity);
      Json programs = Json::array();
      for (const auto& p : result.corpus) programs.push_back(gssnn::to_sexpr(p, result.library));
      Json adopted = Json::array();
      for (const auto& abs : result.adopted) {
        adopted.push_back({{"name", abs.name},
                           {"body", abs.text},
                           {"arity", abs.arity()},
                           {"utility", abs.utility}});
      }
      const auto lib_json = gssnn::library_to_json(result.library);
      if (!a.out_lib.empty()) gssnn::write_json_file(a.out_lib, lib_json);
      if (!a.out_corpus.empty()) gssnn::write_json_file(a.out_corpus, programs);
      Json summary{{"size_before", gssnn::corpus_size(corpus)},
                   {"size_after", gssnn::corpus_size(result.corpus)},
                   {"abstractions", adopted}};
      if (a.out_corpus.empty()) summary["corpus"] = programs;
      if (a.out_lib.empty()) summary["library"] = lib_json;
      emit(summary, "");
      return kOk;
    };
  });
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
  std::string graph_path, program, lib_path, x_path, out;
  std::size_t m = 512;
  std::size_t q = 512;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> d_star, r_star;
  gssnn::EmbeddingOptions options;
};

void add_embed(CLI::App& app, EmbedArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("emit-embedding", "Map a graph and an input vector to features");
  auto* graph = cmd->add_option("--graph", a.graph_path, "Graph JSON");
  auto* program = cmd->add_option("--program", a.program, "Program whose output graph to use");
  graph->excludes(program);
  cmd->add_option("--lib", a.lib_path, "Library for --program");
  auto* x = cmd->add_option("--x", a.x_path, "JSON array of m reals");
  auto* seed = cmd->add_option("--seed", a.seed, "Draw x ~ N(0, 1) from this seed");
  x->excludes(seed);
  cmd->add_option("--m", a.m);
  cmd->add_option("--q", a.q);
  cmd->add_option("--d-star", a.d_star, "Override d* (must cover the graph)");
  cmd->add_option("--r-star", a.r_star, "Override r* (must cover the graph)");
  cmd->add_flag("--pos-normalized", a.options.pos_normalized);
  cmd->add_flag("--simple-reorder", a.options.simple_reorder);
  cmd->add_flag("--literal-idx", a.options.literal_remainder);
  cmd->add_option("--out", a.out, "Output path (default stdout)");

  cmd->callback([&a, &run] {
    run = [&a] {
      gssnn::FeatureGraph g;
      if (!a.graph_path.empty()) {
        g = gssnn::graph_from_json(gssnn::read_json_file(a.graph_path));
        const auto problems = gssnn::validate(g);
        if (!problems.empty()) throw ValidationFailure(a.graph_path + ": " + problems.front());
      } else if (!a.program.empty()) {
        const auto lib = load_library(a.lib_path);
        g = gssnn::evaluate(gssnn::parse_program(a.program, lib), lib);
      } else {
        throw gssnn::Error("emit-embedding needs --graph or --program");
      }
      auto spec = gssnn::make_spec(g, a.m, a.q, a.options);
      if (a.d_star) spec.d_star = *a.d_star;
      if (a.r_star) spec.r_star = *a.r_star;
      spec.check();

      std::vector<double> x;
      if (!a.x_path.empty()) {
        x = gssnn::read_json_file(a.x_path).get<std::vector<double>>();
      } else {
        std::mt19937_64 rng(gssnn::derive_seed(a.seed.value_or(0), "x", 0));
        std::normal_distribution<double> normal;
        x.resize(a.m);
        for (auto& v : x) v = normal(rng);
      }
      auto j = gssnn::embedded_to_json(gssnn::graph_map(g, x, spec));
      j["x"] = x;
      emit(j, a.out);
      return kOk;
    };
  });
}

// ---------------------------------------------------------------------------

struct IsoArgs {
  std::string a, b;
};

void add_isocheck(CLI::App& app, IsoArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("isocheck", "Compare two graphs up to isomorphism");
  cmd->add_option("first", a.a, "Graph JSON")->required();
  cmd->add_option("second", a.b, "Graph JSON")->required();
  cmd->callback([&a, &run] {
    run = [&a] {
      const auto ga = gssnn::graph_from_json(gssnn::read_json_file(a.a));
      const auto gb = gssnn::graph_from_json(gssnn::read_json_file(a.b));
      for (const auto& [path, g] : {std::pair{a.a, &ga}, std::pair{a.b, &gb}}) {
        const auto problems = gssnn::validate(*g);
        if (!problems.empty()) throw ValidationFailure(path + ": " + problems.front());
      }
      std::cout << Json{{"structure", gssnn::isomorphic_structure(ga, gb)},
                        {"featured", gssnn::isomorphic_featured(ga, gb)}}
                       .dump()
                << "\n";
      return kOk;
    };
  });
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::vector<std::string> files;
};

void add_validate(CLI::App& app, ValidateArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("validate", "Check graph, program, library and state files");
  cmd->add_option("files", a.files, "Files to check")->required();
  cmd->callback([&a, &run] {
    run = [&a] {
      const std::vector<fs::path> paths(a.files.begin(), a.files.end());
      const auto violations = gssnn::validate_files(paths);
      for (const auto& v : violations) {
        std::cout << v.file << (v.location.empty() ? "" : ": " + v.location) << ": " << v.message
                  << "\n";
      }
      if (!violations.empty()) return kInvalid;
      std::cout << "ok\n";
      return kOk;
    };
  });
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string state_dir = default_state_dir();
  std::string out;
};

void add_stats(CLI::App& app, StatsArgs& a, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("stats-csv", "Per-iteration fitness table as CSV");
  cmd->add_option("--state-dir", a.state_dir, "State directory (default $GSSNN_STATE_DIR or ./state)");
  cmd->add_option("--out", a.out, "Output path (default stdout)");
  cmd->callback([&a, &run] {
    run = [&a] {
      const auto csv = gssnn::export_stats(a.state_dir);
      if (a.out.empty()) {
        std::cout << csv;
      } else {
        gssnn::write_text_file(a.out, csv);
      }
      return kOk;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gssnn: symbolic program search for graph-structured networks"};
  app.require_subcommand(1);

  std::function<int()> run;
  EvolveArgs evolve;
  SearchArgs search;
  CompressArgs compress;
  EmbedArgs embed;
  IsoArgs iso;
  ValidateArgs validate;
  StatsArgs stats;
  add_evolve(app, evolve, run);
  add_search(app, search, run);
  add_compress(app, compress, run);
  add_embed(app, embed, run);
  add_isocheck(app, iso, run);
  add_validate(app, validate, run);
  add_stats(app, stats, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kRuntimeError;
  }

  try {
    return run();
  } catch (const ValidationFailure& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
