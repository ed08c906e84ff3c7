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

// JSON formats, state persistence, file validation and statistics export.
//
// Graph:    {"nodes":[{"id","rank"}...],"edges":[{"id","rank","u","v"}...]}
//           with both arrays sorted by id.
// Embedded: graph fields plus "features" (one q-vector per element, indexed
//           by element id) and "spec" {"m","q","d_star","r_star"}.
// Library:  [{"name","arity","body","logp"}...]; body is "builtin" or an
//           s-expression over earlier primitives with parameters #0, #1.
// State:    <root>/iteration_<k>/{pop.json, lib.json, report.json}.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gssnn/dsl.hpp"
#include "gssnn/embedding.hpp"
#include "gssnn/evolution.hpp"
#include "gssnn/graph.hpp"
#include "gssnn/isomorphism.hpp"

namespace gssnn {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Graphs and embeddings

inline Json graph_to_json(const FeatureGraph& g) {
  Json nodes = Json::array();
  Json edges = Json::array();
  for (const auto& e : g.elements()) {
    if (e.is_node()) {
      nodes.push_back({{"id", e.id}, {"rank", e.rank}});
    } else {
      edges.push_back({{"id", e.id}, {"rank", e.rank}, {"u", e.u}, {"v", e.v}});
    }
  }
  return Json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

/// Reads the element list without checking graph invariants; use validate().
inline FeatureGraph graph_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges")) {
    throw Error("graph JSON needs \"nodes\" and \"edges\"");
  }
  std::vector<GraphElement> els;
  for (const auto& n : j.at("nodes")) {
    els.push_back({ElementKind::Node, n.at("id").get<std::uint32_t>(),
                   n.at("rank").get<std::uint32_t>(), 0, 0});
  }
  for (const auto& e : j.at("edges")) {
    els.push_back({ElementKind::Edge, e.at("id").get<std::uint32_t>(),
                   e.at("rank").get<std::uint32_t>(), e.at("u").get<std::uint32_t>(),
                   e.at("v").get<std::uint32_t>()});
  }
  return FeatureGraph::from_elements(std::move(els));
}

inline Json spec_to_json(const EmbeddingSpec& s) {
  return Json{{"m", s.m}, {"q", s.q}, {"d_star", s.d_star}, {"r_star", s.r_star}};
}

inline EmbeddingSpec spec_from_json(const Json& j) {
  EmbeddingSpec s;
  s.m = j.at("m").get<std::size_t>();
  s.q = j.at("q").get<std::size_t>();
  s.d_star = j.at("d_star").get<std::uint32_t>();
  s.r_star = j.at("r_star").get<std::uint32_t>();
  return s;
}

inline Json embedded_to_json(const EmbeddedGraph& eg) {
  Json j = graph_to_json(eg.graph);
  j["features"] = eg.features;
  j["spec"] = spec_to_json(eg.spec);
  return j;
}

// ---------------------------------------------------------------------------
// Libraries and programs

inline Json library_to_json(const Library& lib) {
  Json out = Json::array();
  for (const auto& p : lib.primitives()) {
    out.push_back({{"name", p.name},
                   {"arity", p.arity()},
                   {"body", p.is_abstraction() ? to_sexpr(p.body, lib) : std::string("builtin")},
                   {"logp", p.logp}});
  }
  return out;
}

inline Library library_from_json(const Json& j) {
  if (!j.is_array()) throw Error("library JSON must be an array");
  Library lib;
  for (const auto& item : j) {
    const auto name = item.at("name").get<std::string>();
    const auto body = item.at("body").get<std::string>();
    const auto arity = item.at("arity").get<std::size_t>();
    const auto logp = item.at("logp").get<double>();
    std::uint32_t id = 0;
    if (body == "builtin") {
      const auto* info = find_builtin(name);
      if (info == nullptr) throw Error("'" + name + "' is not a builtin");
      id = lib.add_builtin(info->op, logp);
    } else {
      id = lib.add_abstraction(name, parse_body(body, lib), logp);
    }
    if (lib[id].arity() != arity) {
      throw Error("'" + name + "' declares arity " + std::to_string(arity) + " but has " +
                  std::to_string(lib[id].arity()));
    }
  }
  return lib;
}

// ---------------------------------------------------------------------------
// Population, fitness, reports

inline Json fitness_to_json(const FitnessRecord& f) {
  Json j{{"train_accuracy", f.train_accuracy}};
  j["validation_accuracy"] =
      f.validation_accuracy ? Json(*f.validation_accuracy) : Json(nullptr);
  j["evaluator_id"] = f.evaluator_id;
  return j;
}

inline FitnessRecord fitness_from_json(const Json& j) {
  FitnessRecord f;
  f.train_accuracy = j.at("train_accuracy").get<double>();
  if (j.contains("validation_accuracy") && !j.at("validation_accuracy").is_null()) {
    f.validation_accuracy = j.at("validation_accuracy").get<double>();
  }
  f.evaluator_id = j.value("evaluator_id", std::string());
  auto in_range = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_range(f.train_accuracy) ||
      (f.validation_accuracy && !in_range(*f.validation_accuracy))) {
    throw Error("fitness accuracies must lie in [0, 1]");
  }
  return f;
}

inline Json population_to_json(std::span<const PopulationEntry> pop, const Library& lib) {
  Json out = Json::array();
  for (const auto& e : pop) {
    out.push_back({{"program", to_sexpr(e.program, lib)},
                   {"size", program_size(e.program)},
                   {"graph", graph_to_json(e.graph)},
                   {"fitness", e.fitness ? fitness_to_json(*e.fitness) : Json(nullptr)}});
  }
  return out;
}

inline std::vector<PopulationEntry> population_from_json(const Json& j, const Library& lib) {
  if (!j.is_array()) throw Error("population JSON must be an array");
  std::vector<PopulationEntry> out;
  for (const auto& item : j) {
    PopulationEntry e;
    e.program = parse_program(item.at("program").get<std::string>(), lib);
    e.graph = item.contains("graph") ? graph_from_json(item.at("graph")) : evaluate(e.program, lib);
    if (item.contains("fitness") && !item.at("fitness").is_null()) {
      e.fitness = fitness_from_json(item.at("fitness"));
    }
    out.push_back(std::move(e));
  }
  return out;
}

/// Programs from either a population array or an array of s-expressions.
inline std::vector<Expr> corpus_from_json(const Json& j, const Library& lib) {
  if (!j.is_array()) throw Error("corpus JSON must be an array");
  std::vector<Expr> out;
  for (const auto& item : j) {
    const auto text = item.is_string() ? item.get<std::string>()
                                       : item.at("program").get<std::string>();
    out.push_back(parse_program(text, lib));
  }
  return out;
}

inline Json evaluated_to_json(std::span<const EvaluatedEntry> entries) {
  Json out = Json::array();
  for (const auto& e : entries) {
    Json item{{"program", e.program}, {"size", e.size}};
    const auto fitness = fitness_to_json(e.fitness);
    for (const auto& [k, v] : fitness.items()) item[k] = v;
    out.push_back(std::move(item));
  }
  return out;
}

inline std::vector<EvaluatedEntry> evaluated_from_json(const Json& j) {
  std::vector<EvaluatedEntry> out;
  for (const auto& item : j) {
    out.push_back({item.at("program").get<std::string>(), item.at("size").get<std::size_t>(),
                   fitness_from_json(item)});
  }
  return out;
}

inline Json search_stats_to_json(const SearchStats& s) {
  return Json{{"enumerated", s.enumerated},
              {"oversize", s.oversize},
              {"diverged", s.diverged},
              {"too_many_elements", s.too_many_elements},
              {"duplicates", s.duplicates},
              {"novel", s.novel},
              {"shortenings", s.shortenings},
              {"elapsed_seconds", s.elapsed_seconds},
              {"exhausted", s.exhausted},
              {"timed_out", s.timed_out}};
}

inline Json report_to_json(const IterationReport& r) {
  Json abstractions = Json::array();
  for (const auto& a : r.abstractions) {
    abstractions.push_back(
        {{"name", a.name}, {"body", a.body}, {"arity", a.arity}, {"utility", a.utility}});
  }
  Json shortenings = Json::array();
  for (const auto& s : r.shortenings) {
    shortenings.push_back({{"before", s.before}, {"after", s.after}});
  }
  return Json{{"iteration", r.iteration},
              {"population_before", r.population_before},
              {"evaluated", evaluated_to_json(r.evaluated)},
              {"selection_applied", r.selection_applied},
              {"after_selection", r.after_selection},
              {"discarded", evaluated_to_json(r.discarded)},
              {"corpus_size_before", r.corpus_size_before},
              {"corpus_size_after", r.corpus_size_after},
              {"abstractions", std::move(abstractions)},
              {"search_requested", r.search_requested},
              {"search", search_stats_to_json(r.search)},
              {"shortenings", std::move(shortenings)},
              {"novel_added", r.novel_added},
              {"population_after", r.population_after},
              {"aborted", r.aborted},
              {"abort_reason", r.abort_reason}};
}

inline Json job_to_json(const FitnessJob& job) {
  return Json{{"graph", graph_to_json(job.graph)}, {"spec", spec_to_json(job.spec)},
              {"seed", job.seed}};
}

inline Json config_to_json(const EvolutionConfig& c) {
  return Json{{"pop_cap", c.pop_cap},
              {"selection_threshold", c.selection_threshold},
              {"heuristic", c.heuristic},
              {"budget_secs", c.budget_secs},
              {"max_enumerated", c.max_enumerated ? Json(*c.max_enumerated) : Json(nullptr)},
              {"max_size", c.max_size},
              {"compression_rounds", c.compression_rounds},
              {"max_arity", c.max_arity},
              {"max_spread", c.max_spread},
              {"iterations", c.iterations},
              {"fitness", c.fitness_backend == FitnessBackendKind::Surrogate ? "surrogate"
                                                                              : "external"},
              {"seed", c.seed},
              {"m", c.embed_m},
              {"q", c.embed_q}};
}

/// Overlays the fields present in `j` onto `base`.
inline EvolutionConfig config_from_json(const Json& j, EvolutionConfig base = {}) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(field);
  };
  take("pop_cap", base.pop_cap);
  take("selection_threshold", base.selection_threshold);
  take("heuristic", base.heuristic);
  take("budget_secs", base.budget_secs);
  if (j.contains("max_enumerated")) {
    base.max_enumerated = j.at("max_enumerated").is_null()
                              ? std::nullopt
                              : std::optional(j.at("max_enumerated").get<std::size_t>());
  }
  take("max_size", base.max_size);
  take("compression_rounds", base.compression_rounds);
  take("max_arity", base.max_arity);
  take("max_spread", base.max_spread);
  take("iterations", base.iterations);
  if (j.contains("fitness")) {
    const auto kind = j.at("fitness").get<std::string>();
    if (kind == "surrogate") {
      base.fitness_backend = FitnessBackendKind::Surrogate;
    } else if (kind == "external") {
      base.fitness_backend = FitnessBackendKind::External;
    } else {
      throw Error("unknown fitness backend '" + kind + "'");
    }
  }
  take("seed", base.seed);
  take("m", base.embed_m);
  take("q", base.embed_q);
  base.check();
  return base;
}

// ---------------------------------------------------------------------------
// Files

inline Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error("write failed for " + path.string());
}

/// A corpus file: a JSON array (or population), or one program per line.
inline std::vector<Expr> read_corpus_file(const fs::path& path, const Library& lib) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), {}};
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    return corpus_from_json(read_json_file(path), lib);
  }
  std::vector<Expr> out;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_program(line, lib));
    } catch (const std::exception& e) {
      throw Error(path.string() + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline void write_json_file(const fs::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline fs::path iteration_dir(const fs::path& root, std::size_t k) {
  return root / ("iteration_" + std::to_string(k));
}

/// Persists the state reached after `report.iteration`; the directory appears
/// only once fully written.
inline void save_iteration(const fs::path& root, const EvolutionState& state,
                           const IterationReport& report) {
  fs::create_directories(root);
  const auto final_dir = iteration_dir(root, report.iteration);
  auto staging = final_dir;
  staging += ".tmp";
  fs::remove_all(staging);
  fs::create_directories(staging);
  write_json_file(staging / "pop.json", population_to_json(state.population, state.library));
  write_json_file(staging / "lib.json", library_to_json(state.library));
  write_json_file(staging / "report.json", report_to_json(report));
  fs::remove_all(final_dir);
  fs::rename(staging, final_dir);
}

inline std::vector<std::size_t> persisted_iterations(const fs::path& root) {
  std::vector<std::size_t> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    constexpr std::string_view prefix = "iteration_";
    if (name.rfind(prefix, 0) != 0) continue;
    const auto digits = name.substr(prefix.size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    out.push_back(std::stoul(digits));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline EvolutionState load_iteration(const fs::path& root, std::size_t k) {
  const auto dir = iteration_dir(root, k);
  EvolutionState s;
  s.iteration = k + 1;
  s.library = library_from_json(read_json_file(dir / "lib.json"));
  s.population = population_from_json(read_json_file(dir / "pop.json"), s.library);
  return s;
}

inline std::optional<EvolutionState> load_latest_state(const fs::path& root) {
  const auto its = persisted_iterations(root);
  if (its.empty()) return std::nullopt;
  return load_iteration(root, its.back());
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string file;
  std::string location;
  std::string message;
};

namespace detail {

inline void check_population(const Json& j, const Library& lib, const std::string& file,
                             std::vector<Violation>& out) {
  std::vector<FeatureGraph> graphs;
  std::vector<std::size_t> owners;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto where = "entry " + std::to_string(i);
    const auto& item = j[i];
    try {
      const auto program = parse_program(item.at("program").get<std::string>(), lib);
      const auto n = program_size(program);
      if (n > kMaxProgramSize) {
        out.push_back({file, where,
                       "size limit (" + std::to_string(n) + " > " +
                           std::to_string(kMaxProgramSize) + ")"});
      }
      if (item.contains("size") && item.at("size").get<std::size_t>() != n) {
        out.push_back({file, where, "recorded size does not match program"});
      }
      if (item.contains("fitness") && !item.at("fitness").is_null()) {
        fitness_from_json(item.at("fitness"));
      }
      if (!item.contains("graph")) continue;
      const auto g = graph_from_json(item.at("graph"));
      auto problems = validate(g);
      for (auto& p : problems) out.push_back({file, where + " graph", std::move(p)});
      if (!problems.empty()) continue;
      try {
        if (!isomorphic_featured(evaluate(program, lib), g)) {
          out.push_back({file, where, "graph does not match program"});
        }
      } catch (const Diverged&) {
        out.push_back({file, where, "program diverged"});
      }
      for (std::size_t k = 0; k < graphs.size(); ++k) {
        if (isomorphic_structure(graphs[k], g)) {
          out.push_back({file, where,
                         "structurally isomorphic to entry " + std::to_string(owners[k])});
        }
      }
      graphs.push_back(g);
      owners.push_back(i);
    } catch (const std::exception& e) {
      out.push_back({file, where, e.what()});
    }
  }
}

inline void check_program(const std::string& text, const Library& lib, const std::string& file,
                          const std::string& where, std::vector<Violation>& out) {
  try {
    const auto p = parse_program(text, lib);
    const auto size = program_size(p);
    if (size > kMaxProgramSize) {
      out.push_back({file, where,
                     "size limit (" + std::to_string(size) + " > " +
                         std::to_string(kMaxProgramSize) + ")"});
    }
  } catch (const std::exception& e) {
    out.push_back({file, where, e.what()});
  }
}

inline void check_program_lines(const std::string& text, const Library& lib,
                                const std::string& file, std::vector<Violation>& out) {
  std::istringstream lines(text);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    check_program(line, lib, file, "line " + std::to_string(n), out);
  }
}

inline Library library_near(const fs::path& file) {
  const auto sibling = file.parent_path() / "lib.json";
  if (fs::exists(sibling) && fs::absolute(sibling) != fs::absolute(file)) {
    return library_from_json(read_json_file(sibling));
  }
  return Library::initial();
}

}  // namespace detail

/// Checks graph, population, library, job, fitness and program files against
/// their invariants. Programs are resolved against a sibling lib.json when
/// present. Throws Error for unreadable files.
inline std::vector<Violation> validate_files(std::span<const fs::path> paths) {
  std::vector<Violation> out;
  for (const auto& path : paths) {
    const auto file = path.string();
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + file);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto text = buf.str();
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      detail::check_program_lines(text, detail::library_near(path), file, out);
      continue;
    }
    try {
      if (j.is_object() && j.contains("nodes")) {
        for (auto& p : validate(graph_from_json(j))) out.push_back({file, "graph", std::move(p)});
        if (j.contains("features")) {
          const auto q = j.at("spec").at("q").get<std::size_t>();
          const auto& feats = j.at("features");
          if (feats.size() != j.at("nodes").size() + j.at("edges").size()) {
            out.push_back({file, "features", "feature count does not match element count"});
          }
          for (std::size_t k = 0; k < feats.size(); ++k) {
            if (feats[k].size() != q) {
              out.push_back({file, "features[" + std::to_string(k) + "]", "length is not q"});
            }
          }
        }
      } else if (j.is_object() && j.contains("graph") && j.contains("spec")) {
        const auto g = graph_from_json(j.at("graph"));
        for (auto& p : validate(g)) out.push_back({file, "job graph", std::move(p)});
        auto spec = spec_from_json(j.at("spec"));
        spec.check();
        if (validate(g).empty()) {
          const auto s = degree_stats(g);
          if (s.d_star > spec.d_star || s.r_star > spec.r_star) {
            out.push_back({file, "spec", "spec does not cover graph"});
          }
        }
      } else if (j.is_object() && j.contains("train_accuracy")) {
        fitness_from_json(j);
      } else if (j.is_array() && !j.empty() && j.front().is_object() &&
                 j.front().contains("body")) {
        library_from_json(j);
      } else if (j.is_array() && !j.empty() && j.front().is_string()) {
        const auto lib = detail::library_near(path);
        for (std::size_t k = 0; k < j.size(); ++k) {
          detail::check_program(j[k].get<std::string>(), lib, file, "entry " + std::to_string(k), out);
        }
      } else if (j.is_array()) {
        detail::check_population(j, detail::library_near(path), file, out);
      } else {
        out.push_back({file, "", "unrecognized file format"});
      }
    } catch (const std::exception& e) {
      out.push_back({file, "", e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

inline std::string csv_number(double x) { return Json(x).dump(); }

/// One row per evaluated entry per iteration, entries ranked by training
/// accuracy. Missing validation accuracies are left empty.
inline std::string export_stats(const fs::path& root) {
  const auto its = persisted_iterations(root);
  if (its.empty()) throw Error("empty state dir: " + root.string());
  std::string out = "iteration,population_size,rank,train_accuracy,validation_accuracy,program\n";
  for (auto k : its) {
    const auto report = read_json_file(iteration_dir(root, k) / "report.json");
    auto rows = evaluated_from_json(report.at("evaluated"));
    std::stable_sort(rows.begin(), rows.end(), [](const EvaluatedEntry& a, const EvaluatedEntry& b) {
      if (a.fitness.train_accuracy != b.fitness.train_accuracy) {
        return a.fitness.train_accuracy > b.fitness.train_accuracy;
      }
      if (a.size != b.size) return a.size < b.size;
      return a.program < b.program;
    });
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& f = rows[r].fitness;
      out += std::to_string(k) + "," + std::to_string(rows.size()) + "," + std::to_string(r + 1) +
             "," + csv_number(f.train_accuracy) + "," +
             (f.validation_accuracy ? csv_number(*f.validation_accuracy) : std::string()) + ",\"" +
             rows[r].program + "\"\n";
    }
  }
  return out;
}

}  // namespace gssnn
