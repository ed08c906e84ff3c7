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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gssnn.hpp"
#include "support/oracles.hpp"

namespace gssnn {
namespace {

// Tolerances.
constexpr double kFormulaTol = 1e-12;
constexpr double kAffinityTol = 1e-12;
constexpr double kMeanTol = 1e-12;
constexpr double kSpreadTol = 1e-12;
constexpr double kEmbeddingSeconds = 10.0;
constexpr double kEvolutionSeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects failures for one criterion.
class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)) {}

  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  void note(std::string text) { notes_ = std::move(text); }

  bool report() const {
    const bool pass = failed_ == 0;
    std::printf("%s %s: %zu checks", pass ? "PASS" : "FAIL", name_.c_str(), checks_);
    if (!notes_.empty()) std::printf(", %s", notes_.c_str());
    if (!pass) std::printf(", %zu failed", failed_);
    std::printf("\n");
    for (const auto& f : failures_) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    return pass;
  }

 private:
  std::string name_;
  std::string notes_;
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

bool embedding_formulas() {
  Criterion c("embedding formulas");
  const auto t0 = Clock::now();

  for (std::size_t m = 1; m <= 256; ++m) {
    for (std::uint32_t d = 1; d <= m; ++d) {
      const EmbeddingSpec spec{m, 4, d, 1, {}};
      const auto l = m / d;
      bool ok = idx(0, spec) == 0 && idx(d, spec) == m;
      // Slices are contiguous and cover [0, m); all but the first have length l.
      for (std::uint32_t w = 0; w < d && ok; ++w) {
        const auto lo = idx(w, spec);
        const auto hi = idx(w + 1, spec);
        ok = hi > lo && (w == 0 ? hi - lo >= l : hi - lo == l);
      }
      c.expect(ok, "partition m=" + std::to_string(m) + " d*=" + std::to_string(d));
    }
  }

  {
    const EmbeddingSpec a{512, 4, 4, 1, {}};
    const std::vector<std::size_t> ea{0, 128, 256, 384, 512};
    for (std::size_t w = 0; w <= 4; ++w) c.expect(idx(w, a) == ea[w], "idx m=512 d*=4");
    const EmbeddingSpec b{10, 4, 3, 1, {}};
    const std::vector<std::size_t> eb{0, 4, 7, 10};
    for (std::size_t w = 0; w <= 3; ++w) c.expect(idx(w, b) == eb[w], "idx m=10 d*=3");
  }

  {
    const std::vector<double> abc{0.1, 0.2, 0.3};
    const std::vector<double> tiled{0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1};
    const auto got = tile_expand(abc, 7);
    for (std::size_t i = 0; i < 7; ++i) {
      c.expect(std::abs(got[i] - tiled[i]) <= kFormulaTol, "tile_expand (a,b,c) to 7");
    }
    c.expect(tile_expand(abc, 3) == abc, "tile_expand identity");
    c.expect(tile_expand(std::vector<double>{5.0}, 4) == std::vector<double>(4, 5.0),
             "tile_expand constant");
  }

  {
    const EmbeddingSpec spec{8, 8, 2, 1, {}};
    const auto b = pos_2d(1, 0, spec);
    const std::vector<double> expected{std::sin(1.0), std::sin(1e-4), std::cos(1.0),
                                       std::cos(1e-4), 0.0, 0.0, 1.0, 1.0};
    for (std::size_t j = 0; j < 8; ++j) {
      c.expect(std::abs(b[j] - expected[j]) <= kFormulaTol, "pos_2d q=8 (1,0) index " + std::to_string(j));
    }
    const auto origin = pos_2d(0, 0, EmbeddingSpec{16, 16, 4, 3, {}});
    for (std::size_t j = 0; j < 16; ++j) {
      c.expect(origin[j] == ((j / 4) % 2 == 0 ? 0.0 : 1.0), "pos_2d origin");
    }
    const EmbeddingSpec r{16, 64, 4, 3, {}};
    c.expect(reorder(2, 1, r) == ReorderedPosition{3, 1}, "reorder (2,1) with d*=4 r*=3");
    std::vector<std::vector<double>> codes;
    for (std::uint64_t d = 0; d < 4; ++d) {
      for (std::uint64_t rr = 0; rr < 3; ++rr) codes.push_back(pos_2d(d, rr, r));
    }
    for (std::size_t a = 0; a < codes.size(); ++a) {
      for (std::size_t b2 = a + 1; b2 < codes.size(); ++b2) {
        c.expect(codes[a] != codes[b2], "pos_2d distinct for d*=4 r*=3 q=64");
      }
    }
  }

  for (std::uint32_t d_star = 1; d_star <= 16; ++d_star) {
    for (std::uint32_t r_star = 1; r_star <= 16; ++r_star) {
      const EmbeddingSpec spec{16, 4, d_star, r_star, {}};
      std::vector<char> hit(std::size_t{d_star} * r_star, 0);
      bool ok = true;
      for (std::uint64_t d = 0; d < d_star; ++d) {
        for (std::uint64_t r = 0; r < r_star; ++r) {
          const auto p = reorder(d, r, spec);
          if (p.p1 >= d_star || p.p2 >= r_star || hit[p.p2 * d_star + p.p1]) {
            ok = false;
          } else {
            hit[p.p2 * d_star + p.p1] = 1;
          }
        }
      }
      c.expect(ok, "reorder bijection d*=" + std::to_string(d_star) + " r*=" + std::to_string(r_star));
    }
  }

  const double elapsed = seconds_since(t0);
  c.expect(elapsed < kEmbeddingSeconds, "runtime " + fmt(elapsed) + " s");
  c.note("runtime " + fmt(elapsed) + " s");
  return c.report();
}

bool affinity_and_bias() {
  Criterion c("graph_map affinity and static bias");
  std::mt19937_64 rng(101);
  std::normal_distribution<double> normal(0.0, 3.0);
  auto el = testing::random_edge_list(rng, 7, 6);
  while (el.nodes < 5 || el.edges.size() < 5) el = testing::random_edge_list(rng, 7, 6);
  const auto g = testing::shuffled_copy(el, rng);
  const auto stats = degree_stats(g);
  const auto spec = make_spec(g, 7 * stats.d_star + 3, 64);
  const std::vector<double> zero(spec.m, 0.0);
  const auto base = graph_map(g, zero, spec);
  for (const auto& e : g.elements()) {
    c.expect(base.features[e.id] == pos_2d(e.id, e.rank, spec), "bias of element " + std::to_string(e.id));
  }
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    std::vector<double> x(spec.m), y(spec.m), sum(spec.m);
    for (auto& v : x) v = normal(rng);
    for (auto& v : y) v = normal(rng);
    const double alpha = normal(rng);
    for (std::size_t i = 0; i < spec.m; ++i) sum[i] = x[i] + alpha * y[i];
    const auto fx = graph_map(g, x, spec);
    const auto fy = graph_map(g, y, spec);
    const auto fs = graph_map(g, sum, spec);
    bool ok = true;
    for (const auto& e : g.elements()) {
      const auto lo = idx(e.id, spec);
      const auto len = idx(e.id + 1, spec) - lo;
      for (std::size_t j = 0; j < spec.q; ++j) {
        const double b = base.features[e.id][j];
        const double dx = fx.features[e.id][j] - b;
        const double dy = fy.features[e.id][j] - b;
        const double ds = fs.features[e.id][j] - b;
        // Linear in x, and each coordinate is x at one index with weight 1.
        const double err = std::max({std::abs(ds - (dx + alpha * dy)), std::abs(dx - x[lo + j % len]),
                                     std::abs(dy - y[lo + j % len])});
        worst = std::max(worst, err);
        ok = ok && err <= kAffinityTol;
      }
    }
    c.expect(ok, "pair " + std::to_string(pair));
  }
  c.note("elements " + std::to_string(g.size()) + ", max error " + fmt(worst));
  return c.report();
}

bool isomorphism_oracle() {
  Criterion c("isomorphism vs brute force");
  std::mt19937_64 rng(2718);
  std::size_t positives = 0, multi = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto el = testing::random_edge_list(rng, 7, 6);
    FeatureGraph a = testing::shuffled_copy(el, rng);
    FeatureGraph b;
    if (trial % 2 == 0) {
      b = testing::shuffled_copy(el, rng);
    } else {
      // Same node and edge counts, different wiring.
      auto other = testing::random_edge_list(rng, 7, 6);
      while (other.nodes != el.nodes || other.edges.size() != el.edges.size()) {
        other = testing::random_edge_list(rng, 7, 6);
      }
      b = testing::shuffled_copy(other, rng);
    }
    std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
    bool has_multi = false;
    for (const auto& e : a.elements()) {
      if (!e.is_node()) has_multi |= !pairs.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second;
    }
    multi += has_multi;
    const bool expected = testing::brute_force_isomorphic(a, b);
    positives += expected;
    c.expect(isomorphic_structure(a, b) == expected, "trial " + std::to_string(trial));
  }
  c.note(std::to_string(positives) + " isomorphic pairs, " + std::to_string(multi) +
         " with parallel edges");
  return c.report();
}

bool heap_search_ordering() {
  Criterion c("heap-search ordering");
  const auto lib = Library::with_builtins({"add_attached_node", "compose", "repeat", "2"});
  std::vector<UnigramModel> models;
  models.push_back(uniform_model(lib));
  models.push_back(UnigramModel{{std::log(0.5), std::log(0.3), std::log(0.2), 0.0}});
  models.push_back(UnigramModel{{std::log(0.2), std::log(0.5), std::log(0.3), std::log(0.7)}});
  std::size_t inversions = 0;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto expected = testing::most_probable(lib, models[mi], 50);
    ProgramEnumerator stream(lib, models[mi]);
    std::optional<EnumeratedProgram> prev;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      auto got = stream.next();
      if (!got) {
        c.expect(false, "stream ended early");
        break;
      }
      c.expect(got->text == expected[k].text,
               "model " + std::to_string(mi) + " position " + std::to_string(k) + ": got " +
                   got->text + ", expected " + expected[k].text);
      if (prev && (got->logp > prev->logp || (got->logp == prev->logp && got->text < prev->text))) {
        ++inversions;
      }
      prev = std::move(got);
    }
  }
  c.expect(inversions == 0, std::to_string(inversions) + " inversions");
  c.note("3 models x 50 programs, " + std::to_string(inversions) + " inversions");
  return c.report();
}

bool reweight_contract() {
  Criterion c("reweight contract");
  std::mt19937_64 rng(1618);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 24)(rng);
    const double scale = std::uniform_real_distribution<double>(0.01, 20.0)(rng);
    UnigramModel m;
    for (std::size_t k = 0; k < n; ++k) {
      m.logp.push_back(-std::uniform_real_distribution<double>(0.0, scale)(rng));
    }
    const auto r = reweight(m);
    const auto rr = reweight(r);
    double mean0 = 0, mean1 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      mean0 += m.logp[k];
      mean1 += r.logp[k];
    }
    mean0 /= static_cast<double>(n);
    mean1 /= static_cast<double>(n);
    const auto [lo, hi] = std::minmax_element(r.logp.begin(), r.logp.end());
    bool order = true;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (m.logp[a] < m.logp[b] && !(r.logp[a] < r.logp[b])) order = false;
      }
    }
    double drift = 0;
    for (std::size_t k = 0; k < n; ++k) drift = std::max(drift, std::abs(rr.logp[k] - r.logp[k]));
    const auto id = "vector " + std::to_string(trial);
    c.expect(*hi - *lo <= 0.5 + kSpreadTol, id + " spread");
    c.expect(std::abs(mean0 - mean1) <= kMeanTol, id + " mean");
    c.expect(order, id + " order");
    c.expect(drift <= kMeanTol, id + " idempotence");
  }
  return c.report();
}

std::vector<Expr> random_corpus(std::mt19937_64& rng, const Library& lib) {
  const auto n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
  std::vector<Expr> out;
  const auto compose = lib.require("compose");
  while (out.size() < n) {
    Expr p = testing::random_program(rng, lib, std::uniform_int_distribution<std::size_t>(1, 9)(rng));
    // Reuse an earlier program's subtree now and then so corpora share structure.
    if (!out.empty() && std::bernoulli_distribution(0.5)(rng)) {
      std::vector<const Expr*> subs;
      testing::all_subterms(out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)], subs);
      std::vector<const Expr*> transforms;
      for (const auto* s : subs) {
        if (!s->is_var() && lib[s->index].result == Type::Transform) transforms.push_back(s);
      }
      const auto* pick = transforms[std::uniform_int_distribution<std::size_t>(0, transforms.size() - 1)(rng)];
      p = Expr::prim(compose, {*pick, std::move(p)});
    }
    if (program_size(p) <= 12) out.push_back(std::move(p));
  }
  return out;
}

bool compression_contract() {
  Criterion c("compression contract");
  const auto lib = Library::initial();
  std::mt19937_64 rng(31415);
  std::size_t adopted_any = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto corpus = random_corpus(rng, lib);
    const auto id = "corpus " + std::to_string(trial);
    const auto oracle = testing::oracle_best_utility(corpus, lib);
    const auto best = best_abstraction(corpus, lib);
    if (oracle.found && oracle.utility > 0) {
      c.expect(best.has_value() && best->utility == oracle.utility,
               id + ": oracle utility " + std::to_string(oracle.utility) + " (" + oracle.text +
                   "), got " + (best ? std::to_string(best->utility) + " (" + best->text + ")" : "none"));
    } else {
      c.expect(!best.has_value(), id + ": abstraction found where oracle has none");
    }
    const auto result = compress(corpus, lib, 3, 2);
    adopted_any += !result.adopted.empty();
    c.expect(result.adopted.size() <= 3, id + " rounds");
    for (const auto& a : result.adopted) c.expect(a.arity() <= 2, id + " arity");
    c.expect(corpus_size(result.corpus) <= corpus_size(corpus), id + " size");
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      try {
        const auto before = evaluate(corpus[k], lib);
        const auto after = evaluate(result.corpus[k], result.library);
        c.expect(isomorphic_featured(before, after), id + " program " + std::to_string(k) + " semantics");
      } catch (const Diverged&) {
        // Both sides diverge alike; the inlined form must match exactly.
        c.expect(inline_abstractions(result.corpus[k], result.library) == corpus[k],
                 id + " program " + std::to_string(k) + " inlining");
      }
    }
  }
  c.note(std::to_string(adopted_any) + " corpora compressed");
  return c.report();
}

struct EvolutionTrace {
  std::vector<std::string> snapshots;
  bool cap_ok = true;
  bool selection_ok = true;
  bool discard_ok = true;
  bool distinct_ok = true;
  bool size_ok = true;
  std::size_t max_size_seen = 0;
  std::size_t selections = 0;
  std::vector<std::size_t> sizes;
};

EvolutionTrace run_evolution(const EvolutionConfig& config, std::size_t iterations) {
  EvolutionTrace t;
  EvolutionState state;
  SurrogateFitness backend;
  for (std::size_t k = 0; k < iterations; ++k) {
    const auto report = run_iteration(state, config, backend);
    const auto n = report.population_before;
    // Selection exactly when the evaluated population reaches the threshold.
    t.selection_ok &= report.selection_applied == (n >= config.selection_threshold);
    if (report.selection_applied) {
      ++t.selections;
      t.discard_ok &= report.discarded.size() == n / 2 && report.after_selection == n - n / 2;
      double worst_kept = 2.0;
      for (std::size_t i = 0; i < report.after_selection; ++i) {
        worst_kept = std::min(worst_kept, report.evaluated[i].fitness.train_accuracy);
      }
      for (const auto& d : report.discarded) {
        t.discard_ok &= d.fitness.train_accuracy <= worst_kept;
      }
    }
    t.cap_ok &= state.population.size() <= config.pop_cap;
    t.sizes.push_back(state.population.size());
    for (std::size_t a = 0; a < state.population.size(); ++a) {
      const auto s = program_size(state.population[a].program);
      t.max_size_seen = std::max(t.max_size_seen, s);
      t.size_ok &= s <= config.max_size;
      for (std::size_t b = a + 1; b < state.population.size(); ++b) {
        t.distinct_ok &= !isomorphic_structure(state.population[a].graph, state.population[b].graph);
      }
    }
    t.snapshots.push_back(population_to_json(state.population, state.library).dump() + "\n" +
                          library_to_json(state.library).dump() + "\n" +
                          evaluated_to_json(report.evaluated).dump());
  }
  return t;
}

EvolutionConfig evolution_config() {
  EvolutionConfig config;
  config.seed = 7;
  config.max_enumerated = 4000;
  return config;
}

bool evolution_loop() {
  Criterion c("evolution loop");
  const auto t0 = Clock::now();
  const auto config = evolution_config();
  const auto first = run_evolution(config, 5);
  const auto second = run_evolution(config, 5);
  const double elapsed = seconds_since(t0);
  c.expect(first.cap_ok, "(a) population exceeded 50");
  c.expect(first.selection_ok, "(b) selection applied below 25 or skipped at 25+");
  c.expect(first.selections > 0, "(b) selection never exercised");
  c.expect(first.discard_ok, "(c) discarded set is not the bottom floor(n/2)");
  c.expect(first.distinct_ok, "(d) structurally isomorphic population members");
  c.expect(first.snapshots == second.snapshots, "(e) runs differ");
  c.expect(elapsed < kEvolutionSeconds, "runtime " + fmt(elapsed) + " s");
  std::string sizes;
  for (auto s : first.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
  c.note("population sizes " + sizes + ", " + std::to_string(first.selections) +
         " selections, runtime " + fmt(elapsed) + " s (2 runs)");
  return c.report();
}

bool program_size_limit() {
  Criterion c("program size limit");
  const auto main_run = run_evolution(evolution_config(), 5);
  c.expect(main_run.size_ok && main_run.max_size_seen <= kMaxProgramSize, "size above 150 admitted");
  // The same guard with a limit the search actually reaches.
  auto tight = evolution_config();
  tight.max_size = 4;
  const auto tight_run = run_evolution(tight, 3);
  c.expect(tight_run.size_ok, "size above 4 admitted under max_size 4");

  const auto lib = Library::initial();
  std::string text = "identity";
  for (int k = 0; k < 75; ++k) text = "(compose identity " + text + ")";
  const auto dir = fs::temp_directory_path() / "gssnn_acceptance_size";
  fs::create_directories(dir);
  write_text_file(dir / "programs.txt", text + "\n");
  const std::vector<fs::path> files{dir / "programs.txt"};
  const auto violations = validate_files(files);
  c.expect(violations.size() == 1 && violations[0].message.find("size limit") != std::string::npos,
           "size-151 program not flagged by validation");
  fs::remove_all(dir);
  c.note("largest admitted " + std::to_string(main_run.max_size_seen) + ", tight run largest " +
         std::to_string(tight_run.max_size_seen));
  return c.report();
}

}  // namespace
}  // namespace gssnn

int main() {
  using namespace gssnn;
  const std::vector<std::function<bool()>> criteria{
      embedding_formulas, affinity_and_bias,    isomorphism_oracle, heap_search_ordering,
      reweight_contract,  compression_contract, evolution_loop,     program_size_limit};
  std::size_t failed = 0;
  for (const auto& run : criteria) {
    try {
      failed += !run();
    } catch (const std::exception& e) {
      std::printf("FAIL (exception): %s\n", e.what());
      ++failed;
    }
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
