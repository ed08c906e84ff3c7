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

// Distributional program search.
//
// Programs are scored under a unigram model: each primitive carries a
// log-likelihood weight, normalized over the primitives that can fill a
// requested type, and a program's log-probability is the sum of its
// primitives' normalized weights. ProgramEnumerator streams programs in
// non-increasing probability (heap search: one ordered list and one frontier
// heap per type, successors formed by advancing a single child to the next
// program of its type). Equal-probability programs come out in lexicographic
// order of their s-expressions.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gssnn/dsl.hpp"
#include "gssnn/graph.hpp"
#include "gssnn/isomorphism.hpp"

namespace gssnn {

/// Unnormalized per-primitive log-likelihoods, indexed like the library.
struct UnigramModel {
  std::vector<double> logp;

  friend bool operator==(const UnigramModel&, const UnigramModel&) = default;
};

inline UnigramModel uniform_model(const Library& lib) {
  const double w = lib.size() == 0 ? 0.0 : -std::log(static_cast<double>(lib.size()));
  return UnigramModel{std::vector<double>(lib.size(), w)};
}

inline UnigramModel model_from_library(const Library& lib) { return UnigramModel{lib.logps()}; }

/// Laplace-smoothed (alpha = 1) primitive frequencies over the population.
inline UnigramModel infer_unigrams(std::span<const Expr> population, const Library& lib) {
  if (population.empty()) return uniform_model(lib);
  std::vector<std::size_t> counts(lib.size(), 0);
  for (const auto& p : population) count_primitives(p, counts);
  std::size_t total = 0;
  for (auto c : counts) total += c;
  const double denom = static_cast<double>(total + lib.size());
  UnigramModel m;
  m.logp.reserve(lib.size());
  for (auto c : counts) m.logp.push_back(std::log(static_cast<double>(c + 1) / denom));
  return m;
}

/// Shrinks the weights toward their mean until max - min <= max_spread,
/// keeping each weight's relative distance from the mean.
inline UnigramModel reweight(UnigramModel model, double max_spread = 0.5) {
  auto& w = model.logp;
  if (w.empty()) return model;
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  const double spread = *hi - *lo;
  if (spread <= max_spread) return model;
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  const double scale = max_spread / spread;
  for (double& x : w) x = mean + (x - mean) * scale;
  return model;
}

inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Unigram model normalized per requested type.
class Grammar {
 public:
  struct Production {
    std::uint32_t prim;
    double logp;
  };

  Grammar(const Library& lib, const UnigramModel& model) : lib_(&lib) {
    if (model.logp.size() != lib.size()) throw Error("model does not match library");
    normalized_.assign(lib.size(), -std::numeric_limits<double>::infinity());
    for (auto t : {Type::Transform, Type::Int}) {
      std::vector<double> ws;
      for (std::uint32_t k = 0; k < lib.size(); ++k) {
        if (lib[k].result == t) ws.push_back(model.logp[k]);
      }
      const double z = log_sum_exp(ws);
      for (std::uint32_t k = 0; k < lib.size(); ++k) {
        if (lib[k].result != t) continue;
        normalized_[k] = model.logp[k] - z;
        productions_[slot(t)].push_back({k, normalized_[k]});
      }
    }
  }

  const Library& library() const { return *lib_; }
  const std::vector<Production>& productions(Type t) const { return productions_[slot(t)]; }
  double logp(std::uint32_t prim) const { return normalized_.at(prim); }

  /// Log-probability from primitive counts. Summing in library order makes
  /// the value depend only on the count vector, so programs built from the
  /// same primitives score bit-identically.
  template <typename Counts>
  double logp_of_counts(const Counts& counts) const {
    double s = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] != 0) s += static_cast<double>(counts[k]) * normalized_[k];
    }
    return s;
  }

  double logp_of(const Expr& program) const {
    std::vector<std::size_t> counts(lib_->size(), 0);
    count_primitives(program, counts);
    return logp_of_counts(counts);
  }

  static std::size_t slot(Type t) { return t == Type::Transform ? 0 : 1; }

 private:
  const Library* lib_;
  std::vector<double> normalized_;
  std::vector<Production> productions_[2];
};

struct EnumeratedProgram {
  Expr program;
  std::string text;
  double logp = 0.0;
  std::size_t size = 0;
};

class ProgramEnumerator {
 public:
  /// Programs whose log-probability lies within this margin of the best
  /// buffered one are collected before emitting, so ties resolve
  /// lexicographically despite rounding in the frontier.
  static constexpr double kTieMargin = 1e-9;

  ProgramEnumerator(const Library& lib, const UnigramModel& model, Type root = Type::Transform)
      : lib_(lib), grammar_(lib, model), root_(root) {
    initialize();
  }

  const Grammar& grammar() const { return grammar_; }

  std::optional<EnumeratedProgram> next() {
    const auto r = Grammar::slot(root_);
    while (!exhausted_) {
      if (!ensure(r, cursor_)) {
        exhausted_ = true;
        break;
      }
      const double lp = lists_[r][cursor_].logp;
      if (!buffer_.empty() && lp < buffer_.begin()->logp - kTieMargin) break;
      auto program = materialize(r, cursor_);
      auto text = to_sexpr(program, lib_);
      buffer_.insert({std::move(program), std::move(text), lp, lists_[r][cursor_].size});
      ++cursor_;
    }
    if (buffer_.empty()) return std::nullopt;
    return std::move(buffer_.extract(buffer_.begin()).value());
  }

 private:
  struct Item {
    std::uint32_t prim = 0;
    std::vector<std::uint32_t> children;  // indices into the child types' lists

    friend auto operator<=>(const Item&, const Item&) = default;
  };

  struct Entry {
    Item item;
    double logp = 0.0;
    std::size_t size = 0;
    std::vector<std::uint32_t> counts;
  };

  struct Pending {
    Entry entry;
    std::uint64_t seq = 0;
  };

  static bool heap_less(const Pending& a, const Pending& b) {
    if (a.entry.logp != b.entry.logp) return a.entry.logp < b.entry.logp;
    return a.seq > b.seq;
  }

  // Knuth's generalization of Dijkstra: finalize types in order of their best
  // achievable log-probability, so every type's first program only refers to
  // types finalized before it.
  void initialize() {
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    double best[2] = {kNone, kNone};
    std::optional<std::uint32_t> best_prim[2];
    bool final[2] = {false, false};
    std::vector<std::size_t> order;
    for (int round = 0; round < 2; ++round) {
      int pick = -1;
      double pick_value = kNone;
      std::uint32_t pick_prim = 0;
      for (auto t : {Type::Transform, Type::Int}) {
        const auto s = Grammar::slot(t);
        if (final[s]) continue;
        for (const auto& prod : grammar_.productions(t)) {
          double v = prod.logp;
          bool ok = std::isfinite(v);
          for (auto pt : lib_[prod.prim].params) {
            const auto ps = Grammar::slot(pt);
            if (!final[ps] || !std::isfinite(best[ps])) {
              ok = false;
              break;
            }
            v += best[ps];
          }
          if (ok && v > pick_value) {
            pick = static_cast<int>(s);
            pick_value = v;
            pick_prim = prod.prim;
          }
        }
      }
      if (pick < 0) break;
      final[pick] = true;
      best[pick] = pick_value;
      best_prim[pick] = pick_prim;
      order.push_back(static_cast<std::size_t>(pick));
    }
    for (std::size_t s = 0; s < 2; ++s) finite_[s] = best_prim[s].has_value();

    for (auto s : order) {
      Item first{*best_prim[s], std::vector<std::uint32_t>(lib_[*best_prim[s]].arity(), 0)};
      pushed_[s].insert(first);
      lists_[s].push_back(make_entry(std::move(first)));
    }
    for (auto s : order) {
      const Type t = s == 0 ? Type::Transform : Type::Int;
      for (const auto& prod : grammar_.productions(t)) {
        if (!usable(prod.prim)) continue;
        push(s, Item{prod.prim, std::vector<std::uint32_t>(lib_[prod.prim].arity(), 0)});
      }
    }
    for (auto s : order) push_successors(s, 0);
  }

  bool usable(std::uint32_t prim) const {
    if (!std::isfinite(grammar_.logp(prim))) return false;
    for (auto pt : lib_[prim].params) {
      if (!finite_[Grammar::slot(pt)]) return false;
    }
    return true;
  }

  Entry make_entry(Item item) const {
    Entry e;
    e.counts.assign(lib_.size(), 0);
    e.counts[item.prim] = 1;
    e.size = 1;
    const auto& params = lib_[item.prim].params;
    for (std::size_t j = 0; j < item.children.size(); ++j) {
      const auto& child = lists_[Grammar::slot(params[j])][item.children[j]];
      for (std::size_t k = 0; k < e.counts.size(); ++k) e.counts[k] += child.counts[k];
      e.size += child.size;
    }
    e.logp = grammar_.logp_of_counts(e.counts);
    e.item = std::move(item);
    return e;
  }

  void push(std::size_t s, Item item) {
    if (!pushed_[s].insert(item).second) return;
    heaps_[s].push_back({make_entry(std::move(item)), seq_++});
    std::push_heap(heaps_[s].begin(), heaps_[s].end(), heap_less);
  }

  void push_successors(std::size_t s, std::size_t index) {
    const Item item = lists_[s][index].item;
    const auto& params = lib_[item.prim].params;
    for (std::size_t j = 0; j < item.children.size(); ++j) {
      const auto cs = Grammar::slot(params[j]);
      const auto next = item.children[j] + 1;
      if (!ensure(cs, next)) continue;
      Item succ = item;
      succ.children[j] = next;
      push(s, std::move(succ));
    }
  }

  bool ensure(std::size_t s, std::size_t index) {
    while (lists_[s].size() <= index) {
      if (!finite_[s] || heaps_[s].empty()) return false;
      std::pop_heap(heaps_[s].begin(), heaps_[s].end(), heap_less);
      Entry e = std::move(heaps_[s].back().entry);
      heaps_[s].pop_back();
      lists_[s].push_back(std::move(e));
      push_successors(s, lists_[s].size() - 1);
    }
    return true;
  }

  Expr materialize(std::size_t s, std::size_t index) const {
    const auto& item = lists_[s][index].item;
    const auto& params = lib_[item.prim].params;
    auto e = Expr::prim(item.prim);
    e.args.reserve(item.children.size());
    for (std::size_t j = 0; j < item.children.size(); ++j) {
      e.args.push_back(materialize(Grammar::slot(params[j]), item.children[j]));
    }
    return e;
  }

  const Library& lib_;
  Grammar grammar_;
  Type root_;
  bool finite_[2] = {false, false};
  std::vector<Entry> lists_[2];
  std::vector<Pending> heaps_[2];
  std::set<Item> pushed_[2];
  std::uint64_t seq_ = 0;
  std::size_t cursor_ = 0;
  bool exhausted_ = false;
  struct EmitOrder {
    bool operator()(const EnumeratedProgram& a, const EnumeratedProgram& b) const {
      if (a.logp != b.logp) return a.logp > b.logp;
      return a.text < b.text;
    }
  };
  std::set<EnumeratedProgram, EmitOrder> buffer_;
};

struct SearchBudget {
  double seconds = 15.0;
  std::size_t max_size = kMaxProgramSize;
  std::size_t max_results = 50;
  /// Deterministic cap on programs drawn from the enumerator.
  std::optional<std::size_t> max_enumerated;
  /// Graphs with more elements than this are not admitted.
  std::optional<std::size_t> max_elements;
  EvalLimits limits{};
};

/// An existing population member, for shortening detection.
struct SearchMember {
  std::size_t size = 0;
  FeatureGraph graph;
};

struct Candidate {
  Expr program;
  std::string text;
  double logp = 0.0;
  std::size_t size = 0;
  FeatureGraph graph;
};

struct Shortening {
  std::size_t member = 0;
  Candidate replacement;
};

struct SearchStats {
  std::size_t enumerated = 0;
  std::size_t oversize = 0;
  std::size_t diverged = 0;
  std::size_t too_many_elements = 0;
  std::size_t duplicates = 0;
  std::size_t novel = 0;
  std::size_t shortenings = 0;
  double elapsed_seconds = 0.0;
  bool exhausted = false;
  bool timed_out = false;
};

struct SearchResult {
  std::vector<Candidate> programs;  // probability order
  std::vector<Shortening> shortenings;
  SearchStats stats;
};

/// Best-first search for programs whose graphs are structurally new with
/// respect to `seen`, the members' graphs and each other. A program that
/// reproduces a member's graph exactly (features included) with fewer
/// primitives is reported as a shortening of that member.
inline SearchResult heap_search(const UnigramModel& model, const Library& lib,
                                const SearchBudget& budget, std::span<const FeatureGraph> seen,
                                std::span<const SearchMember> members = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SearchResult out;
  if (budget.max_results == 0) return out;

  GraphPool member_pool;
  for (const auto& m : members) member_pool.add(IndexedGraph(m.graph));
  GraphPool known;
  for (const auto& g : seen) known.add(IndexedGraph(g));

  std::vector<std::optional<Candidate>> best_shortening(members.size());

  ProgramEnumerator stream(lib, model);
  for (;;) {
    if (out.programs.size() >= budget.max_results) break;
    if (budget.max_enumerated && out.stats.enumerated >= *budget.max_enumerated) break;
    if (elapsed() >= budget.seconds) {
      out.stats.timed_out = true;
      break;
    }
    auto next = stream.next();
    if (!next) {
      out.stats.exhausted = true;
      break;
    }
    ++out.stats.enumerated;
    if (next->size > budget.max_size) {
      ++out.stats.oversize;
      continue;
    }
    FeatureGraph graph;
    try {
      graph = evaluate(next->program, lib, budget.limits);
    } catch (const Diverged&) {
      ++out.stats.diverged;
      continue;
    }
    if (budget.max_elements && graph.size() > *budget.max_elements) {
      ++out.stats.too_many_elements;
      continue;
    }
    IndexedGraph indexed(graph);
    if (auto hit = member_pool.find(indexed)) {
      const auto m = *hit;
      if (next->size < members[m].size && isomorphic_featured(graph, members[m].graph) &&
          (!best_shortening[m] || next->size < best_shortening[m]->size)) {
        best_shortening[m] =
            Candidate{std::move(next->program), std::move(next->text), next->logp, next->size,
                      std::move(graph)};
      }
      ++out.stats.duplicates;
      continue;
    }
    if (known.find(indexed)) {
      ++out.stats.duplicates;
      continue;
    }
    known.add(std::move(indexed));
    out.programs.push_back(Candidate{std::move(next->program), std::move(next->text), next->logp,
                                     next->size, std::move(graph)});
    ++out.stats.novel;
  }
  for (std::size_t m = 0; m < best_shortening.size(); ++m) {
    if (best_shortening[m]) out.shortenings.push_back({m, std::move(*best_shortening[m])});
  }
  out.stats.shortenings = out.shortenings.size();
  out.stats.elapsed_seconds = elapsed();
  return out;
}

}  // namespace gssnn
