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

// Library learning by corpus compression.
//
// A candidate abstraction is a pattern: a corpus subtree with up to two
// parameters standing in for subterms (one parameter may stand in for several
// identical subterms). Rewriting replaces matches leftmost-outermost with an
// application of the new primitive, whose arguments are rewritten in turn.
// Utility is the number of primitives saved across the corpus minus the size
// of the pattern body.
//
// Candidates come from anti-unifying every pair of subtrees that share a head
// primitive, each subtree with itself included, and then generalizing the
// result. A useful pattern either matches two distinct occurrences, and so
// generalizes their least general generalization, or matches one occurrence
// through a repeated parameter, and so generalizes that occurrence.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gssnn/dsl.hpp"

namespace gssnn {

struct Abstraction {
  std::string name;
  Expr body;
  std::vector<Type> params;
  Type result = Type::Transform;
  long utility = 0;
  std::size_t body_size = 0;
  std::string text;  // body s-expression

  std::size_t arity() const { return params.size(); }
};

inline std::size_t corpus_size(std::span<const Expr> corpus) {
  std::size_t n = 0;
  for (const auto& p : corpus) n += program_size(p);
  return n;
}

using Bindings = std::array<const Expr*, kMaxAbstractionArity>;

/// Matches `pattern` against `term`; repeated parameters must bind equal
/// subterms.
inline bool match(const Expr& pattern, const Expr& term, Bindings& bound) {
  if (pattern.is_var()) {
    auto& slot = bound.at(pattern.index);
    if (slot == nullptr) {
      slot = &term;
      return true;
    }
    return *slot == term;
  }
  if (term.is_var() || pattern.index != term.index || pattern.args.size() != term.args.size()) {
    return false;
  }
  for (std::size_t k = 0; k < pattern.args.size(); ++k) {
    if (!match(pattern.args[k], term.args[k], bound)) return false;
  }
  return true;
}

/// Size of `term` after rewriting with `pattern` (arity `arity`).
inline std::size_t rewritten_size(const Expr& term, const Expr& pattern, std::size_t arity) {
  Bindings bound{};
  if (match(pattern, term, bound)) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < arity; ++k) n += rewritten_size(*bound[k], pattern, arity);
    return n;
  }
  std::size_t n = term.is_var() ? 0 : 1;
  for (const auto& a : term.args) n += rewritten_size(a, pattern, arity);
  return n;
}

inline Expr rewrite(const Expr& term, const Expr& pattern, std::uint32_t abstraction,
                    std::size_t arity) {
  Bindings bound{};
  if (match(pattern, term, bound)) {
    auto call = Expr::prim(abstraction);
    for (std::size_t k = 0; k < arity; ++k) {
      call.args.push_back(rewrite(*bound[k], pattern, abstraction, arity));
    }
    return call;
  }
  auto out = term;
  for (auto& a : out.args) a = rewrite(a, pattern, abstraction, arity);
  return out;
}

inline long compression_utility(std::span<const Expr> corpus, const Expr& pattern,
                                std::size_t arity) {
  long before = 0;
  long after = 0;
  for (const auto& p : corpus) {
    before += static_cast<long>(program_size(p));
    after += static_cast<long>(rewritten_size(p, pattern, arity));
  }
  return before - after - static_cast<long>(program_size(pattern));
}

/// Renumbers parameters by first occurrence in preorder; returns the arity.
inline std::size_t canonicalize_params(Expr& e) {
  std::vector<std::uint32_t> remap;
  auto visit = [&](auto&& self, Expr& x) -> void {
    if (x.is_var()) {
      auto it = std::find(remap.begin(), remap.end(), x.index);
      if (it == remap.end()) {
        remap.push_back(x.index);
        x.index = static_cast<std::uint32_t>(remap.size() - 1);
      } else {
        x.index = static_cast<std::uint32_t>(it - remap.begin());
      }
      return;
    }
    for (auto& a : x.args) self(self, a);
  };
  visit(visit, e);
  return remap.size();
}

namespace detail {

struct Subtree {
  const Expr* expr;
  Type type;
};

inline void collect_subtrees(const Expr& e, Type t, const Library& lib, std::vector<Subtree>& out) {
  out.push_back({&e, t});
  if (e.is_var()) return;
  const auto& params = lib[e.index].params;
  for (std::size_t k = 0; k < e.args.size(); ++k) collect_subtrees(e.args[k], params[k], lib, out);
}

/// Least general generalization of two terms. Each distinct mismatching pair
/// becomes one parameter.
class AntiUnifier {
 public:
  Expr run(const Expr& a, const Expr& b) {
    pairs_.clear();
    return go(a, b);
  }
  std::size_t params() const { return pairs_.size(); }

 private:
  Expr go(const Expr& a, const Expr& b) {
    if (a == b) return a;
    if (!a.is_var() && !b.is_var() && a.index == b.index && a.args.size() == b.args.size()) {
      auto out = Expr::prim(a.index);
      out.args.reserve(a.args.size());
      for (std::size_t k = 0; k < a.args.size(); ++k) out.args.push_back(go(a.args[k], b.args[k]));
      return out;
    }
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (*pairs_[k].first == a && *pairs_[k].second == b) {
        return Expr::var(static_cast<std::uint32_t>(k));
      }
    }
    pairs_.emplace_back(&a, &b);
    return Expr::var(static_cast<std::uint32_t>(pairs_.size() - 1));
  }

  std::vector<std::pair<const Expr*, const Expr*>> pairs_;
};

/// Enumerates patterns at least as general as a generalization `g`: `g` with
/// occurrences of up to `max_params` non-root subterms replaced by parameters
/// (a subterm's occurrences may be split between both parameters), every
/// parameter of `g` lying under a replaced position.
class Generalizer {
 public:
  // Classes with more occurrences than this only try "all" and singletons.
  static constexpr std::size_t kSubsetLimit = 12;
  static constexpr std::size_t kPatternLimit = 50'000;

  Generalizer(const Expr& g, const Library& lib, std::size_t max_params)
      : g_(g), lib_(lib), max_params_(max_params) {
    index(g, 0);
  }

  template <typename Emit>
  void run(Emit&& emit) {
    std::unordered_map<std::string, std::size_t> class_of;
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t i = 1; i < pos_.size(); ++i) {
      auto key = to_sexpr(*pos_[i].expr, lib_);
      auto [it, fresh] = class_of.emplace(std::move(key), classes.size());
      if (fresh) classes.emplace_back();
      classes[it->second].push_back(i);
    }
    std::vector<std::vector<std::vector<std::size_t>>> subsets(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) subsets[c] = choices(classes[c]);

    std::size_t produced = 0;
    std::vector<int> label(pos_.size(), -1);
    auto try_emit = [&]() {
      if (produced >= kPatternLimit || !covered(label)) return;
      ++produced;
      emit(build(label));
    };
    if (vars_.empty()) try_emit();
    if (max_params_ == 0) return;
    for (std::size_t c1 = 0; c1 < classes.size(); ++c1) {
      for (const auto& s1 : subsets[c1]) {
        for (auto p : s1) label[p] = 0;
        try_emit();
        if (max_params_ >= 2) {
          for (std::size_t c2 = c1; c2 < classes.size(); ++c2) {
            for (const auto& s2 : subsets[c2]) {
              if (!disjoint(s1, s2)) continue;
              for (auto p : s2) label[p] = 1;
              try_emit();
              for (auto p : s2) label[p] = -1;
            }
          }
        }
        for (auto p : s1) label[p] = -1;
      }
    }
  }

 private:
  struct Pos {
    const Expr* expr;
    std::size_t end;  // preorder subtree is [self, end)
  };

  void index(const Expr& e, std::size_t depth) {
    const auto self = pos_.size();
    pos_.push_back({&e, 0});
    if (e.is_var()) vars_.push_back(self);
    for (const auto& a : e.args) index(a, depth + 1);
    pos_[self].end = pos_.size();
  }

  std::vector<std::vector<std::size_t>> choices(const std::vector<std::size_t>& cls) const {
    std::vector<std::vector<std::size_t>> out;
    if (cls.size() <= kSubsetLimit) {
      for (std::size_t mask = 1; mask < (std::size_t{1} << cls.size()); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t k = 0; k < cls.size(); ++k) {
          if (mask & (std::size_t{1} << k)) s.push_back(cls[k]);
        }
        out.push_back(std::move(s));
      }
      return out;
    }
    out.push_back(cls);
    for (auto p : cls) out.push_back({p});
    return out;
  }

  bool nested(std::size_t a, std::size_t b) const {
    return (b >= a && b < pos_[a].end) || (a >= b && a < pos_[b].end);
  }

  bool disjoint(const std::vector<std::size_t>& s1, const std::vector<std::size_t>& s2) const {
    for (auto a : s1) {
      for (auto b : s2) {
        if (nested(a, b)) return false;
      }
    }
    return true;
  }

  bool covered(const std::vector<int>& label) const {
    for (auto v : vars_) {
      bool ok = false;
      for (std::size_t p = 1; p <= v && !ok; ++p) {
        ok = label[p] >= 0 && v < pos_[p].end;
      }
      if (!ok) return false;
    }
    return true;
  }

  Expr build(const std::vector<int>& label) const {
    std::size_t cursor = 0;
    auto go = [&](auto&& self, const Expr& e) -> Expr {
      const auto here = cursor;
      if (label[here] >= 0) {
        cursor = pos_[here].end;
        return Expr::var(static_cast<std::uint32_t>(label[here]));
      }
      ++cursor;
      auto out = Expr::prim(e.index);
      out.args.reserve(e.args.size());
      for (const auto& a : e.args) out.args.push_back(self(self, a));
      return out;
    };
    auto e = go(go, g_);
    canonicalize_params(e);
    return e;
  }

  const Expr& g_;
  const Library& lib_;
  std::size_t max_params_;
  std::vector<Pos> pos_;
  std::vector<std::size_t> vars_;
};

inline bool better(const Abstraction& a, const Abstraction& b) {
  if (a.utility != b.utility) return a.utility > b.utility;
  if (a.body_size != b.body_size) return a.body_size < b.body_size;
  return a.text < b.text;
}

}  // namespace detail

/// The candidate with the greatest utility, or nothing if no candidate saves
/// at least one primitive.
inline std::optional<Abstraction> best_abstraction(std::span<const Expr> corpus,
                                                   const Library& lib,
                                                   std::size_t max_arity = kMaxAbstractionArity) {
  max_arity = std::min(max_arity, kMaxAbstractionArity);
  std::vector<detail::Subtree> subtrees;
  for (const auto& p : corpus) detail::collect_subtrees(p, Type::Transform, lib, subtrees);

  std::unordered_map<std::uint32_t, std::vector<std::size_t>> by_head;
  for (std::size_t i = 0; i < subtrees.size(); ++i) {
    const auto& e = *subtrees[i].expr;
    if (!e.is_var()) by_head[e.index].push_back(i);
  }

  std::unordered_map<std::string, char> generalizations;
  std::unordered_map<std::string, Expr> patterns;
  detail::AntiUnifier au;
  for (const auto& [head, members] : by_head) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x; y < members.size(); ++y) {
        const auto g = au.run(*subtrees[members[x]].expr, *subtrees[members[y]].expr);
        if (!generalizations.emplace(to_sexpr(g, lib), 0).second) continue;
        detail::Generalizer(g, lib, max_arity).run([&](Expr pattern) {
          if (program_size(pattern) < 2) return;
          auto key = to_sexpr(pattern, lib);
          patterns.emplace(std::move(key), std::move(pattern));
        });
      }
    }
  }

  std::optional<Abstraction> best;
  for (auto& [text, pattern] : patterns) {
    Expr canonical = pattern;
    const auto arity = canonicalize_params(canonical);
    if (arity > max_arity) continue;
    Abstraction cand;
    cand.utility = compression_utility(corpus, canonical, arity);
    if (cand.utility <= 0) continue;
    cand.body_size = program_size(canonical);
    cand.text = text;
    if (best && !detail::better(cand, *best)) continue;
    cand.body = std::move(canonical);
    best = std::move(cand);
  }
  if (!best) return std::nullopt;

  // Signature comes from the library's own inference.
  Library probe = lib;
  const auto id = probe.add_abstraction(lib.fresh_name(), best->body);
  best->name = probe[id].name;
  best->params = probe[id].params;
  best->result = probe[id].result;
  return best;
}

struct CompressionResult {
  Library library;
  std::vector<Expr> corpus;
  std::vector<Abstraction> adopted;
};

/// Up to `max_rounds` rounds of: adopt the best abstraction, rewrite the
/// corpus with it.
inline CompressionResult compress(std::span<const Expr> corpus, Library lib,
                                  std::size_t max_rounds = 3,
                                  std::size_t max_arity = kMaxAbstractionArity) {
  CompressionResult out{std::move(lib), {corpus.begin(), corpus.end()}, {}};
  if (corpus.empty()) return out;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    auto found = best_abstraction(out.corpus, out.library, max_arity);
    if (!found) break;
    const auto weights = out.library.logps();
    const double floor_weight =
        weights.empty() ? 0.0 : *std::min_element(weights.begin(), weights.end());
    const auto id = out.library.add_abstraction(found->name, found->body, floor_weight);
    for (auto& p : out.corpus) p = rewrite(p, found->body, id, found->arity());
    out.adopted.push_back(std::move(*found));
  }
  return out;
}

}  // namespace gssnn
