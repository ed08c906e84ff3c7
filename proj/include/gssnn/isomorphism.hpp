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

// Graph isomorphism for feature graphs.
//
// Structural isomorphism ignores ids and ranks and respects edge
// multiplicity. Candidate pairs are pruned with color refinement (hashed so
// colors are comparable across graphs) and then matched VF2-style along a
// BFS order, checking multiplicities against every already-mapped neighbor.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gssnn/graph.hpp"
#include "gssnn/hash.hpp"

namespace gssnn {

/// Node-indexed multigraph view with refined colors, reusable across many
/// comparisons.
class IndexedGraph {
 public:
  struct Neighbor {
    std::uint32_t node;  // node index
    std::uint32_t multiplicity;
  };

  IndexedGraph() = default;
  explicit IndexedGraph(const FeatureGraph& g) {
    const auto& ids = g.node_ids();
    std::unordered_map<std::uint32_t, std::uint32_t> index_of;
    index_of.reserve(ids.size());
    for (std::uint32_t k = 0; k < ids.size(); ++k) index_of.emplace(ids[k], k);

    adjacency_.resize(ids.size());
    for (const auto& e : g.elements()) {
      if (!e.is_edge()) continue;
      const auto a = index_of.at(e.u);
      const auto b = index_of.at(e.v);
      bump(a, b);
      bump(b, a);
      ++edge_count_;
    }
    degree_.resize(ids.size(), 0);
    for (std::size_t k = 0; k < adjacency_.size(); ++k) {
      auto& row = adjacency_[k];
      std::sort(row.begin(), row.end(),
                [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
      for (const auto& nb : row) degree_[k] += nb.multiplicity;
    }
    refine();
  }

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<Neighbor>& neighbors(std::uint32_t n) const { return adjacency_[n]; }
  std::uint32_t degree(std::uint32_t n) const { return degree_[n]; }
  std::uint64_t color(std::uint32_t n) const { return colors_[n]; }
  /// Isomorphism-invariant summary; equal for isomorphic graphs.
  std::uint64_t key() const { return key_; }

  std::uint32_t multiplicity(std::uint32_t a, std::uint32_t b) const {
    const auto& row = adjacency_[a];
    auto it = std::lower_bound(row.begin(), row.end(), b,
                               [](const Neighbor& x, std::uint32_t n) { return x.node < n; });
    return (it != row.end() && it->node == b) ? it->multiplicity : 0;
  }

 private:
  void bump(std::uint32_t a, std::uint32_t b) {
    for (auto& nb : adjacency_[a]) {
      if (nb.node == b) {
        ++nb.multiplicity;
        return;
      }
    }
    adjacency_[a].push_back({b, 1});
  }

  static std::size_t distinct(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  }

  // Rounds stop once the partition stops splitting; refinement is
  // isomorphism-invariant, so isomorphic graphs stop after the same round.
  void refine() {
    const auto n = adjacency_.size();
    colors_.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      colors_[k] = hash_combine(fnv1a_u64(degree_[k]), adjacency_[k].size());
    }
    std::size_t classes = distinct(colors_);
    std::vector<std::uint64_t> next(n);
    std::vector<std::uint64_t> bag;
    for (std::size_t round = 0; round < n; ++round) {
      for (std::size_t k = 0; k < n; ++k) {
        bag.clear();
        for (const auto& nb : adjacency_[k]) {
          bag.push_back(hash_combine(colors_[nb.node], nb.multiplicity));
        }
        std::sort(bag.begin(), bag.end());
        auto h = fnv1a_u64(colors_[k]);
        for (auto b : bag) h = hash_combine(h, b);
        next[k] = h;
      }
      const auto refined = distinct(next);
      colors_.swap(next);
      if (refined == classes) break;
      classes = refined;
    }
    auto sorted = colors_;
    std::sort(sorted.begin(), sorted.end());
    key_ = hash_combine(fnv1a_u64(n), edge_count_);
    for (auto c : sorted) key_ = hash_combine(key_, c);
  }

  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::uint32_t> degree_;
  std::vector<std::uint64_t> colors_;
  std::size_t edge_count_ = 0;
  std::uint64_t key_ = 0;
};

namespace detail {

class StructureMatcher {
 public:
  StructureMatcher(const IndexedGraph& a, const IndexedGraph& b) : a_(a), b_(b) {}

  bool run() {
    const auto n = a_.node_count();
    if (n != b_.node_count() || a_.edge_count() != b_.edge_count() || a_.key() != b_.key()) {
      return false;
    }
    if (n == 0) return true;
    build_order();
    map_ab_.assign(n, kUnmapped);
    map_ba_.assign(n, kUnmapped);
    return extend(0);
  }

 private:
  static constexpr std::uint32_t kUnmapped = 0xffffffffU;

  // BFS from a node of the rarest color (highest degree on ties); within a
  // BFS level, nodes with more already-ordered neighbors come first.
  void build_order() {
    const auto n = a_.node_count();
    std::unordered_map<std::uint64_t, std::size_t> freq;
    for (std::uint32_t k = 0; k < n; ++k) ++freq[a_.color(k)];
    auto better_root = [&](std::uint32_t x, std::uint32_t y) {
      const auto fx = freq[a_.color(x)], fy = freq[a_.color(y)];
      if (fx != fy) return fx < fy;
      return a_.degree(x) > a_.degree(y);
    };
    std::vector<char> placed(n, 0);
    std::vector<std::uint32_t> ordered_nbrs(n, 0);
    order_.clear();
    order_.reserve(n);
    while (order_.size() < n) {
      std::uint32_t root = kUnmapped;
      for (std::uint32_t k = 0; k < n; ++k) {
        if (!placed[k] && (root == kUnmapped || better_root(k, root))) root = k;
      }
      std::vector<std::uint32_t> level{root};
      placed[root] = 1;
      while (!level.empty()) {
        std::stable_sort(level.begin(), level.end(), [&](std::uint32_t x, std::uint32_t y) {
          if (ordered_nbrs[x] != ordered_nbrs[y]) return ordered_nbrs[x] > ordered_nbrs[y];
          if (a_.degree(x) != a_.degree(y)) return a_.degree(x) > a_.degree(y);
          return freq[a_.color(x)] < freq[a_.color(y)];
        });
        std::vector<std::uint32_t> next;
        for (auto x : level) {
          order_.push_back(x);
          for (const auto& nb : a_.neighbors(x)) {
            ++ordered_nbrs[nb.node];
            if (!placed[nb.node]) {
              placed[nb.node] = 1;
              next.push_back(nb.node);
            }
          }
        }
        level.swap(next);
      }
    }
  }

  bool feasible(std::uint32_t u, std::uint32_t v) const {
    if (a_.color(u) != b_.color(v) || a_.degree(u) != b_.degree(v)) return false;
    std::uint32_t mapped_weight_a = 0;
    for (const auto& nb : a_.neighbors(u)) {
      const auto image = map_ab_[nb.node];
      if (image == kUnmapped) continue;
      if (b_.multiplicity(v, image) != nb.multiplicity) return false;
      mapped_weight_a += nb.multiplicity;
    }
    std::uint32_t mapped_weight_b = 0;
    for (const auto& nb : b_.neighbors(v)) {
      if (map_ba_[nb.node] != kUnmapped) mapped_weight_b += nb.multiplicity;
    }
    return mapped_weight_a == mapped_weight_b;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const auto u = order_[depth];
    // Candidates come from the neighborhood of an already-mapped neighbor of
    // u when one exists; otherwise every unmapped node of b.
    std::uint32_t anchor = kUnmapped;
    for (const auto& nb : a_.neighbors(u)) {
      if (map_ab_[nb.node] != kUnmapped) {
        anchor = map_ab_[nb.node];
        break;
      }
    }
    auto attempt = [&](std::uint32_t v) {
      if (map_ba_[v] != kUnmapped || !feasible(u, v)) return false;
      map_ab_[u] = v;
      map_ba_[v] = u;
      if (extend(depth + 1)) return true;
      map_ab_[u] = kUnmapped;
      map_ba_[v] = kUnmapped;
      return false;
    };
    if (anchor != kUnmapped) {
      for (const auto& nb : b_.neighbors(anchor)) {
        if (attempt(nb.node)) return true;
      }
      return false;
    }
    for (std::uint32_t v = 0; v < b_.node_count(); ++v) {
      if (attempt(v)) return true;
    }
    return false;
  }

  const IndexedGraph& a_;
  const IndexedGraph& b_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> map_ab_;
  std::vector<std::uint32_t> map_ba_;
};

}  // namespace detail

inline bool isomorphic_structure(const IndexedGraph& a, const IndexedGraph& b) {
  return detail::StructureMatcher(a, b).run();
}

inline bool isomorphic_structure(const FeatureGraph& a, const FeatureGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  return isomorphic_structure(IndexedGraph(a), IndexedGraph(b));
}

/// Structure isomorphism that also preserves every element's (id, rank).
/// Ids are unique, so the only candidate mapping sends each id to itself.
inline bool isomorphic_featured(const FeatureGraph& a, const FeatureGraph& b) {
  if (a.size() != b.size()) return false;
  const auto& ea = a.elements();
  const auto& eb = b.elements();
  for (std::size_t k = 0; k < ea.size(); ++k) {
    const auto& x = ea[k];
    const auto& y = eb[k];
    if (x.kind != y.kind || x.id != y.id || x.rank != y.rank) return false;
    if (x.is_edge()) {
      const bool same = (x.u == y.u && x.v == y.v) || (x.u == y.v && x.v == y.u);
      if (!same) return false;
    }
  }
  return true;
}

/// A growing set of graphs answering "is there a structurally isomorphic
/// member?" Buckets by the refinement key; full matching only on collisions.
class GraphPool {
 public:
  std::optional<std::size_t> find(const IndexedGraph& g) const {
    auto [lo, hi] = buckets_.equal_range(g.key());
    std::optional<std::size_t> best;
    for (auto it = lo; it != hi; ++it) {
      if ((!best || it->second < *best) && isomorphic_structure(members_[it->second], g)) {
        best = it->second;
      }
    }
    return best;
  }

  std::size_t add(IndexedGraph g) {
    const auto index = members_.size();
    buckets_.emplace(g.key(), index);
    members_.push_back(std::move(g));
    return index;
  }

  std::size_t size() const { return members_.size(); }
  const IndexedGraph& operator[](std::size_t k) const { return members_[k]; }

 private:
  std::vector<IndexedGraph> members_;
  std::unordered_multimap<std::uint64_t, std::size_t> buckets_;
};

}  // namespace gssnn
