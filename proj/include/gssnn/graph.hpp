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

// Symbolic feature graphs: undirected, single-component multigraphs whose
// nodes and edges carry an (id, rank) feature pair.
//
// Element ids equal the number of elements present when the element was
// created, so `elements()[k].id == k` for every valid graph. Nodes have rank
// 0; an edge's rank distinguishes it within the neighborhood of each of its
// endpoints.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gssnn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ElementKind : std::uint8_t { Node, Edge };

struct GraphElement {
  ElementKind kind = ElementKind::Node;
  std::uint32_t id = 0;
  std::uint32_t rank = 0;
  // Endpoint node ids; meaningful for edges only.
  std::uint32_t u = 0;
  std::uint32_t v = 0;

  bool is_node() const { return kind == ElementKind::Node; }
  bool is_edge() const { return kind == ElementKind::Edge; }

  friend bool operator==(const GraphElement&, const GraphElement&) = default;
};

class FeatureGraph {
 public:
  FeatureGraph() = default;

  /// Wraps raw elements without checking invariants; see validate().
  /// Elements are reordered by id.
  static FeatureGraph from_elements(std::vector<GraphElement> elements) {
    std::sort(elements.begin(), elements.end(),
              [](const GraphElement& a, const GraphElement& b) { return a.id < b.id; });
    FeatureGraph g;
    g.elements_ = std::move(elements);
    for (const auto& e : g.elements_) {
      if (e.is_node()) {
        g.nodes_.push_back(e.id);
      } else {
        ++g.edge_count_;
      }
    }
    return g;
  }

  const std::vector<GraphElement>& elements() const { return elements_; }
  /// Node ids in creation order.
  const std::vector<std::uint32_t>& node_ids() const { return nodes_; }
  std::size_t size() const { return elements_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return elements_.empty(); }

  const GraphElement& element(std::uint32_t id) const {
    if (id >= elements_.size() || elements_[id].id != id) {
      throw Error("no element with id " + std::to_string(id));
    }
    return elements_[id];
  }

  friend bool operator==(const FeatureGraph& a, const FeatureGraph& b) {
    return a.elements_ == b.elements_;
  }

 private:
  friend class GraphBuilder;

  std::vector<GraphElement> elements_;
  std::vector<std::uint32_t> nodes_;
  std::size_t edge_count_ = 0;
};

struct DegreeStats {
  std::uint32_t d_star = 0;  // 1 + max id
  std::uint32_t r_star = 0;  // 1 + max rank

  friend bool operator==(const DegreeStats&, const DegreeStats&) = default;
};

inline DegreeStats degree_stats(const FeatureGraph& g) {
  if (g.empty()) throw Error("empty graph");
  DegreeStats s;
  for (const auto& e : g.elements()) {
    s.d_star = std::max(s.d_star, e.id + 1);
    s.r_star = std::max(s.r_star, e.rank + 1);
  }
  return s;
}

/// Incremental constructor that maintains every FeatureGraph invariant except
/// connectivity, which build() checks.
///
/// A new edge's rank is one more than the largest rank among edges already
/// incident to either endpoint, so ranks stay distinct in every neighborhood.
class GraphBuilder {
 public:
  GraphBuilder() = default;
  explicit GraphBuilder(const FeatureGraph& g) {
    for (const auto& e : g.elements()) {
      if (e.is_node()) {
        add_node();
      } else {
        add_edge(e.u, e.v);
      }
    }
    if (!(graph_ == g)) throw Error("graph cannot be reproduced by the builder");
  }

  std::uint32_t add_node() {
    const auto id = next_id();
    graph_.elements_.push_back({ElementKind::Node, id, 0, 0, 0});
    graph_.nodes_.push_back(id);
    max_incident_rank_.resize(graph_.elements_.size(), 0);
    return id;
  }

  /// Adds a node and joins it to the most recently created node, if any.
  std::uint32_t add_attached_node() {
    const bool has_prior = !graph_.nodes_.empty();
    const std::uint32_t prior = has_prior ? graph_.nodes_.back() : 0;
    const auto id = add_node();
    if (has_prior) add_edge(id, prior);
    return id;
  }

  std::uint32_t add_edge(std::uint32_t u, std::uint32_t v) {
    require_node(u);
    require_node(v);
    if (u == v) throw Error("self-edge at node " + std::to_string(u));
    const auto rank = next_rank(u, v);
    const auto id = next_id();
    graph_.elements_.push_back({ElementKind::Edge, id, rank, u, v});
    ++graph_.edge_count_;
    max_incident_rank_.resize(graph_.elements_.size(), 0);
    max_incident_rank_[u] = rank;
    max_incident_rank_[v] = rank;
    ++multiplicity_[pair_key(u, v)];
    return id;
  }

  std::uint32_t next_rank(std::uint32_t u, std::uint32_t v) const {
    return 1 + std::max(max_incident_rank_.at(u), max_incident_rank_.at(v));
  }

  std::size_t multiplicity(std::uint32_t u, std::uint32_t v) const {
    auto it = multiplicity_.find(pair_key(u, v));
    return it == multiplicity_.end() ? 0 : it->second;
  }

  std::size_t node_count() const { return graph_.node_count(); }
  std::size_t size() const { return graph_.size(); }
  /// Id of the node created `index`-th (0-based).
  std::uint32_t node_at(std::size_t index) const { return graph_.nodes_.at(index); }
  const FeatureGraph& view() const { return graph_; }

  FeatureGraph build() &&;

 private:
  std::uint32_t next_id() const {
    if (graph_.elements_.size() >= std::numeric_limits<std::uint32_t>::max()) {
      throw Error("graph too large");
    }
    return static_cast<std::uint32_t>(graph_.elements_.size());
  }

  void require_node(std::uint32_t id) const {
    if (id >= graph_.elements_.size() || !graph_.elements_[id].is_node()) {
      throw Error("edge endpoint " + std::to_string(id) + " is not a node");
    }
  }

  static std::uint64_t pair_key(std::uint32_t u, std::uint32_t v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }

  FeatureGraph graph_;
  std::vector<std::uint32_t> max_incident_rank_;
  std::unordered_map<std::uint64_t, std::size_t> multiplicity_;
};

/// Lists every invariant violation in `g`; an empty result means valid.
inline std::vector<std::string> validate(const FeatureGraph& g) {
  std::vector<std::string> out;
  const auto& els = g.elements();
  if (els.empty()) {
    out.emplace_back("empty graph");
    return out;
  }
  for (std::size_t k = 0; k < els.size(); ++k) {
    if (els[k].id != k) {
      out.push_back("non-contiguous ids: expected id " + std::to_string(k) + ", found " +
                    std::to_string(els[k].id));
      return out;
    }
  }

  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> ranks_at;
  for (const auto& e : els) {
    const auto id = std::to_string(e.id);
    if (e.is_node()) {
      if (e.rank != 0) out.push_back("node rank " + std::to_string(e.rank) + " at id " + id);
      continue;
    }
    if (e.rank < 1) out.push_back("edge rank 0 at id " + id);
    bool endpoints_ok = true;
    for (auto end : {e.u, e.v}) {
      if (end >= e.id || !els[end].is_node()) {
        out.push_back("dangling endpoint " + std::to_string(end) + " at id " + id);
        endpoints_ok = false;
      }
    }
    if (e.u == e.v) {
      out.push_back("self-edge at id " + id);
      continue;
    }
    if (!endpoints_ok) continue;
    for (auto end : {e.u, e.v}) {
      auto& seen = ranks_at[end];
      if (std::find(seen.begin(), seen.end(), e.rank) != seen.end()) {
        out.push_back("duplicate rank " + std::to_string(e.rank) + " at node " +
                      std::to_string(end) + " (edge id " + id + ")");
      }
      seen.push_back(e.rank);
    }
  }
  if (!out.empty()) return out;

  // Single component: union-find over nodes.
  std::vector<std::uint32_t> parent(els.size());
  for (std::uint32_t k = 0; k < parent.size(); ++k) parent[k] = k;
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : els) {
    if (e.is_edge()) parent[find(e.u)] = find(e.v);
  }
  const auto root = find(g.node_ids().front());
  for (auto n : g.node_ids()) {
    if (find(n) != root) {
      out.push_back("disconnected node at id " + std::to_string(n));
    }
  }
  return out;
}

inline FeatureGraph GraphBuilder::build() && {
  auto problems = validate(graph_);
  if (!problems.empty()) throw Error("invalid graph: " + problems.front());
  return std::move(graph_);
}

/// The uninformative graph every program is applied to: one node.
inline FeatureGraph initial_graph() {
  GraphBuilder b;
  b.add_node();
  return std::move(b).build();
}

}  // namespace gssnn
