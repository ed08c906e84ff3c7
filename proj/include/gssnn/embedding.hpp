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

// Feature-injection embedding: maps a symbolic feature graph and an input
// vector x in R^m to a graph with q-dimensional real features.
//
// Element v = (id, rank) receives the slice of x owned by its id, tiled out to
// q coordinates, plus a static two-dimensional sinusoidal code of (id, rank).
// Slices partition x: with l = floor(m / d*), slice w spans
// [idx(w), idx(w + 1)), where idx(0) = 0 and idx(w) = (m - d* l) + w l, so the
// first slice absorbs the remainder.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gssnn/graph.hpp"

namespace gssnn {

struct EmbeddingOptions {
  /// Use the conventional exponent (i mod (q/4)) / (q/4) instead of the
  /// literal i mod (q/4).
  bool pos_normalized = false;
  /// Use (d, r) directly instead of the reorder_1 / reorder_2 pair.
  bool simple_reorder = false;
  /// Offset slices by (m mod l) instead of (m - d* l). The two agree whenever
  /// m mod d* < l; otherwise the trailing m mod d* - (m mod l) inputs are
  /// left unused and the slices no longer cover x.
  bool literal_remainder = false;

  friend bool operator==(const EmbeddingOptions&, const EmbeddingOptions&) = default;
};

struct EmbeddingSpec {
  std::size_t m = 0;  // input dimensionality
  std::size_t q = 0;  // element feature dimensionality
  std::uint32_t d_star = 0;
  std::uint32_t r_star = 0;
  EmbeddingOptions options{};

  std::size_t slice_length() const { return m / d_star; }

  void check() const {
    if (d_star < 1) throw Error("embedding spec: d_star must be >= 1");
    if (r_star < 1) throw Error("embedding spec: r_star must be >= 1");
    if (m < d_star) {
      throw Error("embedding spec: m = " + std::to_string(m) + " is smaller than d_star = " +
                  std::to_string(d_star));
    }
    if (q == 0 || q % 4 != 0) throw Error("embedding spec: q must be a positive multiple of 4");
  }

  friend bool operator==(const EmbeddingSpec&, const EmbeddingSpec&) = default;
};

/// Spec sized exactly to `g`.
inline EmbeddingSpec make_spec(const FeatureGraph& g, std::size_t m, std::size_t q,
                               EmbeddingOptions options = {}) {
  const auto stats = degree_stats(g);
  EmbeddingSpec spec{m, q, stats.d_star, stats.r_star, options};
  spec.check();
  return spec;
}

/// Start offset of the slice owned by id w; idx(d*) == m.
inline std::size_t idx(std::size_t w, const EmbeddingSpec& spec) {
  spec.check();
  if (w > spec.d_star) {
    throw Error("idx: w = " + std::to_string(w) + " exceeds d_star = " +
                std::to_string(spec.d_star));
  }
  if (w == 0) return 0;
  const auto l = spec.slice_length();
  const auto remainder = spec.options.literal_remainder ? spec.m % l : spec.m - spec.d_star * l;
  return remainder + w * l;
}

/// Repeats `s` cyclically to length q.
inline std::vector<double> tile_expand(std::span<const double> s, std::size_t q) {
  if (s.empty()) throw Error("tile_expand: empty input");
  std::vector<double> out(q);
  for (std::size_t i = 0; i < q; ++i) out[i] = s[i % s.size()];
  return out;
}

struct ReorderedPosition {
  std::uint64_t p1 = 0;
  std::uint64_t p2 = 0;

  friend bool operator==(const ReorderedPosition&, const ReorderedPosition&) = default;
};

inline ReorderedPosition reorder(std::uint64_t d, std::uint64_t r, const EmbeddingSpec& spec) {
  if (d >= spec.d_star || r >= spec.r_star) {
    throw Error("reorder: (" + std::to_string(d) + ", " + std::to_string(r) +
                ") outside [0, d_star) x [0, r_star)");
  }
  if (spec.options.simple_reorder) return {d, r};
  const std::uint64_t k = d * spec.r_star + r;
  return {k % spec.d_star, k / spec.d_star};
}

/// Sinusoidal code of (d, r). Quarters hold sin(p1 s_j), cos(p1 s_j),
/// sin(p2 s_j), cos(p2 s_j) where s_j = 10000^-(j mod q/4) for 0-based j.
/// The scale is taken in log space so very large exponents give s_j = 0.
inline std::vector<double> pos_2d(std::uint64_t d, std::uint64_t r, const EmbeddingSpec& spec) {
  spec.check();
  const auto [p1, p2] = reorder(d, r, spec);
  const std::size_t quarter = spec.q / 4;
  const double log_base = std::log(10000.0);
  std::vector<double> b(spec.q);
  for (std::size_t j = 0; j < spec.q; ++j) {
    const auto e = static_cast<double>(j % quarter);
    const double exponent =
        spec.options.pos_normalized ? e / static_cast<double>(quarter) : e;
    const double scale = std::exp(-exponent * log_base);
    const double pos = static_cast<double>(j / quarter < 2 ? p1 : p2);
    const double arg = pos * scale;
    b[j] = (j / quarter) % 2 == 0 ? std::sin(arg) : std::cos(arg);
  }
  return b;
}

inline std::vector<double> embed(const GraphElement& v, std::span<const double> x,
                                 const EmbeddingSpec& spec) {
  spec.check();
  if (v.id >= spec.d_star || v.rank >= spec.r_star) {
    throw Error("stale spec: element (" + std::to_string(v.id) + ", " +
                std::to_string(v.rank) + ") outside spec range");
  }
  if (x.size() != spec.m) {
    throw Error("embed: |x| = " + std::to_string(x.size()) + " but m = " +
                std::to_string(spec.m));
  }
  const auto lo = idx(v.id, spec);
  const auto hi = idx(v.id + 1, spec);
  auto out = tile_expand(x.subspan(lo, hi - lo), spec.q);
  const auto bias = pos_2d(v.id, v.rank, spec);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i];
  return out;
}

/// Feature graph with one q-vector per element; features[k] belongs to the
/// element with id k.
struct EmbeddedGraph {
  FeatureGraph graph;
  EmbeddingSpec spec;
  std::vector<std::vector<double>> features;
};

inline EmbeddedGraph graph_map(const FeatureGraph& g, std::span<const double> x,
                               const EmbeddingSpec& spec) {
  spec.check();
  const auto stats = degree_stats(g);
  if (stats.d_star > spec.d_star || stats.r_star > spec.r_star) {
    throw Error("graph_map: spec (d_star " + std::to_string(spec.d_star) + ", r_star " +
                std::to_string(spec.r_star) + ") does not cover graph (d_star " +
                std::to_string(stats.d_star) + ", r_star " + std::to_string(stats.r_star) +
                ")");
  }
  EmbeddedGraph out{g, spec, {}};
  out.features.reserve(g.size());
  for (const auto& e : g.elements()) out.features.push_back(embed(e, x, spec));
  return out;
}

}  // namespace gssnn
