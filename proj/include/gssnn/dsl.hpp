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

// The graph-construction DSL.
//
// A program is a well-typed expression of type Transform (Graph -> Graph)
// and is always run on the one-node initial graph. Int-typed subexpressions
// are read against the graph the enclosing transform receives, so
// `node_count` observes the graph under construction. compose(f, g) applies f
// first, then g.
//
// Builtins:
//   identity          : Transform
//   compose           : Transform -> Transform -> Transform
//   add_attached_node : Transform   (new node, joined to the previous node)
//   add_edge          : Int -> Int -> Transform
//   repeat            : Int -> Transform -> Transform
//   node_count        : Int
//   1, 2, 3           : Int
//   succ              : Int -> Int
//
// Learned abstractions are expressions over earlier primitives with up to two
// parameters (#0, #1). They are expanded call-by-name during evaluation and
// count as a single primitive for size.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gssnn/graph.hpp"
#include "gssnn/isomorphism.hpp"

namespace gssnn {

enum class Type : std::uint8_t { Transform, Int };

inline std::string_view type_name(Type t) { return t == Type::Transform ? "Transform" : "Int"; }

struct Expr {
  enum class Kind : std::uint8_t { Prim, Var };

  Kind kind = Kind::Prim;
  std::uint32_t index = 0;  // primitive id or parameter number
  std::vector<Expr> args;

  static Expr prim(std::uint32_t id, std::vector<Expr> args = {}) {
    return Expr{Kind::Prim, id, std::move(args)};
  }
  static Expr var(std::uint32_t k) { return Expr{Kind::Var, k, {}}; }

  bool is_var() const { return kind == Kind::Var; }

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class Builtin : std::uint8_t {
  Identity,
  Compose,
  AddAttachedNode,
  AddEdge,
  Repeat,
  NodeCount,
  One,
  Two,
  Three,
  Succ,
};

struct BuiltinInfo {
  Builtin op;
  std::string_view name;
  std::vector<Type> params;
  Type result;
};

inline const std::vector<BuiltinInfo>& builtin_table() {
  using T = Type;
  static const std::vector<BuiltinInfo> table = {
      {Builtin::Identity, "identity", {}, T::Transform},
      {Builtin::Compose, "compose", {T::Transform, T::Transform}, T::Transform},
      {Builtin::AddAttachedNode, "add_attached_node", {}, T::Transform},
      {Builtin::AddEdge, "add_edge", {T::Int, T::Int}, T::Transform},
      {Builtin::Repeat, "repeat", {T::Int, T::Transform}, T::Transform},
      {Builtin::NodeCount, "node_count", {}, T::Int},
      {Builtin::One, "1", {}, T::Int},
      {Builtin::Two, "2", {}, T::Int},
      {Builtin::Three, "3", {}, T::Int},
      {Builtin::Succ, "succ", {T::Int}, T::Int},
  };
  return table;
}

inline const BuiltinInfo* find_builtin(std::string_view name) {
  for (const auto& b : builtin_table()) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

struct Primitive {
  std::string name;
  std::vector<Type> params;
  Type result = Type::Transform;
  std::optional<Builtin> builtin;  // empty for abstractions
  Expr body;                       // abstractions only
  double logp = 0.0;               // unnormalized log-likelihood weight

  std::size_t arity() const { return params.size(); }
  bool is_abstraction() const { return !builtin.has_value(); }
};

inline constexpr std::size_t kMaxAbstractionArity = 2;
inline constexpr std::size_t kMaxProgramSize = 150;

inline std::size_t program_size(const Expr& e) {
  std::size_t n = e.is_var() ? 0 : 1;
  for (const auto& a : e.args) n += program_size(a);
  return n;
}

/// Checks `e` against `expected`, recording parameter types in `params` (an
/// entry per parameter slot; must be sized by the caller, or empty to forbid
/// parameters). Throws Error on any mismatch.
class Library;
inline void typecheck(const Expr& e, const Library& lib, Type expected,
                      std::vector<std::optional<Type>>& params);

class Library {
 public:
  Library() = default;

  /// The full initial DSL with uniform (zero) weights.
  static Library initial() {
    Library lib;
    for (const auto& b : builtin_table()) lib.add_builtin(b.op);
    return lib;
  }

  /// A library restricted to the named builtins, in the given order.
  static Library with_builtins(std::span<const std::string_view> names) {
    Library lib;
    for (auto name : names) {
      const auto* info = find_builtin(name);
      if (info == nullptr) throw Error("unknown builtin '" + std::string(name) + "'");
      lib.add_builtin(info->op);
    }
    return lib;
  }
  static Library with_builtins(std::initializer_list<std::string_view> names) {
    return with_builtins(std::span<const std::string_view>(names.begin(), names.size()));
  }

  std::size_t size() const { return prims_.size(); }
  const Primitive& operator[](std::uint32_t id) const { return prims_.at(id); }
  const std::vector<Primitive>& primitives() const { return prims_; }

  std::optional<std::uint32_t> find(std::string_view name) const {
    for (std::uint32_t k = 0; k < prims_.size(); ++k) {
      if (prims_[k].name == name) return k;
    }
    return std::nullopt;
  }

  std::uint32_t require(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error("unknown primitive '" + std::string(name) + "'");
  }

  std::uint32_t add_builtin(Builtin op, double logp = 0.0) {
    for (const auto& b : builtin_table()) {
      if (b.op != op) continue;
      check_fresh(b.name);
      prims_.push_back(Primitive{std::string(b.name), b.params, b.result, op, {}, logp});
      return static_cast<std::uint32_t>(prims_.size() - 1);
    }
    throw Error("unknown builtin");
  }

  /// Adds a learned abstraction. Parameter types are inferred from the
  /// positions the parameters occupy in `body`.
  std::uint32_t add_abstraction(std::string name, Expr body, double logp = 0.0) {
    check_fresh(name);
    if (body.is_var()) throw Error("abstraction body cannot be a bare parameter");
    if (program_size(body) < 2) throw Error("abstraction body must use at least two primitives");
    const auto& root = (*this)[body.index];
    std::vector<std::optional<Type>> slots(kMaxAbstractionArity);
    typecheck(body, *this, root.result, slots);
    std::vector<Type> params;
    for (const auto& slot : slots) {
      if (!slot) break;
      params.push_back(*slot);
    }
    for (std::size_t k = params.size(); k < slots.size(); ++k) {
      if (slots[k]) throw Error("abstraction parameters must be numbered contiguously");
    }
    prims_.push_back(Primitive{std::move(name), std::move(params), root.result, std::nullopt,
                               std::move(body), logp});
    return static_cast<std::uint32_t>(prims_.size() - 1);
  }

  std::string fresh_name() const {
    for (std::size_t k = 0;; ++k) {
      auto name = "f" + std::to_string(k);
      if (!find(name)) return name;
    }
  }

  std::vector<double> logps() const {
    std::vector<double> out;
    out.reserve(prims_.size());
    for (const auto& p : prims_) out.push_back(p.logp);
    return out;
  }

  void set_logps(std::span<const double> weights) {
    if (weights.size() != prims_.size()) throw Error("weight count does not match library");
    for (std::size_t k = 0; k < weights.size(); ++k) prims_[k].logp = weights[k];
  }

 private:
  void check_fresh(std::string_view name) const {
    if (name.empty()) throw Error("empty primitive name");
    if (find(name)) throw Error("duplicate primitive name '" + std::string(name) + "'");
  }

  std::vector<Primitive> prims_;
};

inline void typecheck(const Expr& e, const Library& lib, Type expected,
                      std::vector<std::optional<Type>>& params) {
  if (e.is_var()) {
    if (e.index >= params.size()) {
      throw Error("parameter #" + std::to_string(e.index) + " out of range");
    }
    auto& slot = params[e.index];
    if (slot && *slot != expected) {
      throw Error("parameter #" + std::to_string(e.index) + " used at conflicting types");
    }
    slot = expected;
    return;
  }
  if (e.index >= lib.size()) throw Error("primitive id " + std::to_string(e.index) + " unknown");
  const auto& p = lib[e.index];
  if (p.result != expected) {
    throw Error("'" + p.name + "' has type " + std::string(type_name(p.result)) + ", expected " +
                std::string(type_name(expected)));
  }
  if (p.arity() != e.args.size()) {
    throw Error("'" + p.name + "' expects " + std::to_string(p.arity()) + " arguments, got " +
                std::to_string(e.args.size()));
  }
  for (std::size_t k = 0; k < e.args.size(); ++k) typecheck(e.args[k], lib, p.params[k], params);
}

/// Throws unless `e` is a closed, well-typed program.
inline void typecheck_program(const Expr& e, const Library& lib) {
  std::vector<std::optional<Type>> none;
  typecheck(e, lib, Type::Transform, none);
}

inline void append_sexpr(const Expr& e, const Library& lib, std::string& out) {
  if (e.is_var()) {
    out += '#';
    out += std::to_string(e.index);
    return;
  }
  const auto& name = lib[e.index].name;
  if (e.args.empty()) {
    out += name;
    return;
  }
  out += '(';
  out += name;
  for (const auto& a : e.args) {
    out += ' ';
    append_sexpr(a, lib, out);
  }
  out += ')';
}

inline std::string to_sexpr(const Expr& e, const Library& lib) {
  std::string out;
  append_sexpr(e, lib, out);
  return out;
}

namespace detail {

struct SNode {
  std::string atom;
  std::vector<SNode> items;
  bool is_list = false;
};

class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  SNode read_all() {
    auto node = read();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return node;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  SNode read() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == ')') fail("unexpected ')'");
    if (text_[pos_] == '(') {
      ++pos_;
      SNode list;
      list.is_list = true;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) fail("missing ')'");
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(read());
      }
    }
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    SNode atom;
    atom.atom = std::string(text_.substr(start, pos_ - start));
    return atom;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expr build_expr(const SNode& node, const Library& lib, bool allow_params) {
  if (!node.is_list) {
    if (!node.atom.empty() && node.atom[0] == '#') {
      if (!allow_params) throw Error("parameter '" + node.atom + "' outside an abstraction body");
      const auto digits = node.atom.substr(1);
      if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                         [](char c) { return c >= '0' && c <= '9'; })) {
        throw Error("malformed parameter '" + node.atom + "'");
      }
      return Expr::var(static_cast<std::uint32_t>(std::stoul(digits)));
    }
    return Expr::prim(lib.require(node.atom));
  }
  if (node.items.size() < 2 || node.items.front().is_list) {
    throw Error("application must be (name arg...)");
  }
  auto e = Expr::prim(lib.require(node.items.front().atom));
  for (std::size_t k = 1; k < node.items.size(); ++k) {
    e.args.push_back(build_expr(node.items[k], lib, allow_params));
  }
  return e;
}

}  // namespace detail

/// Parses and typechecks a closed program of type Transform.
inline Expr parse_program(std::string_view text, const Library& lib) {
  auto e = detail::build_expr(detail::SexprReader(text).read_all(), lib, false);
  typecheck_program(e, lib);
  return e;
}

/// Parses an abstraction body; parameters are written #0 and #1. Types are
/// checked when the body is added to a library.
inline Expr parse_body(std::string_view text, const Library& lib) {
  return detail::build_expr(detail::SexprReader(text).read_all(), lib, true);
}

class Diverged : public Error {
 public:
  Diverged() : Error("diverged") {}
};

struct EvalLimits {
  std::size_t max_steps = 10'000;
  std::int64_t max_repeat = 20;
  // add_edge past this many parallel edges is a no-op.
  std::size_t max_multiplicity = 3;
};

namespace detail {

class Evaluator {
 public:
  Evaluator(const Library& lib, const EvalLimits& limits, GraphBuilder start)
      : lib_(lib), limits_(limits), graph_(std::move(start)) {}

  struct Closure;
  using Env = std::vector<Closure>;
  struct Closure {
    const Expr* expr;
    const Env* env;
  };

  void transform(const Expr& e, const Env& env) {
    if (e.is_var()) {
      const auto& c = env.at(e.index);
      transform(*c.expr, *c.env);
      return;
    }
    step();
    const auto& p = lib_[e.index];
    if (p.is_abstraction()) {
      const auto inner = bind(e, env);
      transform(p.body, inner);
      return;
    }
    switch (*p.builtin) {
      case Builtin::Identity:
        return;
      case Builtin::Compose:
        transform(e.args[0], env);
        transform(e.args[1], env);
        return;
      case Builtin::AddAttachedNode:
        graph_.add_attached_node();
        return;
      case Builtin::AddEdge: {
        const auto a = value(e.args[0], env);
        const auto b = value(e.args[1], env);
        add_edge(a, b);
        return;
      }
      case Builtin::Repeat: {
        const auto n = std::clamp<std::int64_t>(value(e.args[0], env), 0, limits_.max_repeat);
        for (std::int64_t k = 0; k < n; ++k) transform(e.args[1], env);
        return;
      }
      default:
        throw Error("'" + p.name + "' is not a transform");
    }
  }

  std::int64_t value(const Expr& e, const Env& env) {
    if (e.is_var()) {
      const auto& c = env.at(e.index);
      return value(*c.expr, *c.env);
    }
    step();
    const auto& p = lib_[e.index];
    if (p.is_abstraction()) {
      const auto inner = bind(e, env);
      return value(p.body, inner);
    }
    switch (*p.builtin) {
      case Builtin::NodeCount:
        return static_cast<std::int64_t>(graph_.node_count());
      case Builtin::One:
        return 1;
      case Builtin::Two:
        return 2;
      case Builtin::Three:
        return 3;
      case Builtin::Succ: {
        const auto v = value(e.args[0], env);
        return v == INT64_MAX ? v : v + 1;
      }
      default:
        throw Error("'" + p.name + "' is not an integer");
    }
  }

  FeatureGraph finish() && { return std::move(graph_).build(); }

 private:
  void step() {
    if (++steps_ > limits_.max_steps) throw Diverged();
  }

  Env bind(const Expr& call, const Env& env) const {
    Env inner;
    inner.reserve(call.args.size());
    for (const auto& a : call.args) inner.push_back({&a, &env});
    return inner;
  }

  void add_edge(std::int64_t a, std::int64_t b) {
    const auto n = static_cast<std::int64_t>(graph_.node_count());
    const auto ia = ((a % n) + n) % n;
    const auto ib = ((b % n) + n) % n;
    if (ia == ib) return;
    const auto u = graph_.node_at(static_cast<std::size_t>(ia));
    const auto v = graph_.node_at(static_cast<std::size_t>(ib));
    if (graph_.multiplicity(u, v) >= limits_.max_multiplicity) return;
    graph_.add_edge(u, v);
  }

  const Library& lib_;
  const EvalLimits& limits_;
  GraphBuilder graph_;
  std::size_t steps_ = 0;
};

}  // namespace detail

/// Runs `program` on the initial graph. Throws Diverged when the step budget
/// is exhausted.
inline FeatureGraph evaluate(const Expr& program, const Library& lib,
                             const EvalLimits& limits = {}) {
  GraphBuilder start;
  start.add_node();
  detail::Evaluator ev(lib, limits, std::move(start));
  const detail::Evaluator::Env top;
  ev.transform(program, top);
  return std::move(ev).finish();
}

inline bool semantically_equal(const Expr& a, const Expr& b, const Library& lib,
                               const EvalLimits& limits = {}) {
  return isomorphic_featured(evaluate(a, lib, limits), evaluate(b, lib, limits));
}

/// Replaces every abstraction application by its body, recursively.
inline Expr inline_abstractions(const Expr& e, const Library& lib,
                                std::span<const Expr> bindings = {}) {
  if (e.is_var()) {
    if (e.index >= bindings.size()) throw Error("unbound parameter #" + std::to_string(e.index));
    return bindings[e.index];
  }
  std::vector<Expr> args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) args.push_back(inline_abstractions(a, lib, bindings));
  const auto& p = lib[e.index];
  if (!p.is_abstraction()) return Expr::prim(e.index, std::move(args));
  return inline_abstractions(p.body, lib, args);
}

/// Occurrence count of each library primitive in `e`.
inline void count_primitives(const Expr& e, std::vector<std::size_t>& counts) {
  if (!e.is_var()) ++counts.at(e.index);
  for (const auto& a : e.args) count_primitives(a, counts);
}

}  // namespace gssnn
