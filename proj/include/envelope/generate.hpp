#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "envelope/deviation.hpp"
#include "envelope/lts.hpp"

namespace envelope {

struct InstanceShape {
  std::size_t max_env_states = 3;
  std::size_t max_actions = 2;
  std::size_t max_controller_states = 2;
  /// Counts err.
  std::size_t max_property_states = 3;
  /// Percentage of (q, a, q') triples present in the environment.
  unsigned env_density = 30;
  bool with_constraint = false;
};

struct Instance {
  Lts environment;
  Lts controller;
  Lts property;
  std::optional<Lts> constraint;
};

namespace detail {

// Plain modulo keeps generated instances identical across standard libraries.
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

/// Complete deterministic safety LTS over `act` with `states` non-err states.
inline Lts random_safety(std::mt19937_64& rng, const Alphabet& act, std::size_t states, LtsKind kind,
                         const std::string& name) {
  auto names = numbered("p", states);
  names.emplace_back(kErrorState);
  const auto err = static_cast<StateId>(states);
  std::vector<Transition> ts;
  for (StateId s = 0; s < states; ++s)
    for (ActionId a = 0; a < act.size(); ++a) {
      // Roughly one in three moves violates.
      StateId to = pick(rng, 3) == 0 ? err : static_cast<StateId>(pick(rng, states));
      ts.push_back({s, a, to});
    }
  return Lts(name, kind, std::move(names), act, std::move(ts), 0);
}

}  // namespace detail

/// Draws one instance; returns nullopt when the draw violates the analysis
/// preconditions (callers simply draw again).
inline std::optional<Instance> random_instance(std::mt19937_64& rng, const InstanceShape& shape) {
  using detail::pick;
  const std::size_t ne = 1 + pick(rng, shape.max_env_states);
  const std::size_t na = 1 + pick(rng, shape.max_actions);
  const std::size_t nc = 1 + pick(rng, shape.max_controller_states);
  const std::size_t np = 1 + pick(rng, shape.max_property_states - 1);

  Alphabet act(detail::numbered("a", na));
  std::vector<Transition> et;
  for (StateId q = 0; q < ne; ++q)
    for (ActionId a = 0; a < na; ++a)
      for (StateId r = 0; r < ne; ++r)
        if (pick(rng, 100) < shape.env_density) et.push_back({q, a, r});
  Lts e("E", LtsKind::environment, detail::numbered("q", ne), act, std::move(et), 0);

  std::vector<Transition> ct;
  for (StateId s = 0; s < nc; ++s)
    for (ActionId a = 0; a < na; ++a) {
      auto choice = pick(rng, nc + 1);
      if (choice < nc) ct.push_back({s, a, static_cast<StateId>(choice)});
    }
  Lts c("C", LtsKind::controller, detail::numbered("c", nc), act, std::move(ct), 0);

  Lts p = detail::random_safety(rng, act, np, LtsKind::property, "P");
  std::optional<Lts> p_env;
  if (shape.with_constraint) {
    const std::size_t nenv = 1 + pick(rng, shape.max_property_states - 1);
    p_env = detail::random_safety(rng, act, nenv, LtsKind::constraint, "Penv");
  }

  try {
    require_closed_loop_safe(e, c, p);
    if (p_env) require_environment_feasible(e, *p_env);
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
  return Instance{std::move(e), std::move(c), std::move(p), std::move(p_env)};
}

}  // namespace envelope
