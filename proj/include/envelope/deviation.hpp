#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "envelope/lts.hpp"

namespace envelope {

/// A set of extra environment transitions, kept sorted and duplicate-free.
/// Canonical deviations are additionally disjoint from the environment's own
/// transition relation (see canonicalize).
class Deviation {
 public:
  Deviation() = default;

  explicit Deviation(std::vector<Transition> triples) : triples_(std::move(triples)) {
    std::sort(triples_.begin(), triples_.end());
    triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  }

  [[nodiscard]] const std::vector<Transition>& triples() const { return triples_; }
  [[nodiscard]] std::size_t size() const { return triples_.size(); }
  [[nodiscard]] bool empty() const { return triples_.empty(); }
  [[nodiscard]] auto begin() const { return triples_.begin(); }
  [[nodiscard]] auto end() const { return triples_.end(); }

  [[nodiscard]] bool contains(const Transition& t) const {
    return std::binary_search(triples_.begin(), triples_.end(), t);
  }

  [[nodiscard]] bool subset_of(const Deviation& other) const {
    return std::includes(other.triples_.begin(), other.triples_.end(), triples_.begin(),
                         triples_.end());
  }

  friend bool operator==(const Deviation&, const Deviation&) = default;
  friend auto operator<=>(const Deviation& a, const Deviation& b) {
    return std::lexicographical_compare_three_way(a.triples_.begin(), a.triples_.end(),
                                                  b.triples_.begin(), b.triples_.end());
  }

 private:
  std::vector<Transition> triples_;
};

/// Raised when an analysis is requested outside its preconditions
/// (closed loop unsafe under the normative environment, or the environment
/// already violating its constraint).
class PreconditionError : public std::runtime_error {
 public:
  enum class Kind { closed_loop_unsafe, environment_infeasible };

  PreconditionError(Kind kind, std::string subject, std::vector<std::string> counterexample)
      : std::runtime_error(describe(kind, subject, counterexample)),
        kind_(kind),
        subject_(std::move(subject)),
        counterexample_(std::move(counterexample)) {}

  [[nodiscard]] Kind kind() const { return kind_; }
  /// Name of the offending controller or property/constraint.
  [[nodiscard]] const std::string& subject() const { return subject_; }
  [[nodiscard]] const std::vector<std::string>& counterexample() const { return counterexample_; }

 private:
  static std::string describe(Kind kind, const std::string& subject,
                              const std::vector<std::string>& trace) {
    std::string msg = kind == Kind::closed_loop_unsafe
                          ? "closed loop violates safety property under the normative environment ("
                          : "normative environment violates constraint (";
    msg += subject + "); counterexample:";
    for (const auto& a : trace) msg += " " + a;
    if (trace.empty()) msg += " <empty>";
    return msg;
  }

  Kind kind_;
  std::string subject_;
  std::vector<std::string> counterexample_;
};

/// Checks the alphabet conventions every analysis relies on: the controller
/// shares the environment's alphabet and properties only mention environment
/// actions, so each product edge projects onto one environment transition.
inline void validate_alphabets(const Lts& e, const Lts& c, const Lts& p) {
  if (!c.alphabet().same_set(e.alphabet()))
    throw LtsError("controller '" + c.name() + "' alphabet differs from environment '" + e.name() + "'");
  if (!p.alphabet().subset_of(e.alphabet()))
    throw LtsError("'" + p.name() + "' mentions actions outside environment '" + e.name() + "'");
}

/// (Q × Act × Q) minus the environment's own transitions.
inline Deviation all_transitions(const Lts& e) {
  std::vector<Transition> out;
  const auto n = static_cast<StateId>(e.num_states());
  const auto m = static_cast<ActionId>(e.alphabet().size());
  out.reserve(static_cast<std::size_t>(n) * m * n);
  for (StateId q = 0; q < n; ++q)
    for (ActionId a = 0; a < m; ++a)
      for (StateId r = 0; r < n; ++r)
        if (!e.has_transition({q, a, r})) out.push_back({q, a, r});
  return Deviation(std::move(out));
}

/// Drops triples already in R_E. Applying d or d \ R_E yields the same
/// deviated system, so this is the representation used for comparisons.
inline Deviation canonicalize(const std::vector<Transition>& raw, const Lts& e) {
  std::vector<Transition> out;
  for (const auto& t : raw) {
    if (t.from >= e.num_states() || t.to >= e.num_states() || t.action >= e.alphabet().size())
      throw LtsError("deviation triple out of range for '" + e.name() + "'");
    if (!e.has_transition(t)) out.push_back(t);
  }
  return Deviation(std::move(out));
}

inline bool is_canonical(const Deviation& d, const Lts& e) {
  return std::all_of(d.begin(), d.end(), [&](const Transition& t) {
    return t.from < e.num_states() && t.to < e.num_states() && t.action < e.alphabet().size() &&
           !e.has_transition(t);
  });
}

/// The deviated system E_d: same states and alphabet, R_E ∪ d.
inline Lts apply_deviation(const Lts& e, const Deviation& d) {
  auto transitions = e.transitions();
  for (const auto& t : d) {
    if (t.from >= e.num_states() || t.to >= e.num_states() || t.action >= e.alphabet().size())
      throw LtsError("deviation triple out of range for '" + e.name() + "'");
    transitions.push_back(t);
  }
  return Lts(e.name(), e.kind(), e.states(), e.alphabet(), std::move(transitions), e.initial());
}

namespace detail {

inline std::optional<std::vector<std::string>> violation(std::vector<const Lts*> parts) {
  ProductSpace space(std::move(parts));
  auto trace = find_error_trace(space);
  if (!trace) return std::nullopt;
  std::vector<std::string> names;
  for (auto a : *trace) names.push_back(space.alphabet().name(a));
  return names;
}

}  // namespace detail

/// Throws PreconditionError unless E || C ⊨ P.
inline void require_closed_loop_safe(const Lts& e, const Lts& c, const Lts& p) {
  if (auto cex = detail::violation({&e, &c, &p}))
    throw PreconditionError(PreconditionError::Kind::closed_loop_unsafe, c.name() + " / " + p.name(),
                            std::move(*cex));
}

/// Throws PreconditionError unless E ⊨ P_env.
inline void require_environment_feasible(const Lts& e, const Lts& p_env) {
  if (auto cex = detail::violation({&e, &p_env}))
    throw PreconditionError(PreconditionError::Kind::environment_infeasible, p_env.name(),
                            std::move(*cex));
}

/// Deviation check without re-validating preconditions; used in hot loops.
inline bool is_robust_unchecked(const Lts& e, const Lts& c, const Lts& p, const Deviation& d) {
  Lts deviated = apply_deviation(e, d);
  return !detail::violation({&deviated, &c, &p});
}

inline bool satisfies_env_unchecked(const Lts& e, const Deviation& d, const Lts& p_env) {
  Lts deviated = apply_deviation(e, d);
  return !detail::violation({&deviated, &p_env});
}

/// E_d || C ⊨ P_saf. Requires E || C ⊨ P_saf.
inline bool is_robust(const Lts& e, const Lts& c, const Lts& p_saf, const Deviation& d) {
  validate_alphabets(e, c, p_saf);
  require_closed_loop_safe(e, c, p_saf);
  return is_robust_unchecked(e, c, p_saf, d);
}

/// E_d ⊨ P_env. Requires E ⊨ P_env.
inline bool satisfies_env(const Lts& e, const Deviation& d, const Lts& p_env) {
  if (!p_env.alphabet().subset_of(e.alphabet()))
    throw LtsError("'" + p_env.name() + "' mentions actions outside environment '" + e.name() + "'");
  require_environment_feasible(e, p_env);
  return satisfies_env_unchecked(e, d, p_env);
}

/// d1 is at least as powerful as d2 iff d2 ⊆ d1.
inline bool at_least_as_powerful(const Lts& e, const Deviation& d1, const Deviation& d2) {
  if (!is_canonical(d1, e) || !is_canonical(d2, e))
    throw LtsError("deviations are not canonical over environment '" + e.name() + "'");
  return d2.subset_of(d1);
}

inline std::string to_string(const Transition& t, const Lts& e) {
  return e.state_name(t.from) + " -" + e.alphabet().name(t.action) + "-> " + e.state_name(t.to);
}

}  // namespace envelope
