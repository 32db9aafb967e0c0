#pragma once

#include <optional>
#include <string>
#include <vector>

#include "envelope/bruteforce.hpp"
#include "envelope/deviation.hpp"
#include "envelope/lts.hpp"
#include "envelope/run_control.hpp"
#include "envelope/synthesis.hpp"

namespace envelope {

enum class Algorithm { bruteforce, synthesis, synthesis_heuristic };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::bruteforce: return "bruteforce";
    case Algorithm::synthesis: return "synthesis";
    case Algorithm::synthesis_heuristic: return "synthesis-heuristic";
  }
  return "synthesis-heuristic";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "bruteforce") return Algorithm::bruteforce;
  if (s == "synthesis") return Algorithm::synthesis;
  if (s == "synthesis-heuristic") return Algorithm::synthesis_heuristic;
  return std::nullopt;
}

inline Strategy strategy_of(Algorithm a) {
  return a == Algorithm::synthesis ? Strategy::all_subsets : Strategy::connected_heuristic;
}

struct RobustnessReport {
  Delta delta;
  Algorithm algorithm = Algorithm::synthesis_heuristic;
  /// Stage (a) of a constrained run: maximal environment envelopes under P_env.
  std::optional<DeltaStats> environment_stage;
  /// Maximal environment envelopes found in stage (a).
  std::vector<Deviation> envelopes;
  /// One entry per synthesis run against C and P_saf (one for unconstrained runs).
  std::vector<DeltaStats> envelope_stage;

  std::string model;
  std::string environment;
  std::string controller;
  std::string property;
  std::optional<std::string> constraint;
};

/// One-state controller enabling every environment action.
inline Lts c_all(const Lts& e) {
  std::vector<Transition> loops;
  for (ActionId a = 0; a < e.alphabet().size(); ++a) loops.push_back({0, a, 0});
  return Lts("C_all", LtsKind::controller, {"c"}, e.alphabet(), std::move(loops), 0);
}

namespace detail {

inline RobustnessReport report_header(const Lts& e, const Lts& c, const Lts& p, const Lts* p_env,
                                      Algorithm algorithm) {
  RobustnessReport r;
  r.algorithm = algorithm;
  r.environment = e.name();
  r.controller = c.name();
  r.property = p.name();
  if (p_env) r.constraint = p_env->name();
  return r;
}

inline DeltaStats summed(const std::vector<DeltaStats>& parts, std::chrono::milliseconds wall) {
  DeltaStats s;
  for (const auto& p : parts) {
    s.meta_states = std::max(s.meta_states, p.meta_states);
    s.winning_set = std::max(s.winning_set, p.winning_set);
    s.subsets_examined += p.subsets_examined;
    s.meta_controllers += p.meta_controllers;
  }
  s.wall = wall;
  return s;
}

}  // namespace detail

/// Δ(E, C, P_saf) with no environmental constraint.
inline RobustnessReport delta_unconstrained(const Lts& e, const Lts& c, const Lts& p_saf,
                                            Algorithm algorithm, const RunOptions& run = {}) {
  auto report = detail::report_header(e, c, p_saf, nullptr, algorithm);
  if (algorithm == Algorithm::bruteforce) {
    BruteforceOptions opts;
    opts.run = run;
    report.delta = bruteforce_delta(e, c, p_saf, nullptr, opts);
    return report;
  }
  report.delta = compute_robustness(e, c, p_saf, all_transitions(e), strategy_of(algorithm), run);
  report.envelope_stage.push_back(report.delta.stats);
  return report;
}

/// Δ(E, C, P_saf, P_env): (a) maximal envelopes of E under P_env with C_all,
/// (b) synthesis inside each envelope, then a global maximality filter.
inline RobustnessReport delta_constrained(const Lts& e, const Lts& c, const Lts& p_saf,
                                          const Lts& p_env, Algorithm algorithm,
                                          const RunOptions& run = {}) {
  const auto start = Clock::now();
  auto report = detail::report_header(e, c, p_saf, &p_env, algorithm);
  validate_alphabets(e, c, p_saf);
  if (!p_env.alphabet().subset_of(e.alphabet()))
    throw LtsError("'" + p_env.name() + "' mentions actions outside environment '" + e.name() + "'");
  require_closed_loop_safe(e, c, p_saf);
  require_environment_feasible(e, p_env);

  if (algorithm == Algorithm::bruteforce) {
    BruteforceOptions opts;
    opts.run = run;
    report.delta = bruteforce_delta(e, c, p_saf, &p_env, opts);
    return report;
  }

  const Strategy strategy = strategy_of(algorithm);
  const Lts all = c_all(e);
  if (p_env.error()) {
    Delta stage_a = compute_robustness(e, all, p_env, all_transitions(e), strategy, run);
    report.environment_stage = stage_a.stats;
    report.envelopes = stage_a.deviations;
  } else {
    report.envelopes = {all_transitions(e)};
  }

  std::vector<Delta> per_envelope(report.envelopes.size());
  RunOptions inner = run;
  inner.jobs = 1;
  parallel_for(report.envelopes.size(), run.jobs, [&](std::size_t i) {
    per_envelope[i] = compute_robustness(e, c, p_saf, report.envelopes[i], strategy,
                                         report.envelopes.size() == 1 ? run : inner);
  });

  std::vector<Deviation> merged;
  for (auto& d : per_envelope) {
    report.envelope_stage.push_back(d.stats);
    for (auto& x : d.deviations) merged.push_back(std::move(x));
  }
  report.delta.deviations = maximal_filter(std::move(merged));

  std::vector<DeltaStats> all_stats = report.envelope_stage;
  if (report.environment_stage) all_stats.push_back(*report.environment_stage);
  report.delta.stats = detail::summed(report.envelope_stage,
                                      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start));
  report.delta.stats.subsets_examined = detail::summed(all_stats, {}).subsets_examined;
  report.delta.stats.meta_controllers = detail::summed(all_stats, {}).meta_controllers;
  return report;
}

inline RobustnessReport analyze(const Lts& e, const Lts& c, const Lts& p_saf, const Lts* p_env,
                                Algorithm algorithm, const RunOptions& run = {}) {
  return p_env ? delta_constrained(e, c, p_saf, *p_env, algorithm, run)
               : delta_unconstrained(e, c, p_saf, algorithm, run);
}

enum class ComparisonVerdict { equal, left_strictly_more, right_strictly_more, incomparable };

inline std::string_view to_string(ComparisonVerdict v) {
  switch (v) {
    case ComparisonVerdict::equal: return "equal";
    case ComparisonVerdict::left_strictly_more: return "left-strictly-more";
    case ComparisonVerdict::right_strictly_more: return "right-strictly-more";
    case ComparisonVerdict::incomparable: return "incomparable";
  }
  return "incomparable";
}

struct ComparisonResult {
  ComparisonVerdict verdict = ComparisonVerdict::equal;
  /// A member of the left Δ contained in no member of the right Δ.
  std::optional<Deviation> left_witness;
  /// A member of the right Δ contained in no member of the left Δ.
  std::optional<Deviation> right_witness;
  RobustnessReport left;
  RobustnessReport right;
};

/// First member of `of` not contained in any member of `by`.
inline std::optional<Deviation> uncovered(const std::vector<Deviation>& of,
                                          const std::vector<Deviation>& by) {
  for (const auto& d : of) {
    bool covered = std::any_of(by.begin(), by.end(), [&](const Deviation& x) { return d.subset_of(x); });
    if (!covered) return d;
  }
  return std::nullopt;
}

/// Δ-domination between two analyses over the same environment.
inline ComparisonResult compare_reports(RobustnessReport left, RobustnessReport right) {
  ComparisonResult r;
  r.left_witness = uncovered(left.delta.deviations, right.delta.deviations);
  r.right_witness = uncovered(right.delta.deviations, left.delta.deviations);
  const bool left_ge = !r.right_witness;
  const bool right_ge = !r.left_witness;
  if (left_ge && right_ge) r.verdict = ComparisonVerdict::equal;
  else if (left_ge) r.verdict = ComparisonVerdict::left_strictly_more;
  else if (right_ge) r.verdict = ComparisonVerdict::right_strictly_more;
  else r.verdict = ComparisonVerdict::incomparable;
  r.left = std::move(left);
  r.right = std::move(right);
  return r;
}

inline ComparisonResult compare_controllers(const Lts& e, const Lts& c1, const Lts& c2,
                                            const Lts& p_saf, const Lts* p_env, Algorithm algorithm,
                                            const RunOptions& run = {}) {
  auto left = analyze(e, c1, p_saf, p_env, algorithm, run);
  auto right = analyze(e, c2, p_saf, p_env, algorithm, run);
  return compare_reports(std::move(left), std::move(right));
}

inline ComparisonResult compare_properties(const Lts& e, const Lts& c, const Lts& p1,
                                           const Lts& p2, const Lts* p_env, Algorithm algorithm,
                                           const RunOptions& run = {}) {
  auto left = analyze(e, c, p1, p_env, algorithm, run);
  auto right = analyze(e, c, p2, p_env, algorithm, run);
  return compare_reports(std::move(left), std::move(right));
}

}  // namespace envelope
