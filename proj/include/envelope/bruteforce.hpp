#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <vector>

#include "envelope/deviation.hpp"
#include "envelope/run_control.hpp"

namespace envelope {

struct DeltaStats {
  std::size_t meta_states = 0;
  std::size_t winning_set = 0;
  std::size_t subsets_examined = 0;
  std::size_t meta_controllers = 0;
  std::chrono::milliseconds wall{0};
};

/// The antichain of maximal robust (and feasible) deviations.
struct Delta {
  std::vector<Deviation> deviations;  // sorted
  DeltaStats stats;

  [[nodiscard]] std::size_t largest() const {
    std::size_t m = 0;
    for (const auto& d : deviations) m = std::max(m, d.size());
    return m;
  }
};

/// Keeps the ⊆-maximal members of `ds`; the result is sorted and duplicate-free.
inline std::vector<Deviation> maximal_filter(std::vector<Deviation> ds) {
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ds[a].size() > ds[b].size(); });
  std::vector<std::size_t> kept;
  for (auto i : order) {
    bool covered = std::any_of(kept.begin(), kept.end(),
                               [&](std::size_t k) { return ds[i].subset_of(ds[k]); });
    if (!covered) kept.push_back(i);
  }
  std::vector<Deviation> out;
  out.reserve(kept.size());
  for (auto k : kept) out.push_back(std::move(ds[k]));
  std::sort(out.begin(), out.end());
  return out;
}

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::size_t candidates, std::size_t cap)
      : std::runtime_error("brute force refuses " + std::to_string(candidates) +
                           " candidate transitions (cap " + std::to_string(cap) + ")") {}
};

struct BruteforceOptions {
  std::size_t cap = 24;
  /// Skip subsets of already-accepted deviations. Off = pure oracle mode,
  /// which also re-checks coverage of every robust deviation found.
  bool prune = true;
  RunOptions run;
};

/// Enumerates every d ⊆ all_transitions(e) and keeps the maximal ones that
/// are robust and (when `p_env` is given) feasible.
inline Delta bruteforce_delta(const Lts& e, const Lts& c, const Lts& p_saf, const Lts* p_env,
                              const BruteforceOptions& opts = {}) {
  const auto start = Clock::now();
  validate_alphabets(e, c, p_saf);
  require_closed_loop_safe(e, c, p_saf);
  if (p_env) {
    if (!p_env->alphabet().subset_of(e.alphabet()))
      throw LtsError("'" + p_env->name() + "' mentions actions outside environment '" + e.name() + "'");
    require_environment_feasible(e, *p_env);
  }

  const Deviation universe = all_transitions(e);
  const std::size_t k = universe.size();
  if (k > opts.cap || k > 62) throw CapExceeded(k, opts.cap);

  auto deviation_of = [&](std::uint64_t mask) {
    std::vector<Transition> ts;
    ts.reserve(static_cast<std::size_t>(std::popcount(mask)));
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1U) ts.push_back(universe.triples()[i]);
    return Deviation(std::move(ts));
  };
  auto accepted_by_oracle = [&](std::uint64_t mask) {
    Deviation d = deviation_of(mask);
    if (p_env && !satisfies_env_unchecked(e, d, *p_env)) return false;
    return is_robust_unchecked(e, c, p_saf, d);
  };

  Delta out;
  std::vector<std::uint64_t> accepted;
  std::vector<std::uint64_t> level;
  for (std::size_t r = k + 1; r-- > 0;) {
    level.clear();
    if (r == 0) {
      level.push_back(0);
    } else {
      std::uint64_t v = (std::uint64_t{1} << r) - 1;
      const std::uint64_t limit = k == 64 ? 0 : std::uint64_t{1} << k;
      while (v < limit) {
        bool skip = opts.prune && std::any_of(accepted.begin(), accepted.end(),
                                              [&](std::uint64_t a) { return (v & ~a) == 0; });
        if (!skip) level.push_back(v);
        // Gosper's hack: next mask with the same popcount.
        std::uint64_t t = v | (v - 1);
        v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
      }
    }
    std::vector<char> ok(level.size(), 0);
    parallel_for(level.size(), opts.run.jobs, [&](std::size_t i) {
      if ((i & 1023U) == 0) opts.run.check_deadline();
      ok[i] = accepted_by_oracle(level[i]) ? 1 : 0;
    });
    out.stats.subsets_examined += level.size();
    for (std::size_t i = 0; i < level.size(); ++i)
      if (ok[i]) accepted.push_back(level[i]);
  }

  std::vector<Deviation> found;
  found.reserve(accepted.size());
  for (auto m : accepted) found.push_back(deviation_of(m));
  out.deviations = maximal_filter(std::move(found));

  if (!opts.prune) {
    // Every robust, feasible deviation must be represented by some member.
    for (auto m : accepted) {
      Deviation d = deviation_of(m);
      bool covered = std::any_of(out.deviations.begin(), out.deviations.end(),
                                 [&](const Deviation& x) { return d.subset_of(x); });
      if (!covered) throw std::logic_error("brute force lost a robust deviation");
    }
  }
  out.stats.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return out;
}

}  // namespace envelope
