#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "envelope/bruteforce.hpp"
#include "envelope/deviation.hpp"
#include "envelope/lts.hpp"
#include "envelope/run_control.hpp"

namespace envelope {

using StateSet = boost::dynamic_bitset<>;

enum class Provenance { environment, deviation };

struct MetaEdge {
  StateId from = 0;
  ActionId action = 0;
  StateId to = 0;
  Transition env;  // environment triple this edge projects onto
  Provenance provenance = Provenance::environment;

  friend bool operator==(const MetaEdge&, const MetaEdge&) = default;
};

/// F = E_d || C || P with every (q_e, q_c, err) collapsed into one sink and
/// each edge tagged with the environment transition it came from.
class MetaSystem {
 public:
  static constexpr StateId kNoComponent = static_cast<StateId>(-1);

  MetaSystem(Lts environment, Lts controller, Lts property, Deviation deviation,
             std::vector<std::array<StateId, 3>> tuples, std::optional<StateId> error,
             std::vector<MetaEdge> edges, Alphabet alphabet)
      : environment_(std::move(environment)),
        controller_(std::move(controller)),
        property_(std::move(property)),
        deviation_(std::move(deviation)),
        tuples_(std::move(tuples)),
        error_(error),
        edges_(std::move(edges)),
        alphabet_(std::move(alphabet)) {
    std::sort(edges_.begin(), edges_.end(), [](const MetaEdge& a, const MetaEdge& b) {
      return std::tie(a.from, a.action, a.to, a.env) < std::tie(b.from, b.action, b.to, b.env);
    });
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    const std::size_t n = tuples_.size();
    offsets_.assign(n + 1, 0);
    for (const auto& e : edges_) ++offsets_[e.from + 1];
    for (std::size_t i = 1; i <= n; ++i) offsets_[i] += offsets_[i - 1];

    env_succ_.resize(n);
    env_pred_.resize(n);
    neighbours_.resize(n);
    for (const auto& e : edges_) {
      if (e.provenance == Provenance::environment) {
        env_succ_[e.from].push_back(e.to);
        env_pred_[e.to].push_back(e.from);
      }
      if (e.from != e.to) {
        neighbours_[e.from].push_back(e.to);
        neighbours_[e.to].push_back(e.from);
      }
    }
    for (auto* adj : {&env_succ_, &env_pred_, &neighbours_})
      for (auto& v : *adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }

    deviation_index_.assign(edges_.size(), -1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& t = edges_[i].env;
      auto it = std::lower_bound(deviation_.begin(), deviation_.end(), t);
      if (it != deviation_.end() && *it == t)
        deviation_index_[i] = static_cast<std::int64_t>(it - deviation_.begin());
    }
  }

  [[nodiscard]] std::size_t num_states() const { return tuples_.size(); }
  [[nodiscard]] StateId initial() const { return 0; }
  [[nodiscard]] std::optional<StateId> error() const { return error_; }
  [[nodiscard]] bool is_error(StateId s) const { return error_ && *error_ == s; }
  [[nodiscard]] const Alphabet& alphabet() const { return alphabet_; }
  [[nodiscard]] const std::vector<MetaEdge>& edges() const { return edges_; }
  [[nodiscard]] std::span<const MetaEdge> out(StateId s) const {
    return {edges_.data() + offsets_[s], edges_.data() + offsets_[s + 1]};
  }
  [[nodiscard]] std::size_t first_edge(StateId s) const { return offsets_[s]; }
  [[nodiscard]] const std::array<StateId, 3>& components(StateId s) const { return tuples_.at(s); }
  [[nodiscard]] const Lts& environment() const { return environment_; }
  [[nodiscard]] const Lts& controller() const { return controller_; }
  [[nodiscard]] const Lts& property() const { return property_; }
  /// The canonical deviation d the system was built from.
  [[nodiscard]] const Deviation& deviation() const { return deviation_; }

  /// Targets of environment-backed edges, sorted.
  [[nodiscard]] const std::vector<StateId>& env_successors(StateId s) const { return env_succ_[s]; }
  [[nodiscard]] const std::vector<StateId>& env_predecessors(StateId s) const { return env_pred_[s]; }
  /// Undirected adjacency over all edges, sorted.
  [[nodiscard]] const std::vector<StateId>& neighbours(StateId s) const { return neighbours_[s]; }
  /// Position of edge i's environment triple in deviation(), or -1 when the
  /// edge is environment-backed.
  [[nodiscard]] std::int64_t deviation_index(std::size_t edge) const { return deviation_index_[edge]; }

  [[nodiscard]] std::optional<StateId> find(std::string_view qe, std::string_view qc,
                                            std::string_view qp) const {
    for (StateId s = 0; s < tuples_.size(); ++s) {
      if (is_error(s)) continue;
      const auto& t = tuples_[s];
      if (environment_.state_name(t[0]) == qe && controller_.state_name(t[1]) == qc &&
          property_.state_name(t[2]) == qp)
        return s;
    }
    return std::nullopt;
  }

  [[nodiscard]] std::string state_name(StateId s) const {
    if (is_error(s)) return std::string(kErrorState);
    const auto& t = tuples_.at(s);
    return "(" + environment_.state_name(t[0]) + "," + controller_.state_name(t[1]) + "," +
           property_.state_name(t[2]) + ")";
  }

  [[nodiscard]] StateSet empty_set() const { return StateSet(num_states()); }

  [[nodiscard]] StateSet non_error_states() const {
    StateSet s(num_states());
    s.set();
    if (error_) s.reset(*error_);
    return s;
  }

  /// The meta-system as a plain LTS (provenance dropped).
  [[nodiscard]] Lts to_lts() const {
    std::vector<std::string> names;
    for (StateId s = 0; s < num_states(); ++s) names.push_back(state_name(s));
    std::vector<Transition> ts;
    for (const auto& e : edges_) ts.push_back({e.from, e.action, e.to});
    return Lts("F", LtsKind::derived, std::move(names), alphabet_, std::move(ts), 0, error_);
  }

 private:
  Lts environment_;
  Lts controller_;
  Lts property_;
  Deviation deviation_;
  std::vector<std::array<StateId, 3>> tuples_;
  std::optional<StateId> error_;
  std::vector<MetaEdge> edges_;
  Alphabet alphabet_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<StateId>> env_succ_;
  std::vector<std::vector<StateId>> env_pred_;
  std::vector<std::vector<StateId>> neighbours_;
  std::vector<std::int64_t> deviation_index_;
};

/// Builds the reachable part of E_d || C || P with per-edge provenance.
inline MetaSystem build_meta_system(const Lts& e, const Lts& c, const Lts& p, const Deviation& d) {
  validate_alphabets(e, c, p);
  if (!is_canonical(d, e)) throw LtsError("deviation is not canonical over '" + e.name() + "'");
  require_closed_loop_safe(e, c, p);

  Lts deviated = apply_deviation(e, d);
  detail::ProductSpace space({&deviated, &c, &p});
  std::vector<std::array<StateId, 3>> tuples;
  std::unordered_map<std::uint64_t, StateId> ids;
  std::optional<StateId> err;
  std::vector<MetaEdge> edges;

  auto intern = [&](std::span<const StateId> t) -> StateId {
    if (space.is_error(t)) {
      if (!err) {
        err = static_cast<StateId>(tuples.size());
        tuples.push_back({MetaSystem::kNoComponent, MetaSystem::kNoComponent, MetaSystem::kNoComponent});
      }
      return *err;
    }
    auto [it, inserted] = ids.emplace(space.encode(t), static_cast<StateId>(tuples.size()));
    if (inserted) tuples.push_back({t[0], t[1], t[2]});
    return it->second;
  };

  intern(space.initial());
  for (StateId cur = 0; cur < tuples.size(); ++cur) {
    if (err && cur == *err) continue;
    auto from = tuples[cur];
    space.for_each_successor(from, [&](ActionId g, std::span<const StateId> target) {
      // The environment participates in every action and lists them first,
      // so global and environment action ids coincide.
      Transition env{from[0], g, target[0]};
      MetaEdge edge{cur, g, 0, env,
                    e.has_transition(env) ? Provenance::environment : Provenance::deviation};
      edge.to = intern(target);
      edges.push_back(edge);
    });
  }
  return MetaSystem(e, c, p, d, std::move(tuples), err, std::move(edges), space.alphabet());
}

/// R_F↾E(q): successors of q over environment-backed edges.
inline std::vector<StateId> renv_successors(const MetaSystem& f, StateId q) {
  return f.env_successors(q);
}

/// Largest subset of `s` closed under environment-backed successors.
inline StateSet inv(const MetaSystem& f, const StateSet& s) {
  StateSet cur = s;
  std::vector<StateId> stack;
  for (auto q = cur.find_first(); q != StateSet::npos; q = cur.find_next(q)) {
    const auto& succ = f.env_successors(static_cast<StateId>(q));
    if (std::any_of(succ.begin(), succ.end(), [&](StateId t) { return !cur.test(t); })) {
      cur.reset(q);
      stack.push_back(static_cast<StateId>(q));
    }
  }
  while (!stack.empty()) {
    StateId r = stack.back();
    stack.pop_back();
    for (StateId q : f.env_predecessors(r)) {
      if (cur.test(q)) {
        cur.reset(q);
        stack.push_back(q);
      }
    }
  }
  return cur;
}

/// Reference evaluation of the Inv^i recurrence, iterated to stabilisation.
inline StateSet inv_by_recurrence(const MetaSystem& f, const StateSet& s) {
  StateSet prev = s;
  while (true) {
    StateSet next = prev;
    for (auto q = prev.find_first(); q != StateSet::npos; q = prev.find_next(q)) {
      for (StateId t : renv_successors(f, static_cast<StateId>(q)))
        if (!prev.test(t)) next.reset(q);
    }
    if (next == prev) return next;
    prev = std::move(next);
  }
}

struct MetaController {
  StateSet states;                  // Q_T
  std::vector<std::size_t> edges;   // R_T as indices into MetaSystem::edges()
  StateId initial = 0;
};

/// Edges dropped by `t` at its boundary, projected onto the environment.
/// Only triples of the system's deviation are returned.
inline Deviation extract_deletion(const MetaSystem& f, const MetaController& t) {
  std::vector<Transition> del;
  const auto& edges = f.edges();
  std::size_t k = 0;
  for (auto q = t.states.find_first(); q != StateSet::npos; q = t.states.find_next(q)) {
    for (std::size_t i = f.first_edge(static_cast<StateId>(q)); i < f.first_edge(static_cast<StateId>(q)) + f.out(static_cast<StateId>(q)).size(); ++i) {
      while (k < t.edges.size() && t.edges[k] < i) ++k;
      bool retained = k < t.edges.size() && t.edges[k] == i;
      if (!retained && f.deviation_index(i) >= 0) del.push_back(edges[i].env);
    }
  }
  return Deviation(std::move(del));
}

/// Same as above, intersected with an explicit deviation.
inline Deviation extract_deletion(const MetaSystem& f, const MetaController& t, const Deviation& d) {
  std::vector<Transition> out;
  for (const auto& x : extract_deletion(f, t))
    if (d.contains(x)) out.push_back(x);
  return Deviation(std::move(out));
}

/// Restricts F to inv(s); absent when the initial state cannot be kept.
inline std::optional<MetaController> meta_controller(const StateSet& s, const MetaSystem& f) {
  StateSet kept = inv(f, s);
  if (!kept.test(f.initial())) return std::nullopt;
  MetaController t{kept, {}, f.initial()};
  const auto& edges = f.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const bool from_in = kept.test(e.from);
    if (from_in && kept.test(e.to)) {
      t.edges.push_back(i);
    } else if (from_in && e.provenance == Provenance::environment) {
      throw std::logic_error("meta-controller dropped an environment-backed edge");
    }
  }
  if (f.error() && kept.test(*f.error()))
    throw std::logic_error("meta-controller contains the error state");
  return t;
}

/// Calls visit(S) for each subset S of `w` that contains the initial state and
/// is weakly connected in F restricted to `w`, exactly once each, in
/// depth-first order. Stops early when visit returns false. Returns the
/// number of subsets visited.
inline std::size_t connected_subsets(const MetaSystem& f, const StateSet& w,
                                     const std::function<bool(const StateSet&)>& visit) {
  const StateId root = f.initial();
  if (!w.test(root)) return 0;
  std::size_t count = 0;
  bool stop = false;

  StateSet current(f.num_states());
  current.set(root);
  StateSet candidates(f.num_states());
  for (StateId v : f.neighbours(root))
    if (w.test(v)) candidates.set(v);
  StateSet excluded(f.num_states());
  excluded.set(root);

  // Each branch either adds the lowest candidate or bans it for the rest of
  // the subtree, so every connected superset is reached along one path.
  std::function<void(StateSet&, StateSet, StateSet)> grow = [&](StateSet& set, StateSet cand,
                                                                 StateSet banned) {
    ++count;
    if (!visit(set)) {
      stop = true;
      return;
    }
    for (auto v = cand.find_first(); v != StateSet::npos && !stop; v = cand.find_first()) {
      cand.reset(v);
      StateSet next_cand = cand;
      for (StateId u : f.neighbours(static_cast<StateId>(v)))
        if (w.test(u) && !set.test(u) && !banned.test(u) && u != v) next_cand.set(u);
      set.set(v);
      grow(set, next_cand, banned);
      set.reset(v);
      banned.set(v);
    }
  };
  grow(current, candidates, excluded);
  return count;
}

enum class Strategy { all_subsets, connected_heuristic };

inline std::string_view to_string(Strategy s) {
  return s == Strategy::all_subsets ? "synthesis" : "synthesis-heuristic";
}

struct SynthesisResult {
  Delta delta;
  MetaSystem meta;
  StateSet winning;
};

namespace detail {

struct BitsHash {
  std::size_t operator()(const StateSet& s) const { return boost::hash_value(s); }
};

/// Evaluates meta-controllers for candidate subsets and keeps the distinct
/// deletion sets (bit sets over the deviation's triples).
class DeletionCollector {
 public:
  DeletionCollector(const MetaSystem& f, const RunOptions& run) : f_(f), run_(run) {}

  void add(StateSet s) {
    batch_.push_back(std::move(s));
    if (batch_.size() >= kBatch) flush();
  }

  void flush() {
    run_.check_deadline();
    std::vector<std::optional<StateSet>> dels(batch_.size());
    parallel_for(batch_.size(), run_.jobs, [&](std::size_t i) { dels[i] = evaluate(batch_[i]); });
    examined_ += batch_.size();
    for (auto& d : dels) {
      if (!d) continue;
      ++controllers_;
      seen_.insert(std::move(*d));
    }
    batch_.clear();
  }

  [[nodiscard]] std::size_t examined() const { return examined_; }
  [[nodiscard]] std::size_t controllers() const { return controllers_; }

  /// Maximal deviations d \ del, i.e. the ⊆-minimal deletion sets.
  [[nodiscard]] std::vector<Deviation> maximal_deviations() const {
    std::vector<StateSet> dels(seen_.begin(), seen_.end());
    std::sort(dels.begin(), dels.end(), [](const StateSet& a, const StateSet& b) {
      if (a.count() != b.count()) return a.count() < b.count();
      return a < b;
    });
    std::vector<StateSet> minimal;
    for (const auto& d : dels) {
      bool dominated = std::any_of(minimal.begin(), minimal.end(),
                                   [&](const StateSet& m) { return m.is_subset_of(d); });
      if (!dominated) minimal.push_back(d);
    }
    const auto& universe = f_.deviation().triples();
    std::vector<Deviation> out;
    for (const auto& del : minimal) {
      std::vector<Transition> keep;
      for (std::size_t i = 0; i < universe.size(); ++i)
        if (!del.test(i)) keep.push_back(universe[i]);
      out.emplace_back(std::move(keep));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr std::size_t kBatch = 4096;

  [[nodiscard]] std::optional<StateSet> evaluate(const StateSet& s) const {
    StateSet kept = inv(f_, s);
    if (!kept.test(f_.initial())) return std::nullopt;
    StateSet del(f_.deviation().size());
    const auto& edges = f_.edges();
    for (auto q = kept.find_first(); q != StateSet::npos; q = kept.find_next(q)) {
      const auto sq = static_cast<StateId>(q);
      const std::size_t lo = f_.first_edge(sq);
      const std::size_t hi = lo + f_.out(sq).size();
      for (std::size_t i = lo; i < hi; ++i) {
        if (kept.test(edges[i].to)) continue;
        auto idx = f_.deviation_index(i);
        if (idx < 0) throw std::logic_error("environment-backed edge leaves an invariant set");
        del.set(static_cast<std::size_t>(idx));
      }
    }
    return del;
  }

  const MetaSystem& f_;
  const RunOptions& run_;
  std::vector<StateSet> batch_;
  std::unordered_set<StateSet, BitsHash> seen_;
  std::size_t examined_ = 0;
  std::size_t controllers_ = 0;
};

}  // namespace detail

/// Computes the maximal robust deviations contained in `d` by enumerating
/// meta-controllers of E_d || C || P.
inline SynthesisResult compute_robustness_detailed(const Lts& e, const Lts& c, const Lts& p,
                                                   const Deviation& d, Strategy strategy,
                                                   const RunOptions& run = {}) {
  const auto start = Clock::now();
  if (!p.error()) throw LtsError("'" + p.name() + "' has no err state");
  MetaSystem f = build_meta_system(e, c, p, d);
  StateSet w = inv(f, f.non_error_states());
  if (!w.test(f.initial()))
    throw std::logic_error("initial meta-state lost from the winning set despite a safe closed loop");

  detail::DeletionCollector collector(f, run);
  if (strategy == Strategy::connected_heuristic) {
    connected_subsets(f, w, [&](const StateSet& s) {
      collector.add(s);
      return true;
    });
  } else {
    // Binary counter over the members of W, lowest member as least
    // significant bit.
    std::vector<StateId> members;
    for (auto q = w.find_first(); q != StateSet::npos; q = w.find_next(q))
      members.push_back(static_cast<StateId>(q));
    StateSet s(f.num_states());
    while (true) {
      std::size_t i = 0;
      for (; i < members.size(); ++i) {
        if (s.test(members[i])) {
          s.reset(members[i]);
        } else {
          s.set(members[i]);
          break;
        }
      }
      if (i == members.size()) break;
      collector.add(s);
    }
  }
  collector.flush();

  Delta delta;
  delta.deviations = collector.maximal_deviations();
  delta.stats.meta_states = f.num_states();
  delta.stats.winning_set = w.count();
  delta.stats.subsets_examined = collector.examined();
  delta.stats.meta_controllers = collector.controllers();
  delta.stats.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return {std::move(delta), std::move(f), std::move(w)};
}

inline Delta compute_robustness(const Lts& e, const Lts& c, const Lts& p, const Deviation& d,
                                Strategy strategy, const RunOptions& run = {}) {
  return compute_robustness_detailed(e, c, p, d, strategy, run).delta;
}

}  // namespace envelope
