#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace envelope {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

class LtsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kErrorState = "err";

/// Ordered set of unique action names with dense indices.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> names) {
    for (auto& n : names) {
      if (find(n)) throw LtsError("duplicate action '" + n + "'");
      add(std::move(n));
    }
  }

  /// Interns `name`, returning the existing index if already present.
  ActionId add(std::string name) {
    if (name.empty()) throw LtsError("action names must be non-empty");
    if (auto id = find(name)) return *id;
    auto id = static_cast<ActionId>(names_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    return id;
  }

  [[nodiscard]] std::optional<ActionId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] bool contains(std::string_view name) const { return find(name).has_value(); }
  [[nodiscard]] const std::string& name(ActionId id) const { return names_.at(id); }
  [[nodiscard]] std::size_t size() const { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.names_ == b.names_; }

  /// Same set of names, ignoring order.
  [[nodiscard]] bool same_set(const Alphabet& other) const {
    if (size() != other.size()) return false;
    return std::all_of(names_.begin(), names_.end(),
                       [&](const std::string& n) { return other.contains(n); });
  }

  [[nodiscard]] bool subset_of(const Alphabet& other) const {
    return std::all_of(names_.begin(), names_.end(),
                       [&](const std::string& n) { return other.contains(n); });
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ActionId> index_;
};

enum class LtsKind { environment, controller, property, constraint, derived };

inline std::string_view to_string(LtsKind kind) {
  switch (kind) {
    case LtsKind::environment: return "environment";
    case LtsKind::controller: return "controller";
    case LtsKind::property: return "property";
    case LtsKind::constraint: return "constraint";
    case LtsKind::derived: return "derived";
  }
  return "derived";
}

inline std::optional<LtsKind> parse_kind(std::string_view text) {
  if (text == "environment") return LtsKind::environment;
  if (text == "controller") return LtsKind::controller;
  if (text == "property") return LtsKind::property;
  if (text == "constraint") return LtsKind::constraint;
  return std::nullopt;
}

/// Properties and constraints reserve the state name "err".
inline bool has_reserved_error(LtsKind kind) {
  return kind == LtsKind::property || kind == LtsKind::constraint;
}

struct Transition {
  StateId from = 0;
  ActionId action = 0;
  StateId to = 0;

  friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// Finite labeled transition system. Immutable once constructed; transitions
/// are kept sorted by (from, action, to) so successor queries are range lookups.
class Lts {
 public:
  Lts() : Lts("", LtsKind::derived, {"0"}, Alphabet{}, {}, 0) {}

  /// `error` is only consulted for derived systems; property and constraint
  /// kinds locate their error state by the reserved name.
  Lts(std::string name, LtsKind kind, std::vector<std::string> states, Alphabet alphabet,
      std::vector<Transition> transitions, StateId initial,
      std::optional<StateId> error = std::nullopt)
      : name_(std::move(name)),
        kind_(kind),
        states_(std::move(states)),
        alphabet_(std::move(alphabet)),
        transitions_(std::move(transitions)),
        initial_(initial) {
    if (states_.empty()) throw LtsError("LTS '" + name_ + "' has no states");
    for (StateId i = 0; i < states_.size(); ++i) {
      if (states_[i].empty()) throw LtsError("empty state name in '" + name_ + "'");
      if (!state_index_.emplace(states_[i], i).second)
        throw LtsError("duplicate state '" + states_[i] + "' in '" + name_ + "'");
    }
    if (initial_ >= states_.size()) throw LtsError("initial state out of range in '" + name_ + "'");
    for (const auto& t : transitions_) {
      if (t.from >= states_.size() || t.to >= states_.size() || t.action >= alphabet_.size())
        throw LtsError("transition indexes out of range in '" + name_ + "'");
    }
    std::sort(transitions_.begin(), transitions_.end());
    transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());

    if (has_reserved_error(kind_)) {
      if (auto it = state_index_.find(std::string(kErrorState)); it != state_index_.end())
        error_ = it->second;
    } else if (kind_ == LtsKind::derived) {
      if (error && *error >= states_.size()) throw LtsError("error state out of range");
      error_ = error;
    }

    offsets_.assign(states_.size() + 1, 0);
    for (const auto& t : transitions_) ++offsets_[t.from + 1];
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];

    if (error_ && !out(*error_).empty())
      throw LtsError("error state of '" + name_ + "' must be a sink");
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] LtsKind kind() const { return kind_; }
  [[nodiscard]] std::size_t num_states() const { return states_.size(); }
  [[nodiscard]] const std::vector<std::string>& states() const { return states_; }
  [[nodiscard]] const std::string& state_name(StateId s) const { return states_.at(s); }
  [[nodiscard]] const Alphabet& alphabet() const { return alphabet_; }
  [[nodiscard]] const std::vector<Transition>& transitions() const { return transitions_; }
  [[nodiscard]] StateId initial() const { return initial_; }
  [[nodiscard]] std::optional<StateId> error() const { return error_; }
  [[nodiscard]] bool is_error(StateId s) const { return error_ && *error_ == s; }

  [[nodiscard]] std::optional<StateId> find_state(std::string_view name) const {
    auto it = state_index_.find(std::string(name));
    if (it == state_index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] std::span<const Transition> out(StateId s) const {
    return {transitions_.data() + offsets_[s], transitions_.data() + offsets_[s + 1]};
  }

  [[nodiscard]] std::span<const Transition> successors(StateId s, ActionId a) const {
    auto row = out(s);
    auto lo = std::lower_bound(row.begin(), row.end(), a,
                               [](const Transition& t, ActionId x) { return t.action < x; });
    auto hi = std::upper_bound(lo, row.end(), a,
                               [](ActionId x, const Transition& t) { return x < t.action; });
    return {lo, hi};
  }

  [[nodiscard]] bool has_transition(const Transition& t) const {
    return std::binary_search(transitions_.begin(), transitions_.end(), t);
  }

  /// Same structure under a different name/kind (kind changes re-derive err).
  [[nodiscard]] Lts renamed(std::string name, LtsKind kind) const {
    return Lts(std::move(name), kind, states_, alphabet_, transitions_, initial_, error_);
  }

 private:
  std::string name_;
  LtsKind kind_;
  std::vector<std::string> states_;
  std::unordered_map<std::string, StateId> state_index_;
  Alphabet alphabet_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> offsets_;
  StateId initial_;
  std::optional<StateId> error_;
};

/// Name-based incremental construction; states and actions are interned on
/// first mention.
class LtsBuilder {
 public:
  LtsBuilder(std::string name, LtsKind kind) : name_(std::move(name)), kind_(kind) {}

  StateId state(const std::string& name) {
    auto [it, inserted] = index_.emplace(name, static_cast<StateId>(states_.size()));
    if (inserted) states_.push_back(name);
    return it->second;
  }

  ActionId action(const std::string& name) { return alphabet_.add(name); }

  LtsBuilder& initial(const std::string& name) {
    initial_ = state(name);
    return *this;
  }

  LtsBuilder& transition(const std::string& from, const std::string& act, const std::string& to) {
    auto f = state(from);
    auto a = action(act);
    auto t = state(to);
    transitions_.push_back({f, a, t});
    return *this;
  }

  LtsBuilder& actions(std::initializer_list<std::string> names) {
    for (const auto& n : names) action(n);
    return *this;
  }

  [[nodiscard]] Lts build() const {
    if (!initial_) throw LtsError("LTS '" + name_ + "' has no initial state");
    return Lts(name_, kind_, states_, alphabet_, transitions_, *initial_);
  }

 private:
  std::string name_;
  LtsKind kind_;
  std::vector<std::string> states_;
  std::unordered_map<std::string, StateId> index_;
  Alphabet alphabet_;
  std::vector<Transition> transitions_;
  std::optional<StateId> initial_;
};

namespace detail {

/// On-the-fly synchronous product of several LTSs. Tuples are encoded in a
/// mixed radix so they can be hashed as a single integer.
class ProductSpace {
 public:
  explicit ProductSpace(std::vector<const Lts*> parts) : parts_(std::move(parts)) {
    for (const auto* p : parts_)
      for (const auto& n : p->alphabet().names()) alphabet_.add(n);
    local_.resize(parts_.size());
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      local_[i].resize(alphabet_.size(), kAbsent);
      for (ActionId g = 0; g < alphabet_.size(); ++g)
        if (auto l = parts_[i]->alphabet().find(alphabet_.name(g))) local_[i][g] = *l;
    }
    radix_.resize(parts_.size());
    std::uint64_t r = 1;
    for (std::size_t i = parts_.size(); i-- > 0;) {
      radix_[i] = r;
      auto n = parts_[i]->num_states();
      if (r > std::numeric_limits<std::uint64_t>::max() / n)
        throw LtsError("product state space too large to encode");
      r *= n;
    }
  }

  [[nodiscard]] const Alphabet& alphabet() const { return alphabet_; }
  [[nodiscard]] std::size_t arity() const { return parts_.size(); }
  [[nodiscard]] const Lts& part(std::size_t i) const { return *parts_[i]; }
  [[nodiscard]] std::optional<ActionId> local_action(std::size_t part, ActionId global) const {
    auto l = local_[part][global];
    if (l == kAbsent) return std::nullopt;
    return l;
  }

  [[nodiscard]] std::vector<StateId> initial() const {
    std::vector<StateId> t;
    t.reserve(parts_.size());
    for (const auto* p : parts_) t.push_back(p->initial());
    return t;
  }

  [[nodiscard]] bool is_error(std::span<const StateId> tuple) const {
    for (std::size_t i = 0; i < parts_.size(); ++i)
      if (parts_[i]->is_error(tuple[i])) return true;
    return false;
  }

  [[nodiscard]] std::uint64_t encode(std::span<const StateId> tuple) const {
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < tuple.size(); ++i) code += radix_[i] * tuple[i];
    return code;
  }

  /// Invokes fn(action, targets) for every successor of `tuple`, ordered by
  /// global action index, then lexicographically by target tuple.
  template <class Fn>
  void for_each_successor(std::span<const StateId> tuple, Fn&& fn) const {
    const std::size_t n = parts_.size();
    std::vector<std::span<const Transition>> moves(n);
    std::vector<std::size_t> pos(n);
    std::vector<StateId> target(n);
    for (ActionId g = 0; g < alphabet_.size(); ++g) {
      bool enabled = true;
      for (std::size_t i = 0; i < n && enabled; ++i) {
        if (local_[i][g] == kAbsent) {
          moves[i] = {};
        } else {
          moves[i] = parts_[i]->successors(tuple[i], local_[i][g]);
          enabled = !moves[i].empty();
        }
      }
      if (!enabled) continue;
      std::fill(pos.begin(), pos.end(), 0);
      bool more = true;
      while (more) {
        for (std::size_t i = 0; i < n; ++i)
          target[i] = moves[i].empty() ? tuple[i] : moves[i][pos[i]].to;
        fn(g, std::span<const StateId>(target));
        more = false;
        for (std::size_t i = n; i-- > 0;) {
          if (moves[i].empty()) continue;
          if (++pos[i] < moves[i].size()) {
            more = true;
            break;
          }
          pos[i] = 0;
        }
      }
    }
  }

 private:
  static constexpr ActionId kAbsent = std::numeric_limits<ActionId>::max();

  std::vector<const Lts*> parts_;
  Alphabet alphabet_;
  std::vector<std::vector<ActionId>> local_;
  std::vector<std::uint64_t> radix_;
};

}  // namespace detail

/// Synchronous product restricted to the reachable part. Shared actions
/// synchronize, the rest interleave. Any component reaching its error state
/// collapses into a single sink named "err".
inline Lts parallel_compose(const Lts& a, const Lts& b) {
  detail::ProductSpace space({&a, &b});
  std::vector<std::string> names;
  std::vector<std::array<StateId, 2>> tuples;
  std::unordered_map<std::uint64_t, StateId> ids;
  std::vector<Transition> transitions;
  std::optional<StateId> err;

  auto intern = [&](std::span<const StateId> t) -> StateId {
    if (space.is_error(t)) {
      if (!err) {
        err = static_cast<StateId>(names.size());
        names.emplace_back(kErrorState);
        tuples.push_back({0, 0});
      }
      return *err;
    }
    auto [it, inserted] = ids.emplace(space.encode(t), static_cast<StateId>(names.size()));
    if (inserted) {
      names.push_back("(" + a.state_name(t[0]) + "," + b.state_name(t[1]) + ")");
      tuples.push_back({t[0], t[1]});
    }
    return it->second;
  };

  auto init = space.initial();
  StateId initial = intern(init);
  for (StateId cur = 0; cur < names.size(); ++cur) {
    if (err && cur == *err) continue;
    auto tuple = tuples[cur];
    space.for_each_successor(tuple, [&](ActionId g, std::span<const StateId> target) {
      transitions.push_back({cur, g, intern(target)});
    });
  }
  return Lts(a.name() + "||" + b.name(), LtsKind::derived, std::move(names), space.alphabet(),
             std::move(transitions), initial, err);
}

inline Lts compose_many(std::span<const Lts> parts) {
  if (parts.empty()) throw LtsError("compose_many requires at least one LTS");
  Lts acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = parallel_compose(acc, parts[i]);
  return acc;
}

inline bool is_deterministic(const Lts& e) {
  const auto& ts = e.transitions();
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i].from == ts[i - 1].from && ts[i].action == ts[i - 1].action) return false;
  return true;
}

struct Verdict {
  bool satisfied = true;
  /// Shortest action sequence driving the property into err.
  std::optional<std::vector<std::string>> counterexample;
  std::optional<std::string> warning;
};

namespace detail {

/// Breadth-first search for a tuple in which some component sits in its
/// error state. Returns the violating action sequence, or nullopt.
inline std::optional<std::vector<ActionId>> find_error_trace(const ProductSpace& space) {
  struct Node {
    std::vector<StateId> tuple;
    std::uint32_t parent;
    ActionId action;
  };
  std::vector<Node> nodes;
  std::unordered_map<std::uint64_t, std::uint32_t> seen;
  auto init = space.initial();
  auto unwind = [&](std::uint32_t idx) {
    std::vector<ActionId> trace;
    while (idx != 0) {
      trace.push_back(nodes[idx].action);
      idx = nodes[idx].parent;
    }
    std::reverse(trace.begin(), trace.end());
    return trace;
  };
  nodes.push_back({init, 0, 0});
  seen.emplace(space.encode(init), 0);
  if (space.is_error(init)) return std::vector<ActionId>{};
  for (std::uint32_t cur = 0; cur < nodes.size(); ++cur) {
    std::optional<std::uint32_t> hit;
    auto tuple = nodes[cur].tuple;
    space.for_each_successor(tuple, [&](ActionId g, std::span<const StateId> target) {
      if (hit) return;
      auto [it, inserted] = seen.emplace(space.encode(target), static_cast<std::uint32_t>(nodes.size()));
      if (!inserted) return;
      nodes.push_back({std::vector<StateId>(target.begin(), target.end()), cur, g});
      if (space.is_error(target)) hit = it->second;
    });
    if (hit) return unwind(*hit);
  }
  return std::nullopt;
}

inline Verdict verdict_from(const ProductSpace& space, const std::optional<std::vector<ActionId>>& trace) {
  Verdict v;
  if (!trace) return v;
  v.satisfied = false;
  std::vector<std::string> names;
  names.reserve(trace->size());
  for (auto a : *trace) names.push_back(space.alphabet().name(a));
  v.counterexample = std::move(names);
  return v;
}

}  // namespace detail

/// Checks system ⊨ prop by searching the product for the property's err.
inline Verdict check_safety(const Lts& system, const Lts& prop) {
  if (!prop.error()) {
    Verdict v;
    v.warning = "property '" + prop.name() + "' has no err state; vacuously satisfied";
    return v;
  }
  detail::ProductSpace space({&system, &prop});
  return detail::verdict_from(space, detail::find_error_trace(space));
}

/// Routes every missing (state, action) pair of a property to err.
inline Lts complete_property(const Lts& prop) {
  if (!has_reserved_error(prop.kind()))
    throw LtsError("complete_property applies to property or constraint LTSs only");
  auto states = prop.states();
  auto transitions = prop.transitions();
  StateId err = prop.error() ? *prop.error() : static_cast<StateId>(states.size());
  bool fresh = !prop.error();
  for (StateId s = 0; s < prop.num_states(); ++s) {
    if (s == err) continue;
    for (ActionId a = 0; a < prop.alphabet().size(); ++a) {
      if (prop.successors(s, a).empty()) transitions.push_back({s, a, err});
    }
  }
  bool used = std::any_of(transitions.begin(), transitions.end(),
                          [&](const Transition& t) { return t.to == err; });
  if (fresh && used) states.emplace_back(kErrorState);
  return Lts(prop.name(), prop.kind(), std::move(states), prop.alphabet(), std::move(transitions),
             prop.initial());
}

}  // namespace envelope
