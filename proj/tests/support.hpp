#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "envelope/envelope.hpp"

namespace testing {

using namespace envelope;

inline std::string fixture_path(const std::string& stem) {
  return std::string(FIXTURE_DIR) + "/" + stem + ".envm";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ModelFile load_fixture(const std::string& stem) { return parse_model(read_file(fixture_path(stem))); }

/// Transition relation by names, so systems with different interning compare.
inline std::set<std::tuple<std::string, std::string, std::string>> named_transitions(const Lts& l) {
  std::set<std::tuple<std::string, std::string, std::string>> out;
  for (const auto& t : l.transitions())
    out.emplace(l.state_name(t.from), l.alphabet().name(t.action), l.state_name(t.to));
  return out;
}

/// Isomorphism by trying every state bijection that fixes the initial state
/// and err. Only meant for systems with a handful of states.
inline bool isomorphic(const Lts& a, const Lts& b) {
  if (a.num_states() != b.num_states() || !a.alphabet().same_set(b.alphabet())) return false;
  if (a.transitions().size() != b.transitions().size()) return false;
  if (a.error().has_value() != b.error().has_value()) return false;
  if (a.num_states() > 8) throw std::logic_error("isomorphism check limited to 8 states");
  std::vector<std::tuple<StateId, std::string, StateId>> bt;
  for (const auto& t : b.transitions()) bt.emplace_back(t.from, b.alphabet().name(t.action), t.to);
  std::sort(bt.begin(), bt.end());
  std::vector<StateId> perm(a.num_states());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (perm[a.initial()] != b.initial()) continue;
    if (a.error() && perm[*a.error()] != *b.error()) continue;
    std::vector<std::tuple<StateId, std::string, StateId>> mapped;
    for (const auto& t : a.transitions())
      mapped.emplace_back(perm[t.from], a.alphabet().name(t.action), perm[t.to]);
    std::sort(mapped.begin(), mapped.end());
    if (mapped == bt) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// Weak connectivity of `s` inside F, by plain flood fill over the edge list.
inline bool weakly_connected(const MetaSystem& f, const StateSet& s) {
  auto first = s.find_first();
  if (first == StateSet::npos) return false;
  StateSet seen(f.num_states());
  seen.set(first);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& e : f.edges()) {
      if (!s.test(e.from) || !s.test(e.to)) continue;
      if (seen.test(e.from) != seen.test(e.to)) {
        seen.set(e.from);
        seen.set(e.to);
        grew = true;
      }
    }
  }
  return seen == s;
}

/// Every subset of `w` containing the initial state that is weakly connected,
/// found by testing all 2^|w| subsets.
inline std::set<std::vector<bool>> connected_subsets_by_enumeration(const MetaSystem& f, const StateSet& w) {
  std::vector<std::size_t> members;
  for (auto q = w.find_first(); q != StateSet::npos; q = w.find_next(q)) members.push_back(q);
  std::set<std::vector<bool>> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << members.size()); ++mask) {
    StateSet s(f.num_states());
    for (std::size_t i = 0; i < members.size(); ++i)
      if (mask >> i & 1U) s.set(members[i]);
    if (!s.test(f.initial()) || !weakly_connected(f, s)) continue;
    std::vector<bool> key(f.num_states());
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = s.test(i);
    out.insert(key);
  }
  return out;
}

inline Transition triple(const Lts& e, const std::string& from, const std::string& action, const std::string& to) {
  return {*e.find_state(from), *e.alphabet().find(action), *e.find_state(to)};
}

/// Running example pieces built directly, independent of the parser.
struct Running {
  Lts e;
  Lts c;
  Lts p;
};

inline Running running_example() {
  Lts e = LtsBuilder("E", LtsKind::environment)
              .initial("1")
              .transition("1", "a", "2")
              .transition("2", "b", "3")
              .build();
  Lts c = LtsBuilder("C", LtsKind::controller).initial("c").actions({"a", "b"}).transition("c", "a", "c").build();
  Lts p = complete_property(LtsBuilder("P", LtsKind::property)
                                .initial("A")
                                .actions({"a", "b"})
                                .transition("A", "a", "B")
                                .transition("B", "a", "C")
                                .transition("C", "a", "err")
                                .build());
  return {e, c, p};
}

/// Independent Def. 5 check over every subset of A \ R_E: the set of maximal
/// robust, feasible deviations, computed without pruning or shared filters.
inline std::vector<Deviation> naive_delta(const Lts& e, const Lts& c, const Lts& p, const Lts* p_env) {
  const auto universe = all_transitions(e).triples();
  const std::size_t k = universe.size();
  std::vector<std::uint64_t> good;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<Transition> ts;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1U) ts.push_back(universe[i]);
    Lts ed = apply_deviation(e, Deviation(ts));
    Lts closed = parallel_compose(ed, c);
    if (!check_safety(closed, p).satisfied) continue;
    if (p_env && !check_safety(ed, *p_env).satisfied) continue;
    good.push_back(mask);
  }
  std::vector<Deviation> out;
  for (auto m : good) {
    bool dominated = std::any_of(good.begin(), good.end(), [&](std::uint64_t o) { return o != m && (m & ~o) == 0; });
    if (dominated) continue;
    std::vector<Transition> ts;
    for (std::size_t i = 0; i < k; ++i)
      if (m >> i & 1U) ts.push_back(universe[i]);
    out.emplace_back(ts);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testing
