#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace envelope;
using testing::running_example;

namespace {

MetaSystem running_meta() {
  auto r = running_example();
  return build_meta_system(r.e, r.c, r.p, all_transitions(r.e));
}

StateSet set_of(const MetaSystem& f, std::initializer_list<StateId> ids) {
  StateSet s = f.empty_set();
  for (auto i : ids) s.set(i);
  return s;
}

}  // namespace

TEST_CASE("meta-system without deviation is the plain closed loop") {
  auto r = running_example();
  auto f = build_meta_system(r.e, r.c, r.p, Deviation{});
  Lts closed = parallel_compose(parallel_compose(r.e, r.c), r.p);
  CHECK(f.num_states() == closed.num_states());
  CHECK(f.edges().size() == closed.transitions().size());
  for (const auto& e : f.edges()) CHECK(e.provenance == Provenance::environment);
  CHECK_FALSE(f.error());
}

TEST_CASE("controller enabling nothing gives a single state") {
  auto r = running_example();
  Lts idle("C", LtsKind::controller, {"c"}, r.e.alphabet(), {}, 0);
  auto f = build_meta_system(r.e, idle, r.p, all_transitions(r.e));
  CHECK(f.num_states() == 1);
  CHECK(f.edges().empty());
}

TEST_CASE("running-example meta-system") {
  auto f = running_meta();
  const Lts& e = f.environment();
  REQUIRE(f.error());
  CHECK(f.num_states() == 8);
  for (const auto& edge : f.edges()) {
    // Provenance follows membership of the projected triple in R_E.
    CHECK((edge.provenance == Provenance::environment) == e.has_transition(edge.env));
    CHECK(edge.action == edge.env.action);
    CHECK(e.state_name(edge.env.from) == e.state_name(f.components(edge.from)[0]));
  }
  CHECK(f.out(*f.error()).empty());

  // Only deviation-backed moves or property violations reach err: every path
  // into err ends with an edge whose projection is a deviation or whose
  // source already sits at the property's last tolerated step.
  for (const auto& edge : f.edges())
    if (f.is_error(edge.to))
      CHECK((edge.provenance == Provenance::deviation || f.property().state_name(f.components(edge.from)[2]) == "C"));

  // (1,C) has the environment-backed a move 1 -a-> 2, and a third a is fatal.
  auto one_c = f.find("1", "c", "C");
  REQUIRE(one_c);
  auto succ = renv_successors(f, *one_c);
  CHECK(std::find(succ.begin(), succ.end(), *f.error()) != succ.end());
}

TEST_CASE("renv_successors keeps environment-backed targets only") {
  auto f = running_meta();
  for (StateId q = 0; q < f.num_states(); ++q) {
    std::vector<StateId> expected;
    for (const auto& edge : f.out(q))
      if (edge.provenance == Provenance::environment) expected.push_back(edge.to);
    std::sort(expected.begin(), expected.end());
    expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
    CHECK(renv_successors(f, q) == expected);
  }
  // Environment state 3 has no normative move at all.
  auto three = f.find("3", "c", "B");
  REQUIRE(three);
  CHECK(renv_successors(f, *three).empty());
  CHECK_FALSE(f.out(*three).empty());
}

TEST_CASE("inv") {
  auto f = running_meta();
  CHECK(inv(f, f.empty_set()).none());
  StateSet all = f.empty_set();
  all.set();
  CHECK(inv(f, all) == all);
  StateSet w = inv(f, f.non_error_states());
  CHECK(w.count() == 6);
  CHECK_FALSE(w.test(*f.find("1", "c", "C")));
  CHECK(w.test(f.initial()));
}

TEST_CASE("inv is the greatest fixed point of the recurrence") {
  std::mt19937_64 rng(31);
  InstanceShape shape;
  int done = 0;
  while (done < 100) {
    auto inst = random_instance(rng, shape);
    if (!inst) continue;
    auto f = build_meta_system(inst->environment, inst->controller, inst->property, all_transitions(inst->environment));
    for (int k = 0; k < 10; ++k) {
      StateSet s = f.empty_set();
      StateSet t = f.empty_set();
      for (StateId q = 0; q < f.num_states(); ++q) {
        if (rng() % 3 != 0) s.set(q);
        if (s.test(q) || rng() % 2 == 0) t.set(q);
      }
      StateSet a = inv(f, s);
      CHECK(a == inv_by_recurrence(f, s));
      CHECK(a.is_subset_of(s));
      CHECK(inv(f, a) == a);
      CHECK(a.is_subset_of(inv(f, t)));
      for (auto q = a.find_first(); q != StateSet::npos; q = a.find_next(q))
        for (StateId r : renv_successors(f, static_cast<StateId>(q))) CHECK(a.test(r));
    }
    ++done;
  }
}

TEST_CASE("meta_controller") {
  auto f = running_meta();
  StateSet w = inv(f, f.non_error_states());
  SECTION("W gives the most permissive controller") {
    auto t = meta_controller(w, f);
    REQUIRE(t);
    CHECK(t->states == w);
  }
  SECTION("no initial state, no controller") {
    StateSet s = w;
    s.reset(f.initial());
    CHECK_FALSE(meta_controller(s, f));
  }
  SECTION("dropped boundary edges are all deviation-backed") {
    auto t = meta_controller(w, f);
    REQUIRE(t);
    for (std::size_t i = 0; i < f.edges().size(); ++i) {
      const auto& e = f.edges()[i];
      bool kept = std::binary_search(t->edges.begin(), t->edges.end(), i);
      if (t->states.test(e.from) && !kept) CHECK(e.provenance == Provenance::deviation);
      if (kept) CHECK(t->states.test(e.to));
    }
    CHECK_FALSE(t->states.test(*f.error()));
  }
  SECTION("cutting the move into (1,C) removes 3 -a-> 1") {
    // Keeping (3,B) but not (1,C) forces the deviation edge between them out.
    auto from = f.find("3", "c", "B");
    auto to = f.find("1", "c", "C");
    REQUIRE(from);
    REQUIRE(to);
    auto t = meta_controller(w, f);
    REQUIRE(t);
    CHECK(t->states.test(*from));
    auto del = extract_deletion(f, *t, f.deviation());
    CHECK(del.contains(testing::triple(f.environment(), "3", "a", "1")));
  }
}

TEST_CASE("extract_deletion") {
  auto f = running_meta();
  const Lts& e = f.environment();
  StateSet w = inv(f, f.non_error_states());
  SECTION("retaining every edge deletes nothing") {
    MetaController all{f.empty_set(), {}, f.initial()};
    all.states.set();
    for (std::size_t i = 0; i < f.edges().size(); ++i) all.edges.push_back(i);
    CHECK(extract_deletion(f, all).empty());
  }
  SECTION("the most permissive controller deletes the self-loop on 1") {
    // (1,C) is lost from W, and (1,B) reaches it with 1 -a-> 1.
    auto t = meta_controller(w, f);
    REQUIRE(t);
    auto del = extract_deletion(f, *t, f.deviation());
    CHECK(del.contains(testing::triple(e, "1", "a", "1")));
    for (const auto& x : del) CHECK_FALSE(e.has_transition(x));
  }
}

TEST_CASE("connected_subsets") {
  auto f = running_meta();
  StateSet w = inv(f, f.non_error_states());
  SECTION("single initial state") {
    std::size_t seen = 0;
    auto n = connected_subsets(f, set_of(f, {f.initial()}), [&](const StateSet& s) {
      CHECK(s.count() == 1);
      ++seen;
      return true;
    });
    CHECK(n == 1);
    CHECK(seen == 1);
  }
  SECTION("exactly the connected subsets containing the initial state") {
    std::set<std::vector<bool>> got;
    connected_subsets(f, w, [&](const StateSet& s) {
      CHECK(s.test(f.initial()));
      CHECK(testing::weakly_connected(f, s));
      std::vector<bool> key(f.num_states());
      for (std::size_t i = 0; i < key.size(); ++i) key[i] = s.test(i);
      CHECK(got.insert(key).second);
      return true;
    });
    CHECK(got == testing::connected_subsets_by_enumeration(f, w));
    CHECK(got.size() == 29);
  }
  SECTION("a pair without an edge between them is skipped") {
    // (1,A) and (3,C) share no edge in F.
    auto a = f.find("1", "c", "A");
    auto c = f.find("3", "c", "C");
    REQUIRE(a);
    REQUIRE(c);
    REQUIRE(w.test(*c));
    StateSet pair = set_of(f, {*a, *c});
    bool found = false;
    connected_subsets(f, w, [&](const StateSet& s) {
      if (s == pair) found = true;
      return true;
    });
    CHECK_FALSE(found);
  }
  SECTION("early stop") {
    auto n = connected_subsets(f, w, [](const StateSet&) { return false; });
    CHECK(n == 1);
  }
  SECTION("random instances") {
    std::mt19937_64 rng(37);
    InstanceShape shape;
    int done = 0;
    while (done < 60) {
      auto inst = random_instance(rng, shape);
      if (!inst) continue;
      auto g = build_meta_system(inst->environment, inst->controller, inst->property,
                                 all_transitions(inst->environment));
      StateSet gw = inv(g, g.non_error_states());
      if (gw.count() > 14) continue;
      std::set<std::vector<bool>> got;
      connected_subsets(g, gw, [&](const StateSet& s) {
        std::vector<bool> key(g.num_states());
        for (std::size_t i = 0; i < key.size(); ++i) key[i] = s.test(i);
        got.insert(key);
        return true;
      });
      CHECK(got == testing::connected_subsets_by_enumeration(g, gw));
      ++done;
    }
  }
}

TEST_CASE("compute_robustness") {
  SECTION("complete safe environment") {
    Lts e("E", LtsKind::environment, {"q"}, Alphabet({"a"}), {{0, 0, 0}}, 0);
    Lts c("C", LtsKind::controller, {"c"}, Alphabet({"a"}), {{0, 0, 0}}, 0);
    Lts p("P", LtsKind::property, {"p", "err"}, Alphabet({"a"}), {{0, 0, 0}}, 0);
    for (auto s : {Strategy::all_subsets, Strategy::connected_heuristic})
      CHECK(compute_robustness(e, c, p, all_transitions(e), s).deviations == std::vector<Deviation>{Deviation{}});
  }
  SECTION("running example") {
    auto r = running_example();
    auto plain = compute_robustness(r.e, r.c, r.p, all_transitions(r.e), Strategy::all_subsets);
    auto fast = compute_robustness(r.e, r.c, r.p, all_transitions(r.e), Strategy::connected_heuristic);
    CHECK(plain.deviations.size() == 3);
    CHECK(plain.deviations == fast.deviations);
    CHECK(plain.deviations == bruteforce_delta(r.e, r.c, r.p, nullptr).deviations);
    CHECK(plain.stats.winning_set == 6);
    CHECK(plain.stats.meta_states == 8);
    CHECK(plain.stats.subsets_examined == 63);
    CHECK(fast.stats.subsets_examined == 29);
  }
  SECTION("random instances agree with the oracle") {
    std::mt19937_64 rng(41);
    InstanceShape shape;
    int done = 0;
    while (done < 150) {
      auto inst = random_instance(rng, shape);
      if (!inst) continue;
      const auto& [e, c, p, _] = *inst;
      if (all_transitions(e).size() > 16) continue;
      auto d = all_transitions(e);
      auto plain = compute_robustness(e, c, p, d, Strategy::all_subsets);
      auto fast = compute_robustness(e, c, p, d, Strategy::connected_heuristic);
      auto oracle = testing::naive_delta(e, c, p, nullptr);
      CHECK(plain.deviations == oracle);
      CHECK(fast.deviations == oracle);
      CHECK(fast.stats.subsets_examined <= plain.stats.subsets_examined);
      CHECK(plain.stats.subsets_examined == (std::size_t{1} << plain.stats.winning_set) - 1);
      for (const auto& x : fast.deviations) CHECK(is_robust(e, c, p, x));
      ++done;
    }
  }
  SECTION("restricted to a given deviation") {
    auto r = running_example();
    Deviation d({testing::triple(r.e, "1", "a", "3"), testing::triple(r.e, "2", "a", "3"),
                 testing::triple(r.e, "3", "a", "1")});
    auto out = compute_robustness(r.e, r.c, r.p, d, Strategy::connected_heuristic);
    for (const auto& x : out.deviations) {
      CHECK(x.subset_of(d));
      CHECK(is_robust(r.e, r.c, r.p, x));
    }
    CHECK_FALSE(out.deviations.empty());
  }
  SECTION("property without err is rejected") {
    auto r = running_example();
    Lts p("P", LtsKind::property, {"p"}, r.e.alphabet(), {}, 0);
    CHECK_THROWS_AS(compute_robustness(r.e, r.c, p, Deviation{}, Strategy::all_subsets), LtsError);
  }
  SECTION("timeout") {
    auto r = running_example();
    RunOptions past{1, Clock::now() - std::chrono::seconds(1)};
    CHECK_THROWS_AS(compute_robustness(r.e, r.c, r.p, all_transitions(r.e), Strategy::all_subsets, past),
                    TimeoutError);
  }
}
