#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace envelope;
using testing::running_example;

namespace {

Lts universal_constraint(const Lts& e) {
  std::vector<Transition> loops;
  for (ActionId a = 0; a < e.alphabet().size(); ++a) loops.push_back({0, a, 0});
  return Lts("U", LtsKind::constraint, {"u", "err"}, e.alphabet(), std::move(loops), 0);
}

/// Two-state environment in which every extra triple adds a trace, with a
/// constraint that accepts exactly the normative traces.
struct Strict {
  Lts e = LtsBuilder("E", LtsKind::environment).initial("1").actions({"a", "b"}).transition("1", "a", "2").build();
  Lts c = LtsBuilder("C", LtsKind::controller).initial("c").actions({"a", "b"}).transition("c", "a", "c").build();
  Lts p = complete_property(LtsBuilder("P", LtsKind::property).initial("A").actions({"a", "b"}).transition("A", "a", "A").build());
  Lts n = complete_property(LtsBuilder("N", LtsKind::constraint).initial("n0").actions({"a", "b"}).transition("n0", "a", "n1").build());
};

}  // namespace

TEST_CASE("c_all") {
  auto r = running_example();
  Lts all = c_all(r.e);
  CHECK(all.num_states() == 1);
  CHECK(all.transitions().size() == r.e.alphabet().size());
  CHECK(testing::isomorphic(parallel_compose(r.e, all), r.e));
  CHECK_FALSE(check_safety(parallel_compose(r.e, all), r.p).satisfied);
  CHECK(check_safety(parallel_compose(r.e, r.c), r.p).satisfied);
}

TEST_CASE("unconstrained analysis") {
  auto r = running_example();
  for (auto algo : {Algorithm::bruteforce, Algorithm::synthesis, Algorithm::synthesis_heuristic}) {
    auto report = delta_unconstrained(r.e, r.c, r.p, algo);
    CHECK(report.delta.deviations.size() == 3);
    CHECK(report.algorithm == algo);
    CHECK_FALSE(report.constraint);
  }
  Lts full("E", LtsKind::environment, {"q"}, Alphabet({"a"}), {{0, 0, 0}}, 0);
  Lts c("C", LtsKind::controller, {"c"}, Alphabet({"a"}), {{0, 0, 0}}, 0);
  Lts p("P", LtsKind::property, {"p", "err"}, Alphabet({"a"}), {{0, 0, 0}}, 0);
  CHECK(delta_unconstrained(full, c, p, Algorithm::synthesis_heuristic).delta.deviations ==
        std::vector<Deviation>{Deviation{}});
}

TEST_CASE("constrained analysis") {
  auto r = running_example();
  SECTION("universal constraint matches the unconstrained result") {
    Lts u = universal_constraint(r.e);
    for (auto algo : {Algorithm::bruteforce, Algorithm::synthesis, Algorithm::synthesis_heuristic}) {
      auto a = delta_constrained(r.e, r.c, r.p, u, algo);
      auto b = delta_unconstrained(r.e, r.c, r.p, algo);
      CHECK(a.delta.deviations == b.delta.deviations);
    }
  }
  SECTION("constraint forbidding every extra behaviour") {
    Strict s;
    for (auto algo : {Algorithm::bruteforce, Algorithm::synthesis, Algorithm::synthesis_heuristic})
      CHECK(delta_constrained(s.e, s.c, s.p, s.n, algo).delta.deviations == std::vector<Deviation>{Deviation{}});
    // Unconstrained, the b-blocking controller tolerates everything.
    CHECK(delta_unconstrained(s.e, s.c, s.p, Algorithm::synthesis_heuristic).delta.deviations ==
          std::vector<Deviation>{all_transitions(s.e)});
  }
  SECTION("each precondition is reported on its own") {
    Lts u = universal_constraint(r.e);
    try {
      delta_constrained(r.e, c_all(r.e), r.p, u, Algorithm::synthesis_heuristic);
      FAIL("expected a precondition failure");
    } catch (const PreconditionError& e) {
      CHECK(e.kind() == PreconditionError::Kind::closed_loop_unsafe);
    }
    Lts none = complete_property(Lts("K", LtsKind::constraint, {"k"}, r.e.alphabet(), {}, 0));
    try {
      delta_constrained(r.e, r.c, r.p, none, Algorithm::synthesis_heuristic);
      FAIL("expected a precondition failure");
    } catch (const PreconditionError& e) {
      CHECK(e.kind() == PreconditionError::Kind::environment_infeasible);
      CHECK(e.subject() == "K");
    }
  }
  SECTION("random constrained instances agree with the oracle") {
    std::mt19937_64 rng(43);
    InstanceShape shape;
    shape.with_constraint = true;
    int done = 0;
    while (done < 120) {
      auto inst = random_instance(rng, shape);
      if (!inst) continue;
      const auto& [e, c, p, penv] = *inst;
      if (all_transitions(e).size() > 16) continue;
      auto oracle = testing::naive_delta(e, c, p, &*penv);
      for (auto algo : {Algorithm::synthesis, Algorithm::synthesis_heuristic}) {
        auto report = delta_constrained(e, c, p, *penv, algo);
        CHECK(report.delta.deviations == oracle);
        for (const auto& d : report.delta.deviations) {
          CHECK(is_robust(e, c, p, d));
          CHECK(satisfies_env(e, d, *penv));
        }
        CHECK(report.environment_stage);
        CHECK(report.envelope_stage.size() == report.envelopes.size());
      }
      ++done;
    }
  }
}

TEST_CASE("controller comparison") {
  auto r = running_example();
  SECTION("a controller against itself") {
    auto res = compare_controllers(r.e, r.c, r.c, r.p, nullptr, Algorithm::synthesis_heuristic);
    CHECK(res.verdict == ComparisonVerdict::equal);
    CHECK_FALSE(res.left_witness);
    CHECK_FALSE(res.right_witness);
  }
  SECTION("a controller that never moves tolerates everything") {
    Lts idle("Idle", LtsKind::controller, {"i"}, r.e.alphabet(), {}, 0);
    auto res = compare_controllers(r.e, idle, r.c, r.p, nullptr, Algorithm::synthesis_heuristic);
    CHECK(res.verdict == ComparisonVerdict::left_strictly_more);
    REQUIRE(res.left_witness);
    CHECK(*res.left_witness == all_transitions(r.e));
    for (const auto& d : res.right.delta.deviations) CHECK_FALSE(res.left_witness->subset_of(d));
    auto back = compare_controllers(r.e, r.c, idle, r.p, nullptr, Algorithm::synthesis_heuristic);
    CHECK(back.verdict == ComparisonVerdict::right_strictly_more);
  }
}

TEST_CASE("property comparison") {
  auto r = running_example();
  SECTION("same property") {
    CHECK(compare_properties(r.e, r.c, r.p, r.p, nullptr, Algorithm::bruteforce).verdict == ComparisonVerdict::equal);
  }
  SECTION("a weaker property is strictly more tolerant") {
    // Never violated, so every deviation is tolerated.
    Lts weaker("Pany", LtsKind::property, {"A", "err"}, r.e.alphabet(), {{0, 0, 0}, {0, 1, 0}}, 0);
    auto res = compare_properties(r.e, r.c, r.p, weaker, nullptr, Algorithm::synthesis_heuristic);
    CHECK(res.verdict == ComparisonVerdict::right_strictly_more);
    REQUIRE(res.right_witness);
    CHECK(*res.right_witness == all_transitions(r.e));
    for (const auto& d : res.left.delta.deviations) CHECK_FALSE(res.right_witness->subset_of(d));
    auto oracle = compare_properties(r.e, r.c, r.p, weaker, nullptr, Algorithm::bruteforce);
    CHECK(oracle.verdict == res.verdict);
  }
}

TEST_CASE("comparison verdicts compose as a preorder") {
  std::mt19937_64 rng(47);
  InstanceShape shape;
  shape.max_env_states = 2;
  int done = 0;
  while (done < 40) {
    auto inst = random_instance(rng, shape);
    if (!inst) continue;
    const Lts& e = inst->environment;
    Alphabet act = e.alphabet();
    // Three controllers over the same environment; keep only triples where
    // every closed loop is safe.
    std::vector<Lts> cs{inst->controller};
    for (int k = 0; k < 2; ++k) {
      std::vector<Transition> ts;
      for (ActionId a = 0; a < act.size(); ++a)
        if (rng() % 2 == 0) ts.push_back({0, a, 0});
      cs.emplace_back("C" + std::to_string(k), LtsKind::controller, std::vector<std::string>{"c"}, act, ts, 0);
    }
    bool safe = std::all_of(cs.begin(), cs.end(), [&](const Lts& c) {
      return check_safety(parallel_compose(e, c), inst->property).satisfied;
    });
    if (!safe) continue;
    std::vector<RobustnessReport> reports;
    for (const auto& c : cs) reports.push_back(delta_unconstrained(e, c, inst->property, Algorithm::synthesis_heuristic));
    auto cmp = [&](int i, int j) { return compare_reports(reports[i], reports[j]).verdict; };
    for (int i = 0; i < 3; ++i) CHECK(cmp(i, i) == ComparisonVerdict::equal);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          if (cmp(a, b) == ComparisonVerdict::left_strictly_more && cmp(b, c) == ComparisonVerdict::left_strictly_more)
            CHECK(cmp(a, c) == ComparisonVerdict::left_strictly_more);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        auto res = compare_reports(reports[a], reports[b]);
        if (res.left_witness)
          for (const auto& d : reports[b].delta.deviations) CHECK_FALSE(res.left_witness->subset_of(d));
        if (res.right_witness)
          for (const auto& d : reports[a].delta.deviations) CHECK_FALSE(res.right_witness->subset_of(d));
      }
    ++done;
  }
}

TEST_CASE("reports are independent of the thread count") {
  ModelFile m = testing::load_fixture("voting");
  const Lts& e = *m.environment;
  auto one = delta_constrained(e, m.controllers[0], *m.property("Pcfm"), *m.constraint("Penv"),
                               Algorithm::synthesis_heuristic);
  auto four = delta_constrained(e, m.controllers[0], *m.property("Pcfm"), *m.constraint("Penv"),
                                Algorithm::synthesis_heuristic, RunOptions{4, std::nullopt});
  CHECK(report_json(one, e).dump() == report_json(four, e).dump());
}
