#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "voe/errors.hpp"
#include "voe/random.hpp"
#include "voe/synthetic.hpp"

using namespace voe;

namespace {

Belief binary(double p1) { return Belief::from_probs({1.0 - p1, p1}); }

// Grid check of E_q[score(q)] >= E_q[score(p)] for a generic rule.
template <class F>
void check_proper_binary(F expected) {
  for (int i = 0; i <= 100; ++i) {
    const double q = i / 100.0;
    const double truthful = expected(q, q);
    for (int j = 0; j <= 100; ++j) REQUIRE(truthful >= expected(j / 100.0, q) - 1e-12);
  }
}

}  // namespace

TEST_CASE("Belief validation") {
  CHECK_THROWS_AS(Belief::from_probs({0.5, 0.6}), DataError);
  CHECK_THROWS_AS(Belief::from_probs({-0.1, 1.1}), DataError);
  CHECK_THROWS_AS(Belief::from_probs({}), DataError);
  const auto b = Belief::from_probs({0.3, 0.7 + 5e-10});
  CHECK(b[0] + b[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Belief::uniform(4)[2] == 0.25);
  CHECK(Belief::degenerate(3, 1)[1] == 1.0);
}

TEST_CASE("DecisionTask validation") {
  CHECK_THROWS_AS(DecisionTask({}, {"0"}, {}), DataError);
  CHECK_THROWS_AS(DecisionTask({"a", "a"}, {"0"}, {{1}, {2}}), DataError);
  CHECK_THROWS_AS(DecisionTask({"a"}, {"0", "0"}, {{1, 2}}), DataError);
  CHECK_THROWS_AS(DecisionTask({"a"}, {"0", "1"}, {{1}}), DataError);
  CHECK_THROWS_AS(DecisionTask({"a"}, {"0"}, {{NAN}}), DataError);
  CHECK_THROWS_AS(DecisionTask({"a"}, {"0"}, {{INFINITY}}), DataError);
  CHECK_NOTHROW(DecisionTask({"a"}, {"0"}, {{1}}));
}

TEST_CASE("expected_utility on the medical task") {
  const auto task = DecisionTask::medical(0.5);
  CHECK(expected_utility(task, "biopsy", binary(0.7)) == doctest::Approx(0.7));
  for (double p : {0.0, 0.2, 0.9, 1.0}) CHECK(expected_utility(task, "no-biopsy", binary(p)) == 0.5);
  const auto acc = DecisionTask::accuracy();
  CHECK(expected_utility(acc, "0", Belief::uniform(2)) == 0.5);
  CHECK(expected_utility(acc, "1", Belief::uniform(2)) == 0.5);
  CHECK_THROWS_AS(expected_utility(task, "surgery", binary(0.5)), DataError);
  CHECK_THROWS_AS(expected_utility(task, "biopsy", Belief::uniform(3)), DataError);
}

TEST_CASE("best_response and its tie rule") {
  const auto task = DecisionTask::medical(0.5);
  CHECK(task.actions()[best_response(task, binary(0.7))] == "biopsy");
  CHECK(task.actions()[best_response(task, binary(0.5))] == "no-biopsy");
  const auto acc = DecisionTask::accuracy({"a", "b", "c"});
  for (std::size_t s = 0; s < 3; ++s) CHECK(best_response(acc, Belief::degenerate(3, s)) == s);
  CHECK(best_response(acc, Belief::uniform(3)) == 0);
}

TEST_CASE("best_response is invariant to positive affine transforms") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto task = random_task(seed, {"0", "1", "2"});
    auto u = task.utility_table();
    for (auto& row : u) {
      for (auto& x : row) x = 3.0 * x + 7.0;
    }
    const DecisionTask scaled(task.actions(), task.states(), u);
    Rng rng(seed + 100);
    for (int i = 0; i < 50; ++i) {
      const auto b = Belief::from_probs(rng.flat_dirichlet(3));
      CHECK(best_response(task, b) == best_response(scaled, b));
    }
  }
}

TEST_CASE("proper scoring rule from the medical task") {
  const auto rule = to_proper_scoring_rule(DecisionTask::medical(0.5));
  CHECK(rule.score(binary(0.3), 0) == 0.5);
  CHECK(rule.score(binary(0.7), 1) == 1.0);
  CHECK(rule.score(binary(0.3), 1) == 0.5);
  CHECK(rule.score(binary(0.7), 0) == 0.0);
}

TEST_CASE("generic rule is proper and equals the best-response utility") {
  std::vector<DecisionTask> tasks = {DecisionTask::medical(0.5), DecisionTask::medical(0.2),
                                     DecisionTask::accuracy()};
  for (std::uint64_t seed = 0; seed < 20; ++seed) tasks.push_back(random_task(seed, {"0", "1"}));
  for (const auto& task : tasks) {
    const auto rule = to_proper_scoring_rule(task);
    check_proper_binary([&](double report, double truth) { return rule.expected_score(binary(report), binary(truth)); });
    for (int i = 0; i <= 100; ++i) {
      const auto q = binary(i / 100.0);
      CHECK(rule.expected_score(q, q) == expected_utility(task, best_response(task, q), q));
    }
  }
}

TEST_CASE("V-shaped scores at stated points") {
  CHECK(VShapedRule(0.5).score(0.7, 1) == 1.0);
  CHECK(VShapedRule(0.5).score(0.3, 1) == 0.0);
  CHECK(VShapedRule(0.25).score(0.1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(VShapedRule(0.0), ConfigError);
  CHECK_THROWS_AS(VShapedRule(1.0), ConfigError);
  CHECK_THROWS_AS(VShapedRule(0.5).score(1.2, 1), DataError);
  CHECK_THROWS_AS(VShapedRule(0.5).score(0.2, 2), DataError);
}

TEST_CASE("V-shaped at one half is thresholded accuracy") {
  const VShapedRule rule(0.5);
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    CHECK(rule.score(p, 1) == (p > 0.5 ? 1.0 : 0.0));
    CHECK(rule.score(p, 0) == (p > 0.5 ? 0.0 : 1.0));
  }
}

TEST_CASE("V-shaped rules are proper and bounded for every kink") {
  for (int m = 1; m <= 99; ++m) {
    const VShapedRule rule(m / 100.0);
    check_proper_binary([&](double report, double truth) { return rule.expected_score(report, truth); });
    for (int i = 0; i <= 100; ++i) {
      for (int s = 0; s <= 1; ++s) {
        const double v = rule.score(i / 100.0, s);
        REQUIRE(v >= -1e-15);
        REQUIRE(v <= 1.0 + 1e-15);
      }
    }
  }
}

TEST_CASE("V-shaped kinks above one half mirror the lower rule") {
  for (double mu : {0.6, 0.75, 0.9}) {
    const VShapedRule hi(mu), lo(1.0 - mu);
    for (int i = 0; i <= 100; ++i) {
      const double p = i / 100.0;
      CHECK(hi.score(p, 1) == lo.score(1.0 - p, 0));
      CHECK(hi.score(p, 0) == lo.score(1.0 - p, 1));
    }
  }
}

TEST_CASE("task presets and JSON") {
  const auto med = DecisionTask::preset("medical:0.25");
  CHECK(med.utility(0, 0) == 0.25);
  CHECK(med.utility(1, 1) == 1.0);
  CHECK(DecisionTask::preset("accuracy:x,y,z").num_states() == 3);
  CHECK_THROWS_AS(DecisionTask::preset("poker"), ConfigError);
  CHECK_THROWS_AS(DecisionTask::preset("medical:abc"), ConfigError);
  const auto back = DecisionTask::from_json(med.to_json());
  CHECK(back.actions() == med.actions());
  CHECK(back.states() == med.states());
  CHECK(back.utility_table() == med.utility_table());
  CHECK(med.to_json().dump() == R"({"actions":["no-biopsy","biopsy"],"states":["0","1"],"utility":[[0.25,0.25],[0.0,1.0]]})");
  CHECK_THROWS_AS(DecisionTask::from_json(nlohmann::json::parse(R"({"actions":["a"]})")), DataError);
}
