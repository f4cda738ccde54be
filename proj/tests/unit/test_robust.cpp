#include <doctest.h>

#include "helpers.hpp"
#include "voe/errors.hpp"
#include "voe/estimands.hpp"
#include "voe/random.hpp"
#include "voe/robust.hpp"
#include "voe/synthetic.hpp"

using namespace voe;
using test::rec;

namespace {

// Independent V-shaped score; kinks above one half mirror both report and state.
double v_score(double mu, double p, int s) {
  if (mu > 0.5) return v_score(1.0 - mu, 1.0 - p, 1 - s);
  const double slope = (s - mu) / (1.0 - mu);
  return p <= mu ? 0.5 - 0.5 * slope : 0.5 + 0.5 * slope;
}

// R under u_mu for an explicit joint p[v][s].
double v_value(const std::vector<std::vector<double>>& p, double mu) {
  double total = 0.0;
  for (const auto& row : p) {
    const double pv = row[0] + row[1];
    if (pv == 0.0) continue;
    const double q = row[1] / pv;
    total += row[0] * v_score(mu, q, 0) + row[1] * v_score(mu, q, 1);
  }
  return total;
}

EvaluationDataset from_cells(const std::vector<std::pair<std::string, std::string>>& xs) {
  std::vector<EvaluationRecord> recs;
  for (std::size_t i = 0; i < xs.size(); ++i) recs.push_back(rec(std::to_string(i), xs[i].first, xs[i].second));
  return EvaluationDataset(recs);
}

ValueColumns no_human() {
  ValueColumns c;
  c.use_human_action = false;
  return c;
}

}  // namespace

TEST_CASE("mu grid") {
  const auto g = MuGrid::with_step(0.01);
  CHECK(g.size() == 99);
  CHECK(g.values().front() == 0.01);
  CHECK(g.values().back() == 0.99);
  CHECK(g.values()[49] == 0.5);
  CHECK_THROWS_AS(MuGrid({0.2, 0.1}), ConfigError);
  CHECK_THROWS_AS(MuGrid({0.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(MuGrid({0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(MuGrid({}), ConfigError);
}

TEST_CASE("revealing features against the direct evaluation oracle") {
  const auto d = from_cells({{"0", "a"}, {"1", "b"}, {"0", "a"}, {"1", "b"}});
  const auto grid = MuGrid::with_step(0.01);
  const auto r = robust_values(d, DecisionTask::accuracy(), nullptr, grid, no_human());
  double best = 1e9, arg = 0;
  for (double mu : grid.values()) {
    const double delta = v_value({{0.5, 0.0}, {0.0, 0.5}}, mu) - v_value({{0.5, 0.5}}, mu);
    if (delta < best) {
      best = delta;
      arg = mu;
    }
  }
  CHECK(r.robust.at("delta_e").value == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.robust.at("delta_e").argmin_mu == arg);
}

TEST_CASE("uninformative features have zero robust value") {
  const auto d = from_cells({{"0", "a"}, {"1", "a"}, {"0", "b"}, {"1", "b"}});
  const auto r = robust_values(d, DecisionTask::accuracy(), nullptr, MuGrid::with_step(0.01), no_human());
  CHECK(r.robust.at("delta_e").value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("grid {0.5} reproduces accuracy deltas") {
  const auto d = load_dataset(test::fixture("medical-synthetic.jsonl"));
  const auto acc = DecisionTask::accuracy();
  // Relabel actions so the accuracy task accepts the recorded human actions.
  std::vector<EvaluationRecord> recs(d.begin(), d.end());
  for (auto& r : recs) r.human_action = *r.human_action == "biopsy" ? "1" : "0";
  const EvaluationDataset data(recs);
  const ValueEstimator est(baseline_records(data), acc, nullptr, ValueColumns{});
  const auto rob = robust_values(est, MuGrid({0.5}));
  const auto rep = est.estimate();
  CHECK(rob.robust.at("delta_e").value == doctest::Approx(rep.delta_e).epsilon(1e-12));
  CHECK(rob.robust.at("delta_compl").value == doctest::Approx(*rep.delta_compl).epsilon(1e-12));
  CHECK(rob.robust.at("delta_ind_e:lime").value == doctest::Approx(rep.delta_ind_e.at("lime")).epsilon(1e-12));
  CHECK(rob.robust.at("delta_cont_compl:shap").value ==
        doctest::Approx(rep.delta_cont_compl.at("shap")).epsilon(1e-12));
}

TEST_CASE("robust report invariants on fixtures") {
  const auto task = DecisionTask::medical(0.5);
  for (const char* f : {"medical-synthetic.jsonl", "incomparable-signals.jsonl", "private-info.jsonl"}) {
    const auto d = baseline_records(load_dataset(test::fixture(f)));
    const ValueEstimator est(d, task, nullptr, ValueColumns{});
    const auto r = robust_values(est, MuGrid::with_step(0.01));
    const auto& prior = r.per_mu.at("prior");
    for (const auto& [name, values] : r.per_mu) {
      for (std::size_t i = 0; i < r.mus.size(); ++i) REQUIRE(values[i] >= prior[i] - 1e-12);
    }
    const auto& x = r.per_mu.at("x");
    for (std::size_t i = 0; i < r.mus.size(); ++i) REQUIRE(r.robust.at("delta_e").value <= x[i] - prior[i] + 1e-15);
    CHECK(r.robust.at("delta_e").value <= x[49] - prior[49]);
    const auto csv = r.per_mu_csv();
    CHECK(csv.rfind("mu,spec,value\n0.01,", 0) == 0);
  }
}

TEST_CASE("v-shaped benchmark matches the oracle on random joints") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t nv = 1 + rng.index(5);
    const auto flat = rng.flat_dirichlet(2 * nv);
    std::vector<std::vector<double>> p(nv, std::vector<double>(2));
    std::vector<SignalKey> keys;
    for (std::size_t v = 0; v < nv; ++v) {
      p[v] = {flat[2 * v], flat[2 * v + 1]};
      keys.push_back({std::to_string(v)});
    }
    const EmpiricalJoint j({"0", "1"}, keys, p);
    for (double mu : {0.05, 0.3, 0.5, 0.77, 0.95}) {
      REQUIRE(v_shaped_benchmark(j, mu) == doctest::Approx(v_value(p, mu)).epsilon(1e-12));
      REQUIRE(v_shaped_benchmark(j, mu) >= v_shaped_baseline(j, mu) - 1e-12);
    }
  }
}

TEST_CASE("Blackwell: garbling, reflexivity, transitivity") {
  const auto grid = MuGrid::with_step(0.01);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto spec = random_spec(seed, 2, 8, 2);
    const auto x = exact_joint(spec, {{"features.x"}});
    const auto z = exact_joint(spec, {{"explanations.e0"}});
    const auto y = exact_joint(spec, {{"prediction"}});
    const auto xz = exact_joint(spec, {{"features.x", "explanations.e0"}});
    CHECK(blackwell_dominates(x, z, grid).dominates);
    CHECK(blackwell_dominates(x, x, grid).dominates);
    CHECK(blackwell_dominates(xz, x, grid).dominates);
    CHECK(blackwell_dominates(x, xz, grid).dominates);
    const auto xy = blackwell_dominates(x, y, grid).dominates;
    const auto yz = blackwell_dominates(y, z, grid).dominates;
    if (xy && yz) CHECK(blackwell_dominates(x, z, grid).dominates);
  }
}

TEST_CASE("Blackwell: incomparable fixture has a witness") {
  const auto d = load_dataset(test::fixture("incomparable-signals.jsonl"));
  const auto grid = MuGrid::with_step(0.01);
  const std::vector<std::string> states = {"0", "1"};
  const auto ab = blackwell_dominates(d, SignalSpec::parse("explanations.a"), SignalSpec::parse("explanations.b"),
                                      states, nullptr, grid);
  const auto ba = blackwell_dominates(d, SignalSpec::parse("explanations.b"), SignalSpec::parse("explanations.a"),
                                      states, nullptr, grid);
  CHECK_FALSE(ab.dominates);
  CHECK_FALSE(ba.dominates);
  REQUIRE(ab.witness_mu);
  const auto ja = fit_joint(d, SignalSpec::parse("explanations.a"), states);
  const auto jb = fit_joint(d, SignalSpec::parse("explanations.b"), states);
  CHECK(v_shaped_benchmark(ja, *ab.witness_mu) < v_shaped_benchmark(jb, *ab.witness_mu) - 1e-12);
  CHECK(blackwell_dominates(d, SignalSpec::parse("features.x"), SignalSpec::parse("explanations.a"), states, nullptr,
                            grid)
            .dominates);
}

TEST_CASE("non-binary states are rejected") {
  const EmpiricalJoint j({"0", "1", "2"}, {{"v"}}, {{1, 1, 1}});
  CHECK_THROWS_AS(v_shaped_benchmark(j, 0.5), ConfigError);
  CHECK_THROWS_AS(blackwell_dominates(j, j, MuGrid({0.5})), ConfigError);
  const auto d = from_cells({{"0", "a"}, {"1", "b"}});
  CHECK_THROWS_AS(robust_values(d, DecisionTask::accuracy({"0", "1", "2"}), nullptr, MuGrid({0.5}), no_human()),
                  ConfigError);
}
