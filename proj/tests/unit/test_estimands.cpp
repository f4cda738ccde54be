#include <doctest.h>

#include <functional>

#include "helpers.hpp"
#include "voe/errors.hpp"
#include "voe/estimands.hpp"
#include "voe/random.hpp"

using namespace voe;
using test::rec;

namespace {

using KeyFn = std::function<std::string(const EvaluationRecord&)>;

std::string feat(const EvaluationRecord& r, const std::string& name) { return std::get<std::string>(r.features.at(name)); }
std::string expl(const EvaluationRecord& r, const std::string& name) {
  return std::get<std::string>(r.explanations.at(name));
}

// Independent oracle: tabulate p(v, s) with a plain map and enumerate all policies.
double oracle_r(const EvaluationDataset& d, const DecisionTask& task, const KeyFn& key) {
  std::map<std::string, std::vector<double>> counts;
  for (const auto& r : d) {
    auto& row = counts[key(r)];
    row.resize(task.num_states(), 0.0);
    row[task.state_index(r.state)] += 1.0;
  }
  std::vector<std::vector<double>> p;
  for (auto& [k, row] : counts) {
    for (auto& c : row) c /= static_cast<double>(d.size());
    p.push_back(row);
  }
  return test::enumerate_policies(p, task);
}

EvaluationDataset revealing(bool human_best) {
  std::vector<EvaluationRecord> recs;
  for (int i = 0; i < 8; ++i) {
    const std::string s = std::to_string(i % 2);
    recs.push_back(rec(std::to_string(i), s, "x" + s, "0", {{"same", "x" + s}, {"flat", "c"}},
                       human_best ? s : std::string("0")));
  }
  return EvaluationDataset(recs);
}

ValueColumns cols() { return {}; }

}  // namespace

TEST_CASE("revealing features: theoretic value one half") {
  const auto d = revealing(false);
  const auto acc = DecisionTask::accuracy();
  const auto t = theoretic_value(d, acc, nullptr);
  CHECK(t.delta_e == 0.5);
  CHECK(t.r_x == 1.0);
  CHECK(t.r_baseline == 0.5);
}

TEST_CASE("independent features: zero value") {
  std::vector<EvaluationRecord> recs;
  for (int i = 0; i < 12; ++i) recs.push_back(rec(std::to_string(i), std::to_string(i % 2), std::to_string(i / 4)));
  CHECK(theoretic_value(EvaluationDataset(recs), DecisionTask::accuracy(), nullptr).delta_e == 0.0);
}

TEST_CASE("decompositions at the extremes") {
  const auto d = revealing(false);
  const auto acc = DecisionTask::accuracy();
  const auto [ind_same, cont_same] = decompose_theoretic(d, acc, nullptr, "same");
  CHECK(ind_same == 0.5);
  CHECK(cont_same == 0.0);
  const auto [ind_flat, cont_flat] = decompose_theoretic(d, acc, nullptr, "flat");
  CHECK(ind_flat == 0.0);
  CHECK(cont_flat == 0.5);
  CHECK_THROWS_AS(decompose_theoretic(d, acc, nullptr, "nope"), DataError);
}

TEST_CASE("complementary value at the extremes") {
  const auto acc = DecisionTask::accuracy();
  const auto best = complementary_value(revealing(true), acc, nullptr);
  CHECK(best.delta_compl == 0.0);
  CHECK(best.r_ah == 1.0);
  const auto constant = complementary_value(revealing(false), acc, nullptr);
  CHECK(constant.delta_compl == theoretic_value(revealing(false), acc, nullptr).delta_e);
  const auto [ind, cont] = decompose_complementary(revealing(false), acc, nullptr, "flat");
  CHECK(ind == 0.0);
  CHECK(cont == constant.delta_compl);
  const auto [ind2, cont2] = decompose_complementary(revealing(false), acc, nullptr, "same");
  CHECK(cont2 == 0.0);
  CHECK(ind2 == constant.delta_compl);
  const auto base = revealing(false);
  std::vector<EvaluationRecord> recs(base.begin(), base.end());
  recs[0].human_action.reset();
  CHECK_THROWS_AS(complementary_value(EvaluationDataset(recs), acc, nullptr), DataError);
}

TEST_CASE("private information check") {
  const auto acc = DecisionTask::accuracy();
  std::vector<EvaluationRecord> recs;
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    const std::string s = std::to_string(rng.index(2));
    const std::string xai = std::to_string(rng.index(3));
    auto r = rec(std::to_string(i), s, "x", "0", {}, xai == "2" ? "1" : "0");
    r.features["x_ai"] = xai;
    recs.push_back(r);
  }
  const auto fn = private_info_check(EvaluationDataset(recs), acc, nullptr);
  CHECK(fn.sufficient);
  for (auto& r : recs) r.human_action = r.state;
  const auto leak = private_info_check(EvaluationDataset(recs), acc, nullptr);
  CHECK_FALSE(leak.sufficient);
  CHECK(leak.r_xai_ah == 1.0);
}

TEST_CASE("medical fixture matches brute-force oracles") {
  const auto d = load_dataset(test::fixture("medical-synthetic.jsonl"));
  const auto task = DecisionTask::medical(0.5);
  const auto base = baseline_records(d);
  auto x = [](const EvaluationRecord& r) { return feat(r, "x"); };
  auto lime = [](const EvaluationRecord& r) { return expl(r, "lime"); };
  auto ah = [](const EvaluationRecord& r) { return *r.human_action; };
  auto ah_lime = [](const EvaluationRecord& r) { return *r.human_action + "|" + expl(r, "lime"); };
  auto prior = [](const EvaluationRecord&) { return std::string(); };

  const ValueEstimator est(base, task, nullptr, cols());
  const auto rep = est.estimate();
  CHECK(rep.r_x == doctest::Approx(oracle_r(base, task, x)).epsilon(1e-12));
  CHECK(rep.r_baseline == doctest::Approx(oracle_r(base, task, prior)).epsilon(1e-12));
  CHECK(rep.r_z.at("lime") == doctest::Approx(oracle_r(base, task, lime)).epsilon(1e-12));
  CHECK(*rep.r_ah == doctest::Approx(oracle_r(base, task, ah)).epsilon(1e-12));
  CHECK(rep.r_ah_z.at("lime") == doctest::Approx(oracle_r(base, task, ah_lime)).epsilon(1e-12));
  CHECK(std::abs(rep.delta_e - (oracle_r(base, task, x) - oracle_r(base, task, prior))) <= 1e-12);
  // Large-sample value near the analytic 0.0625 of the spec.
  CHECK(std::abs(theoretic_value(d, task, nullptr).delta_e - 0.0625) < 0.02);

  const auto t = theoretic_value(base, task, nullptr);
  CHECK(t.delta_e == rep.delta_e);
  const auto [ind, cont] = decompose_theoretic(base, task, nullptr, "lime");
  CHECK(ind == rep.delta_ind_e.at("lime"));
  CHECK(cont == rep.delta_cont_e.at("lime"));
  const auto c = complementary_value(base, task, nullptr);
  CHECK(c.delta_compl == *rep.delta_compl);
}

TEST_CASE("telescoping is exact on fixtures and random data") {
  auto check = [](const ValueReport& r) {
    for (const auto& [m, ind] : r.delta_ind_e) REQUIRE(ind + r.delta_cont_e.at(m) == r.delta_e);
    for (const auto& [m, ind] : r.delta_ind_compl) REQUIRE(ind + r.delta_cont_compl.at(m) == *r.delta_compl);
  };
  for (const char* f : {"medical-synthetic.jsonl", "incomparable-signals.jsonl", "private-info.jsonl"}) {
    const auto d = load_dataset(test::fixture(f));
    check(ValueEstimator(d, DecisionTask::medical(0.5), nullptr, cols()).estimate());
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<EvaluationRecord> recs;
    for (int i = 0; i < 80; ++i) {
      recs.push_back(rec(std::to_string(i), std::to_string(rng.index(2)), std::to_string(rng.index(6)),
                         std::to_string(rng.index(2)), {{"a", std::to_string(rng.index(3))}},
                         rng.index(2) ? std::string("biopsy") : std::string("no-biopsy")));
    }
    check(ValueEstimator(EvaluationDataset(recs), DecisionTask::medical(0.3), nullptr, cols()).estimate());
  }
}

TEST_CASE("monotonicity on the fitting data") {
  const auto d = load_dataset(test::fixture("medical-synthetic.jsonl"));
  const auto r = ValueEstimator(d, DecisionTask::medical(0.5), nullptr, cols()).estimate();
  for (const auto& [m, v] : r.r_ah_z) {
    CHECK(v >= *r.r_ah - 1e-12);
    CHECK(v >= r.r_z.at(m) - 1e-12);
  }
  CHECK(r.r_x_yhat_z == doctest::Approx(r.r_x_yhat).epsilon(1e-12));
  CHECK(r.r_x_yhat == doctest::Approx(r.r_x).epsilon(1e-12));
}

TEST_CASE("missing human actions omit the complementary block with a note") {
  const auto base = revealing(false);
  std::vector<EvaluationRecord> recs(base.begin(), base.end());
  recs[2].human_action.reset();
  const auto r = ValueEstimator(EvaluationDataset(recs), DecisionTask::accuracy(), nullptr, cols()).estimate();
  CHECK_FALSE(r.delta_compl.has_value());
  CHECK(r.r_ah_z.empty());
  REQUIRE(r.notes.size() == 1);
  CHECK(r.notes[0].find("human_action missing on 1 of 8") != std::string::npos);
  CHECK_FALSE(r.get("delta_compl").has_value());
}

TEST_CASE("private-info fixture flags insufficiency and annotates the bound") {
  const auto d = load_dataset(test::fixture("private-info.jsonl"));
  ValueColumns c;
  c.x_ai = "x_ai";
  const auto task = DecisionTask::medical(0.5);
  const auto r = ValueEstimator(d, task, nullptr, c).estimate();
  REQUIRE(r.private_info);
  auto xai = [](const EvaluationRecord& rec) { return feat(rec, "x_ai"); };
  auto xai_ah = [](const EvaluationRecord& rec) { return feat(rec, "x_ai") + "|" + *rec.human_action; };
  CHECK(r.private_info->r_xai == doctest::Approx(oracle_r(d, task, xai)).epsilon(1e-12));
  CHECK(r.private_info->r_xai_ah == doctest::Approx(oracle_r(d, task, xai_ah)).epsilon(1e-12));
  CHECK_FALSE(r.private_info->sufficient);
  bool noted = false;
  for (const auto& n : r.notes) noted |= n.find("r_xai_ah") != std::string::npos;
  CHECK(noted);
  CHECK(r.to_json().at("private_info").at("upper_bound") == "r_xai_ah");
}

TEST_CASE("weighted estimate equals the estimate on the replicated dataset") {
  const auto d = revealing(true);
  const std::vector<double> w = {2, 0, 1, 1, 3, 0, 1, 1};
  std::vector<EvaluationRecord> rep;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int k = 0; k < static_cast<int>(w[i]); ++k) rep.push_back(d[i]);
  }
  const ValueEstimator a(d, DecisionTask::accuracy(), nullptr, cols());
  const ValueEstimator b(EvaluationDataset(rep), DecisionTask::accuracy(), nullptr, cols());
  const auto fa = a.estimate(w).flatten();
  const auto fb = b.estimate().flatten();
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa[i].first == fb[i].first);
    CHECK(fa[i].second == doctest::Approx(fb[i].second).epsilon(1e-12));
  }
}

TEST_CASE("telescoping remainder") {
  // Totals and parts are differences of benchmark values, as in the estimator.
  Rng rng(21);
  for (int i = 0; i < 100000; ++i) {
    const double base = rng.uniform();
    const double total = rng.uniform() - base;
    const double part = rng.uniform() - base;
    const double c = telescoping_remainder(total, part);
    REQUIRE(part + c == total);
    REQUIRE(std::abs(c - (total - part)) <= 4.5e-16);
  }
}

TEST_CASE("behavioral value") {
  const auto acc = DecisionTask::accuracy();
  auto rec_c = [](int i, const std::string& s, const std::string& a, Condition c) {
    auto r = rec(std::to_string(i), s, "x", "0", {}, a);
    r.condition = c;
    return r;
  };
  std::vector<EvaluationRecord> same, split;
  for (int i = 0; i < 10; ++i) {
    const std::string s = std::to_string(i % 2);
    const std::string a = std::to_string((i / 2) % 2);
    same.push_back(rec_c(i, s, a, Condition::kWithExplanation));
    same.push_back(rec_c(100 + i, s, a, Condition::kWithoutExplanation));
    split.push_back(rec_c(i, s, s, Condition::kWithExplanation));
    split.push_back(rec_c(100 + i, s, s == "0" ? "1" : "0", Condition::kWithoutExplanation));
  }
  CHECK(behavioral_value(EvaluationDataset(same), acc).delta == 0.0);
  const auto b = behavioral_value(EvaluationDataset(split), acc);
  CHECK(b.delta == 1.0);
  CHECK(b.b == 1.0);
  CHECK(b.b_not_e == 0.0);
  CHECK(b.n_with == 10);

  // Hand counts on the two-arm fixture: heatmap 3/4, text 2/4, control 2/4.
  const auto f = load_dataset(test::fixture("behavioral-two-arm.csv"));
  CHECK(behavioral_value(f, acc).delta == 0.125);
  CHECK(behavioral_value(f, acc, std::string("heatmap")).delta == 0.25);
  CHECK(behavioral_value(f, acc, std::string("text")).delta == 0.0);
  CHECK(behavioral_arms(f) == std::vector<std::string>{"heatmap", "text"});

  std::vector<EvaluationRecord> swapped(split);
  for (auto& r : swapped) {
    r.condition = *r.condition == Condition::kWithExplanation ? Condition::kWithoutExplanation
                                                               : Condition::kWithExplanation;
  }
  CHECK(behavioral_value(EvaluationDataset(swapped), acc).delta == -b.delta);

  std::vector<EvaluationRecord> one_side;
  for (const auto& r : split) {
    if (r.condition == Condition::kWithExplanation) one_side.push_back(r);
  }
  CHECK_THROWS_AS(behavioral_value(EvaluationDataset(one_side), acc), DataError);
  CHECK_THROWS_AS(behavioral_value(revealing(true), acc), DataError);
}

TEST_CASE("flatten names and JSON") {
  const auto r = ValueEstimator(revealing(true), DecisionTask::accuracy(), nullptr, cols()).estimate();
  CHECK(r.get("r_z:same") == 1.0);
  CHECK(r.get("delta_ind_e:flat") == 0.0);
  CHECK(r.get("delta_compl") == 0.0);
  CHECK_FALSE(r.get("nonsense").has_value());
  const auto j = r.to_json();
  CHECK(j.at("quantities").size() == r.flatten().size());
  CHECK(ValueColumns::from_json(cols().to_json()).feature == "x");
}
