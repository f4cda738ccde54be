#include "voe/estimands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "voe/benchmarks.hpp"
#include "voe/errors.hpp"
#include "voe/numeric.hpp"

namespace voe {
namespace {

constexpr double kPrivateInfoTolerance = 1e-9;

std::string feature_col(const std::string& name) { return "features." + name; }
std::string explanation_col(const std::string& name) { return "explanations." + name; }

double benchmark_of(const EvaluationDataset& dataset, const DecisionTask& task, const CoarseningResult* coarsening,
                    const SignalSpec& spec) {
  return rational_benchmark(fit_joint(dataset, spec, task.states(), coarsening), task, spec).value;
}

void require_human(const EvaluationDataset& dataset) {
  if (dataset.empty()) throw DataError("dataset", "dataset is empty");
  for (const auto& r : dataset) {
    if (!r.human_action) throw DataError("human_action", "record '" + r.id + "' has no human_action");
  }
}

void put(std::vector<std::pair<std::string, double>>& out, const std::string& name, double v) {
  out.emplace_back(name, v);
}

}  // namespace

nlohmann::json ValueColumns::to_json() const {
  nlohmann::json j = {{"feature", feature}, {"explanations", explanations}, {"use_human_action", use_human_action}};
  j["x_ai"] = x_ai ? nlohmann::json(*x_ai) : nlohmann::json(nullptr);
  return j;
}

ValueColumns ValueColumns::from_json(const nlohmann::json& j) {
  ValueColumns c;
  try {
    if (j.contains("feature")) c.feature = j["feature"].get<std::string>();
    if (j.contains("x_ai") && !j["x_ai"].is_null()) c.x_ai = j["x_ai"].get<std::string>();
    if (j.contains("explanations")) c.explanations = j["explanations"].get<std::vector<std::string>>();
    if (j.contains("use_human_action")) c.use_human_action = j["use_human_action"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad column declaration: ") + e.what());
  }
  return c;
}

double telescoping_remainder(double total, double part) {
  double c = total - part;
  for (int i = 0; i < 16; ++i) {
    const double sum = part + c;
    if (sum == total) return c;
    c = std::nextafter(c, sum < total ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity());
  }
  throw InvariantError("no double remainder telescopes exactly to the total");
}

std::vector<std::pair<std::string, double>> ValueReport::flatten() const {
  std::vector<std::pair<std::string, double>> out;
  put(out, "r_baseline", r_baseline);
  put(out, "r_x", r_x);
  put(out, "r_yhat", r_yhat);
  put(out, "r_x_yhat", r_x_yhat);
  put(out, "r_x_yhat_z", r_x_yhat_z);
  for (const auto& [m, v] : r_z) put(out, "r_z:" + m, v);
  if (r_ah) put(out, "r_ah", *r_ah);
  for (const auto& [m, v] : r_ah_z) put(out, "r_ah_z:" + m, v);
  if (private_info) {
    put(out, "r_xai", private_info->r_xai);
    put(out, "r_xai_ah", private_info->r_xai_ah);
  }
  put(out, "delta_e", delta_e);
  for (const auto& [m, v] : delta_ind_e) put(out, "delta_ind_e:" + m, v);
  for (const auto& [m, v] : delta_cont_e) put(out, "delta_cont_e:" + m, v);
  if (delta_compl) put(out, "delta_compl", *delta_compl);
  for (const auto& [m, v] : delta_ind_compl) put(out, "delta_ind_compl:" + m, v);
  for (const auto& [m, v] : delta_cont_compl) put(out, "delta_cont_compl:" + m, v);
  for (const auto& [arm, b] : behavioral) {
    const std::string suffix = arm.empty() ? "" : ":" + arm;
    put(out, "b" + suffix, b.b);
    put(out, "b_not_e" + suffix, b.b_not_e);
    put(out, "delta_behavioral" + suffix, b.delta);
  }
  return out;
}

std::optional<double> ValueReport::get(const std::string& name) const {
  for (const auto& [k, v] : flatten()) {
    if (k == name) return v;
  }
  return std::nullopt;
}

nlohmann::json ValueReport::to_json() const {
  nlohmann::json quantities = nlohmann::json::array();
  for (const auto& [name, value] : flatten()) {
    nlohmann::json q = {{"name", name}, {"value", value}};
    if (const auto it = ci.find(name); it != ci.end()) {
      q["ci_low"] = it->second.low;
      q["ci_high"] = it->second.high;
    }
    quantities.push_back(std::move(q));
  }
  nlohmann::json j = {{"quantities", std::move(quantities)}, {"notes", notes}};
  if (private_info) {
    j["private_info"] = {{"sufficient", private_info->sufficient},
                         {"r_xai", private_info->r_xai},
                         {"r_xai_ah", private_info->r_xai_ah},
                         {"upper_bound", private_info->sufficient ? "r_x" : "r_xai_ah"}};
  }
  return j;
}

ValueEstimator::ValueEstimator(const EvaluationDataset& dataset, const DecisionTask& task,
                               const CoarseningResult* coarsening, ValueColumns columns)
    : task_(task), n_records_(dataset.size()) {
  if (dataset.empty()) throw DataError("dataset", "dataset is empty");
  explanations_ = columns.explanations.empty() ? dataset.explanation_names() : columns.explanations;
  DatasetSchema schema = DatasetSchema::for_task(task);
  schema.required_features = {columns.feature};
  schema.required_explanations = explanations_;
  dataset.validate(schema);

  if (columns.use_human_action) {
    std::size_t missing = 0;
    for (const auto& r : dataset) missing += r.human_action ? 0 : 1;
    has_human_ = missing == 0;
    if (!has_human_) {
      notes_.push_back("complementary block omitted: human_action missing on " + std::to_string(missing) + " of " +
                       std::to_string(dataset.size()) + " records");
    }
  }
  if (columns.x_ai) {
    has_x_ai_ = true;
    for (const auto& r : dataset) has_x_ai_ = has_x_ai_ && r.features.contains(*columns.x_ai);
    if (!has_x_ai_) notes_.push_back("private-information check omitted: features." + *columns.x_ai + " missing");
  }

  const auto& states = task.states();
  auto add = [&](const std::string& name, SignalSpec spec) {
    signals_.emplace(name, encode_signal(dataset, spec, states, coarsening));
  };
  const std::string x = feature_col(columns.feature);
  add("prior", SignalSpec::prior_only());
  add("x", {{x}});
  add("yhat", {{"prediction"}});
  add("x_yhat", {{x, "prediction"}});
  SignalSpec full{{x, "prediction"}};
  for (const auto& m : explanations_) {
    full.columns.push_back(explanation_col(m));
    add("z:" + m, {{explanation_col(m)}});
  }
  add("x_yhat_z", full);
  if (has_human_) {
    add("ah", {{"human_action"}});
    for (const auto& m : explanations_) add("ah_z:" + m, {{"human_action", explanation_col(m)}});
  }
  if (has_x_ai_) {
    add("xai", {{feature_col(*columns.x_ai)}});
    if (has_human_) add("xai_ah", {{feature_col(*columns.x_ai), "human_action"}});
  }
}

ValueReport ValueEstimator::estimate() const {
  const std::vector<double> ones(n_records_, 1.0);
  return estimate(ones);
}

ValueReport ValueEstimator::estimate(std::span<const double> weights) const {
  auto bench = [&](const std::string& name) {
    const auto& enc = signals_.at(name);
    return rational_benchmark(EmpiricalJoint::from_weights(enc, weights), task_, enc.spec).value;
  };
  ValueReport r;
  r.notes = notes_;
  r.r_baseline = rational_baseline(EmpiricalJoint::from_weights(signals_.at("prior"), weights), task_);
  r.r_x = bench("x");
  r.r_yhat = bench("yhat");
  r.r_x_yhat = bench("x_yhat");
  r.r_x_yhat_z = bench("x_yhat_z");
  r.delta_e = r.r_x - r.r_baseline;
  for (const auto& m : explanations_) {
    const double rz = bench("z:" + m);
    r.r_z[m] = rz;
    r.delta_ind_e[m] = rz - r.r_baseline;
    r.delta_cont_e[m] = telescoping_remainder(r.delta_e, r.delta_ind_e[m]);
  }
  if (has_human_) {
    r.r_ah = bench("ah");
    r.delta_compl = r.r_x - *r.r_ah;
    for (const auto& m : explanations_) {
      const double rahz = bench("ah_z:" + m);
      r.r_ah_z[m] = rahz;
      r.delta_ind_compl[m] = rahz - *r.r_ah;
      r.delta_cont_compl[m] = telescoping_remainder(*r.delta_compl, r.delta_ind_compl[m]);
    }
  }
  if (has_x_ai_ && has_human_) {
    PrivateInfoCheck check;
    check.r_xai = bench("xai");
    check.r_xai_ah = bench("xai_ah");
    check.sufficient = !(check.r_xai_ah > check.r_xai + kPrivateInfoTolerance);
    if (!check.sufficient) {
      r.notes.push_back("human decisions carry information beyond x_ai: r_xai_ah replaces r_x as the upper bound");
    }
    r.private_info = check;
  }
  return r;
}

TheoreticValue theoretic_value(const EvaluationDataset& dataset, const DecisionTask& task,
                               const CoarseningResult* coarsening, const std::string& feature) {
  const SignalSpec spec{{feature_col(feature)}};
  const auto joint = fit_joint(dataset, spec, task.states(), coarsening);
  TheoreticValue out;
  out.r_x = rational_benchmark(joint, task, spec).value;
  out.r_baseline = rational_baseline(joint, task);
  out.delta_e = out.r_x - out.r_baseline;
  return out;
}

std::pair<double, double> decompose_theoretic(const EvaluationDataset& dataset, const DecisionTask& task,
                                              const CoarseningResult* coarsening, const std::string& explanation,
                                              const std::string& feature) {
  const auto names = dataset.explanation_names();
  if (std::find(names.begin(), names.end(), explanation) == names.end()) {
    throw DataError(explanation_col(explanation), "unknown explanation '" + explanation + "'");
  }
  const auto theoretic = theoretic_value(dataset, task, coarsening, feature);
  const double r_z = benchmark_of(dataset, task, coarsening, {{explanation_col(explanation)}});
  const double independent = r_z - theoretic.r_baseline;
  return {independent, telescoping_remainder(theoretic.delta_e, independent)};
}

ComplementaryValue complementary_value(const EvaluationDataset& dataset, const DecisionTask& task,
                                       const CoarseningResult* coarsening, const std::string& feature) {
  require_human(dataset);
  ComplementaryValue out;
  out.r_ah = benchmark_of(dataset, task, coarsening, {{"human_action"}});
  out.delta_compl = benchmark_of(dataset, task, coarsening, {{feature_col(feature)}}) - out.r_ah;
  return out;
}

std::pair<double, double> decompose_complementary(const EvaluationDataset& dataset, const DecisionTask& task,
                                                  const CoarseningResult* coarsening, const std::string& explanation,
                                                  const std::string& feature) {
  require_human(dataset);
  const auto names = dataset.explanation_names();
  if (std::find(names.begin(), names.end(), explanation) == names.end()) {
    throw DataError(explanation_col(explanation), "unknown explanation '" + explanation + "'");
  }
  const auto compl_value = complementary_value(dataset, task, coarsening, feature);
  const double r_ah_z = benchmark_of(dataset, task, coarsening, {{"human_action", explanation_col(explanation)}});
  const double independent = r_ah_z - compl_value.r_ah;
  return {independent, telescoping_remainder(compl_value.delta_compl, independent)};
}

PrivateInfoCheck private_info_check(const EvaluationDataset& dataset, const DecisionTask& task,
                                    const CoarseningResult* coarsening, const std::string& x_ai) {
  require_human(dataset);
  DatasetSchema schema;
  schema.required_features = {x_ai};
  dataset.validate(schema);
  PrivateInfoCheck out;
  out.r_xai = benchmark_of(dataset, task, coarsening, {{feature_col(x_ai)}});
  out.r_xai_ah = benchmark_of(dataset, task, coarsening, {{feature_col(x_ai), "human_action"}});
  out.sufficient = !(out.r_xai_ah > out.r_xai + kPrivateInfoTolerance);
  return out;
}

BehavioralValue behavioral_value(const EvaluationDataset& dataset, const DecisionTask& task,
                                 const std::optional<std::string>& arm) {
  KahanSum with_sum;
  KahanSum without_sum;
  BehavioralValue out;
  for (const auto& r : dataset) {
    if (!r.condition) continue;
    const bool treated = *r.condition == Condition::kWithExplanation;
    if (treated && arm && r.arm.value_or("") != *arm) continue;
    if (!r.human_action) throw DataError("human_action", "record '" + r.id + "' has no human_action");
    const double u = task.utility(task.action_index(*r.human_action), task.state_index(r.state));
    if (treated) {
      with_sum += u;
      ++out.n_with;
    } else {
      without_sum += u;
      ++out.n_without;
    }
  }
  if (out.n_with == 0) {
    throw DataError("condition", arm ? "no with_explanation records for arm '" + *arm + "'"
                                     : std::string("no with_explanation records"));
  }
  if (out.n_without == 0) throw DataError("condition", "no without_explanation records");
  out.b = with_sum.value() / static_cast<double>(out.n_with);
  out.b_not_e = without_sum.value() / static_cast<double>(out.n_without);
  out.delta = out.b - out.b_not_e;
  return out;
}

std::vector<std::string> behavioral_arms(const EvaluationDataset& dataset) {
  std::set<std::string> arms;
  for (const auto& r : dataset) {
    if (r.condition == Condition::kWithExplanation) arms.insert(r.arm.value_or(""));
  }
  return {arms.begin(), arms.end()};
}

EvaluationDataset baseline_records(const EvaluationDataset& dataset) {
  std::vector<EvaluationRecord> out;
  for (const auto& r : dataset) {
    if (r.condition != Condition::kWithExplanation) out.push_back(r);
  }
  return EvaluationDataset(std::move(out));
}

}  // namespace voe
