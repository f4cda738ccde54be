#include "voe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voe/benchmarks.hpp"
#include "voe/errors.hpp"
#include "voe/numeric.hpp"
#include "voe/random.hpp"

namespace voe {
namespace {

constexpr double kStochasticTolerance = 1e-9;

void check_distribution(const std::vector<double>& row, std::size_t width, const std::string& field) {
  if (row.size() != width) {
    throw DataError(field, field + " has " + std::to_string(row.size()) + " entries, expected " + std::to_string(width));
  }
  double total = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DataError(field, field + " entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) throw DataError(field, field + " must sum to 1 within 1e-9");
}

std::string index_label(std::size_t i) { return std::to_string(i); }

std::vector<double> embed(const std::vector<double>& center, double noise, Rng& rng) {
  std::vector<double> out = center;
  for (auto& v : out) v += noise * rng.normal();
  return out;
}

std::vector<std::vector<double>> draw_centers(std::size_t count, std::size_t dim, double scale, Rng& rng) {
  std::vector<std::vector<double>> centers(count, std::vector<double>(dim));
  for (auto& c : centers) {
    for (auto& v : c) v = scale * rng.normal();
  }
  return centers;
}

// p(x, s) for every x and s.
std::vector<std::vector<double>> x_state_joint(const SyntheticSpec& spec) {
  std::vector<std::vector<double>> p(spec.n_x(), std::vector<double>(spec.states.size(), 0.0));
  for (std::size_t x = 0; x < spec.n_x(); ++x) {
    for (std::size_t s = 0; s < spec.states.size(); ++s) p[x][s] = spec.prior[s] * spec.likelihood[s][x];
  }
  return p;
}

void check_task(const SyntheticSpec& spec, const DecisionTask& task) {
  if (task.states() != spec.states) throw DataError("states", "task states do not match the synthetic spec");
}

}  // namespace

std::size_t SyntheticSpec::n_x_ai() const {
  if (x_ai_map.empty()) return n_x();
  return x_ai_map.empty() ? 0 : *std::max_element(x_ai_map.begin(), x_ai_map.end()) + 1;
}

void SyntheticSpec::validate() const {
  if (states.empty()) throw DataError("states", "synthetic spec needs states");
  if (actions.empty()) throw DataError("actions", "synthetic spec needs actions");
  check_distribution(prior, states.size(), "prior");
  if (likelihood.size() != states.size()) throw DataError("likelihood", "likelihood needs one row per state");
  if (n_x() == 0) throw DataError("likelihood", "likelihood rows must be non-empty");
  for (std::size_t s = 0; s < states.size(); ++s) check_distribution(likelihood[s], n_x(), "likelihood");
  if (!x_ai_map.empty() && x_ai_map.size() != n_x()) throw DataError("x_ai_map", "x_ai_map needs one entry per x");
  if (prediction_rule.size() != n_x_ai()) throw DataError("prediction_rule", "prediction_rule needs one entry per x_ai");
  for (const auto& [m, rule] : explanation_rules) {
    if (rule.size() != n_x_ai()) throw DataError("explanation_rules", "explanation rule '" + m + "' needs one entry per x_ai");
  }
  for (const auto* policy : {&human_policy, &human_policy_explained}) {
    if (policy->empty()) continue;
    if (policy->size() != n_x()) throw DataError("human_policy", "human policy needs one row per x");
    for (const auto& row : *policy) check_distribution(row, actions.size(), "human_policy");
  }
  if (!human_policy_explained.empty() && human_policy.empty()) {
    throw DataError("human_policy", "human_policy_explained requires a baseline human_policy");
  }
  if (!(with_explanation_fraction > 0.0 && with_explanation_fraction < 1.0)) {
    throw DataError("with_explanation_fraction", "with_explanation_fraction must lie in (0, 1)");
  }
}

void GarblingKernel::validate() const {
  if (gamma.empty()) throw DataError("gamma", "kernel must be non-empty");
  for (const auto& row : gamma) check_distribution(row, gamma.size(), "gamma");
}

GarblingKernel GarblingKernel::identity(std::size_t n) {
  GarblingKernel k;
  k.gamma.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) k.gamma[i][i] = 1.0;
  return k;
}

nlohmann::json SyntheticSpec::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"states", states},
                      {"actions", actions},
                      {"prior", prior},
                      {"likelihood", likelihood},
                      {"prediction_rule", prediction_rule},
                      {"explanation_rules", explanation_rules},
                      {"n_records", n_records},
                      {"seed", seed}};
  if (!x_ai_map.empty()) j["x_ai_map"] = x_ai_map;
  if (!human_policy.empty()) j["human_policy"] = human_policy;
  if (!human_policy_explained.empty()) {
    j["human_policy_explained"] = human_policy_explained;
    j["with_explanation_fraction"] = with_explanation_fraction;
  }
  if (embedding) {
    j["embedding"] = {{"feature_dim", embedding->feature_dim},
                      {"explanation_dim", embedding->explanation_dim},
                      {"center_scale", embedding->center_scale},
                      {"noise", embedding->noise}};
  }
  return j;
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  auto labels = [](const nlohmann::json& arr) {
    std::vector<std::string> out;
    for (const auto& v : arr) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return out;
  };
  try {
    s.name = j.value("name", "");
    s.states = labels(j.at("states"));
    s.actions = j.contains("actions") ? labels(j["actions"]) : s.states;
    s.prior = j.at("prior").get<std::vector<double>>();
    s.likelihood = j.at("likelihood").get<std::vector<std::vector<double>>>();
    if (j.contains("x_ai_map")) s.x_ai_map = j["x_ai_map"].get<std::vector<std::size_t>>();
    s.prediction_rule = labels(j.at("prediction_rule"));
    if (j.contains("explanation_rules")) {
      for (const auto& [m, rule] : j["explanation_rules"].items()) s.explanation_rules[m] = labels(rule);
    }
    if (j.contains("human_policy")) s.human_policy = j["human_policy"].get<std::vector<std::vector<double>>>();
    if (j.contains("human_policy_explained")) {
      s.human_policy_explained = j["human_policy_explained"].get<std::vector<std::vector<double>>>();
    }
    s.with_explanation_fraction = j.value("with_explanation_fraction", 0.5);
    if (j.contains("embedding")) {
      const auto& e = j["embedding"];
      Embedding emb;
      emb.feature_dim = e.value("feature_dim", emb.feature_dim);
      emb.explanation_dim = e.value("explanation_dim", emb.explanation_dim);
      emb.center_scale = e.value("center_scale", emb.center_scale);
      emb.noise = e.value("noise", emb.noise);
      s.embedding = emb;
    }
    s.n_records = j.value("n_records", std::size_t{0});
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("spec", std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

EvaluationDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<std::vector<double>> x_centers;
  std::map<std::string, std::map<std::string, std::vector<double>>> z_centers;
  if (spec.embedding) {
    Rng centers_rng(derive_seed(spec.seed, 1));
    x_centers = draw_centers(spec.n_x(), spec.embedding->feature_dim, spec.embedding->center_scale, centers_rng);
    for (const auto& [m, rule] : spec.explanation_rules) {
      std::vector<std::string> values = rule;
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      const auto centers =
          draw_centers(values.size(), spec.embedding->explanation_dim, spec.embedding->center_scale, centers_rng);
      for (std::size_t i = 0; i < values.size(); ++i) z_centers[m][values[i]] = centers[i];
    }
  }

  std::vector<EvaluationRecord> records;
  records.reserve(spec.n_records);
  for (std::size_t i = 0; i < spec.n_records; ++i) {
    EvaluationRecord r;
    r.id = "r" + std::to_string(i);
    const std::size_t s = rng.categorical(spec.prior);
    const std::size_t x = rng.categorical(spec.likelihood[s]);
    const std::size_t x_ai = spec.x_ai_of(x);
    r.state = spec.states[s];
    r.prediction = spec.prediction_rule[x_ai];
    if (spec.embedding) {
      r.features["x"] = embed(x_centers[x], spec.embedding->noise, rng);
    } else {
      r.features["x"] = index_label(x);
    }
    r.features["x_ai"] = index_label(x_ai);
    for (const auto& [m, rule] : spec.explanation_rules) {
      if (spec.embedding) {
        r.explanations[m] = embed(z_centers[m][rule[x_ai]], spec.embedding->noise, rng);
      } else {
        r.explanations[m] = rule[x_ai];
      }
    }
    if (!spec.human_policy.empty()) {
      const auto* policy = &spec.human_policy;
      if (!spec.human_policy_explained.empty()) {
        const bool treated = rng.uniform() < spec.with_explanation_fraction;
        r.condition = treated ? Condition::kWithExplanation : Condition::kWithoutExplanation;
        if (treated) policy = &spec.human_policy_explained;
      }
      r.human_action = spec.actions[rng.categorical((*policy)[x])];
    }
    records.push_back(std::move(r));
  }
  return EvaluationDataset(std::move(records));
}

EmpiricalJoint exact_joint(const SyntheticSpec& spec, const SignalSpec& signal) {
  spec.validate();
  const bool uses_action =
      std::find(signal.columns.begin(), signal.columns.end(), "human_action") != signal.columns.end();
  if (uses_action && spec.human_policy.empty()) throw DataError("human_action", "spec has no human policy");
  const auto pxs = x_state_joint(spec);
  std::map<SignalKey, std::size_t> index;
  std::vector<SignalKey> keys;
  std::vector<std::vector<double>> mass;
  const std::size_t n_actions = uses_action ? spec.actions.size() : 1;
  for (std::size_t x = 0; x < spec.n_x(); ++x) {
    const std::size_t x_ai = spec.x_ai_of(x);
    for (std::size_t a = 0; a < n_actions; ++a) {
      SignalKey key;
      for (const auto& c : signal.columns) {
        if (c == "features.x") {
          key.push_back(index_label(x));
        } else if (c == "features.x_ai") {
          key.push_back(index_label(x_ai));
        } else if (c == "prediction") {
          key.push_back(spec.prediction_rule[x_ai]);
        } else if (c == "human_action") {
          key.push_back(spec.actions[a]);
        } else if (c.rfind("explanations.", 0) == 0 && spec.explanation_rules.contains(c.substr(13))) {
          key.push_back(spec.explanation_rules.at(c.substr(13))[x_ai]);
        } else {
          throw DataError(c, "unsupported column '" + c + "' for exact joints");
        }
      }
      const double weight = uses_action ? spec.human_policy[x][a] : 1.0;
      auto [it, inserted] = index.try_emplace(key, keys.size());
      if (inserted) {
        keys.push_back(key);
        mass.emplace_back(spec.states.size(), 0.0);
      }
      for (std::size_t s = 0; s < spec.states.size(); ++s) mass[it->second][s] += pxs[x][s] * weight;
    }
  }
  return EmpiricalJoint(spec.states, std::move(keys), std::move(mass));
}

double misinformed_score(const SyntheticSpec& spec, const GarblingKernel& kernel, const DecisionTask& task) {
  spec.validate();
  kernel.validate();
  check_task(spec, task);
  if (kernel.gamma.size() != spec.n_x()) {
    throw DataError("gamma", "kernel dimension " + std::to_string(kernel.gamma.size()) +
                                 " does not match the number of x values " + std::to_string(spec.n_x()));
  }
  const auto pxs = x_state_joint(spec);
  KahanSum total;
  for (std::size_t xg = 0; xg < spec.n_x(); ++xg) {
    // Unnormalized p'(x', s) = p(s) sigma'(x' | s).
    std::vector<double> garbled(spec.states.size(), 0.0);
    for (std::size_t x = 0; x < spec.n_x(); ++x) {
      for (std::size_t s = 0; s < spec.states.size(); ++s) garbled[s] += pxs[x][s] * kernel.gamma[x][xg];
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < task.num_actions(); ++a) {
      double eu = 0.0;
      for (std::size_t s = 0; s < spec.states.size(); ++s) eu += garbled[s] * task.utility(a, s);
      best = std::max(best, eu);
    }
    total += best;
  }
  return total.value();
}

double misoptimizing_score(const SyntheticSpec& spec, double temperature, const DecisionTask& task,
                           std::uint64_t /*seed*/) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  spec.validate();
  check_task(spec, task);
  const auto joint = exact_joint(spec, {{"features.x"}});
  KahanSum total;
  std::vector<double> eu(task.num_actions());
  std::vector<double> weight(task.num_actions());
  for (std::size_t v = 0; v < joint.num_signals(); ++v) {
    const double pv = joint.signal_probability(v);
    if (pv == 0.0) continue;
    for (std::size_t a = 0; a < task.num_actions(); ++a) eu[a] = expected_utility(task, a, joint.posterior(v));
    const double top = *std::max_element(eu.begin(), eu.end());
    double norm = 0.0;
    for (std::size_t a = 0; a < task.num_actions(); ++a) {
      weight[a] = std::exp((eu[a] - top) / temperature);
      norm += weight[a];
    }
    double expected = 0.0;
    for (std::size_t a = 0; a < task.num_actions(); ++a) expected += weight[a] / norm * eu[a];
    total += pv * expected;
  }
  return total.value();
}

double uniform_action_score(const SyntheticSpec& spec, const DecisionTask& task) {
  check_task(spec, task);
  const auto joint = exact_joint(spec, {{"features.x"}});
  KahanSum total;
  for (std::size_t v = 0; v < joint.num_signals(); ++v) {
    double mean = 0.0;
    for (std::size_t a = 0; a < task.num_actions(); ++a) mean += expected_utility(task, a, joint.posterior(v));
    total += joint.signal_probability(v) * mean / static_cast<double>(task.num_actions());
  }
  return total.value();
}

SyntheticSpec random_spec(std::uint64_t seed, std::size_t max_states, std::size_t max_x, std::size_t n_methods,
                          std::size_t n_records) {
  Rng rng(seed);
  SyntheticSpec spec;
  spec.name = "random-" + std::to_string(seed);
  const std::size_t n_states = 2 + rng.index(std::max<std::size_t>(max_states, 2) - 1);
  const std::size_t n_x = 2 + rng.index(std::max<std::size_t>(max_x, 2) - 1);
  for (std::size_t s = 0; s < n_states; ++s) spec.states.push_back(index_label(s));
  spec.actions = spec.states;
  spec.prior = rng.flat_dirichlet(n_states);
  for (std::size_t s = 0; s < n_states; ++s) spec.likelihood.push_back(rng.flat_dirichlet(n_x));
  const std::size_t n_x_ai = 1 + rng.index(n_x);
  for (std::size_t x = 0; x < n_x; ++x) spec.x_ai_map.push_back(x < n_x_ai ? x : rng.index(n_x_ai));
  for (std::size_t i = 0; i < n_x_ai; ++i) spec.prediction_rule.push_back(spec.states[rng.index(n_states)]);
  for (std::size_t m = 0; m < n_methods; ++m) {
    auto& rule = spec.explanation_rules["e" + std::to_string(m)];
    for (std::size_t i = 0; i < n_x_ai; ++i) rule.push_back(index_label(rng.index(3)));
  }
  for (std::size_t x = 0; x < n_x; ++x) spec.human_policy.push_back(rng.flat_dirichlet(spec.actions.size()));
  spec.n_records = n_records;
  spec.seed = derive_seed(seed, 99);
  return spec;
}

GarblingKernel random_kernel(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  GarblingKernel k;
  for (std::size_t i = 0; i < n; ++i) k.gamma.push_back(rng.flat_dirichlet(n));
  return k;
}

DecisionTask random_task(std::uint64_t seed, const std::vector<std::string>& states, std::size_t max_actions) {
  Rng rng(seed);
  const std::size_t n_actions = 2 + rng.index(std::max<std::size_t>(max_actions, 2) - 1);
  std::vector<std::string> actions;
  std::vector<std::vector<double>> u(n_actions, std::vector<double>(states.size()));
  for (std::size_t a = 0; a < n_actions; ++a) {
    actions.push_back("a" + std::to_string(a));
    for (auto& x : u[a]) x = 2.0 * rng.uniform() - 1.0;
  }
  return DecisionTask(std::move(actions), states, std::move(u));
}

}  // namespace voe
