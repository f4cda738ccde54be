#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voe/dataset.hpp"
#include "voe/decision.hpp"
#include "voe/information.hpp"

namespace voe {

/// Gaussian embedding of the discrete signals, used to produce vector-valued
/// fixtures for the coarsening search.
struct Embedding {
  std::size_t feature_dim = 4;
  std::size_t explanation_dim = 3;
  double center_scale = 1.0;
  double noise = 0.1;
};

/// A finite information model with a fixed prediction rule, explanation rules
/// and human policies, from which datasets are sampled.
///
/// The feature x takes values 0..n_x-1 and is drawn from likelihood[s]. The
/// model input x_ai = x_ai_map[x] (identity when the map is empty), the
/// prediction is prediction_rule[x_ai] and each explanation is
/// explanation_rules[m][x_ai], so explanations are functions of
/// (prediction, x_ai). Human policies give a distribution over actions per x;
/// since the prediction is a function of x this covers policies of (x, prediction).
struct SyntheticSpec {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<double> prior;
  std::vector<std::vector<double>> likelihood;  // [state][x]
  std::vector<std::size_t> x_ai_map;
  std::vector<std::string> prediction_rule;                          // [x_ai]
  std::map<std::string, std::vector<std::string>> explanation_rules;  // method -> [x_ai]
  std::vector<std::vector<double>> human_policy;                     // [x][action]
  std::vector<std::vector<double>> human_policy_explained;           // [x][action]
  double with_explanation_fraction = 0.5;
  std::optional<Embedding> embedding;
  std::size_t n_records = 0;
  std::uint64_t seed = 0;

  std::size_t n_x() const { return likelihood.empty() ? 0 : likelihood.front().size(); }
  std::size_t n_x_ai() const;
  std::size_t x_ai_of(std::size_t x) const { return x_ai_map.empty() ? x : x_ai_map[x]; }

  /// Throws DataError naming the first violated constraint.
  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& j);
};

/// Row-stochastic kernel over x values: gamma[x][x'] = P(x' | x).
struct GarblingKernel {
  std::vector<std::vector<double>> gamma;

  void validate() const;
  static GarblingKernel identity(std::size_t n);
};

/// n_records i.i.d. draws; deterministic given spec.seed.
EvaluationDataset generate(const SyntheticSpec& spec);

/// Exact joint of a signal under the spec's information model. Supported
/// columns: features.x, features.x_ai, prediction, explanations.<m>, human_action
/// (the baseline policy).
EmpiricalJoint exact_joint(const SyntheticSpec& spec, const SignalSpec& signal);

/// Expected utility, under the true model, of the agent who sees x garbled by
/// `kernel` and best-responds to the garbled-model posterior.
double misinformed_score(const SyntheticSpec& spec, const GarblingKernel& kernel, const DecisionTask& task);

/// Exact expected utility of the agent who picks actions with probability
/// proportional to exp(E[u(a, s) | x] / temperature). The seed is accepted for
/// interface symmetry; no sampling takes place.
double misoptimizing_score(const SyntheticSpec& spec, double temperature, const DecisionTask& task,
                           std::uint64_t seed = 0);

/// Expected utility of choosing an action uniformly at random.
double uniform_action_score(const SyntheticSpec& spec, const DecisionTask& task);

/// Random full-support spec: Dirichlet(1) prior, likelihood rows and human
/// policies; random x_ai map, prediction and explanation rules.
SyntheticSpec random_spec(std::uint64_t seed, std::size_t max_states = 5, std::size_t max_x = 8,
                          std::size_t n_methods = 2, std::size_t n_records = 0);
GarblingKernel random_kernel(std::uint64_t seed, std::size_t n);
/// Random utility table over the given states with 2..max_actions actions.
DecisionTask random_task(std::uint64_t seed, const std::vector<std::string>& states, std::size_t max_actions = 4);

}  // namespace voe
