#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace voe {

/// A probability vector over the states of a task, indexed by state position.
class Belief {
 public:
  Belief() = default;
  /// Validates that entries lie in [0,1] and sum to 1 within 1e-9, then
  /// renormalizes by the exact sum.
  static Belief from_probs(std::vector<double> probs);
  static Belief uniform(std::size_t n);
  static Belief degenerate(std::size_t n, std::size_t state);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t s) const { return probs_[s]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

/// Finite decision task: ordered action and state labels plus a utility table
/// indexed (action, state).
class DecisionTask {
 public:
  DecisionTask(std::vector<std::string> actions, std::vector<std::string> states,
               std::vector<std::vector<double>> utility);

  /// Physician biopsy task: actions {no-biopsy, biopsy}, states {0, 1},
  /// u(biopsy, 1) = 1, u(biopsy, 0) = 0, u(no-biopsy, .) = epsilon.
  static DecisionTask medical(double epsilon = 0.5);
  /// u(a, s) = 1 when a == s; actions share the state labels.
  static DecisionTask accuracy(std::vector<std::string> states = {"0", "1"});
  /// Resolves "medical", "medical:<eps>", "accuracy" or "accuracy:<s1>,<s2>,...".
  static DecisionTask preset(std::string_view name);

  const std::vector<std::string>& actions() const noexcept { return actions_; }
  const std::vector<std::string>& states() const noexcept { return states_; }
  std::size_t num_actions() const noexcept { return actions_.size(); }
  std::size_t num_states() const noexcept { return states_.size(); }
  double utility(std::size_t action, std::size_t state) const { return utility_[action][state]; }
  const std::vector<std::vector<double>>& utility_table() const noexcept { return utility_; }

  /// Throws DataError("action"/"state") for unknown labels.
  std::size_t action_index(std::string_view label) const;
  std::size_t state_index(std::string_view label) const;
  bool has_state(std::string_view label) const;
  bool has_action(std::string_view label) const;
  bool is_binary() const noexcept { return states_.size() == 2; }

  nlohmann::json to_json() const;
  static DecisionTask from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> actions_;
  std::vector<std::string> states_;
  std::vector<std::vector<double>> utility_;
};

double expected_utility(const DecisionTask& task, std::size_t action, const Belief& belief);
double expected_utility(const DecisionTask& task, std::string_view action, const Belief& belief);

/// Utility-maximizing action index; ties go to the lowest index.
std::size_t best_response(const DecisionTask& task, const Belief& belief);

/// The proper scoring rule equivalent to a decision task: a report q is scored
/// by the utility of the action that best responds to q.
class ProperScoringRule {
 public:
  explicit ProperScoringRule(DecisionTask task) : task_(std::move(task)) {}

  double score(const Belief& report, std::size_t state) const;
  /// Expected score of `report` when states are drawn from `truth`.
  double expected_score(const Belief& report, const Belief& truth) const;
  const DecisionTask& task() const noexcept { return task_; }

 private:
  DecisionTask task_;
};

ProperScoringRule to_proper_scoring_rule(const DecisionTask& task);

/// Piecewise-linear binary scoring rule with kink mu in (0, 1). Reports are
/// the probability of the second state.
class VShapedRule {
 public:
  explicit VShapedRule(double mu);

  double mu() const noexcept { return mu_; }
  /// state is 0 or 1; report must lie in [0, 1].
  double score(double report, int state) const;
  double expected_score(double report, double truth) const;

 private:
  double mu_;
};

}  // namespace voe
