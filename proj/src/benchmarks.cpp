#include "voe/benchmarks.hpp"

#include "voe/errors.hpp"
#include "voe/numeric.hpp"

namespace voe {

void check_states(const EmpiricalJoint& joint, const DecisionTask& task) {
  if (joint.states() != task.states()) {
    throw DataError("state", "joint states do not match the task states");
  }
}

BenchmarkResult rational_benchmark(const EmpiricalJoint& joint, const DecisionTask& task, const SignalSpec& spec) {
  check_states(joint, task);
  BenchmarkResult result;
  result.spec = spec;
  result.per_signal.reserve(joint.num_signals());
  KahanSum total;
  for (std::size_t v = 0; v < joint.num_signals(); ++v) {
    const Belief& post = joint.posterior(v);
    const std::size_t a = best_response(task, post);
    const double eu = expected_utility(task, a, post);
    total += joint.signal_probability(v) * eu;
    result.per_signal.push_back({joint.signals()[v], joint.signal_probability(v), post, a, eu});
  }
  result.value = total.value();
  return result;
}

double rational_baseline(const EmpiricalJoint& joint, const DecisionTask& task) {
  check_states(joint, task);
  const Belief& prior = joint.prior();
  return expected_utility(task, best_response(task, prior), prior);
}

double value_of_information(const EmpiricalJoint& joint, const DecisionTask& task) {
  return rational_benchmark(joint, task).value - rational_baseline(joint, task);
}

double evaluate_policy(const EmpiricalJoint& joint, const DecisionTask& task, const std::vector<std::size_t>& actions) {
  check_states(joint, task);
  if (actions.size() != joint.num_signals()) throw DataError("policy", "policy needs one action per signal");
  KahanSum total;
  for (std::size_t v = 0; v < joint.num_signals(); ++v) {
    if (actions[v] >= task.num_actions()) throw DataError("policy", "policy action index out of range");
    for (std::size_t s = 0; s < joint.num_states(); ++s) {
      total += joint.probability(v, s) * task.utility(actions[v], s);
    }
  }
  return total.value();
}

double evaluate_policy(const EmpiricalJoint& joint, const DecisionTask& task,
                       const std::map<SignalKey, std::string>& policy) {
  std::vector<std::size_t> actions;
  actions.reserve(joint.num_signals());
  for (const auto& key : joint.signals()) {
    const auto it = policy.find(key);
    if (it == policy.end()) throw DataError("policy", "policy has no action for signal " + to_string(key));
    actions.push_back(task.action_index(it->second));
  }
  return evaluate_policy(joint, task, actions);
}

double held_out_value(const EmpiricalJoint& fitted, const EmpiricalJoint& evaluation, const DecisionTask& task) {
  check_states(fitted, task);
  check_states(evaluation, task);
  KahanSum total;
  for (std::size_t v = 0; v < evaluation.num_signals(); ++v) {
    const std::size_t a = best_response(task, fitted.posterior_or_prior(evaluation.signals()[v]));
    for (std::size_t s = 0; s < evaluation.num_states(); ++s) {
      total += evaluation.probability(v, s) * task.utility(a, s);
    }
  }
  return total.value();
}

nlohmann::json BenchmarkResult::to_json(const DecisionTask& task) const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& d : per_signal) {
    rows.push_back({{"signal", d.signal},
                    {"probability", d.probability},
                    {"posterior", std::vector<double>(d.posterior.probs().begin(), d.posterior.probs().end())},
                    {"action", task.actions()[d.action]},
                    {"conditional_utility", d.conditional_utility}});
  }
  return {{"spec", spec.name()}, {"value", value}, {"per_signal", std::move(rows)}};
}

}  // namespace voe
