#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "voe/decision.hpp"
#include "voe/information.hpp"

namespace voe {

struct SignalDecision {
  SignalKey signal;
  double probability = 0.0;  // p(v)
  Belief posterior;
  std::size_t action = 0;
  double conditional_utility = 0.0;  // max_a E[u(a, s) | v]
};

/// Rational-agent benchmark R_V with its per-signal decision table.
struct BenchmarkResult {
  double value = 0.0;
  std::vector<SignalDecision> per_signal;
  SignalSpec spec;

  nlohmann::json to_json(const DecisionTask& task) const;
};

/// E_v[max_a E_{s|v} u(a, s)] over the joint; ties go to the lowest action.
BenchmarkResult rational_benchmark(const EmpiricalJoint& joint, const DecisionTask& task,
                                   const SignalSpec& spec = {});

/// max_a E_{s ~ prior} u(a, s).
double rational_baseline(const EmpiricalJoint& joint, const DecisionTask& task);

/// rational_benchmark - rational_baseline.
double value_of_information(const EmpiricalJoint& joint, const DecisionTask& task);

/// E_{(v,s)}[u(policy(v), s)]. Throws DataError when a signal has no action.
double evaluate_policy(const EmpiricalJoint& joint, const DecisionTask& task,
                       const std::map<SignalKey, std::string>& policy);
/// Same with actions given by index, one per joint row.
double evaluate_policy(const EmpiricalJoint& joint, const DecisionTask& task,
                       const std::vector<std::size_t>& actions);

/// Scores a fitted joint on another sample: each signal of `evaluation` is met
/// with the action that best responds to `fitted`'s posterior (or its prior
/// for signals `fitted` never saw), weighted by `evaluation`'s frequencies.
double held_out_value(const EmpiricalJoint& fitted, const EmpiricalJoint& evaluation, const DecisionTask& task);

/// Throws DataError when the joint's states differ from the task's.
void check_states(const EmpiricalJoint& joint, const DecisionTask& task);

}  // namespace voe
