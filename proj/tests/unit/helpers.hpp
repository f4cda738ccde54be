#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voe/dataset.hpp"
#include "voe/decision.hpp"

namespace voe::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(VOE_FIXTURE_DIR) / name; }

// Discrete record with feature x, prediction and optional explanations/human action.
inline EvaluationRecord rec(const std::string& id, const std::string& state, const std::string& x,
                            const std::string& prediction = "0", std::map<std::string, std::string> z = {},
                            std::optional<std::string> human = std::nullopt) {
  EvaluationRecord r;
  r.id = id;
  r.state = state;
  r.prediction = prediction;
  r.features["x"] = x;
  for (auto& [k, v] : z) r.explanations[k] = v;
  r.human_action = std::move(human);
  return r;
}

// Brute force: best of all |A|^|V| deterministic policies on an explicit joint p[v][s].
inline double enumerate_policies(const std::vector<std::vector<double>>& p, const DecisionTask& task) {
  const std::size_t nv = p.size();
  const std::size_t na = task.num_actions();
  std::vector<std::size_t> policy(nv, 0);
  double best = -1e300;
  while (true) {
    double value = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t s = 0; s < task.num_states(); ++s) value += p[v][s] * task.utility(policy[v], s);
    }
    best = std::max(best, value);
    std::size_t i = 0;
    while (i < nv && ++policy[i] == na) policy[i++] = 0;
    if (i == nv) break;
  }
  return best;
}

// Best fixed action under the marginal of p[v][s].
inline double best_constant(const std::vector<std::vector<double>>& p, const DecisionTask& task) {
  double best = -1e300;
  for (std::size_t a = 0; a < task.num_actions(); ++a) {
    double value = 0.0;
    for (const auto& row : p) {
      for (std::size_t s = 0; s < row.size(); ++s) value += row[s] * task.utility(a, s);
    }
    best = std::max(best, value);
  }
  return best;
}

}  // namespace voe::test
