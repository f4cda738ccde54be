#include "voe/decision.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "voe/errors.hpp"

namespace voe {
namespace {

void check_unique(const std::vector<std::string>& labels, const std::string& field) {
  if (labels.empty()) throw DataError(field, field + " must be non-empty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw DataError(field, "duplicate label '" + l + "' in " + field);
  }
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Belief Belief::from_probs(std::vector<double> probs) {
  if (probs.empty()) throw DataError("belief", "belief must be non-empty");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + 1e-12) {
      throw DataError("belief", "belief entries must lie in [0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "belief sums to " << total << ", expected 1 within 1e-9";
    throw DataError("belief", msg.str());
  }
  for (auto& p : probs) p /= total;
  return Belief(std::move(probs));
}

Belief Belief::uniform(std::size_t n) {
  return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Belief Belief::degenerate(std::size_t n, std::size_t state) {
  std::vector<double> p(n, 0.0);
  p.at(state) = 1.0;
  return Belief(std::move(p));
}

DecisionTask::DecisionTask(std::vector<std::string> actions, std::vector<std::string> states,
                           std::vector<std::vector<double>> utility)
    : actions_(std::move(actions)), states_(std::move(states)), utility_(std::move(utility)) {
  check_unique(actions_, "actions");
  check_unique(states_, "states");
  if (utility_.size() != actions_.size()) {
    throw DataError("utility", "utility table needs one row per action");
  }
  for (const auto& row : utility_) {
    if (row.size() != states_.size()) {
      throw DataError("utility", "utility row needs one entry per state");
    }
    for (double u : row) {
      if (!std::isfinite(u)) throw DataError("utility", "utility entries must be finite");
    }
  }
}

DecisionTask DecisionTask::medical(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("medical preset requires epsilon in (0, 1)");
  }
  return DecisionTask({"no-biopsy", "biopsy"}, {"0", "1"}, {{epsilon, epsilon}, {0.0, 1.0}});
}

DecisionTask DecisionTask::accuracy(std::vector<std::string> states) {
  std::vector<std::vector<double>> u(states.size(), std::vector<double>(states.size(), 0.0));
  for (std::size_t i = 0; i < states.size(); ++i) u[i][i] = 1.0;
  auto actions = states;
  return DecisionTask(std::move(actions), std::move(states), std::move(u));
}

DecisionTask DecisionTask::preset(std::string_view name) {
  const auto colon = name.find(':');
  const auto head = name.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : name.substr(colon + 1);
  if (head == "medical") {
    if (arg.empty()) return medical();
    double eps = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), eps);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw ConfigError("cannot parse epsilon in preset '" + std::string(name) + "'");
    }
    return medical(eps);
  }
  if (head == "accuracy") {
    if (arg.empty()) return accuracy();
    return accuracy(split(arg, ','));
  }
  throw ConfigError("unknown task preset '" + std::string(name) + "'");
}

std::size_t DecisionTask::action_index(std::string_view label) const {
  const auto it = std::find(actions_.begin(), actions_.end(), label);
  if (it == actions_.end()) throw DataError("action", "unknown action label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - actions_.begin());
}

std::size_t DecisionTask::state_index(std::string_view label) const {
  const auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) throw DataError("state", "unknown state label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

bool DecisionTask::has_state(std::string_view label) const {
  return std::find(states_.begin(), states_.end(), label) != states_.end();
}

bool DecisionTask::has_action(std::string_view label) const {
  return std::find(actions_.begin(), actions_.end(), label) != actions_.end();
}

nlohmann::json DecisionTask::to_json() const {
  return {{"actions", actions_}, {"states", states_}, {"utility", utility_}};
}

DecisionTask DecisionTask::from_json(const nlohmann::json& j) {
  auto labels = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array()) throw DataError(key, std::string("task is missing '") + key + "'");
    std::vector<std::string> out;
    for (const auto& v : j[key]) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return out;
  };
  if (!j.is_object()) throw DataError("task", "task must be a JSON object");
  auto actions = labels("actions");
  auto states = labels("states");
  if (!j.contains("utility") || !j["utility"].is_array()) throw DataError("utility", "task is missing 'utility'");
  std::vector<std::vector<double>> u;
  for (const auto& row : j["utility"]) {
    if (!row.is_array()) throw DataError("utility", "utility rows must be arrays");
    std::vector<double> r;
    for (const auto& x : row) {
      if (!x.is_number()) throw DataError("utility", "utility entries must be numbers");
      r.push_back(x.get<double>());
    }
    u.push_back(std::move(r));
  }
  return DecisionTask(std::move(actions), std::move(states), std::move(u));
}

double expected_utility(const DecisionTask& task, std::size_t action, const Belief& belief) {
  if (action >= task.num_actions()) throw DataError("action", "action index out of range");
  if (belief.size() != task.num_states()) {
    throw DataError("belief", "belief dimension does not match the number of states");
  }
  double eu = 0.0;
  for (std::size_t s = 0; s < task.num_states(); ++s) eu += belief[s] * task.utility(action, s);
  return eu;
}

double expected_utility(const DecisionTask& task, std::string_view action, const Belief& belief) {
  return expected_utility(task, task.action_index(action), belief);
}

std::size_t best_response(const DecisionTask& task, const Belief& belief) {
  std::size_t best = 0;
  double best_eu = expected_utility(task, 0, belief);
  for (std::size_t a = 1; a < task.num_actions(); ++a) {
    const double eu = expected_utility(task, a, belief);
    if (eu > best_eu) {
      best = a;
      best_eu = eu;
    }
  }
  return best;
}

double ProperScoringRule::score(const Belief& report, std::size_t state) const {
  return task_.utility(best_response(task_, report), state);
}

double ProperScoringRule::expected_score(const Belief& report, const Belief& truth) const {
  return expected_utility(task_, best_response(task_, report), truth);
}

ProperScoringRule to_proper_scoring_rule(const DecisionTask& task) { return ProperScoringRule(task); }

VShapedRule::VShapedRule(double mu) : mu_(mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("V-shaped rule kink must lie strictly inside (0, 1)");
}

double VShapedRule::score(double report, int state) const {
  if (!(report >= 0.0 && report <= 1.0)) throw DataError("report", "report must lie in [0, 1]");
  if (state != 0 && state != 1) throw DataError("state", "V-shaped rules take binary states");
  if (mu_ > 0.5) {
    // Mirror of the kink-(1 - mu) rule with both report and state flipped.
    return VShapedRule(1.0 - mu_).score(1.0 - report, 1 - state);
  }
  const double slope = 0.5 * (static_cast<double>(state) - mu_) / (1.0 - mu_);
  return report <= mu_ ? 0.5 - slope : 0.5 + slope;
}

double VShapedRule::expected_score(double report, double truth) const {
  return (1.0 - truth) * score(report, 0) + truth * score(report, 1);
}

}  // namespace voe
