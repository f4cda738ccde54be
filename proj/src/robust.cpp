#include "voe/robust.hpp"

#include <cmath>
#include <sstream>

#include "voe/decision.hpp"
#include "voe/errors.hpp"
#include "voe/numeric.hpp"

namespace voe {
namespace {

constexpr double kDominanceTolerance = 1e-12;

void require_binary(const EmpiricalJoint& joint) {
  if (joint.num_states() != 2) {
    throw ConfigError("V-shaped scoring rules are defined for binary states only; got " +
                      std::to_string(joint.num_states()) + " states");
  }
}

}  // namespace

MuGrid::MuGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("mu grid must be non-empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] < 1.0)) throw ConfigError("mu grid values must lie inside (0, 1)");
    if (i > 0 && !(values_[i] > values_[i - 1])) throw ConfigError("mu grid must be strictly ascending");
  }
}

MuGrid MuGrid::with_step(double step) {
  if (!(step > 0.0 && step < 1.0)) throw ConfigError("mu grid step must lie in (0, 1)");
  std::vector<double> values;
  for (std::size_t i = 1;; ++i) {
    // Round to the step's decimal grid so 0.5 is hit exactly for step 0.01.
    const double mu = std::round(static_cast<double>(i) * step * 1e12) / 1e12;
    if (mu >= 1.0 - 1e-12) break;
    values.push_back(mu);
  }
  return MuGrid(std::move(values));
}

double v_shaped_benchmark(const EmpiricalJoint& joint, double mu) {
  require_binary(joint);
  const VShapedRule rule(mu);
  KahanSum total;
  for (std::size_t v = 0; v < joint.num_signals(); ++v) {
    const double p = joint.posterior(v)[1];
    total += joint.signal_probability(v) * rule.expected_score(p, p);
  }
  return total.value();
}

double v_shaped_baseline(const EmpiricalJoint& joint, double mu) {
  require_binary(joint);
  const double p = joint.prior()[1];
  return VShapedRule(mu).expected_score(p, p);
}

RobustReport robust_values(const ValueEstimator& estimator, const MuGrid& grid) {
  if (!estimator.task().is_binary()) {
    throw ConfigError("robust analysis requires a binary state space");
  }
  RobustReport report;
  report.mus = grid.values();
  std::map<std::string, EmpiricalJoint> joints;
  for (const auto& [name, enc] : estimator.signals()) {
    if (name == "x_yhat" || name == "x_yhat_z" || name == "xai" || name == "xai_ah") continue;
    joints.emplace(name, EmpiricalJoint::from_encoded(enc));
  }
  for (const auto& [name, joint] : joints) {
    auto& row = report.per_mu[name];
    for (double mu : grid.values()) {
      row.push_back(name == "prior" ? v_shaped_baseline(joint, mu) : v_shaped_benchmark(joint, mu));
    }
  }

  auto track = [&](const std::string& name, const std::vector<double>& upper, const std::vector<double>& lower) {
    RobustDelta d;
    for (std::size_t i = 0; i < report.mus.size(); ++i) {
      const double delta = upper[i] - lower[i];
      if (i == 0 || delta < d.value) {
        d.value = delta;
        d.argmin_mu = report.mus[i];
      }
    }
    report.robust[name] = d;
  };
  const auto& prior = report.per_mu.at("prior");
  const auto& x = report.per_mu.at("x");
  track("delta_e", x, prior);
  track("delta_yhat", report.per_mu.at("yhat"), prior);
  for (const auto& m : estimator.explanations()) {
    const auto& z = report.per_mu.at("z:" + m);
    track("delta_ind_e:" + m, z, prior);
    track("delta_cont_e:" + m, x, z);
  }
  if (report.per_mu.contains("ah")) {
    const auto& ah = report.per_mu.at("ah");
    track("delta_compl", x, ah);
    for (const auto& m : estimator.explanations()) {
      const auto& ahz = report.per_mu.at("ah_z:" + m);
      track("delta_ind_compl:" + m, ahz, ah);
      track("delta_cont_compl:" + m, x, ahz);
    }
  }
  return report;
}

RobustReport robust_values(const EvaluationDataset& dataset, const DecisionTask& task,
                           const CoarseningResult* coarsening, const MuGrid& grid, const ValueColumns& columns) {
  if (!task.is_binary()) throw ConfigError("robust analysis requires a binary state space");
  return robust_values(ValueEstimator(dataset, task, coarsening, columns), grid);
}

nlohmann::json RobustReport::to_json() const {
  nlohmann::json deltas = nlohmann::json::object();
  for (const auto& [name, d] : robust) deltas[name] = {{"value", d.value}, {"argmin_mu", d.argmin_mu}};
  return {{"mu", mus}, {"per_mu", per_mu}, {"robust", std::move(deltas)}};
}

std::string RobustReport::per_mu_csv() const {
  std::ostringstream out;
  out << "mu,spec,value\n";
  for (std::size_t i = 0; i < mus.size(); ++i) {
    for (const auto& [name, values] : per_mu) {
      out << nlohmann::json(mus[i]).dump() << ',' << name << ',' << nlohmann::json(values[i]).dump() << '\n';
    }
  }
  return out.str();
}

BlackwellResult blackwell_dominates(const EmpiricalJoint& first, const EmpiricalJoint& second, const MuGrid& grid) {
  require_binary(first);
  require_binary(second);
  for (double mu : grid.values()) {
    if (v_shaped_benchmark(first, mu) < v_shaped_benchmark(second, mu) - kDominanceTolerance) {
      return {false, mu};
    }
  }
  return {true, std::nullopt};
}

BlackwellResult blackwell_dominates(const EvaluationDataset& dataset, const SignalSpec& first,
                                    const SignalSpec& second, const std::vector<std::string>& states,
                                    const CoarseningResult* coarsening, const MuGrid& grid) {
  if (states.size() != 2) throw ConfigError("Blackwell test over V-shaped rules requires binary states");
  return blackwell_dominates(fit_joint(dataset, first, states, coarsening),
                             fit_joint(dataset, second, states, coarsening), grid);
}

}  // namespace voe
