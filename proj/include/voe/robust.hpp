#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voe/estimands.hpp"
#include "voe/information.hpp"

namespace voe {

/// Strictly ascending kinks inside (0, 1) standing in for "every mu".
class MuGrid {
 public:
  explicit MuGrid(std::vector<double> values);
  /// {step, 2 step, ...} up to but excluding 1; the default step 0.01 gives 0.01..0.99.
  static MuGrid with_step(double step = 0.01);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// R^{u_mu}_V: the rational agent reports its posterior of the second state
/// and is scored by the V-shaped rule. Requires two states.
double v_shaped_benchmark(const EmpiricalJoint& joint, double mu);
double v_shaped_baseline(const EmpiricalJoint& joint, double mu);

struct RobustDelta {
  double value = 0.0;
  double argmin_mu = 0.0;
};

struct RobustReport {
  std::vector<double> mus;
  /// Signal name ("prior", "x", "yhat", "z:<m>", "ah", "ah_z:<m>") -> value per grid point.
  std::map<std::string, std::vector<double>> per_mu;
  /// "delta_e", "delta_yhat", "delta_ind_e:<m>", ... -> min over the grid.
  std::map<std::string, RobustDelta> robust;

  nlohmann::json to_json() const;
  /// Long-format "mu,spec,value" table.
  std::string per_mu_csv() const;
};

/// Worst-case deltas over V-shaped rules. Throws ConfigError for non-binary states.
RobustReport robust_values(const ValueEstimator& estimator, const MuGrid& grid);
RobustReport robust_values(const EvaluationDataset& dataset, const DecisionTask& task,
                           const CoarseningResult* coarsening, const MuGrid& grid, const ValueColumns& columns = {});

struct BlackwellResult {
  bool dominates = true;
  std::optional<double> witness_mu;
};

/// True when R^{u_mu}_{V1} >= R^{u_mu}_{V2} - 1e-12 at every grid kink; otherwise
/// reports the first violating kink.
BlackwellResult blackwell_dominates(const EmpiricalJoint& first, const EmpiricalJoint& second, const MuGrid& grid);
BlackwellResult blackwell_dominates(const EvaluationDataset& dataset, const SignalSpec& first,
                                    const SignalSpec& second, const std::vector<std::string>& states,
                                    const CoarseningResult* coarsening, const MuGrid& grid);

}  // namespace voe
