#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "voe/coarsening.hpp"
#include "voe/dataset.hpp"
#include "voe/decision.hpp"
#include "voe/information.hpp"

namespace voe {

/// Which dataset columns play the roles of X, X_AI and the explanations.
struct ValueColumns {
  std::string feature = "x";
  std::optional<std::string> x_ai;
  /// Empty means every explanation present in the dataset.
  std::vector<std::string> explanations;
  /// Compute human-based quantities when every record carries human_action.
  bool use_human_action = true;

  nlohmann::json to_json() const;
  static ValueColumns from_json(const nlohmann::json& j);
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct PrivateInfoCheck {
  bool sufficient = true;
  double r_xai = 0.0;
  double r_xai_ah = 0.0;
};

struct BehavioralValue {
  double b = 0.0;        // with explanation
  double b_not_e = 0.0;  // without explanation
  double delta = 0.0;
  std::size_t n_with = 0;
  std::size_t n_without = 0;
};

/// Benchmarks and value-of-explanation estimands for one dataset.
struct ValueReport {
  double r_baseline = 0.0;
  double r_x = 0.0;
  double r_yhat = 0.0;
  double r_x_yhat = 0.0;
  double r_x_yhat_z = 0.0;
  std::map<std::string, double> r_z;
  std::optional<double> r_ah;
  std::map<std::string, double> r_ah_z;
  std::optional<PrivateInfoCheck> private_info;

  double delta_e = 0.0;
  std::map<std::string, double> delta_ind_e;
  std::map<std::string, double> delta_cont_e;
  std::optional<double> delta_compl;
  std::map<std::string, double> delta_ind_compl;
  std::map<std::string, double> delta_cont_compl;

  /// Keyed by arm; "" is the pooled with_explanation condition.
  std::map<std::string, BehavioralValue> behavioral;

  /// Quantity name -> bootstrap interval.
  std::map<std::string, Interval> ci;
  /// Human-readable notes (omitted blocks, upper-bound annotations).
  std::vector<std::string> notes;

  /// Every scalar quantity as (name, value) in a fixed order. Per-explanation
  /// quantities are named "<quantity>:<method>", per-arm ones "<quantity>:<arm>".
  std::vector<std::pair<std::string, double>> flatten() const;
  std::optional<double> get(const std::string& name) const;

  nlohmann::json to_json() const;
};

/// Contextual remainder c such that part + c == total exactly in double
/// arithmetic. Equals total - part up to one ulp.
double telescoping_remainder(double total, double part);

/// Encodes every signal a ValueReport needs once, then evaluates the report on
/// the full data or on reweighted (bootstrap) data.
class ValueEstimator {
 public:
  ValueEstimator(const EvaluationDataset& dataset, const DecisionTask& task, const CoarseningResult* coarsening,
                 ValueColumns columns);

  ValueReport estimate() const;
  /// Per-record multiplicities; records with weight zero are dropped.
  ValueReport estimate(std::span<const double> weights) const;

  std::size_t size() const noexcept { return n_records_; }
  const DecisionTask& task() const noexcept { return task_; }
  const std::vector<std::string>& explanations() const noexcept { return explanations_; }
  bool has_human() const noexcept { return has_human_; }
  bool has_x_ai() const noexcept { return has_x_ai_; }
  /// Named encoded signals: "x", "yhat", "z:<m>", "ah", "ah_z:<m>", ...
  const std::map<std::string, EncodedSignal>& signals() const noexcept { return signals_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

 private:
  DecisionTask task_;
  std::size_t n_records_ = 0;
  std::vector<std::string> explanations_;
  bool has_human_ = false;
  bool has_x_ai_ = false;
  std::map<std::string, EncodedSignal> signals_;
  std::vector<std::string> notes_;
};

struct TheoreticValue {
  double delta_e = 0.0;
  double r_x = 0.0;
  double r_baseline = 0.0;
};

TheoreticValue theoretic_value(const EvaluationDataset& dataset, const DecisionTask& task,
                               const CoarseningResult* coarsening, const std::string& feature = "x");

/// (independent, contextual) split of the theoretic value for one explanation.
std::pair<double, double> decompose_theoretic(const EvaluationDataset& dataset, const DecisionTask& task,
                                              const CoarseningResult* coarsening, const std::string& explanation,
                                              const std::string& feature = "x");

struct ComplementaryValue {
  double delta_compl = 0.0;
  double r_ah = 0.0;
};

ComplementaryValue complementary_value(const EvaluationDataset& dataset, const DecisionTask& task,
                                       const CoarseningResult* coarsening, const std::string& feature = "x");

std::pair<double, double> decompose_complementary(const EvaluationDataset& dataset, const DecisionTask& task,
                                                  const CoarseningResult* coarsening, const std::string& explanation,
                                                  const std::string& feature = "x");

/// Compares R_{X_AI} with R_{X_AI u A^H} at tolerance 1e-9.
PrivateInfoCheck private_info_check(const EvaluationDataset& dataset, const DecisionTask& task,
                                    const CoarseningResult* coarsening, const std::string& x_ai = "x_ai");

/// Difference in mean realized utility between the with- and without-explanation
/// conditions. When `arm` is given only with_explanation records of that arm count.
BehavioralValue behavioral_value(const EvaluationDataset& dataset, const DecisionTask& task,
                                 const std::optional<std::string>& arm = std::nullopt);

/// Arms present among with_explanation records ("" when records carry no arm).
std::vector<std::string> behavioral_arms(const EvaluationDataset& dataset);

/// Records that count as baseline (no explanation shown) observations.
EvaluationDataset baseline_records(const EvaluationDataset& dataset);

}  // namespace voe
