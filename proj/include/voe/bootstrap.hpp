#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voe/estimands.hpp"

namespace voe {

struct BootstrapOptions {
  std::size_t n_resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

struct BootstrapResult {
  double point = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::vector<double> replicates;
};

/// Percentile interval; endpoints are order statistics of the replicates.
BootstrapResult percentile_interval(double point, std::vector<double> replicates, double level);

/// Multiplicity vector of a with-replacement resample of n records for
/// replicate `replicate` under `seed`.
std::vector<double> resample_weights(std::size_t n, std::uint64_t seed, std::size_t replicate);

/// Runs `statistic` over every replicate in parallel; replicate order is fixed.
std::vector<std::vector<double>> run_replicates(
    std::size_t n_records, const BootstrapOptions& options,
    const std::function<std::vector<double>(std::span<const double>)>& statistic);

/// Bootstraps every ValueReport quantity with the coarsening held fixed and
/// returns the full-data report with `ci` filled in.
ValueReport bootstrap_report(const ValueEstimator& estimator, const BootstrapOptions& options);

/// Bootstrap interval for one named ValueReport quantity (see ValueReport::flatten).
BootstrapResult bootstrap_ci(const std::string& statistic, const EvaluationDataset& dataset,
                             const DecisionTask& task, const CoarseningResult* coarsening,
                             const ValueColumns& columns, const BootstrapOptions& options);

/// Condition-stratified bootstrap of the behavioral value for one arm.
BootstrapResult bootstrap_behavioral(const EvaluationDataset& dataset, const DecisionTask& task,
                                     const std::optional<std::string>& arm, const BootstrapOptions& options);

}  // namespace voe
