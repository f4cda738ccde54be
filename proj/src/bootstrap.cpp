#include "voe/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "voe/errors.hpp"
#include "voe/numeric.hpp"
#include "voe/random.hpp"

namespace voe {

void BootstrapOptions::validate() const {
  if (n_resamples == 0) throw ConfigError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("bootstrap level must lie in (0, 1)");
}

BootstrapResult percentile_interval(double point, std::vector<double> replicates, double level) {
  if (replicates.empty()) throw DataError("replicates", "no bootstrap replicates");
  std::sort(replicates.begin(), replicates.end());
  const double b = static_cast<double>(replicates.size());
  const double tail = (1.0 - level) / 2.0;
  auto lo = static_cast<std::size_t>(std::floor(tail * b + 1e-9));
  auto hi_count = static_cast<std::size_t>(std::ceil((1.0 - tail) * b - 1e-9));
  lo = std::min(lo, replicates.size() - 1);
  const std::size_t hi = std::clamp<std::size_t>(hi_count, 1, replicates.size()) - 1;
  BootstrapResult r;
  r.point = point;
  r.low = replicates[lo];
  r.high = replicates[std::max(hi, lo)];
  r.replicates = std::move(replicates);
  return r;
}

std::vector<double> resample_weights(std::size_t n, std::uint64_t seed, std::size_t replicate) {
  Rng rng(derive_seed(seed, replicate));
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[rng.index(n)] += 1.0;
  return w;
}

std::vector<std::vector<double>> run_replicates(
    std::size_t n_records, const BootstrapOptions& options,
    const std::function<std::vector<double>(std::span<const double>)>& statistic) {
  options.validate();
  if (n_records == 0) throw DataError("dataset", "cannot bootstrap an empty dataset");
  std::vector<std::vector<double>> out(options.n_resamples);
  std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, options.n_resamples);
  auto work = [&](std::size_t worker) {
    for (std::size_t b = worker; b < options.n_resamples; b += threads) {
      out[b] = statistic(resample_weights(n_records, options.seed, b));
    }
  };
  if (threads <= 1) {
    work(0);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  return out;
}

ValueReport bootstrap_report(const ValueEstimator& estimator, const BootstrapOptions& options) {
  ValueReport report = estimator.estimate();
  const auto point = report.flatten();
  const auto replicates = run_replicates(estimator.size(), options, [&](std::span<const double> w) {
    const auto flat = estimator.estimate(w).flatten();
    std::vector<double> values;
    values.reserve(flat.size());
    for (const auto& [name, v] : flat) values.push_back(v);
    return values;
  });
  for (std::size_t q = 0; q < point.size(); ++q) {
    std::vector<double> column;
    column.reserve(replicates.size());
    for (const auto& rep : replicates) {
      if (rep.size() != point.size()) throw InvariantError("bootstrap replicate changed the report layout");
      column.push_back(rep[q]);
    }
    const auto ci = percentile_interval(point[q].second, std::move(column), options.level);
    report.ci[point[q].first] = {ci.low, ci.high};
  }
  return report;
}

BootstrapResult bootstrap_ci(const std::string& statistic, const EvaluationDataset& dataset,
                             const DecisionTask& task, const CoarseningResult* coarsening,
                             const ValueColumns& columns, const BootstrapOptions& options) {
  const ValueEstimator estimator(dataset, task, coarsening, columns);
  const auto point = estimator.estimate().get(statistic);
  if (!point) throw ConfigError("unknown statistic '" + statistic + "'");
  const auto replicates = run_replicates(estimator.size(), options, [&](std::span<const double> w) {
    const auto v = estimator.estimate(w).get(statistic);
    if (!v) throw InvariantError("statistic '" + statistic + "' vanished in a replicate");
    return std::vector<double>{*v};
  });
  std::vector<double> column;
  column.reserve(replicates.size());
  for (const auto& r : replicates) column.push_back(r.front());
  return percentile_interval(*point, std::move(column), options.level);
}

BootstrapResult bootstrap_behavioral(const EvaluationDataset& dataset, const DecisionTask& task,
                                     const std::optional<std::string>& arm, const BootstrapOptions& options) {
  const auto point = behavioral_value(dataset, task, arm);
  // Realized utilities of the two groups.
  std::vector<double> treated;
  std::vector<double> control;
  for (const auto& r : dataset) {
    if (!r.condition) continue;
    const bool is_treated = *r.condition == Condition::kWithExplanation;
    if (is_treated && arm && r.arm.value_or("") != *arm) continue;
    const double u = task.utility(task.action_index(*r.human_action), task.state_index(r.state));
    (is_treated ? treated : control).push_back(u);
  }
  auto mean_of = [](const std::vector<double>& xs, std::span<const double> w) {
    KahanSum s;
    double n = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      s += w[i] * xs[i];
      n += w[i];
    }
    return s.value() / n;
  };
  options.validate();
  // Stratified resampling: each group is resampled with its own stream.
  std::vector<double> column;
  column.reserve(options.n_resamples);
  for (std::size_t b = 0; b < options.n_resamples; ++b) {
    const auto wt = resample_weights(treated.size(), derive_seed(options.seed, 1), b);
    const auto wc = resample_weights(control.size(), derive_seed(options.seed, 2), b);
    column.push_back(mean_of(treated, wt) - mean_of(control, wc));
  }
  return percentile_interval(point.delta, std::move(column), options.level);
}

}  // namespace voe
