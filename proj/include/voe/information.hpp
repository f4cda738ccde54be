#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voe/dataset.hpp"
#include "voe/decision.hpp"

namespace voe {

class CoarseningResult;

/// Ordered list of column references composing a discrete signal. Column
/// references are "prediction", "human_action", "features.<name>" and
/// "explanations.<name>". The empty spec is the prior-only signal.
struct SignalSpec {
  std::vector<std::string> columns;

  static SignalSpec prior_only() { return {}; }
  /// Parses "a+b+c"; "" and "prior" give the prior-only spec.
  static SignalSpec parse(const std::string& text);

  bool is_prior_only() const noexcept { return columns.empty(); }
  std::string name() const;
  SignalSpec with(const SignalSpec& other) const;

  bool operator==(const SignalSpec&) const = default;
};

/// Composed discrete signal value: one entry per spec column.
using SignalKey = std::vector<std::string>;

std::string to_string(const SignalKey& key);

/// Discrete value of a single column for a record, coarsened where needed.
/// Throws DataError when the column is absent, or continuous with no map.
std::string column_value(const EvaluationRecord& record, const std::string& column,
                         const CoarseningResult* coarsening);

SignalKey compose_signal(const EvaluationRecord& record, const SignalSpec& spec,
                         const CoarseningResult* coarsening = nullptr);

/// A dataset projected onto one signal: interned signal ids (first-appearance
/// order) and state indices, per record.
struct EncodedSignal {
  SignalSpec spec;
  std::vector<std::string> states;
  std::vector<SignalKey> keys;
  std::vector<std::size_t> signal_of;
  std::vector<std::size_t> state_of;

  std::size_t size() const noexcept { return signal_of.size(); }
};

EncodedSignal encode_signal(const EvaluationDataset& dataset, const SignalSpec& spec,
                            const std::vector<std::string>& states,
                            const CoarseningResult* coarsening = nullptr);

/// Discrete joint distribution over composed signals and states, estimated
/// from (possibly weighted) counts with optional Laplace smoothing.
class EmpiricalJoint {
 public:
  EmpiricalJoint(std::vector<std::string> states, std::vector<SignalKey> signals,
                 std::vector<std::vector<double>> counts, double alpha = 0.0);

  /// Counts every record of `encoded` (or the listed indices, repeats allowed).
  /// Only signals observed in the selection become rows.
  static EmpiricalJoint from_encoded(const EncodedSignal& encoded,
                                     std::optional<std::span<const std::size_t>> indices = std::nullopt,
                                     double alpha = 0.0);
  /// Counts with per-record multiplicities (bootstrap weights).
  static EmpiricalJoint from_weights(const EncodedSignal& encoded, std::span<const double> weights,
                                     double alpha = 0.0);

  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<SignalKey>& signals() const noexcept { return signals_; }
  std::size_t num_signals() const noexcept { return signals_.size(); }
  std::size_t num_states() const noexcept { return states_.size(); }
  double total() const noexcept { return total_; }
  double alpha() const noexcept { return alpha_; }
  double count(std::size_t v, std::size_t s) const { return counts_[v][s]; }

  double probability(std::size_t v, std::size_t s) const { return joint_[v][s]; }
  double signal_probability(std::size_t v) const { return marginal_[v]; }
  const Belief& prior() const noexcept { return prior_; }
  /// Posterior p(. | v); zero-mass rows report the prior.
  const Belief& posterior(std::size_t v) const { return posteriors_[v]; }

  std::optional<std::size_t> find(const SignalKey& key) const;
  /// Posterior for a signal, or the prior for signals never observed.
  const Belief& posterior_or_prior(const SignalKey& key) const;

 private:
  std::vector<std::string> states_;
  std::vector<SignalKey> signals_;
  std::map<SignalKey, std::size_t> index_;
  std::vector<std::vector<double>> counts_;
  double alpha_;
  double total_ = 0.0;
  std::vector<std::vector<double>> joint_;
  std::vector<double> marginal_;
  Belief prior_;
  std::vector<Belief> posteriors_;
};

/// Fits the joint of `spec` on the whole dataset or on `split`.
EmpiricalJoint fit_joint(const EvaluationDataset& dataset, const SignalSpec& spec,
                         const std::vector<std::string>& states, const CoarseningResult* coarsening = nullptr,
                         std::optional<std::span<const std::size_t>> split = std::nullopt, double alpha = 0.0);

}  // namespace voe
