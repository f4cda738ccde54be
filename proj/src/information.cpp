#include "voe/information.hpp"

#include <algorithm>

#include "voe/coarsening.hpp"
#include "voe/errors.hpp"

namespace voe {
namespace {

std::vector<std::string> split_plus(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('+', start);
    auto part = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!part.empty()) out.push_back(std::move(part));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

const SignalValue* lookup(const std::map<std::string, SignalValue>& m, const std::string& name) {
  const auto it = m.find(name);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

SignalSpec SignalSpec::parse(const std::string& text) {
  if (text.empty() || text == "prior") return prior_only();
  return SignalSpec{split_plus(text)};
}

std::string SignalSpec::name() const {
  if (columns.empty()) return "prior";
  std::string out;
  for (const auto& c : columns) {
    if (!out.empty()) out += '+';
    out += c;
  }
  return out;
}

SignalSpec SignalSpec::with(const SignalSpec& other) const {
  SignalSpec out = *this;
  for (const auto& c : other.columns) {
    if (std::find(out.columns.begin(), out.columns.end(), c) == out.columns.end()) out.columns.push_back(c);
  }
  return out;
}

std::string to_string(const SignalKey& key) {
  if (key.empty()) return "()";
  std::string out = "(";
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ',';
    out += key[i];
  }
  return out + ")";
}

std::string column_value(const EvaluationRecord& record, const std::string& column,
                         const CoarseningResult* coarsening) {
  if (column == "prediction") return record.prediction;
  if (column == "human_action") {
    if (!record.human_action) throw DataError("human_action", "record '" + record.id + "' has no human_action");
    return *record.human_action;
  }
  const SignalValue* value = nullptr;
  if (column.rfind("features.", 0) == 0) {
    value = lookup(record.features, column.substr(9));
  } else if (column.rfind("explanations.", 0) == 0) {
    value = lookup(record.explanations, column.substr(13));
  } else {
    throw DataError(column, "unknown signal column '" + column + "'");
  }
  if (value == nullptr) throw DataError(column, "record '" + record.id + "' is missing column '" + column + "'");
  if (coarsening != nullptr && coarsening->covers(column)) return coarsening->coarsen_column(record, column);
  if (const auto* s = std::get_if<std::string>(value)) return *s;
  throw DataError(column, "continuous column '" + column + "' has no coarsening map");
}

SignalKey compose_signal(const EvaluationRecord& record, const SignalSpec& spec, const CoarseningResult* coarsening) {
  SignalKey key;
  key.reserve(spec.columns.size());
  for (const auto& c : spec.columns) key.push_back(column_value(record, c, coarsening));
  return key;
}

EncodedSignal encode_signal(const EvaluationDataset& dataset, const SignalSpec& spec,
                            const std::vector<std::string>& states, const CoarseningResult* coarsening) {
  EncodedSignal enc;
  enc.spec = spec;
  enc.states = states;
  enc.signal_of.reserve(dataset.size());
  enc.state_of.reserve(dataset.size());
  std::map<SignalKey, std::size_t> interned;
  std::map<std::string, std::size_t> state_ids;
  for (std::size_t s = 0; s < states.size(); ++s) state_ids.emplace(states[s], s);
  for (const auto& r : dataset) {
    const auto sit = state_ids.find(r.state);
    if (sit == state_ids.end()) throw DataError("state", "state '" + r.state + "' is not a task state");
    auto key = compose_signal(r, spec, coarsening);
    auto [it, inserted] = interned.try_emplace(key, enc.keys.size());
    if (inserted) enc.keys.push_back(std::move(key));
    enc.signal_of.push_back(it->second);
    enc.state_of.push_back(sit->second);
  }
  return enc;
}

EmpiricalJoint::EmpiricalJoint(std::vector<std::string> states, std::vector<SignalKey> signals,
                               std::vector<std::vector<double>> counts, double alpha)
    : states_(std::move(states)),
      signals_(std::move(signals)),
      counts_(std::move(counts)),
      alpha_(alpha),
      prior_(Belief::uniform(states_.empty() ? 1 : states_.size())) {
  if (states_.empty()) throw DataError("states", "joint needs at least one state");
  if (!(alpha_ >= 0.0)) throw ConfigError("smoothing constant must be non-negative");
  if (counts_.size() != signals_.size()) throw DataError("counts", "one count row per signal required");
  const std::size_t n_states = states_.size();
  std::vector<double> state_totals(n_states, 0.0);
  std::vector<double> row_totals(signals_.size(), 0.0);
  for (std::size_t v = 0; v < signals_.size(); ++v) {
    if (counts_[v].size() != n_states) throw DataError("counts", "count row width must equal the number of states");
    if (!index_.emplace(signals_[v], v).second) throw DataError("signals", "duplicate signal " + to_string(signals_[v]));
    for (std::size_t s = 0; s < n_states; ++s) {
      const double c = counts_[v][s];
      if (!(c >= 0.0)) throw DataError("counts", "counts must be non-negative");
      state_totals[s] += c;
      row_totals[v] += c;
      total_ += c;
    }
  }
  const double n_cells = static_cast<double>(signals_.size() * n_states);
  const double denom = total_ + alpha_ * n_cells;
  if (!(denom > 0.0)) throw DataError("counts", "joint has zero total mass");

  joint_.assign(signals_.size(), std::vector<double>(n_states, 0.0));
  marginal_.assign(signals_.size(), 0.0);
  for (std::size_t v = 0; v < signals_.size(); ++v) {
    for (std::size_t s = 0; s < n_states; ++s) joint_[v][s] = (counts_[v][s] + alpha_) / denom;
    marginal_[v] = (row_totals[v] + alpha_ * static_cast<double>(n_states)) / denom;
  }
  std::vector<double> prior(n_states);
  const double per_state_smoothing = alpha_ * static_cast<double>(signals_.size());
  for (std::size_t s = 0; s < n_states; ++s) prior[s] = (state_totals[s] + per_state_smoothing) / denom;
  prior_ = Belief::from_probs(std::move(prior));

  posteriors_.reserve(signals_.size());
  for (std::size_t v = 0; v < signals_.size(); ++v) {
    const double row = row_totals[v] + alpha_ * static_cast<double>(n_states);
    if (!(row > 0.0)) {
      posteriors_.push_back(prior_);
      continue;
    }
    std::vector<double> post(n_states);
    for (std::size_t s = 0; s < n_states; ++s) post[s] = (counts_[v][s] + alpha_) / row;
    posteriors_.push_back(Belief::from_probs(std::move(post)));
  }
}

EmpiricalJoint EmpiricalJoint::from_encoded(const EncodedSignal& encoded,
                                            std::optional<std::span<const std::size_t>> indices, double alpha) {
  const std::size_t n_states = encoded.states.size();
  std::vector<std::vector<double>> full(encoded.keys.size(), std::vector<double>(n_states, 0.0));
  std::vector<bool> seen(encoded.keys.size(), false);
  // Rows are emitted in order of first appearance within the selection.
  std::vector<std::size_t> order;
  auto visit = [&](std::size_t i) {
    if (i >= encoded.size()) throw DataError("split", "split index out of range");
    const auto v = encoded.signal_of[i];
    full[v][encoded.state_of[i]] += 1.0;
    if (!seen[v]) {
      seen[v] = true;
      order.push_back(v);
    }
  };
  if (indices) {
    if (indices->empty()) throw DataError("split", "cannot fit a joint on an empty split");
    for (auto i : *indices) visit(i);
  } else {
    if (encoded.size() == 0) throw DataError("dataset", "cannot fit a joint on an empty dataset");
    for (std::size_t i = 0; i < encoded.size(); ++i) visit(i);
  }
  std::vector<SignalKey> keys;
  std::vector<std::vector<double>> counts;
  keys.reserve(order.size());
  counts.reserve(order.size());
  for (auto v : order) {
    keys.push_back(encoded.keys[v]);
    counts.push_back(std::move(full[v]));
  }
  return EmpiricalJoint(encoded.states, std::move(keys), std::move(counts), alpha);
}

EmpiricalJoint EmpiricalJoint::from_weights(const EncodedSignal& encoded, std::span<const double> weights,
                                            double alpha) {
  if (weights.size() != encoded.size()) throw DataError("weights", "one weight per record required");
  const std::size_t n_states = encoded.states.size();
  std::vector<std::vector<double>> full(encoded.keys.size(), std::vector<double>(n_states, 0.0));
  std::vector<bool> seen(encoded.keys.size(), false);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const auto v = encoded.signal_of[i];
    full[v][encoded.state_of[i]] += weights[i];
    if (!seen[v]) {
      seen[v] = true;
      order.push_back(v);
    }
  }
  if (order.empty()) throw DataError("weights", "all weights are zero");
  std::vector<SignalKey> keys;
  std::vector<std::vector<double>> counts;
  for (auto v : order) {
    keys.push_back(encoded.keys[v]);
    counts.push_back(std::move(full[v]));
  }
  return EmpiricalJoint(encoded.states, std::move(keys), std::move(counts), alpha);
}

std::optional<std::size_t> EmpiricalJoint::find(const SignalKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Belief& EmpiricalJoint::posterior_or_prior(const SignalKey& key) const {
  const auto v = find(key);
  return v ? posteriors_[*v] : prior_;
}

EmpiricalJoint fit_joint(const EvaluationDataset& dataset, const SignalSpec& spec,
                         const std::vector<std::string>& states, const CoarseningResult* coarsening,
                         std::optional<std::span<const std::size_t>> split, double alpha) {
  if (dataset.empty()) throw DataError("dataset", "cannot fit a joint on an empty dataset");
  const auto encoded = encode_signal(dataset, spec, states, coarsening);
  return EmpiricalJoint::from_encoded(encoded, split, alpha);
}

}  // namespace voe
