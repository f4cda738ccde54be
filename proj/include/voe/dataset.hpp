#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "voe/decision.hpp"

namespace voe {

/// A column value: either a raw numeric vector or an already-discrete id.
using SignalValue = std::variant<std::vector<double>, std::string>;

inline bool is_discrete(const SignalValue& v) { return std::holds_alternative<std::string>(v); }

enum class Condition { kWithExplanation, kWithoutExplanation };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& text);

struct EvaluationRecord {
  std::string id;
  std::string state;
  std::string prediction;
  std::map<std::string, SignalValue> features;
  std::map<std::string, SignalValue> explanations;
  std::optional<std::string> human_action;
  std::optional<Condition> condition;
  /// Names the explanation arm of a with_explanation record when a study ran several.
  std::optional<std::string> arm;
};

enum class DatasetFormat { kAuto, kJsonl, kCsv };

/// Format descriptor plus the columns a caller needs to be present.
struct DatasetSchema {
  DatasetFormat format = DatasetFormat::kAuto;
  std::vector<std::string> required_features;
  std::vector<std::string> required_explanations;
  bool require_human_action = false;
  bool require_condition = false;
  /// When set, every state label must belong to this list.
  std::optional<std::vector<std::string>> states;
  /// When set, every human_action must belong to this list.
  std::optional<std::vector<std::string>> actions;

  static DatasetSchema for_task(const DecisionTask& task);
};

class EvaluationDataset {
 public:
  EvaluationDataset() = default;
  /// Validates that each named vector column keeps one dimension and one kind
  /// (vector or discrete) across records.
  explicit EvaluationDataset(std::vector<EvaluationRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const EvaluationRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<EvaluationRecord>& records() const noexcept { return records_; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  /// Checks schema requirements; throws DataError naming the field.
  void validate(const DatasetSchema& schema) const;

  std::vector<std::string> feature_names() const;
  std::vector<std::string> explanation_names() const;
  bool all_have_human_action() const;
  bool any_has_condition() const;

 private:
  std::vector<EvaluationRecord> records_;
};

EvaluationDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema = {});
EvaluationDataset parse_jsonl(std::istream& in, const DatasetSchema& schema = {});
EvaluationDataset parse_csv(std::istream& in, const DatasetSchema& schema = {});

nlohmann::json record_to_json(const EvaluationRecord& r);
EvaluationRecord record_from_json(const nlohmann::json& j);
/// One compact JSON object per line, keys in fixed order.
void write_jsonl(std::ostream& out, const EvaluationDataset& dataset);

}  // namespace voe
