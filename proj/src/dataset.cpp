#include "voe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "voe/errors.hpp"

namespace voe {
namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string label_from_json(const nlohmann::json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned() || v.is_boolean()) return v.dump();
  if (v.is_number_float()) return v.dump();
  throw DataError(field, "field '" + field + "' must be a string or number label");
}

nlohmann::json label_to_json(const std::string& label) {
  // Labels that are canonical JSON numbers round-trip as numbers.
  if (!label.empty() && (std::isdigit(static_cast<unsigned char>(label[0])) || label[0] == '-')) {
    const auto parsed = nlohmann::json::parse(label, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_number() && parsed.dump() == label) return parsed;
  }
  return label;
}

SignalValue value_from_json(const nlohmann::json& v, const std::string& field) {
  if (v.is_array()) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) throw DataError(field, "vector column '" + field + "' must contain numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  return label_from_json(v, field);
}

nlohmann::json value_to_json(const SignalValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return label_to_json(*s);
  return std::get<std::vector<double>>(v);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), idx);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return idx;
}

// Where one CSV header column lands in a record.
struct CsvColumn {
  enum class Kind { kId, kState, kPrediction, kHumanAction, kCondition, kArm, kFeature, kExplanation } kind;
  std::string name;
  std::optional<std::size_t> index;  // vector component, or discrete when empty
};

CsvColumn classify(const std::string& header) {
  using K = CsvColumn::Kind;
  if (header == "id") return {K::kId, header, {}};
  if (header == "state") return {K::kState, header, {}};
  if (header == "prediction") return {K::kPrediction, header, {}};
  if (header == "human_action") return {K::kHumanAction, header, {}};
  if (header == "condition") return {K::kCondition, header, {}};
  if (header == "arm") return {K::kArm, header, {}};
  std::string rest = header;
  K kind = K::kFeature;
  if (rest.rfind("z.", 0) == 0) {
    kind = K::kExplanation;
    rest = rest.substr(2);
  }
  const auto dot = rest.rfind('.');
  if (dot != std::string::npos) {
    if (auto idx = parse_index(std::string_view(rest).substr(dot + 1))) {
      return {kind, rest.substr(0, dot), idx};
    }
  }
  return {kind, rest, {}};
}

void check_vectors_consistent(const std::vector<EvaluationRecord>& records) {
  // name -> (is_vector, dim)
  std::map<std::string, std::pair<bool, std::size_t>> shapes;
  auto visit = [&](const std::map<std::string, SignalValue>& cols, const std::string& prefix) {
    for (const auto& [name, value] : cols) {
      const std::string key = prefix + name;
      const bool vec = !is_discrete(value);
      const std::size_t dim = vec ? std::get<std::vector<double>>(value).size() : 0;
      auto [it, inserted] = shapes.try_emplace(key, vec, dim);
      if (inserted) continue;
      if (it->second.first != vec) {
        throw DataError(key, "column '" + key + "' mixes vector and discrete values");
      }
      if (vec && it->second.second != dim) {
        throw DataError(key, "column '" + key + "' has inconsistent vector dimension");
      }
    }
  };
  for (const auto& r : records) {
    visit(r.features, "features.");
    visit(r.explanations, "explanations.");
  }
}

}  // namespace

std::string to_string(Condition c) {
  return c == Condition::kWithExplanation ? "with_explanation" : "without_explanation";
}

Condition condition_from_string(const std::string& text) {
  if (text == "with_explanation") return Condition::kWithExplanation;
  if (text == "without_explanation") return Condition::kWithoutExplanation;
  throw DataError("condition", "condition must be with_explanation or without_explanation, got '" + text + "'");
}

DatasetSchema DatasetSchema::for_task(const DecisionTask& task) {
  DatasetSchema schema;
  schema.states = task.states();
  schema.actions = task.actions();
  return schema;
}

EvaluationDataset::EvaluationDataset(std::vector<EvaluationRecord> records) : records_(std::move(records)) {
  check_vectors_consistent(records_);
}

void EvaluationDataset::validate(const DatasetSchema& schema) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    const std::string where = "record " + std::to_string(i + 1) + (r.id.empty() ? "" : " ('" + r.id + "')");
    if (schema.states &&
        std::find(schema.states->begin(), schema.states->end(), r.state) == schema.states->end()) {
      throw DataError("state", where + ": state '" + r.state + "' is not a task state");
    }
    if (schema.actions && r.human_action &&
        std::find(schema.actions->begin(), schema.actions->end(), *r.human_action) == schema.actions->end()) {
      throw DataError("human_action", where + ": human_action '" + *r.human_action + "' is not a task action");
    }
    for (const auto& f : schema.required_features) {
      if (!r.features.contains(f)) throw DataError("features." + f, where + ": missing column 'features." + f + "'");
    }
    for (const auto& z : schema.required_explanations) {
      if (!r.explanations.contains(z)) {
        throw DataError("explanations." + z, where + ": missing column 'explanations." + z + "'");
      }
    }
    if (schema.require_human_action && !r.human_action) {
      throw DataError("human_action", where + ": missing column 'human_action'");
    }
    if (schema.require_condition && !r.condition) {
      throw DataError("condition", where + ": missing column 'condition'");
    }
  }
}

std::vector<std::string> EvaluationDataset::feature_names() const {
  std::set<std::string> names;
  for (const auto& r : records_) {
    for (const auto& [k, v] : r.features) names.insert(k);
  }
  return {names.begin(), names.end()};
}

std::vector<std::string> EvaluationDataset::explanation_names() const {
  std::set<std::string> names;
  for (const auto& r : records_) {
    for (const auto& [k, v] : r.explanations) names.insert(k);
  }
  return {names.begin(), names.end()};
}

bool EvaluationDataset::all_have_human_action() const {
  return !records_.empty() &&
         std::all_of(records_.begin(), records_.end(), [](const auto& r) { return r.human_action.has_value(); });
}

bool EvaluationDataset::any_has_condition() const {
  return std::any_of(records_.begin(), records_.end(), [](const auto& r) { return r.condition.has_value(); });
}

EvaluationRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("record", "record must be a JSON object");
  EvaluationRecord r;
  if (j.contains("id") && !j["id"].is_null()) r.id = label_from_json(j["id"], "id");
  if (!j.contains("state") || j["state"].is_null()) throw DataError("state", "missing field 'state'");
  r.state = label_from_json(j["state"], "state");
  if (!j.contains("prediction") || j["prediction"].is_null()) throw DataError("prediction", "missing field 'prediction'");
  r.prediction = label_from_json(j["prediction"], "prediction");
  if (j.contains("human_action") && !j["human_action"].is_null()) {
    r.human_action = label_from_json(j["human_action"], "human_action");
  }
  if (j.contains("condition") && !j["condition"].is_null()) {
    if (!j["condition"].is_string()) throw DataError("condition", "field 'condition' must be a string");
    r.condition = condition_from_string(j["condition"].get<std::string>());
  }
  if (j.contains("arm") && !j["arm"].is_null()) r.arm = label_from_json(j["arm"], "arm");
  auto read_map = [&](const char* key, std::map<std::string, SignalValue>& into) {
    if (!j.contains(key) || j[key].is_null()) return;
    if (!j[key].is_object()) throw DataError(key, std::string("field '") + key + "' must be an object");
    for (const auto& [name, value] : j[key].items()) {
      if (value.is_null()) continue;
      into.emplace(name, value_from_json(value, std::string(key) + "." + name));
    }
  };
  read_map("features", r.features);
  read_map("explanations", r.explanations);
  return r;
}

nlohmann::json record_to_json(const EvaluationRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  if (!r.id.empty()) j["id"] = r.id;
  j["state"] = label_to_json(r.state);
  j["prediction"] = label_to_json(r.prediction);
  if (r.human_action) j["human_action"] = label_to_json(*r.human_action);
  if (r.condition) j["condition"] = to_string(*r.condition);
  if (r.arm) j["arm"] = *r.arm;
  if (!r.features.empty()) {
    auto& f = j["features"] = nlohmann::json::object();
    for (const auto& [k, v] : r.features) f[k] = value_to_json(v);
  }
  if (!r.explanations.empty()) {
    auto& e = j["explanations"] = nlohmann::json::object();
    for (const auto& [k, v] : r.explanations) e[k] = value_to_json(v);
  }
  return j;
}

void write_jsonl(std::ostream& out, const EvaluationDataset& dataset) {
  for (const auto& r : dataset) out << record_to_json(r).dump() << '\n';
}

EvaluationDataset parse_jsonl(std::istream& in, const DatasetSchema& schema) {
  std::vector<EvaluationRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("jsonl", line_prefix(lineno) + "invalid JSON");
    try {
      records.push_back(record_from_json(j));
    } catch (const DataError& e) {
      throw DataError(e.field(), line_prefix(lineno) + e.what());
    }
  }
  EvaluationDataset dataset(std::move(records));
  dataset.validate(schema);
  return dataset;
}

EvaluationDataset parse_csv(std::istream& in, const DatasetSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv", "empty CSV input");
  const auto headers = split_csv_line(line);
  std::vector<CsvColumn> columns;
  columns.reserve(headers.size());
  bool has_state = false;
  bool has_prediction = false;
  for (const auto& h : headers) {
    columns.push_back(classify(h));
    has_state |= columns.back().kind == CsvColumn::Kind::kState;
    has_prediction |= columns.back().kind == CsvColumn::Kind::kPrediction;
  }
  if (!has_state) throw DataError("state", "CSV header is missing column 'state'");
  if (!has_prediction) throw DataError("prediction", "CSV header is missing column 'prediction'");

  std::vector<EvaluationRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != columns.size()) {
      throw DataError("csv", line_prefix(lineno) + "expected " + std::to_string(columns.size()) + " cells, got " +
                                 std::to_string(cells.size()));
    }
    EvaluationRecord r;
    // name -> component index -> value
    std::map<std::string, std::map<std::size_t, double>> fvec;
    std::map<std::string, std::map<std::size_t, double>> zvec;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& col = columns[c];
      const auto& cell = cells[c];
      if (cell.empty()) continue;
      using K = CsvColumn::Kind;
      switch (col.kind) {
        case K::kId: r.id = cell; break;
        case K::kState: r.state = cell; break;
        case K::kPrediction: r.prediction = cell; break;
        case K::kHumanAction: r.human_action = cell; break;
        case K::kCondition:
          try {
            r.condition = condition_from_string(cell);
          } catch (const DataError& e) {
            throw DataError("condition", line_prefix(lineno) + e.what());
          }
          break;
        case K::kArm: r.arm = cell; break;
        case K::kFeature:
        case K::kExplanation: {
          auto& target = col.kind == K::kFeature ? r.features : r.explanations;
          if (!col.index) {
            target[col.name] = cell;
            break;
          }
          double x = 0.0;
          const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
          if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            throw DataError(headers[c], line_prefix(lineno) + "non-numeric value in column '" + headers[c] + "'");
          }
          (col.kind == K::kFeature ? fvec : zvec)[col.name][*col.index] = x;
          break;
        }
      }
    }
    if (r.state.empty()) throw DataError("state", line_prefix(lineno) + "missing field 'state'");
    if (r.prediction.empty()) throw DataError("prediction", line_prefix(lineno) + "missing field 'prediction'");
    auto assemble = [&](auto& parts, auto& target, const std::string& prefix) {
      for (auto& [name, comps] : parts) {
        std::vector<double> v;
        v.reserve(comps.size());
        std::size_t expect = 0;
        for (const auto& [idx, x] : comps) {
          if (idx != expect++) {
            throw DataError(prefix + name, line_prefix(lineno) + "vector column '" + name + "' has a gap");
          }
          v.push_back(x);
        }
        target[name] = std::move(v);
      }
    };
    assemble(fvec, r.features, "features.");
    assemble(zvec, r.explanations, "explanations.");
    records.push_back(std::move(r));
  }
  EvaluationDataset dataset(std::move(records));
  dataset.validate(schema);
  return dataset;
}

EvaluationDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("dataset", "cannot open dataset '" + path.string() + "'");
  DatasetFormat format = schema.format;
  if (format == DatasetFormat::kAuto) {
    format = path.extension() == ".csv" ? DatasetFormat::kCsv : DatasetFormat::kJsonl;
  }
  return format == DatasetFormat::kCsv ? parse_csv(in, schema) : parse_jsonl(in, schema);
}

}  // namespace voe
