#include "voe/coarsening.hpp"

#include <algorithm>
#include <set>

#include "voe/benchmarks.hpp"
#include "voe/errors.hpp"
#include "voe/information.hpp"
#include "voe/random.hpp"

namespace voe {
namespace {

constexpr std::uint64_t kExplanationStream = 1;
constexpr std::uint64_t kFeatureStream = 2;

const SignalValue& require_column(const EvaluationRecord& r, const std::map<std::string, SignalValue>& cols,
                                  const std::string& prefix, const std::string& name) {
  const auto it = cols.find(name);
  if (it == cols.end()) {
    throw DataError(prefix + name, "record '" + r.id + "' is missing column '" + prefix + name + "'");
  }
  return it->second;
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> grid) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

ExplanationClustering fit_explanation(const EvaluationDataset& dataset, const std::string& method, std::size_t k,
                                      std::uint64_t seed, const KMeansOptions& options) {
  ExplanationClustering out;
  out.method = method;
  out.discrete = is_discrete(require_column(dataset[0], dataset[0].explanations, "explanations.", method));
  if (out.discrete) return out;
  std::vector<const std::vector<double>*> points;
  points.reserve(dataset.size());
  for (const auto& r : dataset) {
    points.push_back(&std::get<std::vector<double>>(require_column(r, r.explanations, "explanations.", method)));
  }
  out.model = kmeans(points, k, seed, options).model;
  return out;
}

std::string explanation_id(const ExplanationClustering& c, const EvaluationRecord& r) {
  const auto& v = require_column(r, r.explanations, "explanations.", c.method);
  if (c.discrete) {
    if (!is_discrete(v)) throw DataError("explanations." + c.method, "expected a discrete explanation id");
    return std::get<std::string>(v);
  }
  if (is_discrete(v)) throw DataError("explanations." + c.method, "expected an explanation vector");
  return std::to_string(c.model.assign(std::get<std::vector<double>>(v)));
}

// Cells in order of first appearance plus each record's cell.
struct CellLayout {
  std::vector<Cell> cells;
  std::map<Cell, std::size_t> index;
  std::vector<std::size_t> cell_of;
  std::vector<std::vector<std::size_t>> members;
};

CellLayout layout_cells(const EvaluationDataset& dataset, const std::vector<ExplanationClustering>& zs) {
  CellLayout layout;
  layout.cell_of.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    Cell cell;
    for (const auto& z : zs) cell.z.push_back(explanation_id(z, dataset[i]));
    cell.prediction = dataset[i].prediction;
    auto [it, inserted] = layout.index.try_emplace(cell, layout.cells.size());
    if (inserted) {
      layout.cells.push_back(std::move(cell));
      layout.members.emplace_back();
    }
    layout.cell_of.push_back(it->second);
    layout.members[it->second].push_back(i);
  }
  return layout;
}

// Clusters one feature column inside every cell; returns models and per-record labels.
std::pair<std::vector<CellClustering>, std::vector<std::string>> cluster_feature(
    const EvaluationDataset& dataset, const CellLayout& layout, const std::string& feature, std::size_t per_cell_k,
    std::uint64_t seed, const KMeansOptions& options) {
  std::vector<CellClustering> models(layout.cells.size());
  std::vector<std::string> labels(dataset.size());
  for (std::size_t c = 0; c < layout.cells.size(); ++c) {
    const auto& members = layout.members[c];
    const auto& first = require_column(dataset[members[0]], dataset[members[0]].features, "features.", feature);
    models[c].discrete = is_discrete(first);
    const std::string prefix = std::to_string(c) + ".";
    if (models[c].discrete) {
      for (auto i : members) {
        labels[i] = prefix + std::get<std::string>(require_column(dataset[i], dataset[i].features, "features.", feature));
      }
      continue;
    }
    std::vector<const std::vector<double>*> points;
    points.reserve(members.size());
    for (auto i : members) {
      points.push_back(&std::get<std::vector<double>>(require_column(dataset[i], dataset[i].features, "features.", feature)));
    }
    auto fit = kmeans(points, per_cell_k, derive_seed(seed, c), options);
    for (std::size_t j = 0; j < members.size(); ++j) labels[members[j]] = prefix + std::to_string(fit.labels[j]);
    models[c].model = std::move(fit.model);
  }
  return {std::move(models), std::move(labels)};
}

std::uint64_t feature_seed(std::uint64_t master, std::size_t feature_slot, std::size_t k_z, std::size_t k_x) {
  const std::uint64_t stream = derive_seed(master, kFeatureStream + feature_slot * 16);
  return derive_seed(derive_seed(stream, k_z), k_x);
}

std::uint64_t explanation_seed(std::uint64_t master, std::size_t method, std::size_t k_z) {
  return derive_seed(derive_seed(derive_seed(master, kExplanationStream), method), k_z);
}

nlohmann::json model_to_json(const KMeansModel& m) { return m.centroids; }

KMeansModel model_from_json(const nlohmann::json& j) {
  KMeansModel m;
  m.centroids = j.get<std::vector<std::vector<double>>>();
  return m;
}

}  // namespace

void CoarseningConfig::validate() const {
  if (k_z_grid.empty() || k_x_grid.empty()) throw ConfigError("cluster-count grids must be non-empty");
  for (auto k : k_z_grid) {
    if (k == 0) throw ConfigError("k_z_grid entries must be at least 1");
  }
  for (auto k : k_x_grid) {
    if (k == 0) throw ConfigError("k_x_grid entries must be at least 1");
  }
  if (!(delta >= 0.0)) throw ConfigError("delta must be non-negative");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split_fraction must lie in (0, 1)");
  if (cluster.max_iterations == 0) throw ConfigError("cluster max_iterations must be at least 1");
  if (feature_column.empty()) throw ConfigError("feature_column must be named");
}

nlohmann::json CoarseningConfig::to_json() const {
  return {{"k_z_grid", k_z_grid},
          {"k_x_grid", k_x_grid},
          {"delta", delta},
          {"split_fraction", split_fraction},
          {"seed", seed},
          {"max_iterations", cluster.max_iterations},
          {"restarts", cluster.restarts},
          {"feature_column", feature_column},
          {"explanation_methods", explanation_methods},
          {"extra_feature_columns", extra_feature_columns}};
}

CoarseningConfig CoarseningConfig::from_json(const nlohmann::json& j) {
  CoarseningConfig c;
  if (!j.is_object()) throw ConfigError("coarsening config must be a JSON object");
  try {
    if (j.contains("k_z_grid")) c.k_z_grid = j["k_z_grid"].get<std::vector<std::size_t>>();
    if (j.contains("k_x_grid")) c.k_x_grid = j["k_x_grid"].get<std::vector<std::size_t>>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("split_fraction")) c.split_fraction = j["split_fraction"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("max_iterations")) c.cluster.max_iterations = j["max_iterations"].get<std::size_t>();
    if (j.contains("restarts")) c.cluster.restarts = j["restarts"].get<std::size_t>();
    if (j.contains("feature_column")) c.feature_column = j["feature_column"].get<std::string>();
    if (j.contains("explanation_methods")) c.explanation_methods = j["explanation_methods"].get<std::vector<std::string>>();
    if (j.contains("extra_feature_columns")) {
      c.extra_feature_columns = j["extra_feature_columns"].get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad coarsening config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::size_t> stratified_split(const EvaluationDataset& dataset, double train_fraction, std::uint64_t seed) {
  if (dataset.size() < 2) throw DataError("dataset", "splitting needs at least 2 records");
  std::map<std::string, std::vector<std::size_t>> by_state;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_state[dataset[i].state].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (auto& [state, idx] : by_state) {
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    const auto n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(idx.size()) + 0.5);
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  if (train.empty()) {
    train.push_back(test.back());
    test.pop_back();
  } else if (test.empty()) {
    train.pop_back();
  }
  std::sort(train.begin(), train.end());
  return train;
}

std::vector<SignalValue> multi_explanation_compose(const EvaluationDataset& dataset,
                                                   const std::vector<std::string>& methods) {
  if (methods.empty()) throw ConfigError("no explanation methods to compose");
  std::vector<SignalValue> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset) {
    std::optional<bool> discrete;
    std::vector<double> vec;
    std::string id;
    for (const auto& m : methods) {
      const auto& v = require_column(r, r.explanations, "explanations.", m);
      if (discrete && *discrete != is_discrete(v)) {
        throw DataError("explanations." + m, "cannot compose discrete and continuous explanations");
      }
      discrete = is_discrete(v);
      if (*discrete) {
        if (!id.empty()) id += '|';
        id += std::get<std::string>(v);
      } else {
        const auto& x = std::get<std::vector<double>>(v);
        vec.insert(vec.end(), x.begin(), x.end());
      }
    }
    if (*discrete) {
      out.emplace_back(std::move(id));
    } else {
      out.emplace_back(std::move(vec));
    }
  }
  return out;
}

bool CoarseningResult::covers(const std::string& column) const {
  if (column.rfind("features.", 0) == 0) return features.contains(column.substr(9));
  if (column.rfind("explanations.", 0) == 0) {
    const auto name = column.substr(13);
    return std::any_of(explanations.begin(), explanations.end(), [&](const auto& e) { return e.method == name; });
  }
  return false;
}

std::string CoarseningResult::coarsen_column(const EvaluationRecord& record, const std::string& column) const {
  if (column.rfind("features.", 0) == 0) return x_id(record, column.substr(9));
  if (column.rfind("explanations.", 0) == 0) {
    const auto name = column.substr(13);
    for (const auto& e : explanations) {
      if (e.method == name) return explanation_id(e, record);
    }
  }
  throw DataError(column, "coarsening has no map for column '" + column + "'");
}

std::vector<std::string> CoarseningResult::z_ids(const EvaluationRecord& record) const {
  std::vector<std::string> out;
  out.reserve(explanations.size());
  for (const auto& e : explanations) out.push_back(explanation_id(e, record));
  return out;
}

std::size_t CoarseningResult::cell_of(const EvaluationRecord& record) const {
  Cell cell{z_ids(record), record.prediction};
  const auto it = cell_index_.find(cell);
  if (it == cell_index_.end()) {
    std::string z;
    for (const auto& id : cell.z) z += (z.empty() ? "" : ",") + id;
    throw DataError("cell", "record '" + record.id + "' falls in cell (z=" + z + ", prediction=" + record.prediction +
                                ") that the coarsening never saw");
  }
  return it->second;
}

std::string CoarseningResult::x_id(const EvaluationRecord& record, const std::string& feature) const {
  const auto fit = features.find(feature);
  if (fit == features.end()) throw DataError("features." + feature, "coarsening has no map for feature '" + feature + "'");
  const std::size_t cell = cell_of(record);
  const auto& clustering = fit->second.at(cell);
  const auto& value = require_column(record, record.features, "features.", feature);
  const std::string prefix = std::to_string(cell) + ".";
  if (clustering.discrete) {
    if (!is_discrete(value)) throw DataError("features." + feature, "expected a discrete feature id");
    return prefix + std::get<std::string>(value);
  }
  if (is_discrete(value)) throw DataError("features." + feature, "expected a feature vector");
  return prefix + std::to_string(clustering.model.assign(std::get<std::vector<double>>(value)));
}

Assignment apply(const CoarseningResult& coarsening, const EvaluationRecord& record) {
  return {coarsening.z_ids(record), coarsening.x_id(record, coarsening.config.feature_column)};
}

void CoarseningResult::rebuild_index() {
  cell_index_.clear();
  for (std::size_t c = 0; c < cells.size(); ++c) cell_index_.emplace(cells[c], c);
}

std::optional<CoarseningResult> run_alg1(const EvaluationDataset& dataset, const DecisionTask& task,
                                         const CoarseningConfig& config) {
  config.validate();
  if (dataset.size() < 2) throw DataError("dataset", "coarsening needs at least 2 records");
  const auto methods = config.explanation_methods.empty() ? dataset.explanation_names() : config.explanation_methods;
  DatasetSchema schema = DatasetSchema::for_task(task);
  schema.required_features.push_back(config.feature_column);
  for (const auto& f : config.extra_feature_columns) schema.required_features.push_back(f);
  schema.required_explanations = methods;
  dataset.validate(schema);

  std::set<std::string> prediction_set;
  for (const auto& r : dataset) prediction_set.insert(r.prediction);
  const std::vector<std::string> predictions(prediction_set.begin(), prediction_set.end());
  const std::size_t n_predictions = predictions.size();

  const auto train = stratified_split(dataset, config.split_fraction, derive_seed(config.seed, 0));
  std::vector<std::size_t> test;
  {
    std::size_t t = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (t < train.size() && train[t] == i) {
        ++t;
      } else {
        test.push_back(i);
      }
    }
  }

  EncodedSignal encoded;
  encoded.states = task.states();
  encoded.state_of.reserve(dataset.size());
  for (const auto& r : dataset) encoded.state_of.push_back(task.state_index(r.state));

  auto evaluate = [&](const std::vector<std::string>& labels) {
    std::map<std::string, std::size_t> interned;
    encoded.keys.clear();
    encoded.signal_of.clear();
    for (const auto& l : labels) {
      auto [it, inserted] = interned.try_emplace(l, encoded.keys.size());
      if (inserted) encoded.keys.push_back({l});
      encoded.signal_of.push_back(it->second);
    }
    const auto fitted = EmpiricalJoint::from_encoded(encoded, std::span<const std::size_t>(train));
    GridPoint p;
    p.r_all = held_out_value(fitted, EmpiricalJoint::from_encoded(encoded), task);
    p.r_train = held_out_value(fitted, fitted, task);
    p.r_test = held_out_value(fitted, EmpiricalJoint::from_encoded(encoded, std::span<const std::size_t>(test)), task);
    p.feasible = p.r_train - p.r_test < config.delta;
    return p;
  };

  std::vector<GridPoint> diagnostics;
  std::optional<std::size_t> best;
  for (const auto k_z : sorted_unique(config.k_z_grid)) {
    std::vector<ExplanationClustering> zs;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      zs.push_back(fit_explanation(dataset, methods[m], k_z, explanation_seed(config.seed, m, k_z), config.cluster));
    }
    const auto layout = layout_cells(dataset, zs);
    for (const auto k_x : sorted_unique(config.k_x_grid)) {
      if (k_x % (n_predictions * k_z) != 0) continue;
      const std::size_t per_cell = k_x / (k_z * n_predictions);
      const auto [models, labels] = cluster_feature(dataset, layout, config.feature_column, per_cell,
                                                    feature_seed(config.seed, 0, k_z, k_x), config.cluster);
      GridPoint p = evaluate(labels);
      p.k_z = k_z;
      p.k_x = k_x;
      if (p.feasible && (!best || p.r_all > diagnostics[*best].r_all)) best = diagnostics.size();
      diagnostics.push_back(p);
    }
  }
  if (!best) return std::nullopt;

  const GridPoint chosen = diagnostics[*best];
  CoarseningResult result;
  result.config = config;
  result.config.explanation_methods = methods;
  result.k_z_star = chosen.k_z;
  result.k_x_star = chosen.k_x;
  result.r_star = chosen.r_all;
  result.r_train_star = chosen.r_train;
  result.r_test_star = chosen.r_test;
  result.prediction_labels = predictions;
  result.train_indices = train;
  result.diagnostics = std::move(diagnostics);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    result.explanations.push_back(
        fit_explanation(dataset, methods[m], chosen.k_z, explanation_seed(config.seed, m, chosen.k_z), config.cluster));
  }
  const auto layout = layout_cells(dataset, result.explanations);
  result.cells = layout.cells;
  const std::size_t per_cell = chosen.k_x / (chosen.k_z * n_predictions);
  result.features[config.feature_column] =
      cluster_feature(dataset, layout, config.feature_column, per_cell,
                      feature_seed(config.seed, 0, chosen.k_z, chosen.k_x), config.cluster)
          .first;
  for (std::size_t f = 0; f < config.extra_feature_columns.size(); ++f) {
    const auto& name = config.extra_feature_columns[f];
    if (name == config.feature_column) continue;
    result.features[name] = cluster_feature(dataset, layout, name, per_cell,
                                            feature_seed(config.seed, f + 1, chosen.k_z, chosen.k_x), config.cluster)
                                .first;
  }
  result.rebuild_index();
  return result;
}

nlohmann::json CoarseningResult::to_json() const {
  nlohmann::json z = nlohmann::json::array();
  for (const auto& e : explanations) {
    z.push_back({{"method", e.method}, {"discrete", e.discrete}, {"centroids", model_to_json(e.model)}});
  }
  nlohmann::json cell_list = nlohmann::json::array();
  for (const auto& c : cells) cell_list.push_back({{"z", c.z}, {"prediction", c.prediction}});
  nlohmann::json feats = nlohmann::json::object();
  for (const auto& [name, per_cell] : features) {
    auto& arr = feats[name] = nlohmann::json::array();
    for (const auto& c : per_cell) arr.push_back({{"discrete", c.discrete}, {"centroids", model_to_json(c.model)}});
  }
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& p : diagnostics) {
    diag.push_back({{"k_z", p.k_z},
                    {"k_x", p.k_x},
                    {"r_all", p.r_all},
                    {"r_train", p.r_train},
                    {"r_test", p.r_test},
                    {"feasible", p.feasible}});
  }
  return {{"config", config.to_json()},
          {"k_z_star", k_z_star},
          {"k_x_star", k_x_star},
          {"r_star", r_star},
          {"r_train_star", r_train_star},
          {"r_test_star", r_test_star},
          {"prediction_labels", prediction_labels},
          {"train_indices", train_indices},
          {"explanations", std::move(z)},
          {"cells", std::move(cell_list)},
          {"features", std::move(feats)},
          {"diagnostics", std::move(diag)},
          {"dataset_sha256", dataset_sha256}};
}

CoarseningResult CoarseningResult::from_json(const nlohmann::json& j) {
  CoarseningResult r;
  try {
    r.config = CoarseningConfig::from_json(j.at("config"));
    r.k_z_star = j.at("k_z_star").get<std::size_t>();
    r.k_x_star = j.at("k_x_star").get<std::size_t>();
    r.r_star = j.at("r_star").get<double>();
    r.r_train_star = j.at("r_train_star").get<double>();
    r.r_test_star = j.at("r_test_star").get<double>();
    r.prediction_labels = j.at("prediction_labels").get<std::vector<std::string>>();
    r.train_indices = j.at("train_indices").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("explanations")) {
      r.explanations.push_back(
          {e.at("method").get<std::string>(), e.at("discrete").get<bool>(), model_from_json(e.at("centroids"))});
    }
    for (const auto& c : j.at("cells")) {
      r.cells.push_back({c.at("z").get<std::vector<std::string>>(), c.at("prediction").get<std::string>()});
    }
    for (const auto& [name, arr] : j.at("features").items()) {
      auto& per_cell = r.features[name];
      for (const auto& c : arr) per_cell.push_back({c.at("discrete").get<bool>(), model_from_json(c.at("centroids"))});
      if (per_cell.size() != r.cells.size()) throw ConfigError("feature '" + name + "' needs one clustering per cell");
    }
    for (const auto& p : j.at("diagnostics")) {
      r.diagnostics.push_back({p.at("k_z").get<std::size_t>(), p.at("k_x").get<std::size_t>(),
                               p.at("r_all").get<double>(), p.at("r_train").get<double>(),
                               p.at("r_test").get<double>(), p.at("feasible").get<bool>()});
    }
    if (j.contains("dataset_sha256")) r.dataset_sha256 = j["dataset_sha256"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed coarsening artifact: ") + e.what());
  }
  r.rebuild_index();
  return r;
}

}  // namespace voe
