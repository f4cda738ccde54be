#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voe/dataset.hpp"
#include "voe/decision.hpp"
#include "voe/kmeans.hpp"

namespace voe {

struct CoarseningConfig {
  std::vector<std::size_t> k_z_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<std::size_t> k_x_grid = {50,  60,  70,  80,  90,  100, 110, 120, 130, 140, 150, 160,
                                       170, 180, 190, 200, 210, 220, 230, 240, 250, 260, 270, 280,
                                       290, 300, 310, 320, 330, 340, 350, 360, 370, 380, 390, 400,
                                       410, 420, 430, 440, 450, 460, 470, 480, 490, 500};
  double delta = 1e-2;
  double split_fraction = 0.5;
  std::uint64_t seed = 0;
  KMeansOptions cluster;
  /// Feature column searched over (the X of the benchmark).
  std::string feature_column = "x";
  /// Explanation methods forming Z; empty means every explanation in the dataset.
  std::vector<std::string> explanation_methods;
  /// Further feature columns clustered inside the same cells at the selected point (e.g. x_ai).
  std::vector<std::string> extra_feature_columns;

  /// Throws ConfigError when a grid is empty or has a zero entry, delta is negative
  /// or split_fraction is outside (0, 1).
  void validate() const;
  nlohmann::json to_json() const;
  static CoarseningConfig from_json(const nlohmann::json& j);
};

/// Evaluation of one (K_z, K_x) grid point.
struct GridPoint {
  std::size_t k_z = 0;
  std::size_t k_x = 0;
  double r_all = 0.0;
  double r_train = 0.0;
  double r_test = 0.0;
  bool feasible = false;
};

/// Clustering of one explanation method (identity for discrete methods).
struct ExplanationClustering {
  std::string method;
  bool discrete = false;
  KMeansModel model;
};

/// A (z-cluster tuple, prediction) cell of the nested construction.
struct Cell {
  std::vector<std::string> z;
  std::string prediction;

  auto operator<=>(const Cell&) const = default;
};

/// Clustering of one feature column inside one cell.
struct CellClustering {
  bool discrete = false;
  KMeansModel model;
};

/// Output of the coarsening search: explanation maps C_Z, nested feature
/// maps C_X, selected counts and per-grid-point diagnostics.
class CoarseningResult {
 public:
  CoarseningConfig config;
  std::size_t k_z_star = 0;
  std::size_t k_x_star = 0;
  double r_star = 0.0;
  double r_train_star = 0.0;
  double r_test_star = 0.0;
  std::vector<std::string> prediction_labels;
  std::vector<std::size_t> train_indices;
  std::vector<ExplanationClustering> explanations;
  std::vector<Cell> cells;
  /// feature name -> one clustering per cell (same order as `cells`).
  std::map<std::string, std::vector<CellClustering>> features;
  std::vector<GridPoint> diagnostics;
  /// Hex SHA-256 of the dataset file this was fitted on, when known.
  std::string dataset_sha256;

  /// Whether `column` ("features.<f>" or "explanations.<m>") has a map here.
  bool covers(const std::string& column) const;
  /// Discrete id of a covered column for a record.
  std::string coarsen_column(const EvaluationRecord& record, const std::string& column) const;

  std::vector<std::string> z_ids(const EvaluationRecord& record) const;
  /// Index into `cells`; throws DataError for cells unseen at fit time.
  std::size_t cell_of(const EvaluationRecord& record) const;
  std::string x_id(const EvaluationRecord& record, const std::string& feature) const;

  nlohmann::json to_json() const;
  static CoarseningResult from_json(const nlohmann::json& j);

 private:
  std::map<Cell, std::size_t> cell_index_;
  void rebuild_index();
  friend std::optional<CoarseningResult> run_alg1(const EvaluationDataset&, const DecisionTask&,
                                                  const CoarseningConfig&);
};

/// Cluster ids assigned to a record: one per explanation method, plus the
/// feature cluster within its cell.
struct Assignment {
  std::vector<std::string> z;
  std::string x;
};

Assignment apply(const CoarseningResult& coarsening, const EvaluationRecord& record);

/// Grid search over nested clusterings maximizing full-data rational
/// performance subject to the train/test gap staying under delta. Returns
/// nullopt when no grid point is feasible.
std::optional<CoarseningResult> run_alg1(const EvaluationDataset& dataset, const DecisionTask& task,
                                         const CoarseningConfig& config);

/// Joins several explanation methods into a single column: numeric vectors
/// are concatenated in method order, discrete ids are joined into a
/// cross-product id. Throws DataError on mixed kinds.
std::vector<SignalValue> multi_explanation_compose(const EvaluationDataset& dataset,
                                                   const std::vector<std::string>& methods);

/// Stratified-by-state seeded split; returns sorted training indices.
std::vector<std::size_t> stratified_split(const EvaluationDataset& dataset, double train_fraction,
                                          std::uint64_t seed);

}  // namespace voe
