#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voe/bootstrap.hpp"
#include "voe/coarsening.hpp"
#include "voe/decision.hpp"
#include "voe/estimands.hpp"

namespace voe {

/// Everything one CLI run needs. A single seed drives the split, the
/// clusterings and the bootstrap streams.
struct RunConfig {
  /// Preset name ("medical:0.5", "accuracy:a,b") or a path to a task JSON file.
  std::string task = "medical";
  std::optional<nlohmann::json> task_inline;
  std::filesystem::path dataset;
  std::filesystem::path coarsening_path;
  ValueColumns columns;
  CoarseningConfig coarsening;
  double mu_step = 0.01;
  std::vector<double> mu_grid;  // overrides mu_step when non-empty
  BootstrapOptions bootstrap{0, 0.95, 0, 0};
  bool robust = false;
  /// Whether stimuli shown in the two behavioral conditions were drawn from the
  /// same coarsened cells; reported as a caveat when false.
  bool stimuli_coarsened = true;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Copies the run seed into the coarsening and bootstrap blocks and checks ranges.
  void finalize();
  DecisionTask load_task() const;
  nlohmann::json to_json() const;
  /// Throws ConfigError on malformed input. Nested blocks may not carry a
  /// seed of their own that disagrees with the top-level one.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
};

/// Each command writes its outputs plus manifest.json into config.output_dir
/// and returns the manifest paths written.
std::vector<std::string> cmd_coarsen(const RunConfig& config);
std::vector<std::string> cmd_values(const RunConfig& config);
std::vector<std::string> cmd_robust(const RunConfig& config);
std::vector<std::string> cmd_behavioral(const RunConfig& config);
/// Samples the spec at `spec_path` into `out_path` (JSONL, or CSV by extension).
std::vector<std::string> cmd_simulate(const std::filesystem::path& spec_path, const std::filesystem::path& out_path,
                                      const std::optional<std::filesystem::path>& manifest_dir = std::nullopt);
/// Verifies the manifest of `dir` and writes a plain-text summary of the
/// reports found there.
std::vector<std::string> cmd_report(const std::filesystem::path& dir);

}  // namespace voe
