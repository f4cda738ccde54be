#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "voe/coarsening.hpp"
#include "voe/estimands.hpp"

namespace voe {

/// Shortest round-trip decimal form of a double (same text as JSON output).
std::string format_number(double v);

/// Pretty-printed JSON with a trailing newline.
std::string render_json(const nlohmann::json& j);

/// quantity,value,ci_low,ci_high (CI cells empty when no interval exists).
std::string values_csv(const ValueReport& report);

/// Long table explanation,benchmark,value with R_baseline, R_Z, R_AH, R_AH_Z
/// and R_X per explanation. Human rows are skipped when the report has none.
std::string span_table_csv(const ValueReport& report);

/// k_z,k_x,r_all,r_train,r_test,feasible per evaluated grid point.
std::string diagnostics_csv(const CoarseningResult& coarsening);

/// Behavioral rows: arm,b,b_not_e,delta,ci_low,ci_high,n_with,n_without.
std::string behavioral_csv(const ValueReport& report);

std::string sha256_hex(std::string_view bytes);
/// Throws DataError("path") when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories; throws DataError("path") on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Files produced by one run with their SHA-256 digests.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path root) : root_(std::move(root)) {}

  /// Writes `content` under the root and records its hash.
  void write(const std::string& relative, std::string_view content);
  /// Records an already written file (path relative to the root when possible).
  void add(const std::filesystem::path& path);

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
  nlohmann::json to_json(const nlohmann::json& extra = nlohmann::json::object()) const;
  /// Writes manifest.json under the root.
  void finish(const nlohmann::json& extra = nlohmann::json::object()) const;

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace voe
