#include "voe/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "voe/errors.hpp"

namespace voe {
namespace {

std::string ci_cells(const ValueReport& report, const std::string& name) {
  const auto it = report.ci.find(name);
  if (it == report.ci.end()) return ",";
  return format_number(it->second.low) + "," + format_number(it->second.high);
}

void span_row(std::ostringstream& out, const std::string& m, const char* benchmark, double v) {
  out << m << ',' << benchmark << ',' << format_number(v) << '\n';
}

}  // namespace

std::string format_number(double v) { return nlohmann::json(v).dump(); }

std::string render_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string values_csv(const ValueReport& report) {
  std::ostringstream out;
  out << "quantity,value,ci_low,ci_high\n";
  for (const auto& [name, value] : report.flatten()) {
    out << name << ',' << format_number(value) << ',' << ci_cells(report, name) << '\n';
  }
  return out.str();
}

std::string span_table_csv(const ValueReport& report) {
  std::ostringstream out;
  out << "explanation,benchmark,value\n";
  for (const auto& [m, r_z] : report.r_z) {
    span_row(out, m, "R_baseline", report.r_baseline);
    span_row(out, m, "R_Z", r_z);
    if (report.r_ah) span_row(out, m, "R_AH", *report.r_ah);
    if (const auto it = report.r_ah_z.find(m); it != report.r_ah_z.end()) span_row(out, m, "R_AH_Z", it->second);
    span_row(out, m, "R_X", report.r_x);
  }
  return out.str();
}

std::string diagnostics_csv(const CoarseningResult& coarsening) {
  std::ostringstream out;
  out << "k_z,k_x,r_all,r_train,r_test,feasible\n";
  for (const auto& p : coarsening.diagnostics) {
    out << p.k_z << ',' << p.k_x << ',' << format_number(p.r_all) << ',' << format_number(p.r_train) << ','
        << format_number(p.r_test) << ',' << (p.feasible ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string behavioral_csv(const ValueReport& report) {
  std::ostringstream out;
  out << "arm,b,b_not_e,delta,ci_low,ci_high,n_with,n_without\n";
  for (const auto& [arm, b] : report.behavioral) {
    const std::string key = arm.empty() ? "delta_behavioral" : "delta_behavioral:" + arm;
    out << arm << ',' << format_number(b.b) << ',' << format_number(b.b_not_e) << ',' << format_number(b.delta)
        << ',' << ci_cells(report, key) << ',' << b.n_with << ',' << b.n_without << '\n';
  }
  return out.str();
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw InvariantError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("path", "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("path", "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("path", "write failed for " + path.string());
}

void Manifest::write(const std::string& relative, std::string_view content) {
  write_text_file(root_ / relative, content);
  entries_.emplace_back(relative, sha256_hex(content));
}

void Manifest::add(const std::filesystem::path& path) {
  const auto rel = path.lexically_proximate(root_);
  const std::string name = rel.string().rfind("..", 0) == 0 ? path.string() : rel.generic_string();
  entries_.emplace_back(name, sha256_file(path));
}

nlohmann::json Manifest::to_json(const nlohmann::json& extra) const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [path, hash] : entries_) files.push_back({{"path", path}, {"sha256", hash}});
  nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
  j["files"] = std::move(files);
  return j;
}

void Manifest::finish(const nlohmann::json& extra) const {
  write_text_file(root_ / "manifest.json", render_json(to_json(extra)));
}

}  // namespace voe
