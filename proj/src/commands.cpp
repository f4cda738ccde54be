#include "voe/commands.hpp"

#include <fstream>
#include <sstream>

#include "voe/errors.hpp"
#include "voe/report.hpp"
#include "voe/robust.hpp"
#include "voe/synthetic.hpp"

namespace voe {
namespace fs = std::filesystem;
namespace {

nlohmann::json parse_json_file(const fs::path& path, bool config_error) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::string msg = path.string() + ": " + e.what();
    if (config_error) throw ConfigError(msg);
    throw DataError("json", msg);
  }
}

std::uint64_t nested_seed(const nlohmann::json& block, std::uint64_t top, const char* name) {
  if (block.is_object() && block.contains("seed")) {
    const auto s = block["seed"].get<std::uint64_t>();
    if (s != top) throw ConfigError(std::string(name) + ".seed disagrees with the run seed; use one seed");
  }
  return top;
}

struct Inputs {
  DecisionTask task;
  EvaluationDataset dataset;
  std::string dataset_sha256;
};

Inputs load_inputs(const RunConfig& config) {
  if (config.dataset.empty()) throw ConfigError("no dataset given");
  DecisionTask task = config.load_task();
  EvaluationDataset dataset = load_dataset(config.dataset, DatasetSchema::for_task(task));
  return {std::move(task), std::move(dataset), sha256_file(config.dataset)};
}

std::optional<CoarseningResult> load_coarsening(const RunConfig& config, const Inputs& in) {
  if (config.coarsening_path.empty()) return std::nullopt;
  auto result = CoarseningResult::from_json(parse_json_file(config.coarsening_path, false));
  if (!result.dataset_sha256.empty() && result.dataset_sha256 != in.dataset_sha256) {
    throw DataError("dataset_sha256", "coarsening artifact " + config.coarsening_path.string() +
                                          " was fitted on a different dataset (sha256 " + result.dataset_sha256 +
                                          ", got " + in.dataset_sha256 + ")");
  }
  return result;
}

MuGrid mu_grid(const RunConfig& config) {
  return config.mu_grid.empty() ? MuGrid::with_step(config.mu_step) : MuGrid(config.mu_grid);
}

nlohmann::json provenance(const RunConfig& config, const Inputs& in, const std::optional<CoarseningResult>& c) {
  nlohmann::json j = {{"config", config.to_json()}, {"seed", config.seed}, {"dataset_sha256", in.dataset_sha256}};
  if (!config.coarsening_path.empty()) j["coarsening_sha256"] = sha256_file(config.coarsening_path);
  if (c) j["coarsening"] = {{"k_z", c->k_z_star}, {"k_x", c->k_x_star}};
  return j;
}

// Records whose signals are the no-explanation baseline.
EvaluationDataset theoretic_records(const EvaluationDataset& dataset) {
  return dataset.any_has_condition() ? baseline_records(dataset) : dataset;
}

nlohmann::json robust_json(const RobustReport& report, const std::vector<std::pair<std::string, BlackwellResult>>& bw) {
  nlohmann::json j = report.to_json();
  nlohmann::json b = nlohmann::json::object();
  for (const auto& [name, r] : bw) {
    b[name] = {{"dominates", r.dominates}};
    if (r.witness_mu) b[name]["witness_mu"] = *r.witness_mu;
  }
  j["blackwell"] = std::move(b);
  return j;
}

std::vector<std::pair<std::string, BlackwellResult>> blackwell_checks(const ValueEstimator& estimator,
                                                                      const MuGrid& grid) {
  std::vector<std::pair<std::string, BlackwellResult>> out;
  const auto& signals = estimator.signals();
  const auto x = EmpiricalJoint::from_encoded(signals.at("x"));
  for (const auto& m : estimator.explanations()) {
    out.emplace_back("x>=z:" + m, blackwell_dominates(x, EmpiricalJoint::from_encoded(signals.at("z:" + m)), grid));
  }
  return out;
}

void write_robust(Manifest& manifest, const ValueEstimator& estimator, const RunConfig& config,
                  const nlohmann::json& prov) {
  const MuGrid grid = mu_grid(config);
  const RobustReport report = robust_values(estimator, grid);
  nlohmann::json j = robust_json(report, blackwell_checks(estimator, grid));
  j["provenance"] = prov;
  manifest.write("robust.json", render_json(j));
  manifest.write("robust_per_mu.csv", report.per_mu_csv());
}

}  // namespace

void RunConfig::finalize() {
  coarsening.seed = seed;
  bootstrap.seed = seed;
  coarsening.validate();
  if (bootstrap.n_resamples > 0) bootstrap.validate();
  if (!(mu_step > 0.0 && mu_step < 1.0)) throw ConfigError("mu_step must lie in (0, 1)");
  if (!mu_grid.empty()) MuGrid{mu_grid};
}

DecisionTask RunConfig::load_task() const {
  try {
    if (task_inline) return DecisionTask::from_json(*task_inline);
    if (task.size() > 5 && task.ends_with(".json")) return DecisionTask::from_json(parse_json_file(task, true));
    return DecisionTask::preset(task);
  } catch (const DataError& e) {
    throw ConfigError(std::string("invalid task: ") + e.what());
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"task", task_inline ? *task_inline : nlohmann::json(task)},
                      {"dataset", dataset.generic_string()},
                      {"columns", columns.to_json()},
                      {"coarsening", coarsening.to_json()},
                      {"mu_step", mu_step},
                      {"bootstrap",
                       {{"n_resamples", bootstrap.n_resamples},
                        {"level", bootstrap.level},
                        {"threads", bootstrap.threads}}},
                      {"robust", robust},
                      {"stimuli_coarsened", stimuli_coarsened},
                      {"output_dir", output_dir.generic_string()},
                      {"seed", seed}};
  if (!coarsening_path.empty()) j["coarsening_path"] = coarsening_path.generic_string();
  if (!mu_grid.empty()) j["mu_grid"] = mu_grid;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("task")) {
      if (j["task"].is_object()) {
        c.task_inline = j["task"];
      } else {
        c.task = j["task"].get<std::string>();
      }
    }
    if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
    if (j.contains("coarsening_path")) c.coarsening_path = j["coarsening_path"].get<std::string>();
    if (j.contains("columns")) c.columns = ValueColumns::from_json(j["columns"]);
    if (j.contains("coarsening")) {
      nested_seed(j["coarsening"], c.seed, "coarsening");
      c.coarsening = CoarseningConfig::from_json(j["coarsening"]);
    }
    c.mu_step = j.value("mu_step", c.mu_step);
    if (j.contains("mu_grid")) c.mu_grid = j["mu_grid"].get<std::vector<double>>();
    if (j.contains("bootstrap")) {
      const auto& b = j["bootstrap"];
      nested_seed(b, c.seed, "bootstrap");
      c.bootstrap.n_resamples = b.value("n_resamples", c.bootstrap.n_resamples);
      c.bootstrap.level = b.value("level", c.bootstrap.level);
      c.bootstrap.threads = b.value("threads", c.bootstrap.threads);
    }
    c.robust = j.value("robust", c.robust);
    c.stimuli_coarsened = j.value("stimuli_coarsened", c.stimuli_coarsened);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  c.finalize();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  RunConfig c = from_json(parse_json_file(path, true));
  // Relative paths in a config file are taken relative to the file.
  const fs::path base = path.parent_path();
  auto rebase = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  rebase(c.dataset);
  rebase(c.coarsening_path);
  rebase(c.output_dir);
  if (!c.task_inline && c.task.ends_with(".json") && fs::path(c.task).is_relative()) c.task = (base / c.task).string();
  return c;
}

std::vector<std::string> cmd_coarsen(const RunConfig& config) {
  const Inputs in = load_inputs(config);
  auto result = run_alg1(in.dataset, in.task, config.coarsening);
  if (!result) {
    throw InfeasibleError("no grid point keeps R_train - R_test below delta=" + format_number(config.coarsening.delta) +
                          "; widen the grids or raise delta");
  }
  result->dataset_sha256 = in.dataset_sha256;
  Manifest manifest(config.output_dir);
  manifest.write("coarsening.json", render_json(result->to_json()));
  manifest.write("coarsening_diagnostics.csv", diagnostics_csv(*result));
  manifest.write("config.json", render_json(config.to_json()));
  manifest.finish({{"command", "coarsen"}, {"seed", config.seed}, {"dataset_sha256", in.dataset_sha256}});
  std::vector<std::string> out;
  for (const auto& [p, h] : manifest.entries()) out.push_back(p);
  return out;
}

std::vector<std::string> cmd_values(const RunConfig& config) {
  const Inputs in = load_inputs(config);
  const auto coarsening = load_coarsening(config, in);
  const EvaluationDataset records = theoretic_records(in.dataset);
  const ValueEstimator estimator(records, in.task, coarsening ? &*coarsening : nullptr, config.columns);
  ValueReport report =
      config.bootstrap.n_resamples > 0 ? bootstrap_report(estimator, config.bootstrap) : estimator.estimate();
  if (records.size() != in.dataset.size()) {
    report.notes.push_back("benchmarks use the " + std::to_string(records.size()) + " records without explanation");
  }
  const nlohmann::json prov = provenance(config, in, coarsening);
  nlohmann::json j = report.to_json();
  j["provenance"] = prov;
  Manifest manifest(config.output_dir);
  manifest.write("values.json", render_json(j));
  manifest.write("values.csv", values_csv(report));
  manifest.write("span_table.csv", span_table_csv(report));
  if (config.robust) write_robust(manifest, estimator, config, prov);
  manifest.finish({{"command", "values"}, {"seed", config.seed}, {"dataset_sha256", in.dataset_sha256}});
  std::vector<std::string> out;
  for (const auto& [p, h] : manifest.entries()) out.push_back(p);
  return out;
}

std::vector<std::string> cmd_robust(const RunConfig& config) {
  const Inputs in = load_inputs(config);
  const auto coarsening = load_coarsening(config, in);
  const EvaluationDataset records = theoretic_records(in.dataset);
  const ValueEstimator estimator(records, in.task, coarsening ? &*coarsening : nullptr, config.columns);
  Manifest manifest(config.output_dir);
  write_robust(manifest, estimator, config, provenance(config, in, coarsening));
  manifest.finish({{"command", "robust"}, {"seed", config.seed}, {"dataset_sha256", in.dataset_sha256}});
  std::vector<std::string> out;
  for (const auto& [p, h] : manifest.entries()) out.push_back(p);
  return out;
}

std::vector<std::string> cmd_behavioral(const RunConfig& config) {
  const Inputs in = load_inputs(config);
  DatasetSchema schema = DatasetSchema::for_task(in.task);
  schema.require_condition = true;
  schema.require_human_action = true;
  in.dataset.validate(schema);

  ValueReport report;
  std::vector<std::optional<std::string>> arms;
  const auto names = behavioral_arms(in.dataset);
  if (names.size() > 1 || (names.size() == 1 && !names.front().empty())) arms.emplace_back(std::nullopt);
  for (const auto& a : names) arms.emplace_back(a.empty() ? std::nullopt : std::optional<std::string>(a));
  for (const auto& arm : arms) {
    const std::string key = arm.value_or("");
    report.behavioral[key] = behavioral_value(in.dataset, in.task, arm);
    if (config.bootstrap.n_resamples > 0) {
      const auto ci = bootstrap_behavioral(in.dataset, in.task, arm, config.bootstrap);
      report.ci[key.empty() ? "delta_behavioral" : "delta_behavioral:" + key] = {ci.low, ci.high};
    }
  }
  if (!config.stimuli_coarsened) {
    report.notes.push_back("stimuli were not drawn from matched coarsened cells; conditions may differ in instances");
  }
  nlohmann::json j = report.to_json();
  j["provenance"] = provenance(config, in, std::nullopt);
  Manifest manifest(config.output_dir);
  manifest.write("behavioral.json", render_json(j));
  manifest.write("behavioral.csv", behavioral_csv(report));
  manifest.finish({{"command", "behavioral"}, {"seed", config.seed}, {"dataset_sha256", in.dataset_sha256}});
  std::vector<std::string> out;
  for (const auto& [p, h] : manifest.entries()) out.push_back(p);
  return out;
}

std::vector<std::string> cmd_simulate(const fs::path& spec_path, const fs::path& out_path,
                                      const std::optional<fs::path>& manifest_dir) {
  const SyntheticSpec spec = SyntheticSpec::from_json(parse_json_file(spec_path, false));
  const EvaluationDataset dataset = generate(spec);
  std::ostringstream text;
  write_jsonl(text, dataset);
  write_text_file(out_path, text.str());
  if (manifest_dir) {
    Manifest manifest(*manifest_dir);
    manifest.add(out_path);
    manifest.finish({{"command", "simulate"}, {"seed", spec.seed}, {"spec_sha256", sha256_file(spec_path)}});
  }
  return {out_path.generic_string()};
}

std::vector<std::string> cmd_report(const fs::path& dir) {
  const nlohmann::json manifest = parse_json_file(dir / "manifest.json", false);
  for (const auto& f : manifest.at("files")) {
    const fs::path p = dir / f.at("path").get<std::string>();
    if (sha256_file(p) != f.at("sha256").get<std::string>()) {
      throw DataError("sha256", p.string() + " does not match its manifest hash");
    }
  }
  std::ostringstream out;
  auto section = [&](const char* file, const char* title) {
    if (!fs::exists(dir / file)) return;
    const auto j = parse_json_file(dir / file, false);
    out << title << "\n";
    for (const auto& q : j.value("quantities", nlohmann::json::array())) {
      out << "  " << q.at("name").get<std::string>() << " = " << format_number(q.at("value").get<double>());
      if (q.contains("ci_low")) {
        out << " [" << format_number(q["ci_low"].get<double>()) << ", " << format_number(q["ci_high"].get<double>())
            << "]";
      }
      out << "\n";
    }
    for (const auto& n : j.value("notes", nlohmann::json::array())) out << "  note: " << n.get<std::string>() << "\n";
    if (j.contains("robust")) {
      for (const auto& [name, r] : j["robust"].items()) {
        out << "  robust " << name << " = " << format_number(r.at("value").get<double>())
            << " at mu=" << format_number(r.at("argmin_mu").get<double>()) << "\n";
      }
    }
  };
  section("coarsening.json", "coarsening");
  if (fs::exists(dir / "coarsening.json")) {
    const auto c = parse_json_file(dir / "coarsening.json", false);
    out << "  k_z* = " << c.at("k_z_star") << ", k_x* = " << c.at("k_x_star") << "\n";
  }
  section("values.json", "theoretic and complementary values");
  section("robust.json", "robust values");
  section("behavioral.json", "behavioral values");
  const std::string summary = out.str();
  write_text_file(dir / "summary.txt", summary);
  nlohmann::json updated = manifest;
  auto& files = updated["files"];
  for (auto it = files.begin(); it != files.end();) {
    it = it->at("path") == "summary.txt" ? files.erase(it) : it + 1;
  }
  files.push_back({{"path", "summary.txt"}, {"sha256", sha256_hex(summary)}});
  write_text_file(dir / "manifest.json", render_json(updated));
  return {"summary.txt"};
}

}  // namespace voe
