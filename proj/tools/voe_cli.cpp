// voe: value-of-explanation command line.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "voe/commands.hpp"
#include "voe/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> task, dataset, coarsening, output_dir, feature, x_ai;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta, split, mu_step, level;
  std::optional<std::size_t> resamples, threads;
  std::vector<std::size_t> k_z, k_x;
  std::vector<std::string> explanations, methods, extra_features;
  bool robust = false;
  bool no_human = false;
  bool stimuli_not_coarsened = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "run config JSON");
  cmd->add_option("--task", f.task, "task preset (medical[:eps], accuracy[:s1,s2]) or task JSON path");
  cmd->add_option("--dataset", f.dataset, "dataset (.jsonl or .csv)");
  cmd->add_option("--output-dir,-o", f.output_dir, "output directory");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--feature", f.feature, "feature column used as X");
  cmd->add_option("--x-ai", f.x_ai, "feature column holding the model input");
  cmd->add_option("--explanations", f.explanations, "explanation methods to evaluate");
}

voe::RunConfig resolve(const Flags& f) {
  voe::RunConfig c = f.config.empty() ? voe::RunConfig{} : voe::RunConfig::load(f.config);
  if (f.task) {
    c.task = *f.task;
    c.task_inline.reset();
  }
  if (f.dataset) c.dataset = *f.dataset;
  if (f.coarsening) c.coarsening_path = *f.coarsening;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.seed) c.seed = *f.seed;
  if (f.feature) {
    c.columns.feature = *f.feature;
    c.coarsening.feature_column = *f.feature;
  }
  if (f.x_ai) c.columns.x_ai = *f.x_ai;
  if (!f.explanations.empty()) c.columns.explanations = f.explanations;
  if (f.no_human) c.columns.use_human_action = false;
  if (f.delta) c.coarsening.delta = *f.delta;
  if (f.split) c.coarsening.split_fraction = *f.split;
  if (!f.k_z.empty()) c.coarsening.k_z_grid = f.k_z;
  if (!f.k_x.empty()) c.coarsening.k_x_grid = f.k_x;
  if (!f.methods.empty()) c.coarsening.explanation_methods = f.methods;
  if (!f.extra_features.empty()) c.coarsening.extra_feature_columns = f.extra_features;
  if (f.mu_step) {
    c.mu_step = *f.mu_step;
    c.mu_grid.clear();
  }
  if (f.resamples) c.bootstrap.n_resamples = *f.resamples;
  if (f.level) c.bootstrap.level = *f.level;
  if (f.threads) c.bootstrap.threads = *f.threads;
  if (f.robust) c.robust = true;
  if (f.stimuli_not_coarsened) c.stimuli_coarsened = false;
  c.finalize();
  return c;
}

void print(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rational-agent benchmarks and value-of-explanation estimates"};
  app.require_subcommand(1);
  Flags f;

  auto* coarsen = app.add_subcommand("coarsen", "search nested clusterings for the features and explanations");
  add_run_flags(coarsen, f);
  coarsen->add_option("--delta", f.delta, "largest allowed train/test gap");
  coarsen->add_option("--split", f.split, "training fraction");
  coarsen->add_option("--k-z", f.k_z, "explanation cluster grid");
  coarsen->add_option("--k-x", f.k_x, "feature cluster grid");
  coarsen->add_option("--methods", f.methods, "explanation methods clustered jointly");
  coarsen->add_option("--extra-features", f.extra_features, "further feature columns clustered per cell");

  auto* values = app.add_subcommand("values", "benchmarks, theoretic and complementary values");
  add_run_flags(values, f);
  values->add_option("--coarsening", f.coarsening, "coarsening artifact");
  values->add_flag("--robust", f.robust, "also emit the worst case over V-shaped rules");
  values->add_flag("--no-human", f.no_human, "skip human-based quantities");
  values->add_option("--mu-step", f.mu_step, "mu grid step");
  values->add_option("--bootstrap", f.resamples, "bootstrap resamples (0 disables)");
  values->add_option("--level", f.level, "interval level");
  values->add_option("--threads", f.threads, "bootstrap threads (0 = all cores)");

  auto* robust = app.add_subcommand("robust", "worst case over V-shaped scoring rules");
  add_run_flags(robust, f);
  robust->add_option("--coarsening", f.coarsening, "coarsening artifact");
  robust->add_flag("--no-human", f.no_human, "skip human-based quantities");
  robust->add_option("--mu-step", f.mu_step, "mu grid step");

  auto* behavioral = app.add_subcommand("behavioral", "difference in realized utility between conditions");
  add_run_flags(behavioral, f);
  behavioral->add_option("--bootstrap", f.resamples, "bootstrap resamples (0 disables)");
  behavioral->add_option("--level", f.level, "interval level");
  behavioral->add_option("--threads", f.threads, "bootstrap threads (0 = all cores)");
  behavioral->add_flag("--stimuli-not-coarsened", f.stimuli_not_coarsened,
                       "conditions did not share coarsened stimulus cells");

  std::string spec_path, out_path;
  std::optional<std::string> manifest_dir;
  auto* simulate = app.add_subcommand("simulate", "sample a dataset from a synthetic spec");
  simulate->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  simulate->add_option("--out", out_path, "dataset output path")->required();
  simulate->add_option("--manifest-dir", manifest_dir, "write manifest.json here");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "verify a run directory and summarize it");
  report->add_option("dir", report_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(voe::ExitCode::kConfig);
  }

  try {
    if (*coarsen) {
      print(voe::cmd_coarsen(resolve(f)));
    } else if (*values) {
      print(voe::cmd_values(resolve(f)));
    } else if (*robust) {
      print(voe::cmd_robust(resolve(f)));
    } else if (*behavioral) {
      print(voe::cmd_behavioral(resolve(f)));
    } else if (*simulate) {
      print(voe::cmd_simulate(spec_path, out_path,
                              manifest_dir ? std::optional<std::filesystem::path>(*manifest_dir) : std::nullopt));
    } else if (*report) {
      print(voe::cmd_report(report_dir));
    }
  } catch (const voe::Error& e) {
    std::cerr << "error[" << static_cast<int>(e.code()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[" << static_cast<int>(voe::ExitCode::kInvariant) << "]: internal: " << e.what() << '\n';
    return static_cast<int>(voe::ExitCode::kInvariant);
  }
  return 0;
}
