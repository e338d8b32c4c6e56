// pcbench: point-cloud registration benchmark harness.
//
// Protocol: fetch/synth the clouds (stored at ground-truth poses), generate
// problem files with uniform overlap coverage, run a registrar over every
// problem, and score the results with the scale-invariant pose metric.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pcbench/harness.hpp"
#include "pcbench/manifest.hpp"
#include "pcbench/stats.hpp"
#include "pcbench/synth.hpp"

namespace fs = std::filesystem;
using namespace pcbench;

namespace {

void add_registrar_flags(CLI::App* cmd, RegistrarConfig& config, std::string& algorithm) {
  cmd->add_option("--algorithm", algorithm, "Registration algorithm: icp or gicp");
  cmd->add_option("--leaf", config.voxel_leaf, "Voxel downsampling leaf size [m]");
  cmd->add_option("--max-iters", config.max_iterations, "Maximum outer iterations");
  cmd->add_option("--outlier-factor", config.outlier_factor,
                  "Discard associations beyond factor x median distance");
  cmd->add_option("--max-corr-dist", config.max_corr_distance,
                  "Maximum correspondence distance [m] (unlimited if omitted)");
  cmd->add_option("--convergence-eps", config.convergence_eps,
                  "Stop when rotation angle + translation of an update is below this");
  cmd->add_option("--gicp-k", config.gicp_k_neighbors,
                  "Neighbors per point for G-ICP covariance estimation");
  cmd->add_option("--gicp-cov-eps", config.gicp_cov_epsilon,
                  "Plane-to-plane covariance regularization");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Point-cloud registration benchmark toolkit"};
  app.require_subcommand(1);

  // ---- fetch ----
  auto* fetch = app.add_subcommand("fetch", "Download/convert datasets from a manifest");
  std::string manifest_path, fetch_out;
  fetch->add_option("--manifest", manifest_path, "Dataset manifest file")->required();
  fetch->add_option("--out", fetch_out, "Output directory")->required();

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark sequence");
  SynthParams synth_params;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_params.seed, "Generator seed");
  synth->add_option("--scans", synth_params.scans, "Number of scans");
  synth->add_option("--noise", synth_params.noise_sigma,
                    "Additive Gaussian noise sigma [m]");
  synth->add_option("--name", synth_params.sequence_name, "Sequence name");
  synth->add_option("--threshold", synth_params.overlap_threshold,
                    "Overlap correspondence threshold [m]");

  // ---- generate ----
  auto* generate = app.add_subcommand("generate", "Generate a problem file for a sequence");
  GenerateOptions gen_options;
  std::string gen_regime = "local";
  generate->add_option("--spec", gen_options.spec_path, "Sequence spec file")->required();
  generate->add_option("--regime", gen_regime, "local or global");
  generate->add_option("--out", gen_options.out_dir,
                       "Output directory (defaults to the spec's)");
  generate->add_option("--bins", gen_options.n_bins, "Overlap bins");
  generate->add_option("--per-bin", gen_options.per_bin, "Pairs drawn per bin");
  generate->add_option("--per-pair", gen_options.per_pair, "Perturbations per pair");
  generate->add_option("--jobs", gen_options.jobs, "Parallel overlap computations");

  // ---- run ----
  auto* run = app.add_subcommand("run", "Run a registrar over a problem file");
  RunOptions run_options;
  std::string run_algorithm = "icp";
  run->add_option("--problems", run_options.problem_file, "Problem file")->required();
  run->add_option("--clouds", run_options.clouds_dir, "Directory holding the clouds")
      ->required();
  run->add_option("--results", run_options.results_path, "Results CSV (appended on resume)")
      ->required();
  run->add_option("--jobs", run_options.jobs, "Parallel problems");
  run->add_option("--seed", run_options.seed,
                  "Seed reserved for stochastic registrars (icp/gicp ignore it)");
  add_registrar_flags(run, run_options.config, run_algorithm);

  // ---- score ----
  auto* score = app.add_subcommand("score", "Aggregate a results CSV into score tables");
  std::string score_results, score_out_prefix;
  int score_hist_bins = 0;
  score->add_option("--results", score_results, "Results CSV")->required();
  score->add_option("--out-prefix", score_out_prefix,
                    "Write <prefix>_scores.csv and <prefix>_correlations.csv");
  score->add_option("--histogram-bins", score_hist_bins,
                    "Also write <prefix>_histogram.csv with this many bins");

  // ---- gteval ----
  auto* gteval = app.add_subcommand("gteval", "Estimate a ground-truth accuracy upper bound");
  GtEvalOptions gt_options;
  gt_options.config.algorithm = Algorithm::gicp;
  std::string gt_algorithm = "gicp";
  gteval->add_option("--spec", gt_options.spec_path, "Sequence spec file")->required();
  gteval->add_option("--results", gt_options.results_path, "Per-pair CSV output");
  gteval->add_option("--per-bin", gt_options.per_bin, "Pairs drawn per overlap bin");
  gteval->add_option("--jobs", gt_options.jobs, "Parallel pairs");
  add_registrar_flags(gteval, gt_options.config, gt_algorithm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  if (fetch->parsed()) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    const FetchReport report = fetch_datasets(manifest, fetch_out);
    std::cout << "converted " << report.converted << ", skipped " << report.skipped
              << " (already present)\n";
    for (const std::string& e : report.errors) std::cerr << "error: " << e << "\n";
    for (const std::string& s : report.failed_sequences)
      std::cerr << "sequence failed entirely: " << s << "\n";
    return report.failed_sequences.empty() ? (report.errors.empty() ? 0 : 1) : 1;
  }

  if (synth->parsed()) {
    const SynthSequence sequence = generate_synthetic_sequence(synth_params);
    const std::string spec_path = write_synthetic_sequence(sequence, synth_out);
    std::cout << "wrote " << sequence.clouds.size() << " scans and " << spec_path
              << "\n";
    return 0;
  }

  if (generate->parsed()) {
    gen_options.regime = gen_regime == "global" ? Regime::global : Regime::local;
    if (gen_regime != "local" && gen_regime != "global")
      throw Error("--regime must be local or global");
    const std::string path = generate_problem_file(gen_options);
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (run->parsed()) {
    run_options.config.algorithm = algorithm_from_string(run_algorithm);
    const RunSummary summary = run_problems(run_options);
    std::cout << "completed " << summary.completed << ", resumed past "
              << summary.skipped << ", registrar failures " << summary.reg_failed
              << "\n";
    return 0;
  }

  if (score->parsed()) {
    const std::vector<ProblemRecord> records = read_results_csv(score_results);
    const ScoreTable table = aggregate(records);
    const auto correlations = correlation_table(records);
    std::cout << format_score_table(table) << "\n"
              << format_correlation_table(correlations);
    if (!score_out_prefix.empty()) {
      std::ofstream scores(score_out_prefix + "_scores.csv", std::ios::binary);
      write_score_csv(table, scores);
      std::ofstream corr(score_out_prefix + "_correlations.csv", std::ios::binary);
      write_correlation_csv(correlations, corr);
      if (score_hist_bins > 0) {
        std::vector<double> finals;
        for (const ProblemRecord& r : records) finals.push_back(r.final_delta);
        std::ofstream hist(score_out_prefix + "_histogram.csv", std::ios::binary);
        write_histogram_csv(histogram(finals, score_hist_bins), hist);
      }
    }
    return 0;
  }

  if (gteval->parsed()) {
    gt_options.config.algorithm = algorithm_from_string(gt_algorithm);
    const GtReport report = run_gt_eval(gt_options);
    std::cout << "pairs " << report.pairs.size() << ", mean " << report.mean_m
              << " m, std " << report.std_dev_m << " m, outliers "
              << report.n_outliers << ", failed " << report.n_failed << "\n";
    return report.n_failed == 0 ? 0 : 1;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::ParseError&) {
    return 2;  // unreachable: CLI11_PARSE handles it; kept for safety
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
