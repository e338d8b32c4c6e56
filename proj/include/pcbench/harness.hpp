#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcbench/gt_eval.hpp"
#include "pcbench/problem.hpp"
#include "pcbench/registration.hpp"
#include "pcbench/stats.hpp"

namespace pcbench {

// Benchmark execution: per problem, apply the stored initial transform to the
// source cloud, run the configured registrar, and score against identity as
// the ground truth (clouds ship at their ground-truth poses).
struct RunOptions {
  std::string problem_file;
  std::string clouds_dir;    // where the problem's source/target files live
  std::string results_path;  // CSV; appended on resume
  RegistrarConfig config;
  int jobs = 1;
  std::uint64_t seed = 0;  // reserved for stochastic registrars; icp/gicp are
                           // deterministic and ignore it
};

struct RunSummary {
  std::size_t completed = 0;   // rows written this run
  std::size_t skipped = 0;     // ids already present in the results file
  std::size_t reg_failed = 0;  // problems whose registrar reported failure
};

// Dispatches problems to `jobs` workers; rows are written in problem-id order
// so reruns are byte-identical apart from wall_time. Resuming skips ids
// already present in the results file. Registrar failures are scored at the
// problem's initial misalignment.
RunSummary run_problems(const RunOptions& options);

struct GenerateOptions {
  std::string spec_path;
  Regime regime = Regime::local;
  std::string out_dir;  // defaults to the spec's directory
  int n_bins = 10;
  int per_bin = 10;
  int per_pair = 30;
  int jobs = 1;
};

// Overlap computation + uniform-coverage pair selection + perturbation
// sampling; writes "<sequence>.txt" (or "<sequence>_global.txt").
// Returns the problem file path.
std::string generate_problem_file(const GenerateOptions& options);

struct GtEvalOptions {
  std::string spec_path;
  std::string results_path;  // per-pair CSV
  RegistrarConfig config;    // algorithm defaults to gicp
  int n_bins = 10;
  int per_bin = 10;
  int jobs = 1;
};

GtReport run_gt_eval(const GtEvalOptions& options);

}  // namespace pcbench
