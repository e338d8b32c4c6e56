#include "pcbench/harness.hpp"

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "pcbench/metrics.hpp"

namespace fs = std::filesystem;

namespace pcbench {

namespace {

// Clouds are immutable; each distinct file is loaded once and shared
// read-only across workers.
class CloudCache {
 public:
  explicit CloudCache(std::string dir) : dir_(std::move(dir)) {}

  const PointCloud& get(const std::string& name) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(name);
    if (it == cache_.end()) {
      const std::string path =
          dir_.empty() ? name : (fs::path(dir_) / name).string();
      it = cache_.emplace(name, load_cloud_file(path)).first;
    }
    return it->second;
  }

 private:
  std::string dir_;
  std::mutex mutex_;
  std::map<std::string, PointCloud> cache_;
};

}  // namespace

RunSummary run_problems(const RunOptions& options) {
  options.config.validate();
  const ProblemSet set = read_problem_file(options.problem_file);

  std::set<std::uint64_t> done;
  const bool resuming = fs::exists(options.results_path) &&
                        fs::file_size(options.results_path) > 0;
  if (resuming)
    for (const ProblemRecord& r : read_results_csv(options.results_path))
      done.insert(r.id);

  std::vector<const RegistrationProblem*> todo;
  for (const RegistrationProblem& p : set.problems)
    if (!done.count(p.id)) todo.push_back(&p);

  RunSummary summary;
  summary.skipped = set.problems.size() - todo.size();

  std::ofstream out(options.results_path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open results file: " + options.results_path);
  if (!resuming) write_results_header(out);

  CloudCache clouds(options.clouds_dir);

  // Workers grab problems by index; a sequencer flushes finished rows in
  // id order so output bytes do not depend on scheduling.
  std::mutex mutex;
  std::condition_variable row_ready;
  std::map<std::size_t, ProblemRecord> pending;
  std::atomic<std::size_t> next{0};
  std::size_t written = 0;

  auto work = [&](const RegistrationProblem& problem) {
    const PointCloud& source = clouds.get(problem.source);
    const PointCloud& target = clouds.get(problem.target);

    ProblemRecord record;
    record.id = problem.id;
    record.sequence = set.sequence;
    record.regime = problem.regime;
    record.overlap = problem.overlap;
    record.initial_delta =
        benchmark_metric(source, problem.initial, RigidTransform::identity()).delta;

    const PointCloud perturbed = apply(problem.initial, source);
    RegistrationResult reg;
    try {
      reg = register_clouds(perturbed, target, RigidTransform::identity(),
                            options.config);
    } catch (const Error& e) {
      reg.status = RegStatus::failed;
      reg.failure_reason = e.what();
    }
    record.status = reg.status;
    record.iterations = reg.iterations;
    record.wall_time = reg.wall_time;
    if (reg.status == RegStatus::failed) {
      // Unimproved: score the initial misalignment so failures stay visible
      // in the statistics.
      record.estimated = problem.initial;
      record.final_delta = record.initial_delta;
    } else {
      record.estimated = compose(reg.estimated, problem.initial);
      record.final_delta =
          benchmark_metric(source, record.estimated, RigidTransform::identity()).delta;
    }
    return record;
  };

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < todo.size(); i = next.fetch_add(1)) {
      ProblemRecord record = work(*todo[i]);
      std::lock_guard<std::mutex> lock(mutex);
      pending.emplace(i, std::move(record));
      row_ready.notify_one();
    }
  };

  const int jobs = std::max(options.jobs, 1);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);

  {
    std::unique_lock<std::mutex> lock(mutex);
    while (written < todo.size()) {
      row_ready.wait(lock, [&] { return pending.count(written) > 0; });
      while (pending.count(written)) {
        const ProblemRecord& record = pending.at(written);
        write_result_row(out, record);
        if (record.status == RegStatus::failed) ++summary.reg_failed;
        pending.erase(written);
        ++written;
        ++summary.completed;
      }
      out.flush();
    }
  }
  for (auto& t : pool) t.join();
  return summary;
}

std::string generate_problem_file(const GenerateOptions& options) {
  const SequenceSpec spec = read_sequence_spec(options.spec_path);
  std::vector<PointCloud> clouds;
  clouds.reserve(spec.cloud_files.size());
  for (std::size_t i = 0; i < spec.cloud_files.size(); ++i)
    clouds.push_back(load_cloud_file(spec.cloud_path(i)));

  const auto ordered =
      compute_pairwise_overlaps(clouds, spec.overlap_threshold, options.jobs);
  const auto candidates = canonical_pairs(ordered);

  const double floor = options.regime == Regime::local ? 0.40 : 0.60;
  Rng rng(derive_seed(spec.seed, options.regime == Regime::local ? 0 : 1,
                      0x5e1ec7));
  const auto pairs =
      select_pairs(candidates, floor, rng, options.n_bins, options.per_bin);

  const ProblemSet set =
      generate_problems(spec, options.regime, pairs, clouds, options.per_pair);

  const std::string dir = options.out_dir.empty()
                              ? fs::path(options.spec_path).parent_path().string()
                              : options.out_dir;
  fs::create_directories(dir.empty() ? "." : dir);
  const std::string path =
      (fs::path(dir) / problem_file_name(spec.name, options.regime)).string();
  write_problem_file(set, path);
  return path;
}

GtReport run_gt_eval(const GtEvalOptions& options) {
  const SequenceSpec spec = read_sequence_spec(options.spec_path);
  std::vector<PointCloud> clouds;
  clouds.reserve(spec.cloud_files.size());
  for (std::size_t i = 0; i < spec.cloud_files.size(); ++i)
    clouds.push_back(load_cloud_file(spec.cloud_path(i)));

  const auto ordered =
      compute_pairwise_overlaps(clouds, spec.overlap_threshold, options.jobs);
  const auto candidates = canonical_pairs(ordered);
  Rng rng(derive_seed(spec.seed, 0, 0x5e1ec7));  // same pairs as the local set
  const auto pairs = select_pairs(candidates, 0.40, rng, options.n_bins,
                                  options.per_bin);

  std::vector<GtPair> gt_pairs;
  gt_pairs.reserve(pairs.size());
  for (const PairOverlap& p : pairs)
    gt_pairs.push_back({spec.cloud_files[p.source], spec.cloud_files[p.target],
                        &clouds[p.source], &clouds[p.target]});

  const GtReport report = evaluate_ground_truth(gt_pairs, options.config,
                                                spec.overlap_threshold, options.jobs);
  if (!options.results_path.empty()) {
    std::ofstream out(options.results_path, std::ios::binary);
    if (!out) throw Error("cannot open gt-eval output: " + options.results_path);
    write_gt_report_csv(report, out);
  }
  return report;
}

}  // namespace pcbench
