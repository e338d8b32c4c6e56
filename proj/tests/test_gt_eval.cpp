#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pcbench/gt_eval.hpp"
#include "pcbench/metrics.hpp"
#include "pcbench/synth.hpp"
#include "test_util.hpp"

using namespace pcbench;

TEST_CASE("equal values produce no outliers") {
  const std::vector<double> values(10, 0.42);
  const ZScoreResult r = robust_zscore_filter(values);
  CHECK(std::none_of(r.flags.begin(), r.flags.end(), [](bool f) { return f; }));
  CHECK(r.survivors.size() == 10);
}

TEST_CASE("a gross outlier among jittered values is flagged") {
  std::vector<double> values;
  Rng rng(100);
  for (int i = 0; i < 19; ++i) values.push_back(0.05 + rng.uniform(-0.005, 0.005));
  values.push_back(1.0);
  const ZScoreResult r = robust_zscore_filter(values);
  CHECK(r.flags.back());
  CHECK(std::count(r.flags.begin(), r.flags.end(), true) == 1);
  CHECK(r.survivors.size() == 19);
}

TEST_CASE("the 1-2-3 fixture stays unflagged") {
  // median 2, MAD 1, max |M| = 0.6745 < 3.5
  const ZScoreResult r = robust_zscore_filter({1.0, 2.0, 3.0});
  CHECK(std::none_of(r.flags.begin(), r.flags.end(), [](bool f) { return f; }));
}

TEST_CASE("degenerate MAD falls back to the mean absolute deviation") {
  // 20 identical values and two at 1.0: MAD is 0, meanAD = 2/22
  std::vector<double> values(20, 0.0);
  values.push_back(1.0);
  values.push_back(1.0);
  const ZScoreResult r = robust_zscore_filter(values);
  CHECK(std::count(r.flags.begin(), r.flags.end(), true) == 2);
  CHECK(r.flags[20]);
  CHECK(r.flags[21]);
}

TEST_CASE("too few values are rejected") {
  CHECK_THROWS_AS(robust_zscore_filter({1.0, 2.0}), TooFewValues);
}

TEST_CASE("filter output is invariant to input order") {
  std::vector<double> values{0.05, 0.06, 0.04, 0.055, 0.045, 1.0, 0.05, 0.052};
  auto sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const ZScoreResult a = robust_zscore_filter(values);
  const ZScoreResult b = robust_zscore_filter(sorted);
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  CHECK(mean(a.survivors) == doctest::Approx(mean(b.survivors)).epsilon(1e-12));
  CHECK(a.survivors.size() == b.survivors.size());
}

namespace {

std::vector<GtPair> adjacent_pairs(const std::vector<PointCloud>& clouds) {
  std::vector<GtPair> pairs;
  for (std::size_t i = 0; i + 1 < clouds.size(); ++i)
    pairs.push_back({"s" + std::to_string(i), "s" + std::to_string(i + 1), &clouds[i],
                     &clouds[i + 1]});
  return pairs;
}

}  // namespace

TEST_CASE("perfect ground truth audits to ~zero mean") {
  SynthParams params;
  params.seed = 101;
  params.scans = 6;
  params.ground_points = 1500;
  params.wall_points = 400;
  params.cluster_points = 60;
  const SynthSequence seq = generate_synthetic_sequence(params);
  const auto pairs = adjacent_pairs(seq.clouds);

  RegistrarConfig config;
  config.algorithm = Algorithm::gicp;
  const GtReport report =
      evaluate_ground_truth(pairs, config, seq.spec.overlap_threshold, 2);
  CHECK(report.n_failed == 0);
  CHECK(report.mean_m >= 0.0);
  CHECK(report.mean_m < 1e-6);
}

TEST_CASE("failed pairs are excluded and counted") {
  Rng rng(102);
  PointCloud a = test::random_cloud(rng, 200, 1.0);
  PointCloud far = a;
  for (Point3& p : far.points) p += Point3(50, 0, 0);
  // three fine pairs so the filter has enough values, one hopeless pair
  std::vector<GtPair> pairs = {{"a", "a2", &a, &a},
                               {"b", "b2", &a, &a},
                               {"c", "c2", &a, &a},
                               {"bad", "far", &a, &far}};
  RegistrarConfig config;
  const GtReport report = evaluate_ground_truth(pairs, config, 0.3, 1);
  CHECK(report.n_failed == 1);
  CHECK(report.pairs[3].failed);
  CHECK(report.mean_m < 1e-9);
}

TEST_CASE("rerunning after removing a flagged outlier flags nothing new") {
  std::vector<double> values;
  Rng rng(103);
  for (int i = 0; i < 21; ++i) values.push_back(0.05 + rng.uniform(-0.004, 0.004));
  values.push_back(1.0);
  const ZScoreResult first = robust_zscore_filter(values);
  REQUIRE(first.survivors.size() == 21);
  const ZScoreResult second = robust_zscore_filter(first.survivors);
  CHECK(std::none_of(second.flags.begin(), second.flags.end(),
                     [](bool f) { return f; }));
}

TEST_CASE("gt report csv lists pairs and a summary row") {
  GtReport report;
  report.pairs.push_back({0, "a", "b", 0.05, false, false});
  report.pairs.push_back({1, "b", "c", 1.0, true, false});
  report.mean_m = 0.05;
  report.std_dev_m = 0.0;
  report.n_outliers = 1;
  std::ostringstream out;
  write_gt_report_csv(report, out);
  const std::string text = out.str();
  CHECK(text.find("pair_id,source,target,residual_m,outlier,failed") != std::string::npos);
  CHECK(text.find("0,a,b,0.05,0,0") != std::string::npos);
  CHECK(text.find("1,b,c,1,1,0") != std::string::npos);
  CHECK(text.find("summary") != std::string::npos);
}
