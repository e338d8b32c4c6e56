#include "pcbench/gt_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "pcbench/metrics.hpp"

namespace pcbench {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ZScoreResult robust_zscore_filter(const std::vector<double>& values, double cutoff) {
  if (values.size() < 3) throw TooFewValues();
  const double med = median_of(values);

  std::vector<double> abs_dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) abs_dev[i] = std::abs(values[i] - med);
  double scale = median_of(abs_dev);
  if (scale < 1e-12) {
    double mean_abs = 0.0;
    for (double d : abs_dev) mean_abs += d;
    scale = mean_abs / static_cast<double>(values.size());
  }

  ZScoreResult result;
  result.flags.assign(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (scale >= 1e-12) {
      const double m = 0.6745 * (values[i] - med) / scale;
      result.flags[i] = std::abs(m) > cutoff;
    }
    if (!result.flags[i]) result.survivors.push_back(values[i]);
  }
  return result;
}

GtReport evaluate_ground_truth(const std::vector<GtPair>& pairs,
                               const RegistrarConfig& config, double radius,
                               int jobs) {
  if (radius <= 0) throw Error("gt-eval radius must be > 0");
  RegistrarConfig refine = config;
  refine.max_corr_distance = radius;

  GtReport report;
  report.pairs.resize(pairs.size());

  auto eval = [&](std::size_t i) {
    const GtPair& pair = pairs[i];
    GtPairResult& out = report.pairs[i];
    out.pair_index = i;
    out.source_name = pair.source_name;
    out.target_name = pair.target_name;
    try {
      const RegistrationResult reg =
          register_clouds(*pair.source, *pair.target, RigidTransform::identity(),
                          refine);
      if (reg.status == RegStatus::failed) {
        out.failed = true;
        return;
      }
      out.residual_m =
          unnormalized_metric(*pair.source, reg.estimated, RigidTransform::identity())
              .delta;
    } catch (const Error&) {
      out.failed = true;
    }
  };

  jobs = std::max(jobs, 1);
  if (jobs == 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i) eval(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < pairs.size(); i = next.fetch_add(1))
          eval(i);
      });
    for (auto& t : pool) t.join();
  }

  std::vector<double> residuals;
  std::vector<std::size_t> residual_pair;
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    if (report.pairs[i].failed) {
      ++report.n_failed;
    } else {
      residuals.push_back(report.pairs[i].residual_m);
      residual_pair.push_back(i);
    }
  }

  const ZScoreResult z = robust_zscore_filter(residuals);
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    report.pairs[residual_pair[k]].outlier = z.flags[k];
    if (z.flags[k]) ++report.n_outliers;
  }

  const std::size_t n = z.survivors.size();
  if (n > 0) {
    double sum = 0.0;
    for (double v : z.survivors) sum += v;
    report.mean_m = sum / static_cast<double>(n);
    if (n > 1) {
      double sq = 0.0;
      for (double v : z.survivors) sq += (v - report.mean_m) * (v - report.mean_m);
      report.std_dev_m = std::sqrt(sq / static_cast<double>(n - 1));
    }
  }
  return report;
}

void write_gt_report_csv(const GtReport& report, std::ostream& out) {
  out << "pair_id,source,target,residual_m,outlier,failed\n";
  for (const GtPairResult& p : report.pairs)
    out << p.pair_index << ',' << p.source_name << ',' << p.target_name << ','
        << format_double(p.residual_m) << ',' << (p.outlier ? 1 : 0) << ','
        << (p.failed ? 1 : 0) << '\n';
  out << "summary,,," << format_double(report.mean_m) << ','
      << format_double(report.std_dev_m) << ',' << report.n_failed << '\n';
}

}  // namespace pcbench
