#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcbench/cloud.hpp"
#include "pcbench/registration.hpp"

namespace pcbench {

class TooFewValues : public Error {
 public:
  TooFewValues() : Error("robust z-score needs at least 3 values") {}
};

struct ZScoreResult {
  std::vector<bool> flags;        // true = outlier (|modified z| > cutoff)
  std::vector<double> survivors;  // values with flags[i] == false, input order
};

// Iglewicz-Hoaglin modified z-score: M_i = 0.6745 (x_i - median) / MAD.
// When the MAD degenerates (< 1e-12) the mean absolute deviation stands in;
// when that is ~0 too, nothing is flagged.
ZScoreResult robust_zscore_filter(const std::vector<double>& values,
                                  double cutoff = 3.5);

struct GtPair {
  std::string source_name;
  std::string target_name;
  const PointCloud* source = nullptr;
  const PointCloud* target = nullptr;
};

struct GtPairResult {
  std::size_t pair_index = 0;
  std::string source_name;
  std::string target_name;
  double residual_m = 0.0;
  bool outlier = false;
  bool failed = false;
};

struct GtReport {
  std::vector<GtPairResult> pairs;
  double mean_m = 0.0;      // over non-outlier, non-failed residuals
  double std_dev_m = 0.0;   // sample standard deviation of the same
  int n_outliers = 0;
  int n_failed = 0;
};

// Refines each already-aligned pair from identity with max_corr_distance set
// to `radius` (the sequence's overlap threshold); the unnormalized metric of
// each refinement is the pair's residual. Residuals are filtered with the
// robust z-score before the mean/std summary. Failed registrations are
// excluded and counted.
GtReport evaluate_ground_truth(const std::vector<GtPair>& pairs,
                               const RegistrarConfig& config, double radius,
                               int jobs = 1);

// Per-pair CSV (pair id, names, residual_m, outlier flag) plus a summary row.
void write_gt_report_csv(const GtReport& report, std::ostream& out);

}  // namespace pcbench
