#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcbench/errors.hpp"
#include "pcbench/registration.hpp"
#include "pcbench/transform.hpp"

namespace pcbench {

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("statistic requires a non-empty input") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch() : Error("inputs must have equal length") {}
};

class ZeroVariance : public Error {
 public:
  ZeroVariance() : Error("rank correlation undefined for constant input") {}
};

// Linear interpolation between order statistics at rank 1 + (n-1) q
// (the "type 7" convention).
double quantile(std::vector<double> values, double q);

// Spearman's rank correlation: Pearson correlation of average ranks
// (ties receive averaged ranks). Needs length >= 3.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Histogram {
  std::vector<double> edges;        // n_bins + 1 edges over [min, max]
  std::vector<std::size_t> counts;  // right-open bins, last bin closed
};
Histogram histogram(const std::vector<double>& values, int n_bins);

// One scored benchmark problem; the row schema of the results CSV.
struct ProblemRecord {
  std::uint64_t id = 0;
  std::string sequence;
  Regime regime = Regime::local;
  double overlap = 0.0;
  double initial_delta = 0.0;
  double final_delta = 0.0;
  RegStatus status = RegStatus::failed;
  int iterations = 0;
  double wall_time = 0.0;
  RigidTransform estimated;
};

struct ScoreRow {
  std::string sequence;  // "total" for the pooled row
  std::size_t n = 0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct ScoreTable {
  std::vector<ScoreRow> per_sequence;
  ScoreRow total;
};

// Quantile/mean/std of final_delta per sequence plus a pooled total row.
// Sequences appear in first-seen order.
ScoreTable aggregate(const std::vector<ProblemRecord>& records);

struct CorrelationRow {
  std::string sequence;
  double corr_initial = 0.0;  // final_delta vs initial misalignment (delta of
                              // the initial perturbation)
  double corr_overlap = 0.0;  // final_delta vs overlap
  bool initial_flagged = false;  // |rho| >= 0.5
  bool overlap_flagged = false;
};
std::vector<CorrelationRow> correlation_table(const std::vector<ProblemRecord>& records);

// results CSV:
// problem_id,sequence,regime,overlap,initial_delta,final_delta,status,
// iterations,wall_time_s,t1..t12 (estimated transform)
extern const char* kResultsCsvHeader;
void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const ProblemRecord& record);
std::vector<ProblemRecord> read_results_csv(std::istream& in);
std::vector<ProblemRecord> read_results_csv(const std::string& path);

std::string format_score_table(const ScoreTable& table);
std::string format_correlation_table(const std::vector<CorrelationRow>& rows);
void write_score_csv(const ScoreTable& table, std::ostream& out);
void write_correlation_csv(const std::vector<CorrelationRow>& rows, std::ostream& out);
void write_histogram_csv(const Histogram& h, std::ostream& out);

}  // namespace pcbench
