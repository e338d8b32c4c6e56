#include "pcbench/stats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pcbench/cloud.hpp"

namespace pcbench {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput();
  if (q < 0.0 || q > 1.0) throw Error("quantile q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw LengthMismatch();
  if (x.size() < 3) throw Error("spearman needs at least 3 samples");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mx = mean_of(rx), my = mean_of(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ZeroVariance();
  return sxy / std::sqrt(sxx * syy);
}

Histogram histogram(const std::vector<double>& values, int n_bins) {
  if (values.empty()) throw EmptyInput();
  if (n_bins < 1) throw Error("histogram needs n_bins >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;

  Histogram h;
  h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i)
    h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n_bins;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);

  const double width = (hi - lo) / n_bins;
  for (double v : values) {
    int b = width > 0 ? static_cast<int>((v - lo) / width) : 0;
    b = std::clamp(b, 0, n_bins - 1);  // max value falls in the last bin
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

namespace {

ScoreRow make_row(const std::string& name, const std::vector<double>& deltas) {
  ScoreRow row;
  row.sequence = name;
  row.n = deltas.size();
  row.median = quantile(deltas, 0.5);
  row.q75 = quantile(deltas, 0.75);
  row.q95 = quantile(deltas, 0.95);
  row.mean = mean_of(deltas);
  row.std_dev = sample_std(deltas, row.mean);
  return row;
}

}  // namespace

ScoreTable aggregate(const std::vector<ProblemRecord>& records) {
  if (records.empty()) throw EmptyInput();
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_sequence;
  std::vector<double> pooled;
  pooled.reserve(records.size());
  for (const ProblemRecord& r : records) {
    auto it = by_sequence.find(r.sequence);
    if (it == by_sequence.end()) {
      order.push_back(r.sequence);
      it = by_sequence.emplace(r.sequence, std::vector<double>{}).first;
    }
    it->second.push_back(r.final_delta);
    pooled.push_back(r.final_delta);
  }
  ScoreTable table;
  for (const std::string& name : order)
    table.per_sequence.push_back(make_row(name, by_sequence[name]));
  table.total = make_row("total", pooled);
  return table;
}

std::vector<CorrelationRow> correlation_table(const std::vector<ProblemRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_sequence;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = by_sequence.find(records[i].sequence);
    if (it == by_sequence.end()) {
      order.push_back(records[i].sequence);
      it = by_sequence.emplace(records[i].sequence, std::vector<std::size_t>{}).first;
    }
    it->second.push_back(i);
  }

  std::vector<CorrelationRow> rows;
  for (const std::string& name : order) {
    const auto& idx = by_sequence[name];
    std::vector<double> final_d, initial_d, ov;
    for (std::size_t i : idx) {
      final_d.push_back(records[i].final_delta);
      initial_d.push_back(records[i].initial_delta);
      ov.push_back(records[i].overlap);
    }
    CorrelationRow row;
    row.sequence = name;
    try {
      row.corr_initial = spearman(final_d, initial_d);
    } catch (const Error&) {
      row.corr_initial = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      row.corr_overlap = spearman(final_d, ov);
    } catch (const Error&) {
      row.corr_overlap = std::numeric_limits<double>::quiet_NaN();
    }
    row.initial_flagged = std::abs(row.corr_initial) >= 0.5;
    row.overlap_flagged = std::abs(row.corr_overlap) >= 0.5;
    rows.push_back(row);
  }
  return rows;
}

const char* kResultsCsvHeader =
    "problem_id,sequence,regime,overlap,initial_delta,final_delta,status,iterations,"
    "wall_time_s,t1,t2,t3,t4,t5,t6,t7,t8,t9,t10,t11,t12";

void write_results_header(std::ostream& out) { out << kResultsCsvHeader << '\n'; }

void write_result_row(std::ostream& out, const ProblemRecord& r) {
  out << r.id << ',' << r.sequence << ',' << to_string(r.regime) << ','
      << format_double(r.overlap) << ',' << format_double(r.initial_delta) << ','
      << format_double(r.final_delta) << ',' << to_string(r.status) << ','
      << r.iterations << ',' << format_double(r.wall_time);
  for (double v : to_row_major12(r.estimated)) out << ',' << format_double(v);
  out << '\n';
}

std::vector<ProblemRecord> read_results_csv(std::istream& in) {
  std::vector<ProblemRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kResultsCsvHeader)
        throw ParseError("unexpected results CSV header", line_no);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 21)
      throw ParseError("expected 21 CSV fields, got " + std::to_string(fields.size()),
                       line_no);
    auto num = [&](const std::string& tok) {
      double v;
      auto [p, e] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (e != std::errc{} || p != tok.data() + tok.size())
        throw ParseError("bad numeric field '" + tok + "'", line_no);
      return v;
    };
    ProblemRecord r;
    r.id = static_cast<std::uint64_t>(num(fields[0]));
    r.sequence = fields[1];
    r.regime = fields[2] == "global" ? Regime::global : Regime::local;
    r.overlap = num(fields[3]);
    r.initial_delta = num(fields[4]);
    r.final_delta = num(fields[5]);
    r.status = reg_status_from_string(fields[6]);
    r.iterations = static_cast<int>(num(fields[7]));
    r.wall_time = num(fields[8]);
    std::array<double, 12> m;
    for (std::size_t i = 0; i < 12; ++i) m[i] = num(fields[9 + i]);
    r.estimated = from_row_major12(m);
    records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("missing results CSV header", line_no);
  return records;
}

std::vector<ProblemRecord> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open results CSV: " + path);
  return read_results_csv(in);
}

namespace {

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

std::string format_score_table(const ScoreTable& table) {
  std::ostringstream out;
  std::size_t name_w = 8;
  for (const ScoreRow& r : table.per_sequence) name_w = std::max(name_w, r.sequence.size());
  auto row = [&](const ScoreRow& r) {
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << r.sequence
        << std::right << std::setw(7) << r.n << std::setw(10) << fixed4(r.median)
        << std::setw(10) << fixed4(r.q75) << std::setw(10) << fixed4(r.q95)
        << std::setw(10) << fixed4(r.mean) << std::setw(10) << fixed4(r.std_dev)
        << '\n';
  };
  out << std::left << std::setw(static_cast<int>(name_w) + 2) << "sequence"
      << std::right << std::setw(7) << "n" << std::setw(10) << "median"
      << std::setw(10) << "q0.75" << std::setw(10) << "q0.95" << std::setw(10)
      << "mean" << std::setw(10) << "std" << '\n';
  for (const ScoreRow& r : table.per_sequence) row(r);
  row(table.total);
  return out.str();
}

std::string format_correlation_table(const std::vector<CorrelationRow>& rows) {
  std::ostringstream out;
  std::size_t name_w = 8;
  for (const CorrelationRow& r : rows) name_w = std::max(name_w, r.sequence.size());
  out << std::left << std::setw(static_cast<int>(name_w) + 2) << "sequence"
      << std::right << std::setw(16) << "corr_initial" << std::setw(14)
      << "corr_overlap" << '\n';
  for (const CorrelationRow& r : rows) {
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << r.sequence
        << std::right << std::setw(14) << fixed4(r.corr_initial)
        << (r.initial_flagged ? " *" : "  ") << std::setw(12)
        << fixed4(r.corr_overlap) << (r.overlap_flagged ? " *" : "  ") << '\n';
  }
  out << "(* |rho| >= 0.5)\n";
  return out.str();
}

void write_score_csv(const ScoreTable& table, std::ostream& out) {
  out << "sequence,n,median,q75,q95,mean,std\n";
  auto row = [&](const ScoreRow& r) {
    out << r.sequence << ',' << r.n << ',' << format_double(r.median) << ','
        << format_double(r.q75) << ',' << format_double(r.q95) << ','
        << format_double(r.mean) << ',' << format_double(r.std_dev) << '\n';
  };
  for (const ScoreRow& r : table.per_sequence) row(r);
  row(table.total);
}

void write_correlation_csv(const std::vector<CorrelationRow>& rows, std::ostream& out) {
  out << "sequence,corr_initial_misalignment,corr_overlap,initial_flagged,overlap_flagged\n";
  for (const CorrelationRow& r : rows)
    out << r.sequence << ',' << format_double(r.corr_initial) << ','
        << format_double(r.corr_overlap) << ',' << (r.initial_flagged ? 1 : 0) << ','
        << (r.overlap_flagged ? 1 : 0) << '\n';
}

void write_histogram_csv(const Histogram& h, std::ostream& out) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ','
        << h.counts[i] << '\n';
}

}  // namespace pcbench
