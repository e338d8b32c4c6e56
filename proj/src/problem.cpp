#include "pcbench/problem.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "pcbench/kdtree.hpp"
#include "pcbench/metrics.hpp"

namespace fs = std::filesystem;

namespace pcbench {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line, const char* what) {
  double v;
  auto [p, e] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (e != std::errc{} || p != tok.data() + tok.size())
    throw MalformedRecord(std::string("bad ") + what + " token '" + tok + "'", line);
  return v;
}

}  // namespace

void SequenceSpec::validate() const {
  if (name.empty()) throw Error("sequence spec needs a name");
  if (cloud_files.size() < 2) throw Error("sequence '" + name + "' needs >= 2 clouds");
  if (overlap_threshold <= 0)
    throw Error("sequence '" + name + "' needs overlap_threshold > 0");
  bounds_local.validate();
  bounds_global.validate();
}

std::string SequenceSpec::cloud_path(std::size_t i) const {
  if (base_dir.empty()) return cloud_files.at(i);
  return (fs::path(base_dir) / cloud_files.at(i)).string();
}

SequenceSpec read_sequence_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sequence spec: " + path);
  SequenceSpec spec;
  spec.base_dir = fs::path(path).parent_path().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key_toks = tokens_of(line.substr(0, eq));
    auto values = tokens_of(line.substr(eq + 1));
    if (key_toks.size() != 1 || values.empty())
      throw MalformedRecord("expected 'key = value...'", line_no);
    const std::string& key = key_toks[0];
    auto one = [&]() -> const std::string& {
      if (values.size() != 1)
        throw MalformedRecord("key '" + key + "' takes one value", line_no);
      return values[0];
    };
    auto range = [&](double scale, double& lo, double& hi) {
      if (values.size() != 2)
        throw MalformedRecord("key '" + key + "' takes 'min max'", line_no);
      lo = scale * to_double(values[0], line_no, key.c_str());
      hi = scale * to_double(values[1], line_no, key.c_str());
    };
    if (key == "name") {
      spec.name = one();
    } else if (key == "seed") {
      spec.seed = std::stoull(one());
    } else if (key == "overlap_threshold") {
      spec.overlap_threshold = to_double(one(), line_no, "overlap_threshold");
    } else if (key == "clouds") {
      spec.cloud_files = values;
    } else if (key == "rot_local_deg") {
      range(kDegToRad, spec.bounds_local.rot_min, spec.bounds_local.rot_max);
    } else if (key == "trans_local") {
      range(1.0, spec.bounds_local.trans_min, spec.bounds_local.trans_max);
    } else if (key == "rot_global_deg") {
      range(kDegToRad, spec.bounds_global.rot_min, spec.bounds_global.rot_max);
    } else if (key == "trans_global") {
      range(1.0, spec.bounds_global.trans_min, spec.bounds_global.trans_max);
    } else {
      throw MalformedRecord("unknown sequence spec key '" + key + "'", line_no);
    }
  }
  spec.bounds_local.regime = Regime::local;
  spec.bounds_global.regime = Regime::global;
  spec.validate();
  return spec;
}

void write_sequence_spec(const SequenceSpec& spec, const std::string& path) {
  spec.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open sequence spec for writing: " + path);
  out << "# pcbench sequence spec\n";
  out << "name = " << spec.name << "\n";
  out << "seed = " << spec.seed << "\n";
  out << "overlap_threshold = " << format_double(spec.overlap_threshold) << "\n";
  out << "rot_local_deg = " << format_double(spec.bounds_local.rot_min / kDegToRad)
      << ' ' << format_double(spec.bounds_local.rot_max / kDegToRad) << "\n";
  out << "trans_local = " << format_double(spec.bounds_local.trans_min) << ' '
      << format_double(spec.bounds_local.trans_max) << "\n";
  out << "rot_global_deg = " << format_double(spec.bounds_global.rot_min / kDegToRad)
      << ' ' << format_double(spec.bounds_global.rot_max / kDegToRad) << "\n";
  out << "trans_global = " << format_double(spec.bounds_global.trans_min) << ' '
      << format_double(spec.bounds_global.trans_max) << "\n";
  out << "clouds =";
  for (const auto& f : spec.cloud_files) out << ' ' << f;
  out << "\n";
}

std::vector<PairOverlap> compute_pairwise_overlaps(const std::vector<PointCloud>& clouds,
                                                   double threshold, int jobs) {
  const std::size_t n = clouds.size();
  std::vector<KdIndex> indices;
  indices.reserve(n);
  for (const PointCloud& c : clouds) indices.emplace_back(c);

  std::vector<PairOverlap> result;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) result.push_back({i, j, 0.0});

  auto eval = [&](std::size_t k) {
    PairOverlap& p = result[k];
    p.overlap = overlap(clouds[p.source], indices[p.target], threshold).fraction;
  };
  jobs = std::max(jobs, 1);
  if (jobs == 1 || result.size() < 2) {
    for (std::size_t k = 0; k < result.size(); ++k) eval(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < result.size();
             k = next.fetch_add(1))
          eval(k);
      });
    for (auto& t : pool) t.join();
  }
  return result;
}

std::vector<PairOverlap> compute_pairwise_overlaps(const SequenceSpec& spec, int jobs) {
  spec.validate();
  std::vector<PointCloud> clouds;
  clouds.reserve(spec.cloud_files.size());
  for (std::size_t i = 0; i < spec.cloud_files.size(); ++i)
    clouds.push_back(load_cloud_file(spec.cloud_path(i)));
  return compute_pairwise_overlaps(clouds, spec.overlap_threshold, jobs);
}

std::vector<PairOverlap> canonical_pairs(const std::vector<PairOverlap>& ordered) {
  std::vector<PairOverlap> out;
  for (const PairOverlap& p : ordered)
    if (p.source < p.target) out.push_back(p);
  return out;
}

std::vector<PairOverlap> select_pairs(const std::vector<PairOverlap>& overlaps,
                                      double min_overlap, Rng& rng, int n_bins,
                                      int per_bin) {
  std::vector<PairOverlap> eligible;
  for (const PairOverlap& p : overlaps)
    if (p.overlap >= min_overlap) eligible.push_back(p);
  if (eligible.empty()) throw NoEligiblePairs();

  double max_observed = min_overlap;
  for (const PairOverlap& p : eligible) max_observed = std::max(max_observed, p.overlap);
  const double width = (max_observed - min_overlap) / n_bins;

  std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(n_bins));
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    int b = width > 0 ? static_cast<int>((eligible[i].overlap - min_overlap) / width)
                      : 0;
    b = std::clamp(b, 0, n_bins - 1);
    bins[static_cast<std::size_t>(b)].push_back(i);
  }

  const std::size_t want = std::min(eligible.size(),
                                    static_cast<std::size_t>(n_bins) *
                                        static_cast<std::size_t>(per_bin));
  std::vector<bool> taken(eligible.size(), false);
  std::vector<std::size_t> picked;
  picked.reserve(want);

  auto draw_from = [&](std::vector<std::size_t>& pool, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      taken[pool[i]] = true;
      picked.push_back(pool[i]);
    }
  };

  for (auto& bin : bins)
    draw_from(bin, std::min(bin.size(), static_cast<std::size_t>(per_bin)));

  if (picked.size() < want) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < eligible.size(); ++i)
      if (!taken[i]) rest.push_back(i);
    draw_from(rest, want - picked.size());
  }

  std::vector<PairOverlap> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(eligible[i]);
  return out;
}

ProblemSet generate_problems(const SequenceSpec& spec, Regime regime,
                             const std::vector<PairOverlap>& pairs,
                             const std::vector<PointCloud>& clouds, int per_pair) {
  const PerturbationBounds& bounds = spec.bounds(regime);
  bounds.validate();

  ProblemSet set;
  set.sequence = spec.name;
  set.regime = regime;
  set.problems.reserve(pairs.size() * static_cast<std::size_t>(per_pair));
  std::uint64_t id = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const PairOverlap& pair = pairs[k];
    const Point3 pivot = centroid(clouds.at(pair.source));
    for (int j = 0; j < per_pair; ++j) {
      Rng rng(derive_seed(spec.seed, k, static_cast<std::uint64_t>(j)));
      RegistrationProblem problem;
      problem.id = id++;
      problem.source = spec.cloud_files.at(pair.source);
      problem.target = spec.cloud_files.at(pair.target);
      problem.overlap = pair.overlap;
      problem.initial = sample_perturbation(bounds, pivot, rng);
      problem.regime = regime;
      set.problems.push_back(std::move(problem));
    }
  }
  return set;
}

std::string problem_file_name(const std::string& sequence, Regime regime) {
  return regime == Regime::local ? sequence + ".txt" : sequence + "_global.txt";
}

namespace {
constexpr const char* kProblemHeader =
    "id source target overlap t1 t2 t3 t4 t5 t6 t7 t8 t9 t10 t11 t12";
}

void write_problem_file(const ProblemSet& set, std::ostream& out) {
  out << "# pcbench registration problems\n";
  out << "# sequence " << set.sequence << "\n";
  out << "# regime " << to_string(set.regime) << "\n";
  out << kProblemHeader << "\n";
  for (const RegistrationProblem& p : set.problems) {
    out << p.id << ' ' << p.source << ' ' << p.target << ' '
        << format_double(p.overlap);
    for (double v : to_row_major12(p.initial)) out << ' ' << format_double(v);
    out << '\n';
  }
}

void write_problem_file(const ProblemSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open problem file for writing: " + path);
  write_problem_file(set, out);
}

ProblemSet read_problem_file(std::istream& in, const std::string& name_hint) {
  ProblemSet set;
  set.sequence = name_hint;
  if (name_hint.ends_with("_global")) {
    set.regime = Regime::global;
    set.sequence = name_hint.substr(0, name_hint.size() - 7);
  }
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<bool> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks[0][0] == '#') {
      if (toks.size() >= 3 && toks[1] == "sequence") set.sequence = toks[2];
      if (toks.size() >= 3 && toks[1] == "regime")
        set.regime = toks[2] == "global" ? Regime::global : Regime::local;
      continue;
    }
    if (!header_seen) {
      std::ostringstream joined;
      for (std::size_t i = 0; i < toks.size(); ++i)
        joined << (i ? " " : "") << toks[i];
      if (joined.str() != kProblemHeader)
        throw MalformedRecord("expected header '" + std::string(kProblemHeader) + "'",
                              line_no);
      header_seen = true;
      continue;
    }
    if (toks.size() != 16)
      throw MalformedRecord("expected 16 fields, got " + std::to_string(toks.size()),
                            line_no);

    RegistrationProblem p;
    p.id = static_cast<std::uint64_t>(to_double(toks[0], line_no, "id"));
    p.source = toks[1];
    p.target = toks[2];
    p.overlap = to_double(toks[3], line_no, "overlap");
    if (!(p.overlap >= 0.0 && p.overlap <= 1.0))
      throw MalformedRecord("overlap outside [0, 1]", line_no);
    std::array<double, 12> m;
    for (std::size_t i = 0; i < 12; ++i)
      m[i] = to_double(toks[4 + i], line_no, "transform");
    try {
      p.initial = from_row_major12(m);
    } catch (const NotARotation&) {
      throw NotARotation("problem record is not a rotation (line " +
                         std::to_string(line_no) + ")");
    }
    p.regime = set.regime;
    if (p.id < seen_ids.size() && seen_ids[p.id])
      throw DuplicateId("duplicate problem id " + std::to_string(p.id), line_no);
    if (p.id >= seen_ids.size()) seen_ids.resize(p.id + 1, false);
    seen_ids[p.id] = true;
    set.problems.push_back(std::move(p));
  }
  if (!header_seen) throw MalformedRecord("missing problem file header", line_no);
  return set;
}

ProblemSet read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file: " + path);
  return read_problem_file(in, fs::path(path).stem().string());
}

}  // namespace pcbench
