#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcbench/cloud.hpp"
#include "pcbench/rng.hpp"
#include "pcbench/transform.hpp"

namespace pcbench {

class NoEligiblePairs : public Error {
 public:
  NoEligiblePairs() : Error("no cloud pair reaches the minimum overlap") {}
};

class MalformedRecord : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateId : public ParseError {
 public:
  using ParseError::ParseError;
};

// Per-sequence configuration: clouds stored at ground-truth poses plus the
// dataset-specific knobs (correspondence threshold, perturbation bounds).
struct SequenceSpec {
  std::string name;
  std::vector<std::string> cloud_files;  // relative to base_dir
  std::string base_dir;
  double overlap_threshold = 0.0;        // meters
  PerturbationBounds bounds_local = PerturbationBounds::local(0.0, 0.0);
  PerturbationBounds bounds_global = PerturbationBounds::global(0.0, 0.0);
  std::uint64_t seed = 0;

  void validate() const;
  std::string cloud_path(std::size_t i) const;
  const PerturbationBounds& bounds(Regime regime) const {
    return regime == Regime::local ? bounds_local : bounds_global;
  }
};

SequenceSpec read_sequence_spec(const std::string& path);
void write_sequence_spec(const SequenceSpec& spec, const std::string& path);

struct PairOverlap {
  std::size_t source = 0;  // index into the sequence's cloud list
  std::size_t target = 0;
  double overlap = 0.0;
};

// All ordered pairs i != j with overlap(source=i, target=j); deterministic
// order (i-major, then j).
std::vector<PairOverlap> compute_pairwise_overlaps(const std::vector<PointCloud>& clouds,
                                                   double threshold, int jobs = 1);
std::vector<PairOverlap> compute_pairwise_overlaps(const SequenceSpec& spec,
                                                   int jobs = 1);

// Keeps the i<j direction of each unordered pair: the earlier-indexed cloud
// acts as the source in emitted problems.
std::vector<PairOverlap> canonical_pairs(const std::vector<PairOverlap>& ordered);

// Uniform-coverage pair selection: drop pairs below min_overlap, split
// [min_overlap, max observed] into n_bins equal intervals, draw per_bin pairs
// from each without replacement, and fill any shortfall from the remaining
// eligible pool. Returns exactly min(n_bins*per_bin, eligible) pairs.
std::vector<PairOverlap> select_pairs(const std::vector<PairOverlap>& overlaps,
                                      double min_overlap, Rng& rng, int n_bins = 10,
                                      int per_bin = 10);

struct RegistrationProblem {
  std::uint64_t id = 0;
  std::string source;  // cloud file name
  std::string target;
  double overlap = 0.0;
  RigidTransform initial;  // misplacement to apply to the source cloud
  Regime regime = Regime::local;
};

struct ProblemSet {
  std::string sequence;
  Regime regime = Regime::local;
  std::vector<RegistrationProblem> problems;
};

// One problem per (selected pair, perturbation); ids dense from 0 in
// (pair, perturbation) order. Perturbation streams derive from
// (spec.seed, pair index, perturbation index), so regeneration is exact.
ProblemSet generate_problems(const SequenceSpec& spec, Regime regime,
                             const std::vector<PairOverlap>& pairs,
                             const std::vector<PointCloud>& clouds, int per_pair = 30);

// "<sequence>.txt", with the _global suffix for global problem sets.
std::string problem_file_name(const std::string& sequence, Regime regime);

void write_problem_file(const ProblemSet& set, std::ostream& out);
void write_problem_file(const ProblemSet& set, const std::string& path);
ProblemSet read_problem_file(std::istream& in, const std::string& name_hint = "");
ProblemSet read_problem_file(const std::string& path);

}  // namespace pcbench
