#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcbench/cloud.hpp"
#include "pcbench/problem.hpp"

namespace pcbench {

// Desk-scale synthetic world: a rough ground plane, a few walls with distinct
// orientations, and scattered point clusters. Scans are crops of the world
// around viewpoints on a circular path, stored at their ground-truth (world)
// poses, optionally with additive per-scan Gaussian noise.
struct SynthParams {
  std::uint64_t seed = 1;
  int scans = 12;
  double noise_sigma = 0.0;       // meters, per coordinate
  double crop_radius = 6.0;       // horizontal scan radius
  double path_radius = 2.5;       // viewpoint circle
  double world_half_extent = 7.0; // keeps the boundary walls inside the crops
  int ground_points = 5200;
  int wall_points = 1300;         // per wall (4 walls)
  int clusters = 12;
  int cluster_points = 130;
  double overlap_threshold = 0.2;    // meters
  double trans_local_max = 1.0;      // meters
  double trans_global_max = 5.0;
  std::string sequence_name = "synth";
};

struct SynthSequence {
  SequenceSpec spec;               // cloud_files filled, base_dir empty
  std::vector<PointCloud> clouds;  // aligned with spec.cloud_files
};

SynthSequence generate_synthetic_sequence(const SynthParams& params);

// Writes scan PCDs plus "<name>.seq" under out_dir; fully deterministic for a
// fixed seed. Returns the sequence spec path.
std::string write_synthetic_sequence(const SynthSequence& sequence,
                                     const std::string& out_dir);

// Compact structured cloud (clusters + tilted planes, irregular sampling)
// for registration fixtures.
PointCloud make_structured_cloud(std::uint64_t seed, int target_points = 3000);

}  // namespace pcbench
