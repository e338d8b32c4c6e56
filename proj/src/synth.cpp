#include "pcbench/synth.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "pcbench/rng.hpp"

namespace fs = std::filesystem;

namespace pcbench {

namespace {

PointCloud build_world(const SynthParams& p) {
  Rng rng(derive_seed(p.seed, 0x1d, 1));
  PointCloud world;
  const double he = p.world_half_extent;

  // Ground: irregular sampling with gentle height variation, so the surface
  // is structured but free of lattice self-similarity.
  for (int i = 0; i < p.ground_points; ++i) {
    const double x = rng.uniform(-he, he);
    const double y = rng.uniform(-he, he);
    const double z = 0.08 * std::sin(0.7 * x) * std::cos(0.5 * y);
    world.points.emplace_back(x, y, z);
  }

  // Four walls with different normals (two x-facing, two y-facing).
  struct Wall {
    Point3 origin, u_dir, v_dir;
    double u_len, v_len;
  };
  const std::vector<Wall> walls = {
      {{-he, -he, 0}, {0, 1, 0}, {0, 0, 1}, 2 * he, 2.2},  // x = -he
      {{he, -he, 0}, {0, 1, 0}, {0, 0, 1}, 2 * he, 2.2},   // x = +he
      {{-he, -he, 0}, {1, 0, 0}, {0, 0, 1}, 2 * he, 2.2},  // y = -he
      {{-he, he, 0}, {1, 0, 0}, {0, 0, 1}, 2 * he, 2.2},   // y = +he
  };
  for (const Wall& w : walls)
    for (int i = 0; i < p.wall_points; ++i) {
      const double u = rng.uniform(0, w.u_len);
      const double v = rng.uniform(0, w.v_len);
      world.points.emplace_back(w.origin + u * w.u_dir + v * w.v_dir);
    }

  // Scattered clusters at various heights: unique landmarks that pin the
  // in-plane degrees of freedom.
  for (int c = 0; c < p.clusters; ++c) {
    const Point3 center(rng.uniform(-0.8 * he, 0.8 * he),
                        rng.uniform(-0.8 * he, 0.8 * he), rng.uniform(0.3, 2.0));
    for (int i = 0; i < p.cluster_points; ++i)
      world.points.emplace_back(center + 0.35 * Point3(rng.normal(), rng.normal(),
                                                       rng.normal()));
  }

  world.frame_label = "world";
  return world;
}

}  // namespace

SynthSequence generate_synthetic_sequence(const SynthParams& params) {
  if (params.scans < 2) throw Error("synthetic sequence needs >= 2 scans");
  const PointCloud world = build_world(params);

  SynthSequence seq;
  seq.spec.name = params.sequence_name;
  seq.spec.seed = params.seed;
  seq.spec.overlap_threshold = params.overlap_threshold;
  seq.spec.bounds_local = PerturbationBounds::local(0.0, params.trans_local_max);
  seq.spec.bounds_global = PerturbationBounds::global(0.0, params.trans_global_max);

  for (int k = 0; k < params.scans; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / params.scans;
    const Point3 center(params.path_radius * std::cos(theta),
                        params.path_radius * std::sin(theta), 0.0);
    PointCloud scan;
    for (const Point3& q : world.points) {
      const double dx = q.x() - center.x(), dy = q.y() - center.y();
      if (dx * dx + dy * dy <= params.crop_radius * params.crop_radius)
        scan.points.push_back(q);
    }
    if (params.noise_sigma > 0) {
      Rng noise(derive_seed(params.seed, 0x5ca, static_cast<std::uint64_t>(k)));
      for (Point3& q : scan.points)
        q += params.noise_sigma * Point3(noise.normal(), noise.normal(), noise.normal());
    }
    char name[32];
    std::snprintf(name, sizeof(name), "scan_%03d.pcd", k);
    scan.frame_label = name;
    seq.spec.cloud_files.emplace_back(name);
    seq.clouds.push_back(std::move(scan));
  }
  return seq;
}

std::string write_synthetic_sequence(const SynthSequence& sequence,
                                     const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < sequence.clouds.size(); ++i)
    save_pcd_file(sequence.clouds[i],
                  (fs::path(out_dir) / sequence.spec.cloud_files[i]).string());
  const std::string spec_path =
      (fs::path(out_dir) / (sequence.spec.name + ".seq")).string();
  SequenceSpec spec = sequence.spec;
  spec.base_dir = out_dir;
  write_sequence_spec(spec, spec_path);
  return spec_path;
}

PointCloud make_structured_cloud(std::uint64_t seed, int target_points) {
  Rng rng(seed);
  PointCloud cloud;
  const int n_clusters = 14;
  const int per_cluster = std::max(20, target_points / (2 * n_clusters));
  for (int c = 0; c < n_clusters; ++c) {
    const Point3 center(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-1.5, 1.5));
    for (int i = 0; i < per_cluster; ++i)
      cloud.points.emplace_back(center +
                                0.3 * Point3(rng.normal(), rng.normal(), rng.normal()));
  }
  // three finite planes with distinct orientations
  for (int pl = 0; pl < 3; ++pl) {
    const Eigen::Vector3d axis = sample_unit_axis(rng);
    const Eigen::Matrix3d basis =
        Eigen::AngleAxisd(rng.uniform(0, std::numbers::pi), axis).toRotationMatrix();
    const Point3 origin(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 1));
    const int n = target_points / 6;
    for (int i = 0; i < n; ++i) {
      const Point3 local(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5), 0.0);
      cloud.points.emplace_back(origin + basis * local);
    }
  }
  cloud.frame_label = "structured";
  return cloud;
}

}  // namespace pcbench
