#include "pcbench/registration.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "pcbench/kdtree.hpp"

namespace pcbench {

const char* to_string(Algorithm a) { return a == Algorithm::icp ? "icp" : "gicp"; }

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "icp") return Algorithm::icp;
  if (name == "gicp") return Algorithm::gicp;
  throw Error("unknown algorithm '" + name + "' (expected icp or gicp)");
}

const char* to_string(RegStatus s) {
  switch (s) {
    case RegStatus::converged: return "converged";
    case RegStatus::max_iters: return "max_iters";
    default: return "failed";
  }
}

RegStatus reg_status_from_string(const std::string& name) {
  if (name == "converged") return RegStatus::converged;
  if (name == "max_iters") return RegStatus::max_iters;
  if (name == "failed") return RegStatus::failed;
  throw Error("unknown registration status '" + name + "'");
}

void RegistrarConfig::validate() const {
  if (voxel_leaf <= 0) throw Error("voxel_leaf must be > 0");
  if (max_iterations < 1) throw Error("max_iterations must be >= 1");
  if (outlier_factor <= 0) throw Error("outlier_factor must be > 0");
  if (max_corr_distance <= 0) throw Error("max_corr_distance must be > 0");
  if (convergence_eps <= 0) throw Error("convergence_eps must be > 0");
  if (gicp_k_neighbors < 3) throw Error("gicp_k_neighbors must be >= 3");
  if (gicp_cov_epsilon <= 0) throw Error("gicp_cov_epsilon must be > 0");
}

RigidTransform svd_rigid_align(std::span<const Point3> source,
                               std::span<const Point3> target,
                               std::span<const double> weights) {
  if (source.size() != target.size() || source.empty())
    throw Error("svd_rigid_align needs equally sized, non-empty point spans");
  if (!weights.empty() && weights.size() != source.size())
    throw Error("weight count does not match correspondence count");

  const std::size_t n = source.size();
  double wsum = 0.0;
  Point3 s_bar = Point3::Zero(), t_bar = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    s_bar += w * source[i];
    t_bar += w * target[i];
    wsum += w;
  }
  if (wsum <= 0) throw Error("weights must have positive sum");
  s_bar /= wsum;
  t_bar /= wsum;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    cross += w * (source[i] - s_bar) * (target[i] - t_bar).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(1) <= 1e-12 * sv(0)) throw DegenerateGeometry();

  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0;

  RigidTransform result;
  result.rotation = v * d * u.transpose();
  result.translation = t_bar - result.rotation * s_bar;
  return result;
}

CorrespondenceSet median_outlier_filter(const CorrespondenceSet& input,
                                        double factor) {
  if (input.empty()) return input;
  std::vector<double> sorted = input.distance;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = (n % 2 == 1)
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double cutoff = factor * median;

  CorrespondenceSet out;
  for (std::size_t i = 0; i < n; ++i) {
    if (input.distance[i] <= cutoff) {
      out.source.push_back(input.source[i]);
      out.target.push_back(input.target[i]);
      out.distance.push_back(input.distance[i]);
      out.source_index.push_back(input.source_index[i]);
      out.target_index.push_back(input.target_index[i]);
    }
  }
  return out;
}

std::vector<Eigen::Matrix3d> estimate_covariances(const PointCloud& cloud, int k,
                                                  double epsilon) {
  if (k < 3) throw TooFewPoints("k must be >= 3");
  if (cloud.size() < static_cast<std::size_t>(k))
    throw TooFewPoints("cloud has " + std::to_string(cloud.size()) +
                       " points, need at least " + std::to_string(k));
  const KdIndex index(cloud);
  std::vector<Eigen::Matrix3d> covs;
  covs.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    const auto nn = index.knearest(p, static_cast<std::uint32_t>(k));
    Point3 mean = Point3::Zero();
    for (const auto& hit : nn) mean += cloud.points[hit.index];
    mean /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& hit : nn) {
      const Point3 d = cloud.points[hit.index] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nn.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);  // ascending
    const Eigen::Matrix3d basis = eig.eigenvectors();
    covs.emplace_back(basis * Eigen::Vector3d(epsilon, 1.0, 1.0).asDiagonal() *
                      basis.transpose());
  }
  return covs;
}

namespace {

CorrespondenceSet associate(const std::vector<Point3>& transformed_source,
                            const PointCloud& target, const KdIndex& index,
                            double max_corr) {
  CorrespondenceSet set;
  for (std::size_t i = 0; i < transformed_source.size(); ++i) {
    const auto hit = index.nearest(transformed_source[i]);
    if (hit.distance > max_corr) continue;
    set.source.push_back(transformed_source[i]);
    set.target.push_back(target.points[hit.index]);
    set.distance.push_back(hit.distance);
    set.source_index.push_back(static_cast<std::uint32_t>(i));
    set.target_index.push_back(hit.index);
  }
  return set;
}

double transform_change(const RigidTransform& before, const RigidTransform& after) {
  const RigidTransform delta = compose(after, invert(before));
  return rotation_angle(delta) + delta.translation.norm();
}

double mean_distance_under(const CorrespondenceSet& set, const RigidTransform& t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    sum += (t * set.source[i] - set.target[i]).norm();
  return sum / static_cast<double>(set.size());
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

RigidTransform apply_tangent_step(const Eigen::Matrix<double, 6, 1>& x,
                                  const RigidTransform& t) {
  RigidTransform out;
  const Eigen::Vector3d omega = x.head<3>();
  const double angle = omega.norm();
  Eigen::Matrix3d rot_step = Eigen::Matrix3d::Identity();
  if (angle > 0)
    rot_step = Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
  out.rotation = rot_step * t.rotation;
  out.translation = t.translation + x.tail<3>();
  return out;
}

}  // namespace

RegistrationResult icp(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& initial, const RegistrarConfig& config) {
  config.validate();
  if (source.empty() || target.empty()) throw EmptyCloud();
  const auto start = std::chrono::steady_clock::now();

  const PointCloud src = voxel_downsample(source, config.voxel_leaf);
  const PointCloud tgt = voxel_downsample(target, config.voxel_leaf);
  const KdIndex index(tgt);

  RegistrationResult result;
  result.estimated = initial;
  result.status = RegStatus::max_iters;
  RigidTransform current = initial;

  for (int it = 1; it <= config.max_iterations; ++it) {
    result.iterations = it;
    std::vector<Point3> moved(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) moved[i] = current * src.points[i];

    CorrespondenceSet corr = associate(moved, tgt, index, config.max_corr_distance);
    if (corr.empty()) {
      result.status = RegStatus::failed;
      result.failure_reason = "NoCorrespondences";
      result.estimated = initial;
      break;
    }
    corr = median_outlier_filter(corr, config.outlier_factor);

    RigidTransform update;
    try {
      update = svd_rigid_align(corr.source, corr.target);
    } catch (const DegenerateGeometry&) {
      result.status = RegStatus::failed;
      result.failure_reason = "DegenerateGeometry";
      result.estimated = initial;
      break;
    }
    current = compose(update, current);
    result.estimated = current;
    result.residual = mean_distance_under(corr, update);

    if (rotation_angle(update) + update.translation.norm() < config.convergence_eps) {
      result.status = RegStatus::converged;
      break;
    }
  }

  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double gicp_cost(std::span<const Point3> source, std::span<const Point3> target,
                 std::span<const Eigen::Matrix3d> source_covs,
                 std::span<const Eigen::Matrix3d> target_covs,
                 const RigidTransform& t) {
  double cost = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d d = t * source[i] - target[i];
    const Eigen::Matrix3d m =
        target_covs[i] + t.rotation * source_covs[i] * t.rotation.transpose();
    cost += d.dot(m.inverse() * d);
  }
  return cost;
}

Eigen::Matrix<double, 6, 1> gicp_gradient(std::span<const Point3> source,
                                          std::span<const Point3> target,
                                          std::span<const Eigen::Matrix3d> source_covs,
                                          std::span<const Eigen::Matrix3d> target_covs,
                                          const RigidTransform& t) {
  Eigen::Matrix<double, 6, 1> grad = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d v = t.rotation * source[i];
    const Eigen::Vector3d d = v + t.translation - target[i];
    const Eigen::Matrix3d a = t.rotation * source_covs[i] * t.rotation.transpose();
    const Eigen::Matrix3d m = target_covs[i] + a;
    const Eigen::Vector3d u = m.inverse() * d;
    // d-term: 2 v x u; M-term: -2 (A u) x u  (M varies with R through A)
    grad.head<3>() += 2.0 * (v.cross(u) - (a * u).cross(u));
    grad.tail<3>() += 2.0 * u;
  }
  return grad;
}

RegistrationResult gicp(const PointCloud& source, const PointCloud& target,
                        const RigidTransform& initial, const RegistrarConfig& config) {
  config.validate();
  if (source.empty() || target.empty()) throw EmptyCloud();
  const auto start = std::chrono::steady_clock::now();

  RegistrationResult result;
  result.estimated = initial;

  const PointCloud src = voxel_downsample(source, config.voxel_leaf);
  const PointCloud tgt = voxel_downsample(target, config.voxel_leaf);
  if (src.size() < static_cast<std::size_t>(config.gicp_k_neighbors) ||
      tgt.size() < static_cast<std::size_t>(config.gicp_k_neighbors)) {
    result.status = RegStatus::failed;
    result.failure_reason = "TooFewPoints";
    return result;
  }
  const std::vector<Eigen::Matrix3d> src_covs =
      estimate_covariances(src, config.gicp_k_neighbors, config.gicp_cov_epsilon);
  const std::vector<Eigen::Matrix3d> tgt_covs =
      estimate_covariances(tgt, config.gicp_k_neighbors, config.gicp_cov_epsilon);
  const KdIndex index(tgt);

  result.status = RegStatus::max_iters;
  RigidTransform current = initial;

  for (int it = 1; it <= config.max_iterations; ++it) {
    result.iterations = it;
    std::vector<Point3> moved(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) moved[i] = current * src.points[i];

    CorrespondenceSet corr = associate(moved, tgt, index, config.max_corr_distance);
    if (corr.empty()) {
      result.status = RegStatus::failed;
      result.failure_reason = "NoCorrespondences";
      result.estimated = initial;
      break;
    }
    corr = median_outlier_filter(corr, config.outlier_factor);

    // Gather the associated pairs in the *source-local* frame so the inner
    // solver optimizes the full transform directly.
    const std::size_t m = corr.size();
    std::vector<Point3> local_src(m), assoc_tgt(m);
    std::vector<Eigen::Matrix3d> pair_src_covs(m), pair_tgt_covs(m);
    for (std::size_t i = 0; i < m; ++i) {
      local_src[i] = src.points[corr.source_index[i]];
      assoc_tgt[i] = tgt.points[corr.target_index[i]];
      pair_src_covs[i] = src_covs[corr.source_index[i]];
      pair_tgt_covs[i] = tgt_covs[corr.target_index[i]];
    }

    // Damped Gauss-Newton on the plane-to-plane objective: each inner
    // iteration re-linearizes at the current state and grows the damping
    // until the step decreases the full cost. An iteration that cannot
    // decrease it counts as an increase; three in a row means divergence.
    const RigidTransform before = current;
    double cost = gicp_cost(local_src, assoc_tgt, pair_src_covs, pair_tgt_covs, current);
    double lambda = -1.0;
    int consecutive_increases = 0;
    bool diverged = false;
    for (int inner = 0; inner < 10; ++inner) {
      Eigen::Matrix<double, 6, 6> hessian = Eigen::Matrix<double, 6, 6>::Zero();
      for (std::size_t i = 0; i < m; ++i) {
        const Eigen::Vector3d v = current.rotation * local_src[i];
        const Eigen::Matrix3d w =
            (pair_tgt_covs[i] +
             current.rotation * pair_src_covs[i] * current.rotation.transpose())
                .inverse();
        Eigen::Matrix<double, 3, 6> jac;
        jac.block<3, 3>(0, 0) = -skew(v);
        jac.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
        hessian += jac.transpose() * w * jac;
      }
      const Eigen::Matrix<double, 6, 1> grad_half =
          0.5 * gicp_gradient(local_src, assoc_tgt, pair_src_covs, pair_tgt_covs,
                              current);
      if (grad_half.norm() < 1e-14) break;
      if (lambda < 0) lambda = 1e-6 * std::max(hessian.trace() / 6.0, 1e-9);

      bool accepted = false;
      bool stationary = false;
      for (int growth = 0; growth < 8; ++growth) {
        const Eigen::Matrix<double, 6, 6> damped =
            hessian + lambda * Eigen::Matrix<double, 6, 6>::Identity();
        const Eigen::Matrix<double, 6, 1> step = damped.ldlt().solve(-grad_half);
        if (step.norm() < 1e-12) {
          stationary = true;
          break;
        }
        const RigidTransform candidate = apply_tangent_step(step, current);
        const double candidate_cost =
            gicp_cost(local_src, assoc_tgt, pair_src_covs, pair_tgt_covs, candidate);
        if (candidate_cost < cost) {
          current = candidate;
          cost = candidate_cost;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          if (step.norm() < 1e-10) stationary = true;
          break;
        }
        lambda *= 10.0;
      }
      if (accepted) {
        consecutive_increases = 0;
      } else if (!stationary && ++consecutive_increases >= 3) {
        diverged = true;
        break;
      }
      if (stationary) break;
    }
    if (diverged) {
      result.status = RegStatus::failed;
      result.failure_reason = "SolverDiverged";
      result.estimated = initial;
      break;
    }

    result.estimated = current;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      sum += (current * local_src[i] - assoc_tgt[i]).norm();
    result.residual = sum / static_cast<double>(m);

    if (transform_change(before, current) < config.convergence_eps) {
      result.status = RegStatus::converged;
      break;
    }
  }

  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const RigidTransform& initial,
                                   const RegistrarConfig& config) {
  return config.algorithm == Algorithm::icp ? icp(source, target, initial, config)
                                            : gicp(source, target, initial, config);
}

}  // namespace pcbench
