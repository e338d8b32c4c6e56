#pragma once

#include <Eigen/Core>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pcbench/cloud.hpp"
#include "pcbench/transform.hpp"

namespace pcbench {

class DegenerateGeometry : public Error {
 public:
  DegenerateGeometry() : Error("correspondence geometry is rank-deficient") {}
};

class TooFewPoints : public Error {
 public:
  using Error::Error;
  TooFewPoints() : Error("cloud too small for the requested neighborhood") {}
};

enum class Algorithm { icp, gicp };
const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct RegistrarConfig {
  double voxel_leaf = 0.1;        // meters
  int max_iterations = 30;
  double outlier_factor = 3.0;    // keep distance <= factor * median
  double max_corr_distance = std::numeric_limits<double>::infinity();
  double convergence_eps = 1e-6;  // rotation angle + translation norm of the update
  Algorithm algorithm = Algorithm::icp;
  int gicp_k_neighbors = 20;
  double gicp_cov_epsilon = 1e-3;

  void validate() const;
};

enum class RegStatus { converged, max_iters, failed };
const char* to_string(RegStatus s);
RegStatus reg_status_from_string(const std::string& name);

struct RegistrationResult {
  RigidTransform estimated;  // maps source toward target; = initial on failure
  RegStatus status = RegStatus::failed;
  int iterations = 0;
  double wall_time = 0.0;    // seconds
  double residual = std::numeric_limits<double>::infinity();  // mean corr. distance at exit
  std::string failure_reason;
};

struct CorrespondenceSet {
  std::vector<Point3> source;  // at their current (transformed) positions
  std::vector<Point3> target;
  std::vector<double> distance;
  std::vector<std::uint32_t> source_index;  // into the downsampled source
  std::vector<std::uint32_t> target_index;  // into the downsampled target

  std::size_t size() const { return source.size(); }
  bool empty() const { return source.empty(); }
};

// Weighted least-squares rigid alignment via cross-covariance SVD with
// determinant sign correction. Pass an empty weight span for equal weights.
// Throws DegenerateGeometry when the cross-covariance has rank < 2.
RigidTransform svd_rigid_align(std::span<const Point3> source,
                               std::span<const Point3> target,
                               std::span<const double> weights = {});

// Keeps pairs with distance <= factor * median(distance).
CorrespondenceSet median_outlier_filter(const CorrespondenceSet& input,
                                        double factor);

// Per-point covariance by PCA over the k nearest neighbors, eigenvalues
// replaced by (1, 1, epsilon) in the eigenbasis (plane-to-plane model).
std::vector<Eigen::Matrix3d> estimate_covariances(const PointCloud& cloud, int k,
                                                  double epsilon);

RegistrationResult icp(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& initial, const RegistrarConfig& config);

RegistrationResult gicp(const PointCloud& source, const PointCloud& target,
                        const RigidTransform& initial, const RegistrarConfig& config);

RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const RigidTransform& initial,
                                   const RegistrarConfig& config);

// Full plane-to-plane objective sum d_i' (Ct_i + R Cs_i R')^-1 d_i with
// d_i = R p_i + t - q_i, and its exact gradient in the (omega, dt) tangent
// coordinates of the left perturbation (exp(omega^) R, t + dt). Exposed so the
// solver's derivatives can be checked against finite differences.
double gicp_cost(std::span<const Point3> source, std::span<const Point3> target,
                 std::span<const Eigen::Matrix3d> source_covs,
                 std::span<const Eigen::Matrix3d> target_covs,
                 const RigidTransform& t);

Eigen::Matrix<double, 6, 1> gicp_gradient(std::span<const Point3> source,
                                          std::span<const Point3> target,
                                          std::span<const Eigen::Matrix3d> source_covs,
                                          std::span<const Eigen::Matrix3d> target_covs,
                                          const RigidTransform& t);

}  // namespace pcbench
