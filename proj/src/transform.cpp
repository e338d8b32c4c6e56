#include "pcbench/transform.hpp"

#include <cmath>

namespace pcbench {

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
  Eigen::Matrix3d rt = t.rotation.transpose();
  return {rt, -(rt * t.translation)};
}

PointCloud apply(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.frame_label = cloud.frame_label;
  out.points.reserve(cloud.size());
  for (const Point3& p : cloud.points) out.points.emplace_back(t * p);
  return out;
}

bool is_rotation(const Eigen::Matrix3d& m, double tol) {
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

double rotation_angle(const RigidTransform& t) {
  return Eigen::AngleAxisd(t.rotation).angle();
}

RigidTransform axis_angle_transform(const Eigen::Vector3d& axis, double angle,
                                    const Eigen::Vector3d& translation) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  t.translation = translation;
  return t;
}

std::array<double, 12> to_row_major12(const RigidTransform& t) {
  std::array<double, 12> v;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) v[static_cast<std::size_t>(r * 4 + c)] = t.rotation(r, c);
    v[static_cast<std::size_t>(r * 4 + 3)] = t.translation(r);
  }
  return v;
}

RigidTransform from_row_major12(std::span<const double, 12> values) {
  RigidTransform t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = values[static_cast<std::size_t>(r * 4 + c)];
    t.translation(r) = values[static_cast<std::size_t>(r * 4 + 3)];
  }
  if (!is_rotation(t.rotation, 1e-6))
    throw NotARotation("3x3 block violates orthogonality/determinant tolerance 1e-6");
  return t;
}

const char* to_string(Regime r) { return r == Regime::local ? "local" : "global"; }

Eigen::Vector3d sample_unit_axis(Rng& rng) {
  for (;;) {
    Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    const double n = v.norm();
    if (n >= 1e-6) return v / n;
  }
}

RigidTransform sample_perturbation(const PerturbationBounds& bounds,
                                   const Point3& pivot, Rng& rng) {
  bounds.validate();
  const Eigen::Vector3d rot_axis = sample_unit_axis(rng);
  const double angle = rng.uniform(bounds.rot_min, bounds.rot_max);
  const Eigen::Vector3d trans_dir = sample_unit_axis(rng);
  const double magnitude = rng.uniform(bounds.trans_min, bounds.trans_max);

  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, rot_axis).toRotationMatrix();
  // Rotation acts about the pivot; the pivot itself moves only by the
  // sampled translation.
  t.translation = pivot - t.rotation * pivot + magnitude * trans_dir;
  return t;
}

}  // namespace pcbench
