#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcbench/errors.hpp"

namespace pcbench {

using Point3 = Eigen::Vector3d;

// Ordered point list. Point order is stable: index i is the homologous
// correspondence key used by the error metric, so no operation may reorder
// points except where documented (voxel_downsample).
struct PointCloud {
  std::vector<Point3> points;
  std::string frame_label;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

class EmptyCloud : public Error {
 public:
  EmptyCloud() : Error("operation requires a non-empty cloud") {}
};

class DegenerateCloud : public Error {
 public:
  DegenerateCloud() : Error("cloud has zero extent (all points identical)") {}
};

class NonPositiveLeaf : public Error {
 public:
  NonPositiveLeaf() : Error("voxel leaf size must be > 0") {}
};

class MalformedHeader : public ParseError {
 public:
  using ParseError::ParseError;
};

class CountMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

class BadRow : public ParseError {
 public:
  using ParseError::ParseError;
};

struct PcdParseResult {
  PointCloud cloud;
  std::size_t dropped_nonfinite = 0;
};

// ASCII PCD v0.7 reader. Fields beyond x/y/z are tolerated and ignored;
// non-finite points are dropped and counted. Binary payloads are rejected.
PcdParseResult parse_pcd(std::istream& in);
PcdParseResult parse_pcd(const std::string& text);

// Emits VERSION .7 / FIELDS x y z / DATA ascii with round-trip-safe digits;
// output is byte-deterministic. Throws EmptyCloud.
void serialize_pcd(const PointCloud& cloud, std::ostream& out);
std::string serialize_pcd(const PointCloud& cloud);

// Whitespace-separated "x y z" per line ('#' comments allowed); used when
// converting datasets. Non-finite points dropped and counted.
PcdParseResult parse_xyz(std::istream& in);

// Comma-separated x,y,z; a single leading non-numeric header row is skipped.
PcdParseResult parse_csv_xyz(std::istream& in);

PointCloud load_cloud_file(const std::string& path);  // dispatch by extension
void save_pcd_file(const PointCloud& cloud, const std::string& path);

Point3 centroid(const PointCloud& cloud);

// Axis-aligned bounds; used for the metric's degeneracy guard and for
// synthetic-data sizing. Throws EmptyCloud.
struct Bounds {
  Point3 min;
  Point3 max;
  double diagonal() const { return (max - min).norm(); }
};
Bounds bounding_box(const PointCloud& cloud);

// One point per occupied voxel of a grid anchored at the cloud's minimum
// corner; the representative is the member centroid and output order is the
// lexicographic (ix, iy, iz) voxel index.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace pcbench
