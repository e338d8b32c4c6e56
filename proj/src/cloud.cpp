#include "pcbench/cloud.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>
#include <tuple>

namespace pcbench {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;  // blank
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

PcdParseResult parse_pcd(std::istream& in) {
  std::map<std::string, std::pair<std::vector<std::string>, std::size_t>> header;
  std::string line;
  std::size_t line_no = 0;
  bool in_body = false;

  // --- header ---
  while (!in_body && std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    auto toks = split_ws(line);
    const std::string key = toks[0];
    if (header.count(key))
      throw MalformedHeader("duplicate PCD header key '" + key + "'", line_no);
    header[key] = {std::vector<std::string>(toks.begin() + 1, toks.end()), line_no};
    if (key == "DATA") in_body = true;
  }
  if (!in_body) throw MalformedHeader("missing DATA line", line_no);

  for (const char* required : {"VERSION", "FIELDS", "WIDTH", "HEIGHT", "POINTS"}) {
    if (!header.count(required))
      throw MalformedHeader(std::string("missing PCD header key '") + required + "'",
                            header.at("DATA").second);
  }
  {
    const auto& data = header.at("DATA");
    if (data.first.empty() || lower(data.first[0]) != "ascii")
      throw MalformedHeader("only DATA ascii is supported", data.second);
  }

  const auto& fields = header.at("FIELDS");
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < fields.first.size(); ++i) {
    const std::string f = lower(fields.first[i]);
    if (f == "x") ix = static_cast<int>(i);
    if (f == "y") iy = static_cast<int>(i);
    if (f == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw MalformedHeader("FIELDS must contain x y z", fields.second);

  std::size_t declared = 0;
  {
    const auto& pts = header.at("POINTS");
    unsigned long long n = 0;
    if (pts.first.empty() ||
        !([&] {
          auto [p, e] = std::from_chars(pts.first[0].data(),
                                        pts.first[0].data() + pts.first[0].size(), n);
          return e == std::errc{} && p == pts.first[0].data() + pts.first[0].size();
        }()))
      throw MalformedHeader("POINTS value is not a number", pts.second);
    declared = static_cast<std::size_t>(n);
  }
  const std::size_t min_tokens =
      static_cast<std::size_t>(std::max({ix, iy, iz})) + 1;

  // --- body ---
  PcdParseResult result;
  result.cloud.points.reserve(declared);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    ++rows;
    if (rows > declared)
      throw CountMismatch("more data rows than POINTS " + std::to_string(declared),
                          line_no);
    auto toks = split_ws(line);
    if (toks.size() < min_tokens)
      throw BadRow("expected at least " + std::to_string(min_tokens) + " columns, got " +
                       std::to_string(toks.size()),
                   line_no);
    double x, y, z;
    if (!parse_double(toks[ix], x) || !parse_double(toks[iy], y) ||
        !parse_double(toks[iz], z))
      throw BadRow("non-numeric coordinate token", line_no);
    if (std::isfinite(x) && std::isfinite(y) && std::isfinite(z))
      result.cloud.points.emplace_back(x, y, z);
    else
      ++result.dropped_nonfinite;
  }
  if (rows != declared)
    throw CountMismatch("POINTS " + std::to_string(declared) + " but body has " +
                            std::to_string(rows) + " rows",
                        line_no);
  return result;
}

PcdParseResult parse_pcd(const std::string& text) {
  std::istringstream in(text);
  return parse_pcd(in);
}

void serialize_pcd(const PointCloud& cloud, std::ostream& out) {
  if (cloud.empty()) throw EmptyCloud();
  const std::size_t n = cloud.size();
  out << "# .PCD v0.7 - Point Cloud Data file format\n"
      << "VERSION .7\n"
      << "FIELDS x y z\n"
      << "SIZE 4 4 4\n"
      << "TYPE F F F\n"
      << "COUNT 1 1 1\n"
      << "WIDTH " << n << "\n"
      << "HEIGHT 1\n"
      << "VIEWPOINT 0 0 0 1 0 0 0\n"
      << "POINTS " << n << "\n"
      << "DATA ascii\n";
  for (const Point3& p : cloud.points)
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
        << format_double(p.z()) << '\n';
}

std::string serialize_pcd(const PointCloud& cloud) {
  std::ostringstream out;
  serialize_pcd(cloud, out);
  return out.str();
}

namespace {

PcdParseResult parse_rows(std::istream& in, char delimiter, bool skip_header_row) {
  PcdParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::vector<std::string> toks;
    if (delimiter == ' ') {
      toks = split_ws(line);
    } else {
      std::string field;
      std::istringstream ls(line);
      while (std::getline(ls, field, delimiter)) toks.push_back(field);
    }
    double x, y, z;
    const bool numeric = toks.size() >= 3 && parse_double(toks[0], x) &&
                         parse_double(toks[1], y) && parse_double(toks[2], z);
    if (!numeric) {
      if (skip_header_row && first_data_line) {
        first_data_line = false;
        continue;
      }
      throw BadRow("expected three numeric coordinates", line_no);
    }
    first_data_line = false;
    if (std::isfinite(x) && std::isfinite(y) && std::isfinite(z))
      result.cloud.points.emplace_back(x, y, z);
    else
      ++result.dropped_nonfinite;
  }
  return result;
}

}  // namespace

PcdParseResult parse_xyz(std::istream& in) { return parse_rows(in, ' ', false); }

PcdParseResult parse_csv_xyz(std::istream& in) { return parse_rows(in, ',', true); }

PointCloud load_cloud_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open cloud file: " + path);
  auto dot = path.rfind('.');
  const std::string ext = lower(dot == std::string::npos ? "" : path.substr(dot + 1));
  PcdParseResult result;
  if (ext == "xyz")
    result = parse_xyz(in);
  else if (ext == "csv")
    result = parse_csv_xyz(in);
  else
    result = parse_pcd(in);
  result.cloud.frame_label = path;
  return std::move(result.cloud);
}

void save_pcd_file(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: keep '\n' verbatim
  if (!out) throw Error("cannot open file for writing: " + path);
  serialize_pcd(cloud, out);
  if (!out) throw Error("write failed: " + path);
}

Point3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud();
  Point3 sum = Point3::Zero();
  for (const Point3& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

Bounds bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud();
  Bounds b{cloud.points.front(), cloud.points.front()};
  for (const Point3& p : cloud.points) {
    b.min = b.min.cwiseMin(p);
    b.max = b.max.cwiseMax(p);
  }
  return b;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (leaf <= 0.0) throw NonPositiveLeaf();
  if (cloud.empty()) throw EmptyCloud();
  const Point3 anchor = bounding_box(cloud).min;

  struct Cell {
    Point3 sum = Point3::Zero();
    std::size_t count = 0;
  };
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, Cell> grid;
  for (const Point3& p : cloud.points) {
    const Point3 rel = (p - anchor) / leaf;
    auto key = std::make_tuple(static_cast<std::int64_t>(std::floor(rel.x())),
                               static_cast<std::int64_t>(std::floor(rel.y())),
                               static_cast<std::int64_t>(std::floor(rel.z())));
    Cell& c = grid[key];
    c.sum += p;
    ++c.count;
  }

  PointCloud out;
  out.frame_label = cloud.frame_label;
  out.points.reserve(grid.size());
  for (const auto& [key, cell] : grid)  // std::map iterates lexicographically
    out.points.emplace_back(cell.sum / static_cast<double>(cell.count));
  return out;
}

}  // namespace pcbench
