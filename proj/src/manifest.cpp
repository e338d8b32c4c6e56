#include "pcbench/manifest.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "pcbench/cloud.hpp"

namespace fs = std::filesystem;

namespace pcbench {

CloudFormat cloud_format_from_string(const std::string& name) {
  if (name == "pcd") return CloudFormat::pcd;
  if (name == "xyz") return CloudFormat::xyz;
  if (name == "csv") return CloudFormat::csv;
  throw Error("unknown cloud format '" + name + "' (expected pcd, xyz or csv)");
}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line) {
  double v;
  auto [p, e] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (e != std::errc{} || p != tok.data() + tok.size())
    throw ParseError("bad numeric token '" + tok + "'", line);
  return v;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_url(const std::string& source) {
  return source.starts_with("http://") || source.starts_with("https://");
}

std::string join_source(const std::string& source, const std::string& file) {
  if (is_url(source)) {
    if (source.ends_with("/")) return source + file;
    return source + "/" + file;
  }
  return (fs::path(source) / file).string();
}

}  // namespace

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path);

  DatasetManifest manifest;
  ManifestEntry* current = nullptr;
  std::set<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  const std::string base_dir = fs::path(path).parent_path().string();

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = tokens_of(line);
    if (toks.empty()) continue;

    if (toks.size() == 1 && toks[0].front() == '[' && toks[0].back() == ']') {
      const std::string name = toks[0].substr(1, toks[0].size() - 2);
      if (name.empty()) throw ParseError("empty sequence name", line_no);
      if (!names.insert(name).second)
        throw ParseError("duplicate sequence '" + name + "'", line_no);
      manifest.entries.emplace_back();
      current = &manifest.entries.back();
      current->name = name;
      continue;
    }
    if (!current) throw ParseError("key outside of a [sequence] section", line_no);

    const auto eq_pos = line.find('=');
    if (eq_pos == std::string::npos)
      throw ParseError("expected 'key = value...'", line_no);
    const auto key_toks = tokens_of(line.substr(0, eq_pos));
    std::vector<std::string> values = tokens_of(line.substr(eq_pos + 1));
    if (key_toks.size() != 1 || values.empty())
      throw ParseError("expected 'key = value...'", line_no);
    const std::string key = key_toks[0];

    auto range = [&](double scale, double& lo, double& hi) {
      if (values.size() != 2) throw ParseError("key '" + key + "' takes 'min max'", line_no);
      lo = scale * to_double(values[0], line_no);
      hi = scale * to_double(values[1], line_no);
    };
    if (key == "source") {
      // relative local paths resolve against the manifest's directory
      current->source =
          (is_url(values[0]) || fs::path(values[0]).is_absolute() || base_dir.empty())
              ? values[0]
              : (fs::path(base_dir) / values[0]).string();
    } else if (key == "format") {
      current->format = cloud_format_from_string(values[0]);
    } else if (key == "files") {
      current->files.insert(current->files.end(), values.begin(), values.end());
    } else if (key == "overlap_threshold") {
      current->overlap_threshold = to_double(values[0], line_no);
    } else if (key == "seed") {
      current->seed = std::stoull(values[0]);
    } else if (key == "rot_local_deg") {
      range(kDegToRad, current->bounds_local.rot_min, current->bounds_local.rot_max);
    } else if (key == "trans_local") {
      range(1.0, current->bounds_local.trans_min, current->bounds_local.trans_max);
    } else if (key == "rot_global_deg") {
      range(kDegToRad, current->bounds_global.rot_min, current->bounds_global.rot_max);
    } else if (key == "trans_global") {
      range(1.0, current->bounds_global.trans_min, current->bounds_global.trans_max);
    } else if (key == "merge") {
      if (values.size() != 15)
        throw ParseError("merge takes 'out fileA fileB t1..t12'", line_no);
      MergeStep step;
      step.output_stem = values[0];
      step.file_a = values[1];
      step.file_b = values[2];
      std::array<double, 12> m;
      for (std::size_t i = 0; i < 12; ++i) m[i] = to_double(values[3 + i], line_no);
      step.extrinsic = from_row_major12(m);
      current->merges.push_back(std::move(step));
    } else {
      throw ParseError("unknown manifest key '" + key + "'", line_no);
    }
  }

  for (const ManifestEntry& e : manifest.entries) {
    if (e.source.empty()) throw Error("sequence '" + e.name + "' has no source");
    if (e.files.empty() && e.merges.empty())
      throw Error("sequence '" + e.name + "' lists no files");
    if (e.overlap_threshold <= 0)
      throw Error("sequence '" + e.name + "' needs overlap_threshold > 0");
    e.bounds_local.validate();
    e.bounds_global.validate();
  }
  return manifest;
}

namespace {

// <out>/<sequence>/.fetch_state: "<file> <size> <fnv1a>" per converted file.
std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> read_state(
    const fs::path& dir) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> state;
  std::ifstream in(dir / ".fetch_state");
  std::string file;
  std::uint64_t size, checksum;
  while (in >> file >> size >> checksum) state[file] = {size, checksum};
  return state;
}

void write_state(const fs::path& dir,
                 const std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& state) {
  std::ofstream out(dir / ".fetch_state", std::ios::binary);
  for (const auto& [file, sc] : state)
    out << file << ' ' << sc.first << ' ' << sc.second << '\n';
}

PointCloud parse_by_format(const std::string& text, CloudFormat format) {
  std::istringstream in(text);
  PcdParseResult r;
  switch (format) {
    case CloudFormat::pcd: r = parse_pcd(in); break;
    case CloudFormat::xyz: r = parse_xyz(in); break;
    case CloudFormat::csv: r = parse_csv_xyz(in); break;
  }
  return std::move(r.cloud);
}

bool acquire(const std::string& source, const std::string& file, std::string& data,
             std::string& error) {
  const std::string location = join_source(source, file);
  if (is_url(source)) return http_get(location, data, error);
  std::ifstream in(location, std::ios::binary);
  if (!in) {
    error = "cannot open " + location;
    return false;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  data = buf.str();
  return true;
}

}  // namespace

FetchReport fetch_datasets(const DatasetManifest& manifest, const std::string& out_dir) {
  FetchReport report;
  for (const ManifestEntry& entry : manifest.entries) {
    const fs::path seq_dir = fs::path(out_dir) / entry.name;
    fs::create_directories(seq_dir);
    auto state = read_state(seq_dir);
    int produced = 0, failures = 0, seq_skipped = 0;
    std::vector<std::string> cloud_files;

    auto up_to_date = [&](const std::string& out_name) {
      const auto it = state.find(out_name);
      if (it == state.end()) return false;
      std::ifstream in(seq_dir / out_name, std::ios::binary);
      if (!in) return false;
      std::ostringstream buf;
      buf << in.rdbuf();
      const std::string content = buf.str();
      return content.size() == it->second.first && fnv1a(content) == it->second.second;
    };
    auto emit = [&](const std::string& out_name, const PointCloud& cloud) {
      const std::string text = serialize_pcd(cloud);
      std::ofstream out(seq_dir / out_name, std::ios::binary);
      out << text;
      state[out_name] = {text.size(), fnv1a(text)};
      ++produced;
      ++report.converted;
    };

    auto load_input = [&](const std::string& file, PointCloud& cloud) {
      std::string data, error;
      if (!acquire(entry.source, file, data, error)) {
        report.errors.push_back(entry.name + "/" + file + ": " + error);
        return false;
      }
      try {
        cloud = parse_by_format(data, entry.format);
      } catch (const Error& e) {
        report.errors.push_back(entry.name + "/" + file + ": " + e.what());
        return false;
      }
      return true;
    };

    for (const std::string& file : entry.files) {
      const std::string out_name = fs::path(file).stem().string() + ".pcd";
      cloud_files.push_back(out_name);
      if (up_to_date(out_name)) {
        ++report.skipped;
        ++seq_skipped;
        continue;
      }
      PointCloud cloud;
      if (!load_input(file, cloud)) {
        ++failures;
        continue;
      }
      emit(out_name, cloud);
    }

    for (const MergeStep& step : entry.merges) {
      const std::string out_name = step.output_stem + ".pcd";
      cloud_files.push_back(out_name);
      if (up_to_date(out_name)) {
        ++report.skipped;
        ++seq_skipped;
        continue;
      }
      PointCloud a, b;
      if (!load_input(step.file_a, a) || !load_input(step.file_b, b)) {
        ++failures;
        continue;
      }
      PointCloud merged = a;
      const PointCloud moved = apply(step.extrinsic, b);
      merged.points.insert(merged.points.end(), moved.points.begin(),
                           moved.points.end());
      emit(out_name, merged);
    }

    write_state(seq_dir, state);

    if (produced == 0 && seq_skipped == 0 && failures > 0) {
      report.failed_sequences.push_back(entry.name);
      continue;
    }

    // Sequence spec beside the clouds so generate/gteval can run directly;
    // a single-cloud sequence is convertible but not benchmarkable, so no
    // spec is emitted for it.
    if (cloud_files.size() >= 2) {
      SequenceSpec spec;
      spec.name = entry.name;
      spec.cloud_files = cloud_files;
      spec.base_dir = seq_dir.string();
      spec.overlap_threshold = entry.overlap_threshold;
      spec.bounds_local = entry.bounds_local;
      spec.bounds_global = entry.bounds_global;
      spec.seed = entry.seed;
      try {
        write_sequence_spec(spec, (seq_dir / (entry.name + ".seq")).string());
      } catch (const Error& e) {
        report.errors.push_back(entry.name + ": " + e.what());
      }
    }
  }
  return report;
}

}  // namespace pcbench
