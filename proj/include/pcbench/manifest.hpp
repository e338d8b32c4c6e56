#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcbench/problem.hpp"
#include "pcbench/transform.hpp"

namespace pcbench {

enum class CloudFormat { pcd, xyz, csv };
CloudFormat cloud_format_from_string(const std::string& name);

// Concatenates file_b (transformed by the fixed extrinsic) onto file_a; how
// paired-sensor datasets are assembled into one cloud per pose.
struct MergeStep {
  std::string output_stem;
  std::string file_a;
  std::string file_b;
  RigidTransform extrinsic;
};

struct ManifestEntry {
  std::string name;
  std::string source;              // local directory or http(s) base URL
  CloudFormat format = CloudFormat::pcd;
  std::vector<std::string> files;  // relative to `source`
  std::vector<MergeStep> merges;
  double overlap_threshold = 0.0;
  PerturbationBounds bounds_local = PerturbationBounds::local(0.0, 0.0);
  PerturbationBounds bounds_global = PerturbationBounds::global(0.0, 0.0);
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

// Section-per-sequence key/value text file; validates names unique and
// thresholds/bounds on load.
DatasetManifest read_manifest(const std::string& path);

struct FetchReport {
  int converted = 0;
  int skipped = 0;
  std::vector<std::string> errors;            // one message per failed file
  std::vector<std::string> failed_sequences;  // sequences with no usable output
  bool all_ok() const { return errors.empty(); }
};

// Converts every sequence to ASCII PCD under out_dir/<sequence>/ and writes a
// sequence spec next to the clouds. Idempotent: outputs matching the recorded
// size+checksum are skipped. Download problems are collected per file;
// remaining sequences still proceed.
FetchReport fetch_datasets(const DatasetManifest& manifest, const std::string& out_dir);

// http(s) GET into `body`; returns false with a message on any failure.
bool http_get(const std::string& url, std::string& body, std::string& error);

}  // namespace pcbench
