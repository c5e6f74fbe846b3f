#pragma once

#include <string>
#include <vector>

#include "aionfit/body_model.hpp"
#include "aionfit/io.hpp"

namespace aionfit {

inline constexpr const char* kPackageSchema = "aionfit-package/1";

struct SequenceResult {
  std::string id;
  ResultFile results;
};

struct ManifestEntry {
  std::string id;
  int tracks = 0;
  int frames = 0;
  std::string results_path;             // relative to the package root
  std::vector<std::string> mesh_paths;  // relative to the package root
};

struct DatasetPackage {
  std::string model_hash;
  std::string license_note;
  std::vector<ManifestEntry> sequences;
};

struct PackageOptions {
  /// Write one OBJ per track and frame; needs the model.
  bool meshes = false;
  /// Replace an existing non-empty output directory.
  bool overwrite = false;
  std::string license_note =
      "Contains fitted body-model parameters and meshes only; no source imagery is included.";
};

/// Writes manifest.json, sequences/<id>.json and optionally
/// meshes/<id>/track<k>_frame<f>.obj, then verifies the result. Throws
/// InputError for empty input, duplicate or unsafe ids and model-hash
/// mismatches; IoError when the output directory is in use.
DatasetPackage package_dataset(const std::vector<SequenceResult>& sequences, const std::string& model_hash,
                               const std::string& out_dir, const PackageOptions& options = {},
                               const BodyModel* model = nullptr);

/// Reads the manifest and every sequence listed in it.
std::vector<SequenceResult> load_package(const std::string& dir, DatasetPackage* manifest = nullptr);

DatasetPackage parse_manifest(const std::string& text);
std::string serialize_manifest(const DatasetPackage& package);

/// True when the bytes start with a known image file signature.
bool has_image_signature(const std::string& bytes);

/// Empty when the package is consistent: manifest counts match contents,
/// hashes agree, no unlisted files and no image payloads.
std::vector<std::string> verify_package(const std::string& dir);

}  // namespace aionfit
