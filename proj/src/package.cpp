#include "aionfit/package.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "aionfit/errors.hpp"
#include "aionfit/obj_export.hpp"

namespace aionfit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

bool safe_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

std::string mesh_name(int track_id, int frame) {
  return "track" + std::to_string(track_id) + "_frame" + std::to_string(frame) + ".obj";
}

}  // namespace

bool has_image_signature(const std::string& b) {
  static const std::string kSignatures[] = {
      std::string("\x89PNG\r\n\x1a\n", 8),
      std::string("\xFF\xD8\xFF", 3),
      "GIF87a",
      "GIF89a",
      "BM",
      std::string("II*\0", 4),
      std::string("MM\0*", 4),
  };
  for (const auto& sig : kSignatures) {
    if (starts_with(b, sig)) return true;
  }
  return b.size() >= 12 && starts_with(b, "RIFF") && b.compare(8, 4, "WEBP") == 0;
}

std::string serialize_manifest(const DatasetPackage& p) {
  json seqs = json::array();
  for (const auto& s : p.sequences) {
    seqs.push_back({{"id", s.id},
                    {"tracks", s.tracks},
                    {"frames", s.frames},
                    {"results", s.results_path},
                    {"meshes", s.mesh_paths}});
  }
  json doc = {{"version", kPackageSchema},
              {"model_hash", p.model_hash},
              {"license_note", p.license_note},
              {"sequences", seqs}};
  return doc.dump(2) + "\n";
}

DatasetPackage parse_manifest(const std::string& text) {
  DatasetPackage p;
  try {
    const json doc = json::parse(text);
    if (doc.value("version", std::string()) != kPackageSchema) {
      throw InputError(std::string("manifest version is not ") + kPackageSchema);
    }
    p.model_hash = doc.at("model_hash").get<std::string>();
    p.license_note = doc.at("license_note").get<std::string>();
    for (const auto& s : doc.at("sequences")) {
      ManifestEntry e;
      e.id = s.at("id").get<std::string>();
      e.tracks = s.at("tracks").get<int>();
      e.frames = s.at("frames").get<int>();
      e.results_path = s.at("results").get<std::string>();
      e.mesh_paths = s.at("meshes").get<std::vector<std::string>>();
      p.sequences.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed package manifest: ") + e.what());
  }
  return p;
}

DatasetPackage package_dataset(const std::vector<SequenceResult>& sequences, const std::string& hash,
                               const std::string& out_dir, const PackageOptions& options, const BodyModel* model) {
  if (sequences.empty()) throw InputError("nothing to package: no sequences given");
  if (options.meshes && !model) throw InputError("mesh export requested without a body model");
  std::set<std::string> ids;
  for (const auto& s : sequences) {
    if (!safe_id(s.id)) throw InputError("sequence id '" + s.id + "' is not a safe file name");
    if (!ids.insert(s.id).second) throw InputError("duplicate sequence id '" + s.id + "'");
    if (s.results.model_hash != hash) {
      throw InputError("sequence '" + s.id + "' was fit with model " + s.results.model_hash + ", expected " + hash);
    }
    if (model) s.results.validate(*model);
  }

  const fs::path root(out_dir);
  std::error_code ec;
  if (fs::exists(root, ec) && !fs::is_empty(root, ec)) {
    if (!options.overwrite) throw IoError("output directory '" + out_dir + "' is not empty");
    fs::remove_all(root, ec);
    if (ec) throw IoError("cannot clear '" + out_dir + "': " + ec.message());
  }
  fs::create_directories(root / "sequences", ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

  DatasetPackage pkg;
  pkg.model_hash = hash;
  pkg.license_note = options.license_note;
  for (const auto& s : sequences) {
    ManifestEntry e;
    e.id = s.id;
    e.tracks = static_cast<int>(s.results.states.size());
    e.frames = s.results.frame_count();
    e.results_path = "sequences/" + s.id + ".json";
    save_results(s.results, (root / e.results_path).string());
    if (options.meshes) {
      const fs::path dir = root / "meshes" / s.id;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
      for (std::size_t i = 0; i < s.results.states.size(); ++i) {
        const PersonState& st = s.results.states[i];
        for (std::size_t t = 0; t < st.frames.size(); ++t) {
          const std::string rel = "meshes/" + s.id + "/" + mesh_name(st.track_id, s.results.frame_indices[i][t]);
          const MeshResult mesh = forward(*model, st.shape, st.frames[t].pose);
          export_obj(mesh, model->data().faces, st.frames[t].translation, (root / rel).string());
          e.mesh_paths.push_back(rel);
        }
      }
    }
    pkg.sequences.push_back(std::move(e));
  }
  write_text_file((root / "manifest.json").string(), serialize_manifest(pkg));

  const auto problems = verify_package(out_dir);
  if (!problems.empty()) throw IoError("package verification failed: " + problems.front());
  return pkg;
}

std::vector<SequenceResult> load_package(const std::string& dir, DatasetPackage* manifest) {
  const fs::path root(dir);
  DatasetPackage pkg = parse_manifest(read_text_file((root / "manifest.json").string()));
  std::vector<SequenceResult> out;
  for (const auto& e : pkg.sequences) out.push_back({e.id, load_results((root / e.results_path).string())});
  if (manifest) *manifest = std::move(pkg);
  return out;
}

std::vector<std::string> verify_package(const std::string& dir) {
  std::vector<std::string> problems;
  const fs::path root(dir);
  DatasetPackage pkg;
  try {
    pkg = parse_manifest(read_text_file((root / "manifest.json").string()));
  } catch (const Error& e) {
    return {e.what()};
  }

  std::set<std::string> listed{"manifest.json"};
  for (const auto& e : pkg.sequences) {
    listed.insert(e.results_path);
    for (const auto& m : e.mesh_paths) listed.insert(m);
    try {
      const ResultFile r = load_results((root / e.results_path).string());
      if (r.model_hash != pkg.model_hash) problems.push_back(e.id + ": model hash differs from the manifest");
      if (static_cast<int>(r.states.size()) != e.tracks) problems.push_back(e.id + ": track count mismatch");
      if (r.frame_count() != e.frames) problems.push_back(e.id + ": frame count mismatch");
      if (!e.mesh_paths.empty() && static_cast<int>(e.mesh_paths.size()) != e.frames) {
        problems.push_back(e.id + ": mesh count does not match frame count");
      }
    } catch (const Error& err) {
      problems.push_back(e.id + ": " + err.what());
    }
  }

  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_directory()) continue;
    const std::string rel = fs::relative(it->path(), root).generic_string();
    if (!listed.count(rel)) problems.push_back(rel + ": not listed in the manifest");
    std::ifstream in(it->path(), std::ios::binary);
    std::string head(16, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    if (has_image_signature(head)) problems.push_back(rel + ": image payload");
  }
  if (ec) problems.push_back("cannot scan package: " + ec.message());
  for (const auto& rel : listed) {
    if (!fs::exists(root / rel)) problems.push_back(rel + ": listed but missing");
  }
  return problems;
}

}  // namespace aionfit
