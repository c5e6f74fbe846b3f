#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aionfit/body_model.hpp"

namespace aionfit {

/// Wavefront text for the world-space mesh: one "v x y z" line per vertex
/// (six decimals) followed by 1-indexed "f a b c" lines. Joints are omitted.
std::string obj_string(const MeshResult& mesh, const std::vector<std::array<int, 3>>& faces,
                       const Eigen::Vector3d& gamma);

/// Writes obj_string to path; throws IoError on failure.
void export_obj(const MeshResult& mesh, const std::vector<std::array<int, 3>>& faces, const Eigen::Vector3d& gamma,
                const std::string& path);

struct ObjMesh {
  Vertices vertices;
  std::vector<std::array<int, 3>> faces;  // 0-indexed
};

/// Minimal reader for the subset obj_string writes (v and triangular f lines,
/// optionally with /vt/vn suffixes). Throws InputError on malformed lines.
ObjMesh parse_obj(const std::string& text);

}  // namespace aionfit
