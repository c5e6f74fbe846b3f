#include "aionfit/obj_export.hpp"

#include <cstdio>
#include <sstream>

#include "aionfit/errors.hpp"
#include "aionfit/io.hpp"

namespace aionfit {

std::string obj_string(const MeshResult& mesh, const std::vector<std::array<int, 3>>& faces,
                       const Eigen::Vector3d& gamma) {
  const Eigen::Index n = mesh.vertices.rows();
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * 40 + faces.size() * 24);
  char buf[128];
  for (Eigen::Index v = 0; v < n; ++v) {
    const Eigen::Vector3d p = mesh.vertices.row(v).transpose() + gamma;
    if (!p.allFinite()) throw InputError("mesh vertex " + std::to_string(v) + " is not finite");
    std::snprintf(buf, sizeof(buf), "v %.6f %.6f %.6f\n", p.x(), p.y(), p.z());
    out += buf;
  }
  for (const auto& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) throw InputError("face index " + std::to_string(idx) + " out of range");
    }
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out += buf;
  }
  return out;
}

void export_obj(const MeshResult& mesh, const std::vector<std::array<int, 3>>& faces, const Eigen::Vector3d& gamma,
                const std::string& path) {
  write_text_file(path, obj_string(mesh, faces, gamma));
}

ObjMesh parse_obj(const std::string& text) {
  std::vector<Eigen::Vector3d> verts;
  ObjMesh out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw InputError("obj line " + std::to_string(lineno) + ": bad vertex");
      verts.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ls >> tok)) throw InputError("obj line " + std::to_string(lineno) + ": face needs 3 indices");
        try {
          f[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
        } catch (const std::exception&) {
          throw InputError("obj line " + std::to_string(lineno) + ": bad face index");
        }
      }
      std::string extra;
      if (ls >> extra) throw InputError("obj line " + std::to_string(lineno) + ": only triangles are supported");
      out.faces.push_back(f);
    }
  }
  out.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) out.vertices.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  for (const auto& f : out.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= out.vertices.rows()) throw InputError("obj face index out of range");
    }
  }
  return out;
}

}  // namespace aionfit
