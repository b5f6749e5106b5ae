#pragma once

// Synthetic meshes and axonal fields for verification studies: structured
// boxes (6 tetrahedra per cube), extruded bars, and a three-region "toy
// brain" with a grey seed pocket, a grey cortex block, and a white bridge.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "cerebra/core.hpp"
#include "cerebra/mesh.hpp"

namespace cerebra {

// Recovers the boundary surface (faces used by exactly one element) and
// labels each face through the callback evaluated at the face centroid.
inline void attach_boundary_faces(
    LabeledMesh& mesh,
    const std::function<FaceLabel(const Vec3&)>& label_of = nullptr) {
  // Outward faces of a positively oriented tet (0,1,2,3).
  static constexpr std::array<std::array<int, 3>, 4> kFace = {
      {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

  std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> count;
  for (const auto& t : mesh.tets) {
    for (const auto& f : kFace) {
      std::array<int, 3> fn = {t[f[0]], t[f[1]], t[f[2]]};
      std::array<int, 3> key = fn;
      std::sort(key.begin(), key.end());
      auto it = count.find(key);
      if (it == count.end())
        count[key] = {1, fn};
      else
        it->second.first++;
    }
  }
  mesh.boundary_faces.clear();
  for (const auto& [key, v] : count) {
    if (v.first != 1) continue;
    BoundaryFace bf;
    bf.nodes = v.second;
    if (label_of) {
      const Vec3 c =
          (mesh.nodes[bf.nodes[0]] + mesh.nodes[bf.nodes[1]] + mesh.nodes[bf.nodes[2]]) / 3.0;
      bf.label = label_of(c);
    }
    mesh.boundary_faces.push_back(bf);
  }
}

// Structured box of nx*ny*nz cubes with spacing h (mm), each cube split into
// six positively oriented tetrahedra. Region labels come from the callback
// evaluated at element centroids; boundary faces from face_label (FREE when
// omitted).
inline LabeledMesh make_box_mesh(int nx, int ny, int nz, double h,
                                 const std::function<int(const Vec3&)>& region_of,
                                 const std::function<FaceLabel(const Vec3&)>& face_label = nullptr,
                                 const Vec3& origin = Vec3::Zero()) {
  LabeledMesh mesh;
  auto node_id = [&](int i, int j, int k) {
    return (k * (ny + 1) + j) * (nx + 1) + i;
  };
  mesh.nodes.reserve((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.nodes.push_back(origin + Vec3(i * h, j * h, k * h));

  // Kuhn subdivision around the main diagonal v000 - v111.
  static constexpr std::array<std::array<int, 4>, 6> kTet = {{{0, 1, 3, 7},
                                                              {0, 3, 2, 7},
                                                              {0, 2, 6, 7},
                                                              {0, 6, 4, 7},
                                                              {0, 4, 5, 7},
                                                              {0, 5, 1, 7}}};
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::array<int, 8> v = {
            node_id(i, j, k),         node_id(i + 1, j, k),         node_id(i, j + 1, k),
            node_id(i + 1, j + 1, k), node_id(i, j, k + 1),         node_id(i + 1, j, k + 1),
            node_id(i, j + 1, k + 1), node_id(i + 1, j + 1, k + 1)};
        for (const auto& tt : kTet) {
          std::array<int, 4> t = {v[tt[0]], v[tt[1]], v[tt[2]], v[tt[3]]};
          if (tet_signed_volume(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]],
                                mesh.nodes[t[3]]) < 0)
            std::swap(t[2], t[3]);
          mesh.tets.push_back(t);
          mesh.region_label.push_back(region_of(mesh.centroid(mesh.num_tets() - 1)));
        }
      }
    }
  }
  attach_boundary_faces(mesh, face_label);
  mesh.finalize();
  return mesh;
}

inline LabeledMesh make_box_mesh(int nx, int ny, int nz, double h, int region_label,
                                 const Vec3& origin = Vec3::Zero()) {
  return make_box_mesh(nx, ny, nz, h, [region_label](const Vec3&) { return region_label; },
                       nullptr, origin);
}

// Constant axonal field: every white-matter node gets the same unit vector.
inline AxonalField constant_axonal_field(const LabeledMesh& mesh, const RegionSet& regions,
                                         const Vec3& direction) {
  AxonalField field;
  field.node_dir.assign(mesh.nodes.size(), std::nullopt);
  const Vec3 a = direction.normalized();
  const auto white = mesh.nodes_touching(regions, Tissue::White);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (white[i]) field.node_dir[i] = a;
  return field;
}

// Three-region toy brain: a 3Lx x Ly x Lz box split along x into a small grey
// seed pocket ("entorhinal", standard label 6), a grey block
// ("cerebral_cortex", label 7), and a white bridge ("white_matter", label 11).
// fiber_dir picks the white fibre orientation: along the bridge axis for
// arrival-time studies, transverse for isotropic-overestimation studies.
struct ToyBrain {
  LabeledMesh mesh;
  AxonalField axonal;
  double x_seed_end = 0.0;    // entorhinal | cortex interface
  double x_white_begin = 0.0; // cortex | white interface
};

inline ToyBrain make_toy_brain(double h, const RegionSet& regions, const Vec3& fiber_dir,
                               double Lx = 48.0, double Ly = 16.0, double Lz = 16.0,
                               double seed_frac = 1.0 / 6.0, double white_frac = 0.5) {
  const int nx = std::max(3, static_cast<int>(std::lround(Lx / h)));
  const int ny = std::max(1, static_cast<int>(std::lround(Ly / h)));
  const int nz = std::max(1, static_cast<int>(std::lround(Lz / h)));
  const double x_seed = Lx * seed_frac;
  const double x_white = Lx * (1.0 - white_frac);
  auto region_of = [&](const Vec3& c) {
    if (c.x() < x_seed) return 6;   // entorhinal
    if (c.x() < x_white) return 7;  // cerebral_cortex
    return 11;                      // white_matter
  };
  ToyBrain tb;
  tb.mesh = make_box_mesh(nx, ny, nz, h, region_of);
  tb.axonal = constant_axonal_field(tb.mesh, regions, fiber_dir);
  tb.x_seed_end = x_seed;
  tb.x_white_begin = x_white;
  return tb;
}

}  // namespace cerebra
