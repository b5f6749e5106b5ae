#pragma once

// Labeled tetrahedral mesh, anatomical region sets, and nodal axonal
// orientation fields. Geometry is first-order (linear) tetrahedra; per-element
// shape-function gradients and reference volumes are precomputed once.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cerebra/core.hpp"

namespace cerebra {

inline constexpr double kVolumeEpsilon = 1e-12;      // mm^3, degeneracy cutoff
inline constexpr double kUnitNormTolerance = 1e-9;   // axonal direction check

enum class Tissue { Grey, White, Fluid };

inline const char* to_string(Tissue t) {
  switch (t) {
    case Tissue::Grey: return "grey";
    case Tissue::White: return "white";
    case Tissue::Fluid: return "fluid";
  }
  return "?";
}

inline Tissue tissue_from_string(const std::string& s) {
  if (s == "grey" || s == "gray") return Tissue::Grey;
  if (s == "white") return Tissue::White;
  if (s == "fluid") return Tissue::Fluid;
  throw ValidationError("unknown tissue class '" + s + "' (expected grey|white|fluid)");
}

struct RegionInfo {
  std::string name;
  Tissue tissue = Tissue::Grey;
};

// Mapping label -> (name, tissue class). Labels are unique; names are unique.
class RegionSet {
public:
  RegionSet() = default;

  void add(int label, const std::string& name, Tissue tissue) {
    if (by_label_.count(label))
      throw ValidationError("duplicate region label " + std::to_string(label));
    if (label_by_name_.count(name))
      throw ValidationError("duplicate region name '" + name + "'");
    by_label_[label] = RegionInfo{name, tissue};
    label_by_name_[name] = label;
  }

  bool has_label(int label) const { return by_label_.count(label) != 0; }
  bool has_name(const std::string& name) const { return label_by_name_.count(name) != 0; }

  const RegionInfo& info(int label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end())
      throw ValidationError("unknown region label " + std::to_string(label));
    return it->second;
  }

  int label_of(const std::string& name) const {
    auto it = label_by_name_.find(name);
    if (it == label_by_name_.end())
      throw ValidationError("unknown region name '" + name + "'");
    return it->second;
  }

  Tissue tissue(int label) const { return info(label).tissue; }
  const std::string& name(int label) const { return info(label).name; }

  const std::map<int, RegionInfo>& all() const { return by_label_; }
  std::size_t size() const { return by_label_.size(); }

  // Region names in lexicographic order; fixes observable column order.
  std::vector<std::string> sorted_names() const {
    std::vector<std::string> names;
    names.reserve(label_by_name_.size());
    for (const auto& [name, label] : label_by_name_) names.push_back(name);
    return names;
  }

  // The 12 anatomical domains the imaging pipeline produces, with their
  // conventional labels. Synthetic meshes may declare any other set.
  static RegionSet standard_brain() {
    RegionSet rs;
    rs.add(1, "ventricles", Tissue::Fluid);
    rs.add(2, "csf", Tissue::Fluid);
    rs.add(3, "amygdala", Tissue::Grey);
    rs.add(4, "hippocampus", Tissue::Grey);
    rs.add(5, "thalamus", Tissue::Grey);
    rs.add(6, "entorhinal", Tissue::Grey);
    rs.add(7, "cerebral_cortex", Tissue::Grey);
    rs.add(8, "cerebellum_cortex", Tissue::Grey);
    rs.add(9, "cerebellum_wm", Tissue::White);
    rs.add(10, "brainstem", Tissue::White);
    rs.add(11, "white_matter", Tissue::White);
    rs.add(12, "corpus_callosum", Tissue::White);
    return rs;
  }

private:
  std::map<int, RegionInfo> by_label_;
  std::map<std::string, int> label_by_name_;
};

enum class FaceLabel { OuterCsf, InteriorFluid, Free };

inline const char* to_string(FaceLabel f) {
  switch (f) {
    case FaceLabel::OuterCsf: return "OUTER_CSF";
    case FaceLabel::InteriorFluid: return "INTERIOR_FLUID";
    case FaceLabel::Free: return "FREE";
  }
  return "?";
}

inline FaceLabel face_label_from_string(const std::string& s) {
  if (s == "OUTER_CSF") return FaceLabel::OuterCsf;
  if (s == "INTERIOR_FLUID") return FaceLabel::InteriorFluid;
  if (s == "FREE") return FaceLabel::Free;
  throw ValidationError("unknown boundary face label '" + s + "'");
}

struct BoundaryFace {
  std::array<int, 3> nodes;
  FaceLabel label = FaceLabel::Free;
};

inline double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

struct LabeledMesh {
  std::vector<Vec3> nodes;                    // mm
  std::vector<std::array<int, 4>> tets;       // node indices
  std::vector<int> region_label;              // one per tet
  std::vector<BoundaryFace> boundary_faces;

  // Derived geometry, filled by finalize():
  std::vector<double> volume;                 // reference volume per tet, mm^3
  std::vector<std::array<Vec3, 4>> grad_N;    // reference shape gradients, 1/mm

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }

  double total_volume() const {
    double v = 0.0;
    for (double ve : volume) v += ve;
    return v;
  }

  Vec3 centroid(int e) const {
    const auto& t = tets[e];
    return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]] + nodes[t[3]]) / 4.0;
  }

  // Checks structural invariants and computes volumes and shape gradients.
  // Tetrahedra whose signed volume (as stored) is <= volume_epsilon are
  // rejected: negative means inverted node ordering, near-zero means a
  // degenerate (flat) element.
  void finalize(double volume_epsilon = kVolumeEpsilon) {
    if (tets.size() != region_label.size())
      throw ValidationError("region_label size does not match element count");

    const int n = num_nodes();
    std::vector<char> used(n, 0);
    for (std::size_t e = 0; e < tets.size(); ++e)
      for (int k = 0; k < 4; ++k) {
        if (tets[e][k] < 0 || tets[e][k] >= n)
          throw ValidationError("element " + std::to_string(e) + " references invalid node " +
                                std::to_string(tets[e][k]));
        used[tets[e][k]] = 1;
      }
    {
      // Isolated nodes would create empty rows in the assembled systems.
      std::vector<int> orphans;
      for (int i = 0; i < n; ++i)
        if (!used[i]) orphans.push_back(i);
      if (!orphans.empty())
        throw ValidationError("nodes referenced by no element, node ids: " +
                              detail::join_ids(orphans));
    }
    for (const auto& f : boundary_faces)
      for (int k = 0; k < 3; ++k)
        if (f.nodes[k] < 0 || f.nodes[k] >= n)
          throw ValidationError("boundary face references invalid node " +
                                std::to_string(f.nodes[k]));

    volume.resize(tets.size());
    grad_N.resize(tets.size());
    std::vector<int> bad;
    for (std::size_t e = 0; e < tets.size(); ++e) {
      const auto& t = tets[e];
      const double v =
          tet_signed_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]);
      if (v <= volume_epsilon) {
        bad.push_back(static_cast<int>(e));
        continue;
      }
      volume[e] = v;
      // Edge matrix D = [X1-X0 | X2-X0 | X3-X0]; rows of D^{-1} are the
      // gradients of N1..N3, and N0 = 1 - sum.
      Mat3 D;
      D.col(0) = nodes[t[1]] - nodes[t[0]];
      D.col(1) = nodes[t[2]] - nodes[t[0]];
      D.col(2) = nodes[t[3]] - nodes[t[0]];
      const Mat3 Dinv = D.inverse();
      grad_N[e][1] = Dinv.row(0);
      grad_N[e][2] = Dinv.row(1);
      grad_N[e][3] = Dinv.row(2);
      grad_N[e][0] = -(grad_N[e][1] + grad_N[e][2] + grad_N[e][3]);
    }
    if (!bad.empty())
      throw ValidationError("inverted or degenerate tetrahedra (signed volume <= " +
                            std::to_string(volume_epsilon) + " mm^3), element ids: " +
                            detail::join_ids(bad));

    validate_boundary_manifold();
  }

  // Every undirected edge of the boundary surface must be shared by exactly
  // two boundary faces; this is what "closed 2-manifold per component" means
  // for a triangle soup.
  void validate_boundary_manifold() const {
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& f : boundary_faces) {
      for (int k = 0; k < 3; ++k) {
        int a = f.nodes[k], b = f.nodes[(k + 1) % 3];
        if (a == b) throw ValidationError("boundary face with repeated node " + std::to_string(a));
        if (a > b) std::swap(a, b);
        edge_count[{a, b}]++;
      }
    }
    for (const auto& [edge, count] : edge_count)
      if (count != 2)
        throw ValidationError("boundary surface is not a closed 2-manifold: edge (" +
                              std::to_string(edge.first) + "," + std::to_string(edge.second) +
                              ") belongs to " + std::to_string(count) + " faces");
  }

  // Every element label must exist in the declared region set.
  void validate_regions(const RegionSet& regions) const {
    for (std::size_t e = 0; e < region_label.size(); ++e)
      if (!regions.has_label(region_label[e]))
        throw ValidationError("element " + std::to_string(e) + " carries undeclared region label " +
                              std::to_string(region_label[e]));
  }

  // Nodes incident to at least one element of the given tissue class.
  std::vector<char> nodes_touching(const RegionSet& regions, Tissue tissue) const {
    std::vector<char> mark(nodes.size(), 0);
    for (std::size_t e = 0; e < tets.size(); ++e) {
      if (regions.tissue(region_label[e]) != tissue) continue;
      for (int k = 0; k < 4; ++k) mark[tets[e][k]] = 1;
    }
    return mark;
  }

  // Nodes incident only to fluid elements carry no chemical degree of freedom.
  // (finalize() guarantees every node is incident to at least one element.)
  std::vector<char> fluid_only_nodes(const RegionSet& regions) const {
    std::vector<char> only(nodes.size(), 1);
    for (std::size_t e = 0; e < tets.size(); ++e) {
      if (regions.tissue(region_label[e]) == Tissue::Fluid) continue;
      for (int k = 0; k < 4; ++k) only[tets[e][k]] = 0;
    }
    return only;
  }
};

// Per-node axonal unit vectors; nodes in isotropic regions carry no direction.
struct AxonalField {
  std::vector<std::optional<Vec3>> node_dir;
  std::size_t skipped_entries = 0;     // zero-norm input lines dropped
  double max_mapping_distance = 0.0;   // mm, worst nearest-entry distance
  double mean_mapping_distance = 0.0;  // mm

  bool has_direction(int node) const {
    return node >= 0 && node < static_cast<int>(node_dir.size()) &&
           node_dir[node].has_value();
  }

  std::size_t directed_count() const {
    std::size_t n = 0;
    for (const auto& d : node_dir)
      if (d) ++n;
    return n;
  }
};

}  // namespace cerebra
