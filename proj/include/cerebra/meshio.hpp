#pragma once

// File formats:
//   - mesh:    line-oriented ASCII ("MESH v1" header, NODES/TETS/BFACES blocks)
//   - axonal:  one entry per line, six floats "x y z ax ay az"
//   - snapshot: VTK legacy ASCII unstructured grid with point scalars c_tau,
//     c_abeta, u_mag, point vectors u, cell scalar theta, and the simulated
//     time in a FIELD block (so a snapshot can seed a restart).
//
// Blank lines and '#' comments are permitted in mesh and axonal files.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cerebra/core.hpp"
#include "cerebra/mesh.hpp"
#include "cerebra/state.hpp"

namespace cerebra {

namespace detail {

class LineReader {
public:
  explicit LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  // Next non-empty, non-comment line; false at EOF.
  bool next(std::string& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (!line.empty()) {
        out = line;
        return true;
      }
    }
    return false;
  }

  std::string require(const std::string& what) {
    std::string line;
    if (!next(line)) throw ParseError(path_ + ": unexpected end of file, expected " + what, lineno_);
    return line;
  }

  long lineno() const { return lineno_; }
  const std::string& path() const { return path_; }

private:
  std::istream& in_;
  std::string path_;
  long lineno_ = 0;
};

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

inline double to_double(const std::string& s, const LineReader& r) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(r.path() + ": not a number: '" + s + "'", r.lineno());
  }
  if (pos != s.size()) throw ParseError(r.path() + ": not a number: '" + s + "'", r.lineno());
  return v;
}

inline long to_long(const std::string& s, const LineReader& r) {
  std::size_t pos = 0;
  long v;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(r.path() + ": not an integer: '" + s + "'", r.lineno());
  }
  if (pos != s.size()) throw ParseError(r.path() + ": not an integer: '" + s + "'", r.lineno());
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mesh exchange format
// ---------------------------------------------------------------------------

inline LabeledMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open mesh file: " + path.string());
  detail::LineReader r(in, path.string());

  {
    const auto hdr = detail::tokens(r.require("'MESH v1' header"));
    if (hdr.size() != 2 || hdr[0] != "MESH" || hdr[1] != "v1")
      throw ParseError(path.string() + ": expected header 'MESH v1'", r.lineno());
  }

  LabeledMesh mesh;

  {
    const auto t = detail::tokens(r.require("'NODES n'"));
    if (t.size() != 2 || t[0] != "NODES")
      throw ParseError(path.string() + ": expected 'NODES n'", r.lineno());
    const long n = detail::to_long(t[1], r);
    if (n < 0) throw ParseError(path.string() + ": negative node count", r.lineno());
    mesh.nodes.reserve(n);
    for (long i = 0; i < n; ++i) {
      const auto nt = detail::tokens(r.require("node line 'id x y z'"));
      if (nt.size() != 4)
        throw ParseError(path.string() + ": expected 'id x y z' (4 fields), got " +
                             std::to_string(nt.size()),
                         r.lineno());
      if (detail::to_long(nt[0], r) != i)
        throw ParseError(path.string() + ": node ids must be sequential from 0", r.lineno());
      mesh.nodes.emplace_back(detail::to_double(nt[1], r), detail::to_double(nt[2], r),
                              detail::to_double(nt[3], r));
    }
  }

  {
    const auto t = detail::tokens(r.require("'TETS m'"));
    if (t.size() != 2 || t[0] != "TETS")
      throw ParseError(path.string() + ": expected 'TETS m'", r.lineno());
    const long m = detail::to_long(t[1], r);
    if (m < 0) throw ParseError(path.string() + ": negative element count", r.lineno());
    mesh.tets.reserve(m);
    mesh.region_label.reserve(m);
    for (long e = 0; e < m; ++e) {
      const auto et = detail::tokens(r.require("element line 'id n1 n2 n3 n4 region_label'"));
      if (et.size() != 6)
        throw ParseError(path.string() +
                             ": expected 'id n1 n2 n3 n4 region_label' (6 fields), got " +
                             std::to_string(et.size()),
                         r.lineno());
      if (detail::to_long(et[0], r) != e)
        throw ParseError(path.string() + ": element ids must be sequential from 0", r.lineno());
      mesh.tets.push_back({static_cast<int>(detail::to_long(et[1], r)),
                           static_cast<int>(detail::to_long(et[2], r)),
                           static_cast<int>(detail::to_long(et[3], r)),
                           static_cast<int>(detail::to_long(et[4], r))});
      mesh.region_label.push_back(static_cast<int>(detail::to_long(et[5], r)));
    }
  }

  {
    const auto t = detail::tokens(r.require("'BFACES k'"));
    if (t.size() != 2 || t[0] != "BFACES")
      throw ParseError(path.string() + ": expected 'BFACES k'", r.lineno());
    const long k = detail::to_long(t[1], r);
    if (k < 0) throw ParseError(path.string() + ": negative face count", r.lineno());
    mesh.boundary_faces.reserve(k);
    for (long f = 0; f < k; ++f) {
      const auto ft = detail::tokens(r.require("face line 'n1 n2 n3 face_label'"));
      if (ft.size() != 4)
        throw ParseError(path.string() + ": expected 'n1 n2 n3 face_label' (4 fields), got " +
                             std::to_string(ft.size()),
                         r.lineno());
      BoundaryFace bf;
      bf.nodes = {static_cast<int>(detail::to_long(ft[0], r)),
                  static_cast<int>(detail::to_long(ft[1], r)),
                  static_cast<int>(detail::to_long(ft[2], r))};
      try {
        bf.label = face_label_from_string(ft[3]);
      } catch (const ValidationError& e) {
        throw ParseError(path.string() + ": " + e.what(), r.lineno());
      }
      mesh.boundary_faces.push_back(bf);
    }
  }

  std::string extra;
  if (r.next(extra))
    throw ParseError(path.string() + ": trailing content after BFACES block", r.lineno());

  mesh.finalize();
  return mesh;
}

inline void write_mesh(const LabeledMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot write mesh file: " + path.string());
  out.precision(17);
  out << "MESH v1\n";
  out << "NODES " << mesh.num_nodes() << "\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
    out << i << " " << mesh.nodes[i].x() << " " << mesh.nodes[i].y() << " " << mesh.nodes[i].z()
        << "\n";
  out << "TETS " << mesh.num_tets() << "\n";
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const auto& t = mesh.tets[e];
    out << e << " " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << " "
        << mesh.region_label[e] << "\n";
  }
  out << "BFACES " << mesh.boundary_faces.size() << "\n";
  for (const auto& f : mesh.boundary_faces)
    out << f.nodes[0] << " " << f.nodes[1] << " " << f.nodes[2] << " " << to_string(f.label)
        << "\n";
  if (!out) throw MissingInputError("I/O failure writing " + path.string());
}

// ---------------------------------------------------------------------------
// Axonal orientation field
// ---------------------------------------------------------------------------

namespace detail {

// Compact 3-d tree over entry positions. Nearest-neighbour ties resolve to
// the lowest original entry index, keeping the mapping deterministic.
class KdTree3 {
public:
  explicit KdTree3(const std::vector<Vec3>& points) : pts_(points) {
    idx_.resize(pts_.size());
    std::iota(idx_.begin(), idx_.end(), 0);
    if (!idx_.empty()) build(0, static_cast<int>(idx_.size()), 0);
  }

  // Returns (entry index, squared distance); entry index -1 when empty.
  std::pair<int, double> nearest(const Vec3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    if (!idx_.empty()) search(0, static_cast<int>(idx_.size()), 0, q, best, best_d2);
    return {best, best_d2};
  }

private:
  void build(int lo, int hi, int axis) {
    if (hi - lo <= 1) return;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) {
                       const double ca = pts_[a][axis], cb = pts_[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void consider(int i, const Vec3& q, int& best, double& best_d2) const {
    const double d2 = (pts_[i] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
      best = i;
      best_d2 = d2;
    }
  }

  void search(int lo, int hi, int axis, const Vec3& q, int& best, double& best_d2) const {
    if (hi <= lo) return;
    const int mid = (lo + hi) / 2;
    const int i = idx_[mid];
    consider(i, q, best, best_d2);
    const double delta = q[axis] - pts_[i][axis];
    const int next = (axis + 1) % 3;
    if (delta < 0) {
      search(lo, mid, next, q, best, best_d2);
      if (delta * delta <= best_d2) search(mid + 1, hi, next, q, best, best_d2);
    } else {
      search(mid + 1, hi, next, q, best, best_d2);
      if (delta * delta <= best_d2) search(lo, mid, next, q, best, best_d2);
    }
  }

  const std::vector<Vec3>& pts_;
  std::vector<int> idx_;
};

}  // namespace detail

// Maps each white-matter mesh node to the direction of the nearest entry
// (renormalized to unit length). Grey/fluid nodes carry no direction.
// Entries with zero-norm direction are skipped and counted. A white node
// farther than search_radius from every entry is an error.
inline AxonalField read_axonal_field(const std::filesystem::path& path, const LabeledMesh& mesh,
                                     const RegionSet& regions,
                                     double search_radius = std::numeric_limits<double>::infinity()) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open axonal field file: " + path.string());
  detail::LineReader r(in, path.string());

  std::vector<Vec3> positions;
  std::vector<Vec3> directions;
  std::size_t skipped = 0;
  std::string line;
  while (r.next(line)) {
    const auto t = detail::tokens(line);
    if (t.size() != 6)
      throw ParseError(path.string() + ": expected 'x y z ax ay az' (6 fields), got " +
                           std::to_string(t.size()),
                       r.lineno());
    const Vec3 p(detail::to_double(t[0], r), detail::to_double(t[1], r),
                 detail::to_double(t[2], r));
    Vec3 d(detail::to_double(t[3], r), detail::to_double(t[4], r), detail::to_double(t[5], r));
    const double norm = d.norm();
    if (norm <= 1e-12) {
      ++skipped;  // warning-level: direction carries no information
      continue;
    }
    positions.push_back(p);
    directions.push_back(d / norm);
  }

  AxonalField field;
  field.skipped_entries = skipped;
  field.node_dir.assign(mesh.nodes.size(), std::nullopt);

  const std::vector<char> white = mesh.nodes_touching(regions, Tissue::White);
  const bool any_white = std::any_of(white.begin(), white.end(), [](char c) { return c != 0; });
  if (!any_white) return field;

  if (positions.empty())
    throw ValidationError(path.string() + ": no usable entries but mesh has white-matter nodes");

  const detail::KdTree3 tree(positions);
  std::vector<int> out_of_range;
  double max_d = 0.0, sum_d = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (!white[i]) continue;
    const auto [j, d2] = tree.nearest(mesh.nodes[i]);
    const double d = std::sqrt(d2);
    if (d > search_radius) {
      out_of_range.push_back(i);
      continue;
    }
    field.node_dir[i] = directions[j];
    max_d = std::max(max_d, d);
    sum_d += d;
    ++count;
  }
  if (!out_of_range.empty())
    throw ValidationError(path.string() + ": white-matter nodes with no axonal entry within " +
                          std::to_string(search_radius) + " mm, node ids: " +
                          detail::join_ids(out_of_range));
  field.max_mapping_distance = max_d;
  field.mean_mapping_distance = count ? sum_d / static_cast<double>(count) : 0.0;
  return field;
}

// ---------------------------------------------------------------------------
// Snapshots (VTK legacy unstructured grid)
// ---------------------------------------------------------------------------

inline void write_snapshot(const SimState& state, const LabeledMesh& mesh,
                           const std::filesystem::path& path) {
  if (!state.sized_for(mesh))
    throw ValidationError("state fields are not sized for the mesh");
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot write snapshot file: " + path.string());
  out.precision(17);

  const int n = mesh.num_nodes(), m = mesh.num_tets();
  out << "# vtk DataFile Version 3.0\n";
  out << "cerebra snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "FIELD FieldData 1\n";
  out << "TIME 1 1 double\n" << state.time << "\n";
  out << "POINTS " << n << " double\n";
  for (int i = 0; i < n; ++i)
    out << mesh.nodes[i].x() << " " << mesh.nodes[i].y() << " " << mesh.nodes[i].z() << "\n";
  out << "CELLS " << m << " " << 5 * m << "\n";
  for (int e = 0; e < m; ++e) {
    const auto& t = mesh.tets[e];
    out << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  }
  out << "CELL_TYPES " << m << "\n";
  for (int e = 0; e < m; ++e) out << "10\n";

  out << "POINT_DATA " << n << "\n";
  auto scalars = [&](const char* name, auto&& value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) out << value(i) << "\n";
  };
  scalars("c_tau", [&](int i) { return state.ctau[i]; });
  scalars("c_abeta", [&](int i) { return state.cabeta[i]; });
  scalars("u_mag", [&](int i) { return state.u.segment<3>(3 * i).norm(); });
  out << "VECTORS u double\n";
  for (int i = 0; i < n; ++i)
    out << state.u[3 * i] << " " << state.u[3 * i + 1] << " " << state.u[3 * i + 2] << "\n";

  out << "CELL_DATA " << m << "\n";
  out << "SCALARS theta double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < m; ++e) out << state.theta[e] << "\n";

  if (!out) throw MissingInputError("I/O failure writing " + path.string());
}

// Parsed snapshot, independent of any mesh.
struct SnapshotData {
  double time = 0.0;
  std::vector<Vec3> points;
  std::vector<std::array<int, 4>> cells;
  Eigen::VectorXd ctau, cabeta, u_mag, theta;
  Eigen::VectorXd u;  // 3 per point; empty if the file lacks vectors

  SimState to_state(const LabeledMesh& mesh) const {
    if (static_cast<int>(points.size()) != mesh.num_nodes() ||
        static_cast<int>(cells.size()) != mesh.num_tets())
      throw ValidationError("snapshot does not match mesh (node/element counts differ)");
    if (u.size() == 0)
      throw ValidationError("snapshot lacks displacement vectors; cannot restart from it");
    SimState s;
    s.time = time;
    s.ctau = ctau;
    s.cabeta = cabeta;
    s.u = u;
    s.theta = theta;
    return s;
  }
};

inline SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open snapshot file: " + path.string());

  SnapshotData snap;
  std::string tok;
  long n = -1, m = -1;

  auto expect_number = [&](const char* what) {
    double v;
    if (!(in >> v)) throw ParseError(path.string() + ": expected " + what);
    return v;
  };

  // Header: magic line, free-text title, then ASCII + dataset type.
  std::string line;
  if (!std::getline(in, line) || line.rfind("# vtk", 0) != 0)
    throw ParseError(path.string() + ": not a VTK legacy file");
  std::getline(in, line);  // title

  while (in >> tok) {
    if (tok == "ASCII" || tok == "DATASET" || tok == "UNSTRUCTURED_GRID") continue;
    if (tok == "BINARY") throw ParseError(path.string() + ": binary VTK is not supported");
    if (tok == "FIELD") {
      std::string name;
      long arrays;
      in >> name >> arrays;
      for (long a = 0; a < arrays; ++a) {
        std::string aname, atype;
        long comps, tuples;
        in >> aname >> comps >> tuples >> atype;
        std::vector<double> vals(comps * tuples);
        for (auto& v : vals) v = expect_number("field value");
        if (aname == "TIME" && !vals.empty()) snap.time = vals[0];
      }
    } else if (tok == "POINTS") {
      std::string type;
      in >> n >> type;
      snap.points.resize(n);
      for (long i = 0; i < n; ++i) {
        const double x = expect_number("point coordinate");
        const double y = expect_number("point coordinate");
        const double z = expect_number("point coordinate");
        snap.points[i] = Vec3(x, y, z);
      }
    } else if (tok == "CELLS") {
      long total;
      in >> m >> total;
      snap.cells.resize(m);
      for (long e = 0; e < m; ++e) {
        const long k = static_cast<long>(expect_number("cell size"));
        if (k != 4) throw ParseError(path.string() + ": only tetrahedral cells are supported");
        for (int j = 0; j < 4; ++j)
          snap.cells[e][j] = static_cast<int>(expect_number("cell node index"));
      }
    } else if (tok == "CELL_TYPES") {
      long cnt;
      in >> cnt;
      for (long e = 0; e < cnt; ++e) {
        if (static_cast<int>(expect_number("cell type")) != 10)
          throw ParseError(path.string() + ": only VTK_TETRA (10) cells are supported");
      }
    } else if (tok == "POINT_DATA" || tok == "CELL_DATA") {
      long cnt;
      in >> cnt;
      (void)cnt;
    } else if (tok == "SCALARS") {
      std::string name, type;
      int comps = 1;
      in >> name >> type;
      // optional component count followed by LOOKUP_TABLE line
      std::string maybe;
      in >> maybe;
      if (maybe != "LOOKUP_TABLE") {
        comps = std::stoi(maybe);
        in >> maybe;  // LOOKUP_TABLE
      }
      std::string table;
      in >> table;
      const long count = (name == "theta") ? m : n;
      if (count < 0) throw ParseError(path.string() + ": data block before geometry");
      Eigen::VectorXd vals(count * comps);
      for (long i = 0; i < count * comps; ++i) vals[i] = expect_number("scalar value");
      if (name == "c_tau") snap.ctau = vals;
      else if (name == "c_abeta") snap.cabeta = vals;
      else if (name == "u_mag") snap.u_mag = vals;
      else if (name == "theta") snap.theta = vals;
      // unknown arrays are read and dropped
    } else if (tok == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      if (n < 0) throw ParseError(path.string() + ": VECTORS before POINTS");
      Eigen::VectorXd vals(3 * n);
      for (long i = 0; i < 3 * n; ++i) vals[i] = expect_number("vector value");
      if (name == "u") snap.u = vals;
    } else {
      throw ParseError(path.string() + ": unrecognized token '" + tok + "'");
    }
  }

  if (n < 0 || m < 0) throw ParseError(path.string() + ": missing geometry");
  if (snap.ctau.size() != n || snap.cabeta.size() != n || snap.theta.size() != m)
    throw ParseError(path.string() + ": missing one of c_tau/c_abeta/theta arrays");
  return snap;
}

}  // namespace cerebra
