#pragma once

// Atrophy tensors, elastic/total deformation split, axonal stretch, and the
// spatial diffusion tensors evaluated at (single-point) element quadrature.

#include <cmath>
#include <optional>

#include "cerebra/core.hpp"
#include "cerebra/mesh.hpp"
#include "cerebra/params.hpp"

namespace cerebra {

inline constexpr double kLambdaAxonalMin = 1e-9;  // guards the 1/lambda_a^2 division

// Inelastic atrophy deformation gradient. Grey matter shrinks isotropically;
// white matter thins transverse to the fibre direction, keeping stretch 1
// along it. Both branches satisfy det(Fa) = theta.
inline Mat3 atrophy_tensor(double theta, const std::optional<Vec3>& a, Tissue tissue) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw ValidationError("atrophy factor must lie in (0,1], got " + std::to_string(theta));
  if (tissue == Tissue::White) {
    if (!a) throw ValidationError("white-matter atrophy tensor requires an axonal direction");
    const double norm = a->norm();
    if (std::abs(norm - 1.0) > kUnitNormTolerance)
      throw ValidationError("axonal direction must be a unit vector, |a| = " + std::to_string(norm));
    const double s = std::sqrt(theta);
    return s * Mat3::Identity() + (1.0 - s) * (*a) * a->transpose();
  }
  return std::cbrt(theta) * Mat3::Identity();  // grey and fluid: isotropic
}

struct ElasticPart {
  Mat3 Fe;
  double Je;
};

// Elastic factor of the multiplicative split F = Fe * Fa.
inline ElasticPart elastic_part(const Mat3& F, const Mat3& Fa) {
  const double Ja = Fa.determinant();
  if (!(Ja > 0.0)) throw ValidationError("atrophy tensor is not invertible (det <= 0)");
  const double J = F.determinant();
  if (!(J > 0.0)) throw ValidationError("deformation gradient has non-positive determinant");
  ElasticPart ep;
  ep.Fe = F * Fa.inverse();
  ep.Je = J / Ja;
  return ep;
}

// Kinematic bundle at one quadrature point.
struct DeformationState {
  Mat3 F = Mat3::Identity();
  Mat3 Fa = Mat3::Identity();
  Mat3 Fe = Mat3::Identity();
  double J = 1.0, Ja = 1.0, Je = 1.0;
  double lambda_a = 1.0;  // axonal stretch |F a|; 1 when no direction exists
};

inline DeformationState make_deformation_state(const Mat3& F, double theta,
                                               const std::optional<Vec3>& a, Tissue tissue) {
  DeformationState d;
  d.F = F;
  d.Fa = atrophy_tensor(theta, a, tissue);
  d.J = F.determinant();
  d.Ja = d.Fa.determinant();
  const ElasticPart ep = elastic_part(F, d.Fa);
  d.Fe = ep.Fe;
  d.Je = ep.Je;
  d.lambda_a = a ? (F * (*a)).norm() : 1.0;
  return d;
}

// Spatial tau diffusion tensor: d_ext i + d_axn (F a)(F a)^T / lambda_a^2 in
// white matter, d_ext i elsewhere. The lambda_a normalization keeps the trace
// at 3 d_ext + d_axn for any deformation.
inline Mat3 tau_diffusion(const Mat3& F, const std::optional<Vec3>& a, const BioParams& bio,
                          Tissue tissue, int element_id = -1) {
  if (tissue != Tissue::White) return bio.d_ext * Mat3::Identity();
  if (!a) throw ValidationError("white-matter tau diffusion requires an axonal direction" +
                                (element_id >= 0 ? " (element " + std::to_string(element_id) + ")"
                                                 : std::string()));
  const Vec3 m = F * (*a);
  const double lambda_a = m.norm();
  if (lambda_a <= kLambdaAxonalMin)
    throw SolverError("collapsed axonal stretch (lambda_a <= 1e-9)" +
                      (element_id >= 0 ? " at element " + std::to_string(element_id)
                                       : std::string()));
  return bio.d_ext * Mat3::Identity() + (bio.d_axn / (lambda_a * lambda_a)) * m * m.transpose();
}

// Abeta diffuses through the extracellular space only; isotropic and
// deformation-independent by construction.
inline Mat3 abeta_diffusion(const BioParams& bio) { return bio.d_ext * Mat3::Identity(); }

// Trace-preserving isotropic replacement for the white-matter tau tensor,
// used by the isotropic-transport comparison mode.
inline Mat3 isotropized_tau_diffusion(const BioParams& bio) {
  return (bio.d_ext + bio.d_axn / 3.0) * Mat3::Identity();
}

// ---------------------------------------------------------------------------
// Element-level axonal direction
// ---------------------------------------------------------------------------

// One direction per element from the four nodal vectors: sign-align to the
// first node's vector (principal eigenvectors carry an arbitrary sign),
// average, renormalize. If the average nearly cancels, fall back to the
// vector of the node closest to the element centroid.
inline std::optional<Vec3> element_axonal_direction(const LabeledMesh& mesh,
                                                    const AxonalField& field, int e) {
  const auto& t = mesh.tets[e];
  for (int k = 0; k < 4; ++k)
    if (!field.has_direction(t[k])) return std::nullopt;

  const Vec3 ref = *field.node_dir[t[0]];
  Vec3 sum = Vec3::Zero();
  for (int k = 0; k < 4; ++k) {
    Vec3 v = *field.node_dir[t[k]];
    if (v.dot(ref) < 0.0) v = -v;
    sum += v;
  }
  sum /= 4.0;
  if (sum.norm() < 0.1) {
    const Vec3 c = mesh.centroid(e);
    int best = t[0];
    double best_d2 = (mesh.nodes[t[0]] - c).squaredNorm();
    for (int k = 1; k < 4; ++k) {
      const double d2 = (mesh.nodes[t[k]] - c).squaredNorm();
      if (d2 < best_d2) {
        best = t[k];
        best_d2 = d2;
      }
    }
    return field.node_dir[best];
  }
  return sum.normalized();
}

// Directions for all white elements; nullopt for grey/fluid elements. A white
// element whose nodes lack directions is an error (the axonal field must
// cover white matter).
inline std::vector<std::optional<Vec3>> element_axonal_directions(const LabeledMesh& mesh,
                                                                  const AxonalField& field,
                                                                  const RegionSet& regions) {
  std::vector<std::optional<Vec3>> dirs(mesh.num_tets());
  std::vector<int> missing;
  for (int e = 0; e < mesh.num_tets(); ++e) {
    if (regions.tissue(mesh.region_label[e]) != Tissue::White) continue;
    dirs[e] = element_axonal_direction(mesh, field, e);
    if (!dirs[e]) missing.push_back(e);
  }
  if (!missing.empty())
    throw ValidationError("white elements without axonal directions, element ids: " +
                          detail::join_ids(missing));
  return dirs;
}

}  // namespace cerebra
