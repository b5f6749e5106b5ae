#pragma once

// Atrophy-weighted compressible neo-Hookean equilibrium, total-Lagrangian on
// the reference mesh with P1 displacements and one-point quadrature.
//
// Stress and tangent both derive from the energy psi = theta * psi0(Fe(F)),
// Fe = F Fa^{-1}; the Piola/Cauchy pair therefore satisfies P = J sigma F^{-T}
// identically instead of being transcribed independently.

#include <Eigen/Sparse>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <vector>

#include "cerebra/core.hpp"
#include "cerebra/kinematics.hpp"
#include "cerebra/mesh.hpp"
#include "cerebra/params.hpp"
#include "cerebra/solvers.hpp"
#include "cerebra/state.hpp"

namespace cerebra {

// Atrophy-weighted strain energy density (per unit reference volume).
inline double elastic_energy(const Mat3& F, const Mat3& Fa, double theta,
                             const RegionParams& region) {
  const ElasticPart ep = elastic_part(F, Fa);
  if (!(ep.Je > 0.0)) throw SolverError("non-positive elastic Jacobian");
  const double lnJe = std::log(ep.Je);
  const double psi0 = 0.5 * region.shear_G * (ep.Fe.squaredNorm() - 3.0 - 2.0 * lnJe) +
                      0.5 * region.lambda * lnJe * lnJe;
  return theta * psi0;
}

// First Piola-Kirchhoff stress, P = theta [G(Fe - Fe^{-T}) + lambda ln(Je) Fe^{-T}] Fa^{-T}.
inline Mat3 piola_stress(const Mat3& F, const Mat3& Fa, double theta, const RegionParams& region,
                         int element_id = -1) {
  const double Ja = Fa.determinant();
  if (!(Ja > 0.0)) throw ValidationError("atrophy tensor is not invertible");
  const Mat3 Fa_inv = Fa.inverse();
  const Mat3 Fe = F * Fa_inv;
  const double Je = Fe.determinant();
  if (!(Je > 0.0))
    throw SolverError("element inversion (Je <= 0)" +
                      (element_id >= 0 ? " at element " + std::to_string(element_id)
                                       : std::string()));
  const Mat3 Fe_invT = Fe.inverse().transpose();
  const Mat3 S = region.shear_G * (Fe - Fe_invT) + region.lambda * std::log(Je) * Fe_invT;
  return theta * S * Fa_inv.transpose();
}

// Cauchy stress, sigma = theta [ (G/J)(Fe Fe^T - I) + (lambda ln(Je)/J) I ].
inline Mat3 cauchy_stress(const Mat3& F, const Mat3& Fa, double theta, const RegionParams& region,
                          int element_id = -1) {
  const double J = F.determinant();
  if (!(J > 0.0))
    throw SolverError("element inversion (J <= 0)" +
                      (element_id >= 0 ? " at element " + std::to_string(element_id)
                                       : std::string()));
  const ElasticPart ep = elastic_part(F, Fa);
  if (!(ep.Je > 0.0))
    throw SolverError("element inversion (Je <= 0)" +
                      (element_id >= 0 ? " at element " + std::to_string(element_id)
                                       : std::string()));
  return theta * ((region.shear_G / J) * (ep.Fe * ep.Fe.transpose() - Mat3::Identity()) +
                  (region.lambda * std::log(ep.Je) / J) * Mat3::Identity());
}

// ---------------------------------------------------------------------------
// Dirichlet constraints
// ---------------------------------------------------------------------------

// Displacement dofs clamped to zero: all components of nodes on OUTER_CSF
// boundary faces. Synthetic meshes without such faces get a deterministic
// 3-2-1 rigid-mode pinning at axis-aligned extreme nodes instead, which is
// stress-free for axis-aligned uniform shrinkage states.
inline std::vector<int> dirichlet_fixed_dofs(const LabeledMesh& mesh) {
  std::vector<char> clamped(mesh.nodes.size(), 0);
  bool any = false;
  for (const auto& f : mesh.boundary_faces) {
    if (f.label != FaceLabel::OuterCsf) continue;
    any = true;
    for (int k = 0; k < 3; ++k) clamped[f.nodes[k]] = 1;
  }

  std::vector<int> fixed;
  if (any) {
    for (std::size_t i = 0; i < clamped.size(); ++i)
      if (clamped[i])
        for (int c = 0; c < 3; ++c) fixed.push_back(3 * static_cast<int>(i) + c);
    return fixed;
  }

  if (mesh.nodes.empty()) return fixed;

  auto lex_less = [&](int a, int b) {
    const Vec3 &pa = mesh.nodes[a], &pb = mesh.nodes[b];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return pa.z() < pb.z();
  };
  int A = 0;
  for (int i = 1; i < mesh.num_nodes(); ++i)
    if (lex_less(i, A)) A = i;

  Vec3 lo = mesh.nodes[0], hi = mesh.nodes[0];
  for (const auto& p : mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double tol = 1e-9 * std::max(1.0, (hi - lo).norm());

  // B: farthest node along +x on the same x-edge as A (same y,z).
  int B = -1;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (i == A) continue;
    if (std::abs(mesh.nodes[i].y() - mesh.nodes[A].y()) > tol) continue;
    if (std::abs(mesh.nodes[i].z() - mesh.nodes[A].z()) > tol) continue;
    if (B < 0 || mesh.nodes[i].x() > mesh.nodes[B].x()) B = i;
  }
  // C: farthest node along +y in the same z-plane as A (same z).
  int C = -1;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (i == A || i == B) continue;
    if (std::abs(mesh.nodes[i].z() - mesh.nodes[A].z()) > tol) continue;
    if (C < 0 || mesh.nodes[i].y() > mesh.nodes[C].y()) C = i;
  }

  fixed.push_back(3 * A);
  fixed.push_back(3 * A + 1);
  fixed.push_back(3 * A + 2);
  if (B >= 0) {
    fixed.push_back(3 * B + 1);
    fixed.push_back(3 * B + 2);
  }
  if (C >= 0) fixed.push_back(3 * C + 2);
  return fixed;
}

// ---------------------------------------------------------------------------
// Assembly and Newton solve
// ---------------------------------------------------------------------------

struct MechReport {
  int newton_iters = 0;
  std::vector<double> residual_history;
  bool converged = false;
};

namespace detail {

struct ElementMaterial {
  Mat3 Fa_inv = Mat3::Identity();
  double theta = 1.0;
  RegionParams params;  // by value: materials must not dangle into caller maps
};

inline std::vector<ElementMaterial> build_materials(
    const LabeledMesh& mesh, const Eigen::VectorXd& theta,
    const std::vector<std::optional<Vec3>>& elem_dir, const RegionSet& regions,
    const std::map<int, RegionParams>& region_params, bool isotropic_white_atrophy) {
  std::vector<ElementMaterial> mats(mesh.num_tets());
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const int label = mesh.region_label[e];
    const Tissue tissue = regions.tissue(label);
    ElementMaterial m;
    m.params = region_params.at(label);
    m.theta = theta[e];
    // Fluid domains are kept as ultrasoft meshed solids with theta = 1, so
    // the isotropic branch applies. White matter without a direction (the
    // axonal-field-free isotropic mode) also degrades to isotropic atrophy.
    Tissue atrophy_tissue = tissue;
    if (tissue == Tissue::White && (isotropic_white_atrophy || !elem_dir[e]))
      atrophy_tissue = Tissue::Grey;
    const Mat3 Fa = atrophy_tensor(m.theta, atrophy_tissue == Tissue::White ? elem_dir[e]
                                                                            : std::nullopt,
                                   atrophy_tissue);
    m.Fa_inv = Fa.inverse();
    mats[e] = m;
  }
  return mats;
}

// Residual of the total-Lagrangian weak form (no body force, traction-free
// natural boundaries). Returns false if any element is inverted at u. When
// abs_scale is given it accumulates the per-dof sum of |element
// contributions|, whose norm is the natural yardstick for "residual is zero
// up to assembly cancellation".
inline bool try_residual(const LabeledMesh& mesh, const std::vector<ElementMaterial>& mats,
                         const Eigen::VectorXd& u, Eigen::VectorXd& residual,
                         Eigen::VectorXd* abs_scale = nullptr, int* inverted_element = nullptr) {
  residual.setZero(u.size());
  if (abs_scale) abs_scale->setZero(u.size());
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const auto& mat = mats[e];
    const auto& t = mesh.tets[e];
    const Mat3 F = deformation_gradient(mesh, u, e);
    const Mat3 Fe = F * mat.Fa_inv;
    const double Je = Fe.determinant();
    if (!(Je > 0.0)) {
      if (inverted_element) *inverted_element = e;
      return false;
    }
    const Mat3 Fe_invT = Fe.inverse().transpose();
    const double lnJe = std::log(Je);
    const double G = mat.params.shear_G, lambda = mat.params.lambda;
    const double w = mat.theta * mesh.volume[e];
    for (int a = 0; a < 4; ++a) {
      const Vec3 h = mat.Fa_inv.transpose() * mesh.grad_N[e][a];
      const Vec3 wvec = Fe_invT * h;
      const Vec3 contrib = w * (G * (Fe * h - wvec) + lambda * lnJe * wvec);
      residual.segment<3>(3 * t[a]) += contrib;
      if (abs_scale) abs_scale->segment<3>(3 * t[a]) += contrib.cwiseAbs();
    }
  }
  return true;
}

// Analytic tangent; symmetric because it is the Hessian of the total energy.
inline SpMat assemble_tangent(const LabeledMesh& mesh, const std::vector<ElementMaterial>& mats,
                              const Eigen::VectorXd& u, const std::vector<char>& fixed_mask) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(144 * mesh.num_tets() + u.size());

  for (int e = 0; e < mesh.num_tets(); ++e) {
    const auto& mat = mats[e];
    const auto& t = mesh.tets[e];
    const Mat3 F = deformation_gradient(mesh, u, e);
    const Mat3 Fe = F * mat.Fa_inv;
    const double Je = Fe.determinant();
    if (!(Je > 0.0))
      throw SolverError("element inversion during tangent assembly at element " +
                        std::to_string(e));
    const Mat3 Fe_invT = Fe.inverse().transpose();
    const double lnJe = std::log(Je);
    const double G = mat.params.shear_G, lambda = mat.params.lambda;
    const double w = mat.theta * mesh.volume[e];

    std::array<Vec3, 4> h, wv;
    for (int a = 0; a < 4; ++a) {
      h[a] = mat.Fa_inv.transpose() * mesh.grad_N[e][a];
      wv[a] = Fe_invT * h[a];
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double hh = h[a].dot(h[b]);
        // K[(a,i)(b,k)] = w [ G (ha.hb) delta_ik
        //                    + (G - lambda lnJe) wa[k] wb[i]
        //                    + lambda wa[i] wb[k] ]
        for (int i = 0; i < 3; ++i) {
          const int row = 3 * t[a] + i;
          if (fixed_mask[row]) continue;
          for (int k = 0; k < 3; ++k) {
            const int col = 3 * t[b] + k;
            if (fixed_mask[col]) continue;
            double v = (G - lambda * lnJe) * wv[a][k] * wv[b][i] +
                       lambda * wv[a][i] * wv[b][k];
            if (i == k) v += G * hh;
            trip.emplace_back(row, col, w * v);
          }
        }
      }
    }
  }
  for (int d = 0; d < static_cast<int>(u.size()); ++d)
    if (fixed_mask[d]) trip.emplace_back(d, d, 1.0);

  SpMat K(u.size(), u.size());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

}  // namespace detail

// Solves div(P) = 0 with u = 0 on the given fixed dofs, Newton with
// backtracking line search and element-inversion guards. u_guess must satisfy
// the constraints (it is projected onto them regardless).
inline Eigen::VectorXd solve_equilibrium(const LabeledMesh& mesh, const Eigen::VectorXd& theta,
                                         const std::vector<std::optional<Vec3>>& elem_dir,
                                         const RegionSet& regions,
                                         const std::map<int, RegionParams>& region_params,
                                         const Eigen::VectorXd& u_guess,
                                         const std::vector<int>& fixed_dofs,
                                         const SolverSettings& settings,
                                         MechReport* report = nullptr,
                                         bool isotropic_white_atrophy = false) {
  const int ndof = 3 * mesh.num_nodes();
  const auto mats = detail::build_materials(mesh, theta, elem_dir, regions, region_params,
                                            isotropic_white_atrophy);

  std::vector<char> fixed_mask(ndof, 0);
  for (int d : fixed_dofs) fixed_mask[d] = 1;

  Eigen::VectorXd u = u_guess.size() == ndof ? u_guess : Eigen::VectorXd::Zero(ndof);
  for (int d = 0; d < ndof; ++d)
    if (fixed_mask[d]) u[d] = 0.0;

  auto masked = [&](Eigen::VectorXd& r) {
    for (int d = 0; d < ndof; ++d)
      if (fixed_mask[d]) r[d] = 0.0;
  };

  Eigen::VectorXd r(ndof), scale(ndof);
  int inverted = -1;
  if (!detail::try_residual(mesh, mats, u, r, &scale, &inverted))
    throw SolverError("initial guess inverts element " + std::to_string(inverted));
  masked(r);
  masked(scale);

  std::vector<double> history;
  double rnorm = r.norm();
  history.push_back(rnorm);
  const double tol = std::max(settings.newton_tol * rnorm, 1e-12);
  // A residual ten orders below the summed |element force| magnitude is
  // equilibrium to assembly-cancellation noise; warm starts from an already
  // converged state hit this before the relative test can.
  constexpr double kRoundoffFloorFactor = 1e-10;
  auto at_roundoff_floor = [&](double rn) { return rn <= kRoundoffFloorFactor * scale.norm(); };

  int it = 0;
  bool converged = rnorm <= tol || at_roundoff_floor(rnorm);
  for (; it < settings.newton_max_iters && !converged; ++it) {
    const SpMat K = detail::assemble_tangent(mesh, mats, u, fixed_mask);
    const Eigen::VectorXd delta =
        solve_symmetric(K, Eigen::VectorXd(-r), settings.lin_tol_mech, settings.direct_dof_limit);

    double s = 1.0;
    bool accepted = false;
    Eigen::VectorXd u_try, r_try(ndof), scale_try(ndof);
    for (int cut = 0; cut <= settings.max_line_search_cuts; ++cut, s *= 0.5) {
      u_try = u + s * delta;
      if (!detail::try_residual(mesh, mats, u_try, r_try, &scale_try)) continue;  // inverted
      masked(r_try);
      const double rt = r_try.norm();
      if (rt < rnorm || rt <= tol) {
        u = u_try;
        rnorm = rt;
        masked(scale_try);
        scale = scale_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (at_roundoff_floor(rnorm)) break;  // cannot and need not improve further
      throw SolverError("line search failed after " +
                            std::to_string(settings.max_line_search_cuts) + " cuts",
                        history);
    }
    r = r_try;
    history.push_back(rnorm);
    converged = rnorm <= tol || at_roundoff_floor(rnorm);
  }

  converged = converged || rnorm <= tol || at_roundoff_floor(rnorm);
  if (report) {
    report->newton_iters = it;
    report->residual_history = history;
    report->converged = converged;
  }
  if (!converged) {
    std::string msg = "Newton did not converge in " + std::to_string(settings.newton_max_iters) +
                      " iterations; residual history:";
    char buf[32];
    for (double h : history) {
      std::snprintf(buf, sizeof(buf), " %.3e", h);
      msg += buf;
    }
    throw SolverError(msg, history);
  }
  return u;
}

}  // namespace cerebra
