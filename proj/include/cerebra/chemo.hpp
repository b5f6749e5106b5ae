#pragma once

// Two-species normalized reaction-diffusion system on the deforming mesh.
//
// Weak form, pulled back to the reference mesh: diffusion is integrated with
// quadrature mapped through the current deformation gradient (gradients via
// F^{-T}, measures via J = det F), so no remeshing is needed. Fluid elements
// are outside the chemical domain; the do-nothing boundary everywhere else
// realizes the no-flux condition.
//
// Time stepping: implicit-Euler diffusion with the logistic reaction treated
// semi-implicitly (trapezoidal in the reaction, linearized about the previous
// iterate and fixed-point iterated to tolerance). Abeta advances before tau
// within a step so the tau growth rate sees the end-of-step Abeta field.

#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "cerebra/core.hpp"
#include "cerebra/kinematics.hpp"
#include "cerebra/mesh.hpp"
#include "cerebra/params.hpp"
#include "cerebra/solvers.hpp"
#include "cerebra/state.hpp"

namespace cerebra {

// Logistic source for toxic Abeta.
inline double reaction_abeta(double c, double alpha) { return alpha * c * (1.0 - c); }

// Tau growth rate used in the source term. The kinetic mode couples to the
// local Abeta level; the closed-form mode reproduces the published fit, whose
// printed argument is the tau concentration itself.
inline double alpha_tau_effective(const BioParams& bio, double ctau, double cabeta) {
  if (bio.alpha_tau_mode == AlphaTauMode::TableClosedForm)
    return 1.09 * std::pow(0.4 * ctau + 1.0, -0.55);
  return derive_alpha_tau(bio, cabeta);
}

// Logistic source for toxic tau at the given Abeta level.
inline double reaction_tau(double ctau, double cabeta, const BioParams& bio) {
  return alpha_tau_effective(bio, ctau, cabeta) * ctau * (1.0 - ctau);
}

namespace detail {

// Value and c-derivative of the source term, as needed by the inner
// linearization. In closed-form mode alpha itself depends on c.
struct Reaction {
  std::function<double(int dof, double c)> value;
  std::function<double(int dof, double c)> slope;
};

inline Reaction make_abeta_reaction(const BioParams& bio) {
  const double alpha = alpha_abeta_effective(bio);
  return {[alpha](int, double c) { return alpha * c * (1.0 - c); },
          [alpha](int, double c) { return alpha * (1.0 - 2.0 * c); }};
}

inline Reaction make_tau_reaction(const BioParams& bio, const Eigen::VectorXd& cabeta_dof) {
  if (bio.alpha_tau_mode == AlphaTauMode::TableClosedForm) {
    return {[](int, double c) {
              return 1.09 * std::pow(0.4 * c + 1.0, -0.55) * c * (1.0 - c);
            },
            [](int, double c) {
              const double base = 0.4 * c + 1.0;
              const double a = 1.09 * std::pow(base, -0.55);
              const double da = 1.09 * (-0.55) * 0.4 * std::pow(base, -1.55);
              return da * c * (1.0 - c) + a * (1.0 - 2.0 * c);
            }};
  }
  return {[&bio, &cabeta_dof](int dof, double c) {
            return derive_alpha_tau(bio, cabeta_dof[dof]) * c * (1.0 - c);
          },
          [&bio, &cabeta_dof](int dof, double c) {
            return derive_alpha_tau(bio, cabeta_dof[dof]) * (1.0 - 2.0 * c);
          }};
}

}  // namespace detail

// Assembled operators for the chemical subproblem on the current geometry.
struct ChemOperators {
  std::vector<int> dof_of_node;  // -1 for nodes outside the chemical domain
  std::vector<int> node_of_dof;
  Eigen::VectorXd lumped_mass;   // current-volume lumped mass per dof
  SpMat stiffness_tau;
  SpMat stiffness_abeta;

  int num_dofs() const { return static_cast<int>(node_of_dof.size()); }

  Eigen::VectorXd gather(const Eigen::VectorXd& nodal) const {
    Eigen::VectorXd v(num_dofs());
    for (int d = 0; d < num_dofs(); ++d) v[d] = nodal[node_of_dof[d]];
    return v;
  }

  void scatter(const Eigen::VectorXd& dof_values, Eigen::VectorXd& nodal) const {
    for (int d = 0; d < num_dofs(); ++d) nodal[node_of_dof[d]] = dof_values[d];
  }

  double total_mass(const Eigen::VectorXd& dof_values) const {
    return lumped_mass.dot(dof_values);
  }
};

// Builds lumped mass and per-species stiffness from the cached per-element
// deformation gradients. With isotropic_white set, the white-matter tau
// tensor is replaced by its trace-preserving isotropic counterpart.
inline ChemOperators assemble_chem(const LabeledMesh& mesh, const std::vector<Mat3>& F_elem,
                                   const std::vector<std::optional<Vec3>>& elem_dir,
                                   const BioParams& bio, const RegionSet& regions,
                                   bool isotropic_white = false) {
  ChemOperators ops;
  const int n = mesh.num_nodes();
  const std::vector<char> fluid_only = mesh.fluid_only_nodes(regions);

  ops.dof_of_node.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (fluid_only[i]) continue;
    ops.dof_of_node[i] = static_cast<int>(ops.node_of_dof.size());
    ops.node_of_dof.push_back(i);
  }
  const int ndof = ops.num_dofs();
  ops.lumped_mass = Eigen::VectorXd::Zero(ndof);

  std::vector<Eigen::Triplet<double>> trip_tau, trip_ab;
  trip_tau.reserve(16 * mesh.num_tets());
  trip_ab.reserve(16 * mesh.num_tets());

  for (int e = 0; e < mesh.num_tets(); ++e) {
    const Tissue tissue = regions.tissue(mesh.region_label[e]);
    if (tissue == Tissue::Fluid) continue;

    const Mat3& F = F_elem[e];
    const double J = F.determinant();
    if (!(J > 0.0))
      throw SolverError("element " + std::to_string(e) + " is inverted during chem assembly");
    const Mat3 Finv_T = F.inverse().transpose();
    const double w = J * mesh.volume[e];  // current element volume

    Mat3 d_tau;
    if (tissue == Tissue::White && isotropic_white)
      d_tau = isotropized_tau_diffusion(bio);
    else
      d_tau = tau_diffusion(F, elem_dir[e], bio, tissue, e);
    const Mat3 d_ab = abeta_diffusion(bio);

    std::array<Vec3, 4> g;  // spatial shape gradients
    std::array<int, 4> dof;
    for (int a = 0; a < 4; ++a) {
      g[a] = Finv_T * mesh.grad_N[e][a];
      dof[a] = ops.dof_of_node[mesh.tets[e][a]];
    }
    for (int a = 0; a < 4; ++a) {
      ops.lumped_mass[dof[a]] += w / 4.0;
      const Vec3 dt_ga = d_tau * g[a];
      const Vec3 da_ga = d_ab * g[a];
      for (int b = 0; b < 4; ++b) {
        trip_tau.emplace_back(dof[a], dof[b], w * g[b].dot(dt_ga));
        trip_ab.emplace_back(dof[a], dof[b], w * g[b].dot(da_ga));
      }
    }
  }

  ops.stiffness_tau.resize(ndof, ndof);
  ops.stiffness_tau.setFromTriplets(trip_tau.begin(), trip_tau.end());
  ops.stiffness_abeta.resize(ndof, ndof);
  ops.stiffness_abeta.setFromTriplets(trip_ab.begin(), trip_ab.end());
  return ops;
}

struct ChemStepReport {
  int halvings = 0;          // deepest subdivision level used
  int iterations = 0;        // total inner iterations over all (sub)steps
  long clamped_nodes = 0;    // negative values clamped to zero
  double clamped_mass = 0.0; // lumped mass removed by clamping
};

namespace detail {

struct StepRejected {};

// One implicit (sub)step of a single species; throws StepRejected on inner
// non-convergence or on overshoot beyond the admissible excess. The inner
// fixed point is a chord iteration: the reaction is linearized about the
// step-start field, the resulting SPD matrix is factored once, and the
// right-hand side is refreshed from the current iterate until the update
// stalls below chem_tol. The converged field satisfies the fully coupled
// trapezoidal-reaction/implicit-diffusion equations.
inline void advance_species_once(Eigen::VectorXd& c, const SpMat& K, const Eigen::VectorXd& M,
                                 const Reaction& reaction, double dt,
                                 const SolverSettings& settings, ChemStepReport& report) {
  const int ndof = static_cast<int>(c.size());
  const Eigen::VectorXd c_old = c;

  Eigen::VectorXd R_old(ndof), Rp_old(ndof);
  for (int i = 0; i < ndof; ++i) {
    R_old[i] = reaction.value(i, c_old[i]);
    Rp_old[i] = reaction.slope(i, c_old[i]);
  }

  SpMat A = K;
  for (int i = 0; i < ndof; ++i) A.coeffRef(i, i) += M[i] / dt - 0.5 * M[i] * Rp_old[i];
  const SymmetricSolver solver(A, settings.lin_tol_chem, settings.direct_dof_limit);

  Eigen::VectorXd ck = c_old;
  Eigen::VectorXd rhs(ndof);
  bool converged = false;
  for (int it = 0; it < settings.max_chem_iters; ++it) {
    ++report.iterations;
    for (int i = 0; i < ndof; ++i) {
      const double Rk = reaction.value(i, ck[i]);
      rhs[i] = M[i] * c_old[i] / dt + 0.5 * M[i] * (R_old[i] + Rk - Rp_old[i] * ck[i]);
    }
    Eigen::VectorXd cn = solver.solve(rhs);
    const double denom = std::max(cn.lpNorm<Eigen::Infinity>(), 1e-12);
    const double rel = (cn - ck).lpNorm<Eigen::Infinity>() / denom;
    ck = cn;
    if (rel <= settings.chem_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw StepRejected{};
  if (ck.maxCoeff() > 1.0 + kOvershootTol) throw StepRejected{};

  for (int i = 0; i < ndof; ++i) {
    if (ck[i] < 0.0) {
      report.clamped_nodes++;
      report.clamped_mass += M[i] * (-ck[i]);
      ck[i] = 0.0;
    }
  }
  c = ck;
}

inline void advance_species_adaptive(Eigen::VectorXd& c, const SpMat& K, const Eigen::VectorXd& M,
                                     const Reaction& reaction, double dt,
                                     const SolverSettings& settings, ChemStepReport& report,
                                     int depth) {
  Eigen::VectorXd saved = c;
  try {
    advance_species_once(c, K, M, reaction, dt, settings, report);
    return;
  } catch (const StepRejected&) {
    c = saved;
  }
  if (depth >= settings.max_dt_halvings)
    throw SolverError("chemistry step rejected after " + std::to_string(depth) +
                      " dt halvings (non-convergence or overshoot beyond 1+" +
                      std::to_string(kOvershootTol) + ")");
  report.halvings = std::max(report.halvings, depth + 1);
  advance_species_adaptive(c, K, M, reaction, dt / 2, settings, report, depth + 1);
  advance_species_adaptive(c, K, M, reaction, dt / 2, settings, report, depth + 1);
}

}  // namespace detail

// Advances both species over dt on full nodal vectors (entries outside the
// chemical domain are left untouched).
inline ChemStepReport step_chem(const ChemOperators& ops, Eigen::VectorXd& ctau_nodal,
                                Eigen::VectorXd& cabeta_nodal, double dt, const BioParams& bio,
                                const SolverSettings& settings) {
  ChemStepReport report;
  if (ops.num_dofs() == 0 || !(dt > 0.0)) return report;

  Eigen::VectorXd cab = ops.gather(cabeta_nodal);
  const detail::Reaction r_ab = detail::make_abeta_reaction(bio);
  detail::advance_species_adaptive(cab, ops.stiffness_abeta, ops.lumped_mass, r_ab, dt, settings,
                                   report, 0);
  ops.scatter(cab, cabeta_nodal);

  Eigen::VectorXd ct = ops.gather(ctau_nodal);
  const detail::Reaction r_tau = detail::make_tau_reaction(bio, cab);  // end-of-step Abeta
  detail::advance_species_adaptive(ct, ops.stiffness_tau, ops.lumped_mass, r_tau, dt, settings,
                                   report, 0);
  ops.scatter(ct, ctau_nodal);
  return report;
}

}  // namespace cerebra
