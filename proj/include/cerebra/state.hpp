#pragma once

// Full simulation state at one instant: nodal concentrations and
// displacements plus the per-element atrophy factor.

#include <Eigen/Dense>

#include "cerebra/core.hpp"
#include "cerebra/mesh.hpp"

namespace cerebra {

inline constexpr double kOvershootTol = 1e-3;  // admissible excess above 1

struct SimState {
  double time = 0.0;        // years
  Eigen::VectorXd ctau;     // normalized tau per node (0 on fluid-only nodes)
  Eigen::VectorXd cabeta;   // normalized Abeta per node
  Eigen::VectorXd u;        // displacement, 3 per node, mm
  Eigen::VectorXd theta;    // atrophy factor per element

  static SimState healthy(const LabeledMesh& mesh) {
    SimState s;
    s.ctau = Eigen::VectorXd::Zero(mesh.num_nodes());
    s.cabeta = Eigen::VectorXd::Zero(mesh.num_nodes());
    s.u = Eigen::VectorXd::Zero(3 * mesh.num_nodes());
    s.theta = Eigen::VectorXd::Ones(mesh.num_tets());
    return s;
  }

  bool sized_for(const LabeledMesh& mesh) const {
    return ctau.size() == mesh.num_nodes() && cabeta.size() == mesh.num_nodes() &&
           u.size() == 3 * mesh.num_nodes() && theta.size() == mesh.num_tets();
  }

  Vec3 displacement(int node) const { return u.segment<3>(3 * node); }
};

// Total deformation gradient of element e for the given nodal displacement
// vector (3 per node), using the precomputed reference shape gradients.
inline Mat3 deformation_gradient(const LabeledMesh& mesh, const Eigen::VectorXd& u, int e) {
  Mat3 F = Mat3::Identity();
  const auto& t = mesh.tets[e];
  for (int a = 0; a < 4; ++a)
    F += u.segment<3>(3 * t[a]) * mesh.grad_N[e][a].transpose();
  return F;
}

}  // namespace cerebra
