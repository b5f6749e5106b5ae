#pragma once

// Local evolution of the atrophy factor theta, driven by toxic tau.

#include <algorithm>
#include <cmath>

#include "cerebra/core.hpp"
#include "cerebra/params.hpp"

namespace cerebra {

// Smooth acceleration of the natural atrophy rate: a sigmoid in the
// normalized tau concentration that ramps from 0 to Gc/G0 around c_crit.
inline double gamma(double ctau_norm, const RegionParams& region, const BioParams& bio) {
  if (region.tissue == Tissue::Fluid) return 0.0;
  if (region.G0 == 0.0) {
    // A tissue region with no baseline rate cannot define the ratio Gc/G0;
    // only Gc = 0 (no accelerated atrophy either) is meaningful then.
    if (region.Gc == 0.0) return 0.0;
    throw ValidationError("region with G0 = 0 but Gc != 0: gamma = (Gc/G0) sigmoid is undefined");
  }
  const double ratio = region.Gc / region.G0;
  return ratio / (1.0 + std::exp(-bio.kappa * (ctau_norm - bio.c_crit_tau)));
}

// One explicit update of theta' = (1 + gamma(c_tau)) G0 - (k_theta/eta_theta)(theta - 1),
// evaluated with the end-of-step tau concentration and clamped at the floor.
// The rate is theta-independent in the default k_theta = 0 configuration, so
// the explicit update is exact for constant c_tau.
inline double step_theta(double theta, double ctau_norm, double dt, const RegionParams& region,
                         const BioParams& bio) {
  if (region.tissue == Tissue::Fluid) return theta;  // fluid does not atrophy
  double rate = (1.0 + gamma(ctau_norm, region, bio)) * region.G0;
  if (bio.k_theta > 0.0) rate -= (bio.k_theta / bio.eta_theta) * (theta - 1.0);
  return std::max(bio.theta_floor, theta + dt * rate);
}

}  // namespace cerebra
