#pragma once

// Staggered multi-year time loop: per step, advance Abeta, advance tau,
// evolve the atrophy factor from the end-of-step tau field, then solve the
// quasi-static mechanical equilibrium. Volume-fraction and mean-concentration
// observables are appended every step.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cerebra/atrophy.hpp"
#include "cerebra/chemo.hpp"
#include "cerebra/core.hpp"
#include "cerebra/kinematics.hpp"
#include "cerebra/mechano.hpp"
#include "cerebra/mesh.hpp"
#include "cerebra/params.hpp"
#include "cerebra/state.hpp"
#include "cerebra/threading.hpp"

namespace cerebra {

enum class Mode { AD, Healthy, AdIsotropic };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::AD: return "ad";
    case Mode::Healthy: return "healthy";
    case Mode::AdIsotropic: return "ad_isotropic";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "ad") return Mode::AD;
  if (s == "healthy") return Mode::Healthy;
  if (s == "ad_isotropic") return Mode::AdIsotropic;
  throw ValidationError("unknown mode '" + s + "' (expected ad|healthy|ad_isotropic)");
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

struct ObservableRow {
  double time = 0.0;
  double grey_frac_pct = 0.0;
  double white_frac_pct = 0.0;
  double ventricle_frac_pct = 0.0;
  std::vector<double> mean_ctau;    // per sorted region name
  std::vector<double> mean_cabeta;
  std::vector<double> min_theta;
};

struct Observables {
  std::vector<std::string> region_names;  // lexicographically sorted
  std::vector<ObservableRow> rows;
};

// Volume fractions are normalized by the initial grey+white+ventricle volume.
// Fluid regions named "csf" model the artificially expanded fluid hull and
// are excluded from the normalization; every other fluid region counts as
// ventricular volume.
inline bool counts_as_ventricle(const RegionInfo& info) {
  return info.tissue == Tissue::Fluid && info.name != "csf";
}

inline double reference_volume(const LabeledMesh& mesh, const RegionSet& regions) {
  double v = 0.0;
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const RegionInfo& info = regions.info(mesh.region_label[e]);
    if (info.tissue != Tissue::Fluid || counts_as_ventricle(info)) v += mesh.volume[e];
  }
  return v;
}

inline ObservableRow compute_observables(const SimState& state, const LabeledMesh& mesh,
                                         const RegionSet& regions, double ref_volume) {
  const std::vector<std::string> names = regions.sorted_names();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < names.size(); ++i) col[names[i]] = i;

  ObservableRow row;
  row.time = state.time;
  row.mean_ctau.assign(names.size(), 0.0);
  row.mean_cabeta.assign(names.size(), 0.0);
  row.min_theta.assign(names.size(), 1.0);
  std::vector<double> region_volume(names.size(), 0.0);
  std::vector<bool> region_seen(names.size(), false);

  double grey = 0.0, white = 0.0, vent = 0.0;
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const auto& t = mesh.tets[e];
    // Element volume in the deformed configuration x = X + u.
    std::array<Vec3, 4> x;
    for (int a = 0; a < 4; ++a) x[a] = mesh.nodes[t[a]] + state.u.segment<3>(3 * t[a]);
    const double ve = tet_signed_volume(x[0], x[1], x[2], x[3]);

    const RegionInfo& info = regions.info(mesh.region_label[e]);
    if (info.tissue == Tissue::Grey) grey += ve;
    else if (info.tissue == Tissue::White) white += ve;
    else if (counts_as_ventricle(info)) vent += ve;

    const std::size_t c = col.at(info.name);
    double ctau_e = 0.0, cab_e = 0.0;
    for (int a = 0; a < 4; ++a) {
      ctau_e += state.ctau[t[a]];
      cab_e += state.cabeta[t[a]];
    }
    row.mean_ctau[c] += ve * ctau_e / 4.0;
    row.mean_cabeta[c] += ve * cab_e / 4.0;
    region_volume[c] += ve;
    if (!region_seen[c] || state.theta[e] < row.min_theta[c]) row.min_theta[c] = state.theta[e];
    region_seen[c] = true;
  }

  for (std::size_t c = 0; c < names.size(); ++c) {
    if (region_volume[c] > 0.0) {
      row.mean_ctau[c] /= region_volume[c];
      row.mean_cabeta[c] /= region_volume[c];
    }
  }
  const double denom = ref_volume > 0.0 ? ref_volume : 1.0;
  row.grey_frac_pct = 100.0 * grey / denom;
  row.white_frac_pct = 100.0 * white / denom;
  row.ventricle_frac_pct = 100.0 * vent / denom;
  return row;
}

inline void write_observables_csv(const Observables& obs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot write observables file: " + path.string());
  out.precision(17);
  out << "time_years,grey_frac_pct,white_frac_pct,ventricle_frac_pct";
  for (const auto& n : obs.region_names) out << ",mean_ctau_" << n;
  for (const auto& n : obs.region_names) out << ",mean_cabeta_" << n;
  for (const auto& n : obs.region_names) out << ",min_theta_" << n;
  out << "\n";
  for (const auto& r : obs.rows) {
    out << r.time << "," << r.grey_frac_pct << "," << r.white_frac_pct << ","
        << r.ventricle_frac_pct;
    for (double v : r.mean_ctau) out << "," << v;
    for (double v : r.mean_cabeta) out << "," << v;
    for (double v : r.min_theta) out << "," << v;
    out << "\n";
  }
  if (!out) throw MissingInputError("I/O failure writing " + path.string());
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

// Healthy state plus region-constant seeds (healthy mode ignores seeds: no
// protein kinetics are simulated there at all). Where two seeded regions
// share interface nodes the larger value wins.
inline SimState initialize_state(const LabeledMesh& mesh, const Config& cfg, Mode mode) {
  mesh.validate_regions(cfg.regions);
  SimState state = SimState::healthy(mesh);
  if (mode == Mode::Healthy) return state;

  auto apply = [&](const std::map<std::string, double>& seeds, Eigen::VectorXd& field,
                   const char* species) {
    for (const auto& [name, value] : seeds) {
      const int label = cfg.regions.label_of(name);
      if (cfg.regions.tissue(label) == Tissue::Fluid)
        throw ValidationError(std::string(species) + " seed targets fluid region '" + name + "'");
      bool found = false;
      for (int e = 0; e < mesh.num_tets(); ++e) {
        if (mesh.region_label[e] != label) continue;
        found = true;
        for (int a = 0; a < 4; ++a) {
          const int n = mesh.tets[e][a];
          field[n] = std::max(field[n], value);
        }
      }
      if (!found)
        throw ValidationError(std::string("seed region '") + name + "' absent from mesh");
    }
  };
  apply(cfg.seeds.tau, state.ctau, "tau");
  apply(cfg.seeds.abeta, state.cabeta, "abeta");
  return state;
}

// ---------------------------------------------------------------------------
// Time loop
// ---------------------------------------------------------------------------

struct RunCallbacks {
  // Invoked at t=0 and whenever the snapshot cadence elapses (and at the end).
  std::function<void(const SimState&)> on_snapshot;
  // Invoked after every completed step.
  std::function<void(const SimState&, int step)> on_step;
};

struct RunResult {
  SimState state;
  Observables observables;
  int steps = 0;
  long chem_clamped_nodes = 0;
  double chem_clamped_mass = 0.0;
  int chem_max_halvings = 0;
  int mech_solves = 0;
};

// Healthy ageing switches off the accelerated atrophy contribution entirely.
inline Config healthy_variant(Config cfg) {
  for (auto& [label, rp] : cfg.region_params) rp.Gc = 0.0;
  return cfg;
}

inline RunResult run_simulation(SimState state, const LabeledMesh& mesh,
                                const AxonalField* axonal, const Config& config, Mode mode,
                                const RunCallbacks& cb = {}) {
  if (!state.sized_for(mesh)) throw ValidationError("state fields are not sized for the mesh");
  mesh.validate_regions(config.regions);

  const Config cfg = (mode == Mode::Healthy) ? healthy_variant(config) : config;
  const SolverSettings& sv = cfg.solver;
  const int threads = effective_threads(sv.threads);

  // Element axonal directions. White matter without a field is admissible
  // only in the isotropic-transport mode, where atrophy also reverts to the
  // isotropic branch.
  std::vector<std::optional<Vec3>> elem_dir(mesh.num_tets());
  bool white_present = false;
  for (int e = 0; e < mesh.num_tets(); ++e)
    if (cfg.regions.tissue(mesh.region_label[e]) == Tissue::White) white_present = true;
  if (axonal) {
    elem_dir = element_axonal_directions(mesh, *axonal, cfg.regions);
  } else if (white_present && mode != Mode::AdIsotropic) {
    throw MissingInputError("mesh has white matter: an axonal field is required in mode " +
                            std::string(to_string(mode)));
  }
  const bool iso_white_atrophy = (mode == Mode::AdIsotropic) && (axonal == nullptr);
  const bool iso_white_diffusion = (mode == Mode::AdIsotropic);

  const std::vector<int> fixed_dofs = dirichlet_fixed_dofs(mesh);

  // Cached per-element deformation gradients (identity at u = 0).
  std::vector<Mat3> F_cache(mesh.num_tets());
  auto refresh_F = [&]() {
    parallel_chunks(mesh.num_tets(), threads, [&](int b, int e, int) {
      for (int i = b; i < e; ++i) F_cache[i] = deformation_gradient(mesh, state.u, i);
    });
  };
  refresh_F();

  RunResult result;
  result.observables.region_names = cfg.regions.sorted_names();
  const double ref_volume = reference_volume(mesh, cfg.regions);
  result.observables.rows.push_back(compute_observables(state, mesh, cfg.regions, ref_volume));

  if (cb.on_snapshot) cb.on_snapshot(state);
  double last_snapshot_time = state.time;

  auto advance_theta = [&](const Eigen::VectorXd& theta_in, Eigen::VectorXd& theta_out,
                           double dt) {
    theta_out = theta_in;
    for (int e = 0; e < mesh.num_tets(); ++e) {
      const RegionParams& rp = cfg.params_for(mesh.region_label[e]);
      if (rp.tissue == Tissue::Fluid) continue;
      double ctau_e = 0.0;
      for (int a = 0; a < 4; ++a) ctau_e += state.ctau[mesh.tets[e][a]];
      ctau_e /= 4.0;
      theta_out[e] = step_theta(theta_in[e], ctau_e, dt, rp, cfg.bio);
    }
  };

  // Integer stepping: times are assigned as t_start + i*dt (never
  // accumulated), so 20 years at dt = 0.05 is exactly 400 steps.
  const double t_start = state.time;
  const double t_end = sv.years;
  const long n_full = static_cast<long>(std::floor((t_end - t_start) / sv.dt + 1e-9));
  const double tail = t_end - (t_start + n_full * sv.dt);
  const long n_steps = n_full + (tail > 1e-9 ? 1 : 0);

  int step = 0;
  for (long i = 1; i <= n_steps; ++i) {
    const double step_target = (i <= n_full) ? t_start + i * sv.dt : t_end;
    const double dt = step_target - state.time;
    if (!(dt > 0.0)) continue;
    ++step;

    const Eigen::VectorXd ctau_begin = state.ctau;
    const Eigen::VectorXd cabeta_begin = state.cabeta;
    const Eigen::VectorXd theta_begin = state.theta;

    auto substep = [&](bool last_pass) {
      try {
        if (mode != Mode::Healthy) {
          const ChemOperators ops =
              assemble_chem(mesh, F_cache, elem_dir, cfg.bio, cfg.regions, iso_white_diffusion);
          const ChemStepReport rep = step_chem(ops, state.ctau, state.cabeta, dt, cfg.bio, sv);
          if (last_pass) {
            result.chem_clamped_nodes += rep.clamped_nodes;
            result.chem_clamped_mass += rep.clamped_mass;
            result.chem_max_halvings = std::max(result.chem_max_halvings, rep.halvings);
          }
        }
        advance_theta(theta_begin, state.theta, dt);
        if (step % sv.mech_every_n == 0) {
          state.u = solve_equilibrium(mesh, state.theta, elem_dir, cfg.regions,
                                      cfg.region_params, state.u, fixed_dofs, sv, nullptr,
                                      iso_white_atrophy);
          if (last_pass) ++result.mech_solves;
          refresh_F();
        }
      } catch (const std::exception& e) {
        throw SolverError("step " + std::to_string(step) + " (t = " +
                          std::to_string(state.time + dt) + " yr): " + e.what());
      }
    };

    substep(!sv.corrector_pass);
    if (sv.corrector_pass) {
      // One corrector sweep: redo the step from its initial fields using the
      // end-of-step geometry produced by the predictor.
      state.ctau = ctau_begin;
      state.cabeta = cabeta_begin;
      substep(true);
    }

    state.time = step_target;
    result.observables.rows.push_back(compute_observables(state, mesh, cfg.regions, ref_volume));
    if (cb.on_step) cb.on_step(state, step);

    if (cb.on_snapshot && sv.snapshot_every > 0 &&
        state.time - last_snapshot_time >= sv.snapshot_every - 1e-9) {
      cb.on_snapshot(state);
      last_snapshot_time = state.time;
    }
  }
  if (cb.on_snapshot && state.time - last_snapshot_time > 1e-9) cb.on_snapshot(state);

  result.steps = step;
  result.state = std::move(state);
  return result;
}

}  // namespace cerebra
