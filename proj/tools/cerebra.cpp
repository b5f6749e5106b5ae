// Command-line driver: validate inputs, run simulations, compare snapshots.
//
// Exit codes: 0 success, 1 usage error, 2 missing input, 3 validation
// failure, 4 solver failure.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cerebra/coupler.hpp"
#include "cerebra/meshio.hpp"
#include "cerebra/params.hpp"
#include "cerebra/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitValidation = 3;
constexpr int kExitSolver = 4;

struct CliOptions {
  std::string config_path;
  std::string mesh_path;
  std::string axonal_path;
  std::string out_dir;
  std::string mode_str = "ad";
  std::string from_json;
  std::string diff_a, diff_b;
  double diff_tol = 1e-9;
  std::optional<double> years, dt, snapshot_every;
  std::optional<int> threads;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw cerebra::MissingInputError(std::string(what) + " path not given");
  if (!fs::exists(path))
    throw cerebra::MissingInputError(std::string(what) + " file does not exist: " + path);
}

void apply_overrides(cerebra::Config& cfg, const CliOptions& opt) {
  if (opt.years) cfg.solver.years = *opt.years;
  if (opt.dt) cfg.solver.dt = *opt.dt;
  if (opt.snapshot_every) cfg.solver.snapshot_every = *opt.snapshot_every;
  if (opt.threads) cfg.solver.threads = *opt.threads;
  cfg.solver.validate();
}

std::string resolved_config_text(const cerebra::Config& cfg) {
  const fs::path tmp = fs::temp_directory_path() /
                       ("cerebra_cfg_" + std::to_string(::getpid()) + ".cfg");
  cerebra::save_config(cfg, tmp);
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(tmp);
  return ss.str();
}

bool mesh_has_white(const cerebra::LabeledMesh& mesh, const cerebra::RegionSet& regions) {
  for (int e = 0; e < mesh.num_tets(); ++e)
    if (regions.tissue(mesh.region_label[e]) == cerebra::Tissue::White) return true;
  return false;
}

// ---------------------------------------------------------------------------

int cmd_validate(const CliOptions& opt) {
  require_file(opt.config_path, "config");
  require_file(opt.mesh_path, "mesh");
  const cerebra::Mode mode = cerebra::mode_from_string(opt.mode_str);

  cerebra::Config cfg = cerebra::load_config(opt.config_path);
  apply_overrides(cfg, opt);
  const cerebra::LabeledMesh mesh = cerebra::read_mesh(opt.mesh_path);
  mesh.validate_regions(cfg.regions);

  const bool white = mesh_has_white(mesh, cfg.regions);
  if (white && opt.axonal_path.empty() && mode != cerebra::Mode::AdIsotropic)
    throw cerebra::MissingInputError(
        "axonal field required: mesh has white matter and mode is " + opt.mode_str);

  std::printf("mesh: %d nodes, %d elements, %zu boundary faces\n", mesh.num_nodes(),
              mesh.num_tets(), mesh.boundary_faces.size());
  std::printf("total volume: %.6g mm^3\n", mesh.total_volume());

  std::map<int, double> vol_by_label;
  std::map<int, int> count_by_label;
  for (int e = 0; e < mesh.num_tets(); ++e) {
    vol_by_label[mesh.region_label[e]] += mesh.volume[e];
    count_by_label[mesh.region_label[e]]++;
  }
  std::printf("regions (%zu declared, %zu present in mesh):\n", cfg.regions.size(),
              vol_by_label.size());
  for (const auto& [label, info] : cfg.regions.all()) {
    const double v = vol_by_label.count(label) ? vol_by_label[label] : 0.0;
    const int c = count_by_label.count(label) ? count_by_label[label] : 0;
    std::printf("  %3d %-20s %-6s %8d elems  %12.6g mm^3\n", label, info.name.c_str(),
                cerebra::to_string(info.tissue), c, v);
  }

  int face_counts[3] = {0, 0, 0};
  for (const auto& f : mesh.boundary_faces) face_counts[static_cast<int>(f.label)]++;
  std::printf("boundary faces: %d OUTER_CSF, %d INTERIOR_FLUID, %d FREE\n", face_counts[0],
              face_counts[1], face_counts[2]);

  if (!opt.axonal_path.empty()) {
    require_file(opt.axonal_path, "axonal field");
    const cerebra::AxonalField field = cerebra::read_axonal_field(
        opt.axonal_path, mesh, cfg.regions, cfg.solver.axonal_search_radius);
    std::size_t white_nodes = 0;
    const auto wmask = mesh.nodes_touching(cfg.regions, cerebra::Tissue::White);
    for (char m : wmask) white_nodes += (m != 0);
    const double coverage =
        white_nodes ? static_cast<double>(field.directed_count()) / white_nodes : 1.0;
    std::printf("axonal field: %zu/%zu white nodes covered (%.1f%%), "
                "mapping distance mean %.3g / max %.3g mm, %zu zero-norm entries skipped\n",
                field.directed_count(), white_nodes, 100.0 * coverage,
                field.mean_mapping_distance, field.max_mapping_distance, field.skipped_entries);
    // Element directions must resolve everywhere for the run to proceed.
    cerebra::element_axonal_directions(mesh, field, cfg.regions);
  }

  std::printf("derived rates: alpha_abeta(direct) = %.6g, alpha_abeta(derived) = %.6g 1/yr\n",
              cfg.bio.alpha_abeta, cerebra::derive_alpha_abeta(cfg.bio));
  std::printf("               alpha_tau(cabeta=0) = %.6g, alpha_tau(cabeta=1) = %.6g 1/yr\n",
              cerebra::derive_alpha_tau(cfg.bio, 0.0), cerebra::derive_alpha_tau(cfg.bio, 1.0));
  std::printf("limit concentrations: c_lim_abeta = %.6g, c_lim_tau(0) = %.6g\n",
              cerebra::c_lim_abeta(cfg.bio), cerebra::c_lim_tau(cfg.bio));
  std::printf("resolved config:\n%s", resolved_config_text(cfg).c_str());
  std::printf("validate: OK\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_run(const CliOptions& opt_in) {
  CliOptions opt = opt_in;
  cerebra::Config cfg;
  cerebra::Mode mode;

  if (!opt.from_json.empty()) {
    require_file(opt.from_json, "run manifest");
    std::ifstream in(opt.from_json);
    json manifest = json::parse(in);
    mode = cerebra::mode_from_string(manifest.at("mode").get<std::string>());
    opt.mesh_path = manifest.at("mesh").get<std::string>();
    opt.axonal_path = manifest.value("axonal", std::string{});
    if (opt.out_dir.empty()) throw cerebra::MissingInputError("--out required with --from-json");
    fs::create_directories(opt.out_dir);
    const fs::path cfg_path = fs::path(opt.out_dir) / "resolved.cfg";
    std::ofstream cfg_out(cfg_path);
    cfg_out << manifest.at("resolved_config").get<std::string>();
    cfg_out.close();
    cfg = cerebra::load_config(cfg_path);
  } else {
    require_file(opt.config_path, "config");
    mode = cerebra::mode_from_string(opt.mode_str);
    cfg = cerebra::load_config(opt.config_path);
    apply_overrides(cfg, opt);
  }
  require_file(opt.mesh_path, "mesh");
  if (opt.out_dir.empty()) throw cerebra::MissingInputError("output directory not given");
  fs::create_directories(opt.out_dir);

  const cerebra::LabeledMesh mesh = cerebra::read_mesh(opt.mesh_path);
  mesh.validate_regions(cfg.regions);

  std::optional<cerebra::AxonalField> axonal;
  if (!opt.axonal_path.empty()) {
    require_file(opt.axonal_path, "axonal field");
    axonal = cerebra::read_axonal_field(opt.axonal_path, mesh, cfg.regions,
                                        cfg.solver.axonal_search_radius);
  } else if (mesh_has_white(mesh, cfg.regions) && mode != cerebra::Mode::AdIsotropic) {
    throw cerebra::MissingInputError(
        "axonal field required: mesh has white matter and mode is " +
        std::string(cerebra::to_string(mode)));
  }

  json manifest;
  manifest["version"] = cerebra::kVersion;
  manifest["mode"] = cerebra::to_string(mode);
  manifest["mesh"] = fs::absolute(opt.mesh_path).string();
  if (!opt.axonal_path.empty()) manifest["axonal"] = fs::absolute(opt.axonal_path).string();
  manifest["resolved_config"] = resolved_config_text(cfg);
  manifest["observables"] = "observables.csv";

  const auto t0 = std::chrono::steady_clock::now();
  auto wall_seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto write_manifest = [&](const std::string& status, const std::string& error = {}) {
    manifest["status"] = status;
    if (!error.empty()) manifest["error"] = error;
    manifest["wall_seconds"] = wall_seconds();
    std::ofstream out(fs::path(opt.out_dir) / "run.json");
    out << manifest.dump(2) << "\n";
  };

  cerebra::RunCallbacks cb;
  int snapshots_written = 0;
  cb.on_snapshot = [&](const cerebra::SimState& s) {
    char name[64];
    std::snprintf(name, sizeof(name), "snap_t%07.2f.vtk", s.time);
    cerebra::write_snapshot(s, mesh, fs::path(opt.out_dir) / name);
    ++snapshots_written;
  };

  cerebra::SimState state = cerebra::initialize_state(mesh, cfg, mode);
  try {
    cerebra::RunResult result =
        cerebra::run_simulation(std::move(state), mesh, axonal ? &*axonal : nullptr, cfg, mode, cb);
    cerebra::write_observables_csv(result.observables,
                                   fs::path(opt.out_dir) / "observables.csv");
    manifest["steps"] = result.steps;
    manifest["snapshots"] = snapshots_written;
    manifest["chem_clamped_nodes"] = result.chem_clamped_nodes;
    manifest["chem_max_halvings"] = result.chem_max_halvings;
    write_manifest("ok");
    std::printf("run: %d steps, %d snapshots, %.1f s wall\n", result.steps, snapshots_written,
                wall_seconds());
    return kExitOk;
  } catch (const cerebra::SolverError& e) {
    // Keep whatever was produced and record the failure.
    write_manifest("error", e.what());
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  }
}

// ---------------------------------------------------------------------------

int cmd_snapshot_diff(const CliOptions& opt) {
  require_file(opt.diff_a, "snapshot A");
  require_file(opt.diff_b, "snapshot B");
  const cerebra::SnapshotData a = cerebra::read_snapshot(opt.diff_a);
  const cerebra::SnapshotData b = cerebra::read_snapshot(opt.diff_b);

  if (a.points.size() != b.points.size() || a.cells.size() != b.cells.size()) {
    std::printf("snapshot-diff: geometry differs (%zu vs %zu points, %zu vs %zu cells)\n",
                a.points.size(), b.points.size(), a.cells.size(), b.cells.size());
    return kExitValidation;
  }

  struct FieldPair {
    const char* name;
    const Eigen::VectorXd* x;
    const Eigen::VectorXd* y;
  };
  const FieldPair fields[] = {{"c_tau", &a.ctau, &b.ctau},
                              {"c_abeta", &a.cabeta, &b.cabeta},
                              {"u_mag", &a.u_mag, &b.u_mag},
                              {"theta", &a.theta, &b.theta}};
  bool within = true;
  for (const auto& f : fields) {
    if (f.x->size() != f.y->size()) {
      std::printf("%-8s size mismatch (%ld vs %ld)\n", f.name, long(f.x->size()),
                  long(f.y->size()));
      within = false;
      continue;
    }
    if (f.x->size() == 0) continue;
    const double max_abs = (*f.x - *f.y).lpNorm<Eigen::Infinity>();
    const double scale = std::max(f.x->lpNorm<Eigen::Infinity>(), 1.0);
    const bool ok = max_abs <= opt.diff_tol * scale;
    std::printf("%-8s max|diff| = %.6g (scale %.6g) %s\n", f.name, max_abs, scale,
                ok ? "OK" : "DIFFERS");
    within = within && ok;
  }
  std::printf("snapshot-diff: %s (tolerance %.3g relative)\n",
              within ? "fields match" : "fields differ", opt.diff_tol);
  return within ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cerebra: coupled protein-spread and atrophy simulation on labeled "
               "tetrahedral brain meshes"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", opt.config_path, "run configuration file");
    sub->add_option("--mesh", opt.mesh_path, "labeled tetrahedral mesh (MESH v1)");
    sub->add_option("--axonal", opt.axonal_path, "axonal orientation field (x y z ax ay az)");
    sub->add_option("--mode", opt.mode_str, "ad | healthy | ad_isotropic")
        ->check(CLI::IsMember({"ad", "healthy", "ad_isotropic"}));
    sub->add_option("--years", opt.years, "simulated horizon, years");
    sub->add_option("--dt", opt.dt, "time step, years");
    sub->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
    sub->add_option("--snapshot-every", opt.snapshot_every, "snapshot cadence, years");
    if (with_out) sub->add_option("--out", opt.out_dir, "output directory");
  };

  CLI::App* validate = app.add_subcommand("validate", "check mesh/axonal/config consistency");
  add_common(validate, false);

  CLI::App* run = app.add_subcommand("run", "run a simulation scenario");
  add_common(run, true);
  run->add_option("--from-json", opt.from_json, "reproduce a previous run from its run.json");

  CLI::App* sdiff = app.add_subcommand("snapshot-diff", "compare two snapshot files field-wise");
  sdiff->add_option("a", opt.diff_a, "first snapshot")->required();
  sdiff->add_option("b", opt.diff_b, "second snapshot")->required();
  sdiff->add_option("--tol", opt.diff_tol, "relative tolerance (default 1e-9)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt);
    if (run->parsed()) return cmd_run(opt);
    if (sdiff->parsed()) return cmd_snapshot_diff(opt);
    return kExitUsage;
  } catch (const cerebra::MissingInputError& e) {
    std::fprintf(stderr, "missing input: %s\n", e.what());
    return kExitMissingInput;
  } catch (const cerebra::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitValidation;
  } catch (const cerebra::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const cerebra::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
}
