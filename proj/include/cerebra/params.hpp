#pragma once

// Per-region material/atrophy parameters, global biophysical rates, seeding
// specification, and solver settings, plus the run-configuration file format.
//
// Config files are line-oriented key/value text with sections
// [regions.<name>], [bio], [seeds], [solver]. Unknown keys are errors. Any
// key omitted falls back to the published defaults (see default_config()).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cerebra/core.hpp"
#include "cerebra/mesh.hpp"

namespace cerebra {

// ---------------------------------------------------------------------------
// Parameter bundles
// ---------------------------------------------------------------------------

struct RegionParams {
  double lambda = 0.0;   // first Lame parameter, kPa
  double shear_G = 0.0;  // shear modulus, kPa
  double G0 = 0.0;       // healthy atrophy rate, 1/year (<= 0)
  double Gc = 0.0;       // accelerated atrophy rate, 1/year (<= 0)
  Tissue tissue = Tissue::Grey;
};

enum class AlphaTauMode { Kinetic, TableClosedForm };
enum class AlphaAbetaMode { Direct, Derived };

struct BioParams {
  double d_ext = 8.0;    // extracellular diffusivity, mm^2/year
  double d_axn = 80.0;   // axonal diffusivity, mm^2/year
  double c_crit_tau = 0.2;  // critical normalized tau concentration
  double kappa = 100.0;     // sigmoid sharpness of the atrophy transition
  double alpha_abeta = 0.2; // direct global Abeta growth rate, 1/year

  // Heterodimer kinetic rates, 1/year.
  double a0_tilde = 1.04;   // healthy Abeta production
  double a1_tilde = 1.38;   // healthy Abeta clearance
  double a12_tilde = 1.38;  // healthy->toxic Abeta conversion
  double a1 = 0.83;         // toxic Abeta clearance
  double k0_tilde = 0.60;   // healthy tau production
  double k1_tilde = 0.55;   // healthy tau clearance
  double k12_tilde = 1.00;  // healthy->toxic tau conversion
  double k1 = 0.55;         // toxic tau clearance
  double k3_tilde = 2.00;   // tau-Abeta coupling

  double theta_floor = 0.05;

  // Optional atrophy relaxation -(k_theta/eta_theta)(theta - 1); off by default.
  double k_theta = 0.0;
  double eta_theta = 1.0;

  AlphaTauMode alpha_tau_mode = AlphaTauMode::Kinetic;
  AlphaAbetaMode alpha_abeta_mode = AlphaAbetaMode::Direct;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0))
        throw ValidationError(std::string("bio parameter ") + name +
                              " must be > 0, got " + std::to_string(v));
    };
    positive(d_ext, "d_ext");
    if (d_axn < 0.0) throw ValidationError("bio parameter d_axn must be >= 0");
    positive(a0_tilde, "a0_tilde");
    positive(a1_tilde, "a1_tilde");
    positive(a12_tilde, "a12_tilde");
    positive(a1, "a1");
    positive(k0_tilde, "k0_tilde");
    positive(k1_tilde, "k1_tilde");
    positive(k12_tilde, "k12_tilde");
    positive(k1, "k1");
    if (k3_tilde < 0.0) throw ValidationError("bio parameter k3_tilde must be >= 0");
    if (!(c_crit_tau > 0.0 && c_crit_tau < 1.0))
      throw ValidationError("c_crit_tau must lie in (0,1), got " + std::to_string(c_crit_tau));
    positive(kappa, "kappa");
    if (!(theta_floor > 0.0 && theta_floor < 1.0))
      throw ValidationError("theta_floor must lie in (0,1), got " + std::to_string(theta_floor));
    if (k_theta < 0.0) throw ValidationError("k_theta must be >= 0");
    positive(eta_theta, "eta_theta");
  }
};

// Per-region initial normalized concentrations.
struct SeedSpec {
  std::map<std::string, double> tau;    // region name -> value in [0,1)
  std::map<std::string, double> abeta;

  void validate(const RegionSet& regions) const {
    auto check = [&](const std::map<std::string, double>& m, const char* species) {
      for (const auto& [name, value] : m) {
        if (!regions.has_name(name))
          throw ValidationError(std::string("seed for unknown region '") + name + "'");
        if (!(value >= 0.0 && value < 1.0))
          throw ValidationError(std::string(species) + " seed for region '" + name +
                                "' must lie in [0,1), got " + std::to_string(value));
      }
    };
    check(tau, "tau");
    check(abeta, "abeta");
  }
};

struct SolverSettings {
  double dt = 0.05;              // years
  double years = 20.0;           // simulated horizon
  double snapshot_every = 2.0;   // years between snapshots; <= 0 disables

  double newton_tol = 1e-8;      // relative to first-iterate residual
  int newton_max_iters = 25;
  int max_line_search_cuts = 20;

  double chem_tol = 1e-8;        // relative fixed-point tolerance
  int max_chem_iters = 50;
  int max_dt_halvings = 10;

  double lin_tol_mech = 1e-10;   // Krylov relative tolerance (mechanics)
  double lin_tol_chem = 1e-12;   // Krylov relative tolerance (chemistry)
  int direct_dof_limit = 200000; // direct factorization below, Krylov above

  int mech_every_n = 1;          // mechanics subcycling
  bool corrector_pass = false;   // one staggered corrector pass per step

  int threads = 0;               // 0 = hardware concurrency
  double axonal_search_radius = std::numeric_limits<double>::infinity();  // mm

  void validate() const {
    if (!(dt > 0.0)) throw ValidationError("solver dt must be > 0");
    if (!(years > 0.0)) throw ValidationError("solver years must be > 0");
    if (newton_max_iters < 1 || max_chem_iters < 1)
      throw ValidationError("iteration limits must be >= 1");
    if (mech_every_n < 1) throw ValidationError("mech_every_n must be >= 1");
    if (threads < 0) throw ValidationError("threads must be >= 0");
  }
};

struct Config {
  RegionSet regions;
  std::map<int, RegionParams> region_params;  // by label
  BioParams bio;
  SeedSpec seeds;
  SolverSettings solver;

  const RegionParams& params_for(int label) const {
    auto it = region_params.find(label);
    if (it == region_params.end())
      throw ValidationError("no parameters for region label " + std::to_string(label));
    return it->second;
  }

  void validate() const {
    bio.validate();
    solver.validate();
    seeds.validate(regions);
    for (const auto& [label, info] : regions.all()) {
      const RegionParams& rp = params_for(label);
      if (!(rp.lambda > 0.0) || !(rp.shear_G > 0.0))
        throw ValidationError("region '" + info.name + "': lambda and shear_G must be > 0");
      if (rp.tissue == Tissue::Fluid) {
        if (rp.G0 != 0.0 || rp.Gc != 0.0)
          throw ValidationError("fluid region '" + info.name + "' must have G0 = Gc = 0");
      } else {
        if (rp.G0 > 0.0 || rp.Gc > 0.0)
          throw ValidationError("region '" + info.name + "': atrophy rates must be <= 0");
      }
      if (rp.tissue != info.tissue)
        throw ValidationError("region '" + info.name + "': tissue class mismatch");
    }
  }
};

// ---------------------------------------------------------------------------
// Published defaults
// ---------------------------------------------------------------------------

namespace detail {

inline RegionParams class_defaults(Tissue tissue) {
  switch (tissue) {
    case Tissue::Grey: return {32.33, 1.0, -6.0e-3, -6.0e-3, Tissue::Grey};
    case Tissue::White: return {64.67, 2.0, -5.5e-3, -5.5e-3, Tissue::White};
    case Tissue::Fluid: return {7.22, 14.43, 0.0, 0.0, Tissue::Fluid};
  }
  return {};
}

inline std::map<int, RegionParams> standard_region_params() {
  std::map<int, RegionParams> p;
  p[1] = {1.66, 0.50, 0.0, 0.0, Tissue::Fluid};        // ventricles
  p[2] = {7.22, 14.43, 0.0, 0.0, Tissue::Fluid};       // csf
  p[3] = class_defaults(Tissue::Grey);                 // amygdala
  p[4] = class_defaults(Tissue::Grey);                 // hippocampus
  p[5] = class_defaults(Tissue::Grey);                 // thalamus
  p[6] = {32.33, 1.0, -7.0e-3, -7.0e-3, Tissue::Grey}; // entorhinal
  p[7] = class_defaults(Tissue::Grey);                 // cerebral_cortex
  p[8] = class_defaults(Tissue::Grey);                 // cerebellum_cortex
  p[9] = class_defaults(Tissue::White);                // cerebellum_wm
  p[10] = class_defaults(Tissue::White);               // brainstem
  p[11] = class_defaults(Tissue::White);               // white_matter
  p[12] = {64.67, 0.7, -5.5e-3, -5.5e-3, Tissue::White};  // corpus_callosum
  return p;
}

}  // namespace detail

inline Config default_config() {
  Config cfg;
  cfg.regions = RegionSet::standard_brain();
  cfg.region_params = detail::standard_region_params();
  cfg.seeds.tau["entorhinal"] = 0.4;
  cfg.seeds.abeta["cerebral_cortex"] = 0.2;
  return cfg;
}

// ---------------------------------------------------------------------------
// Derived growth rates
// ---------------------------------------------------------------------------

// Global tau growth rate as a function of the normalized Abeta concentration,
// obtained from the reduced heterodimer kinetics.
inline double derive_alpha_tau(const BioParams& bio, double c_abeta_norm) {
  const double abeta_saturation =
      (bio.a1_tilde / bio.a12_tilde) * (1.0 - bio.a1_tilde * bio.a1 / (bio.a0_tilde * bio.a12_tilde));
  return (bio.k0_tilde / bio.k1_tilde) *
             (bio.k3_tilde * c_abeta_norm * abeta_saturation + bio.k12_tilde) -
         bio.k1;
}

// Global Abeta growth rate from the reduced heterodimer kinetics.
inline double derive_alpha_abeta(const BioParams& bio) {
  const double alpha = bio.a12_tilde * bio.a0_tilde / bio.a1_tilde - bio.a1;
  if (!(alpha > 0.0))
    throw ValidationError("non-positive growth rate: a12*a0/a1 - a1 = " + std::to_string(alpha));
  return alpha;
}

// Growth rate actually used in the Abeta source term, per configured mode.
inline double alpha_abeta_effective(const BioParams& bio) {
  return bio.alpha_abeta_mode == AlphaAbetaMode::Derived ? derive_alpha_abeta(bio)
                                                         : bio.alpha_abeta;
}

// Dimensional limit concentrations. These are reported for reference; the
// solver works exclusively in normalized variables.
inline double c_lim_abeta(const BioParams& bio) {
  return (bio.a1_tilde / bio.a12_tilde) *
         (1.0 - bio.a1_tilde * bio.a1 / (bio.a12_tilde * bio.a0_tilde));
}

inline double c_lim_tau(const BioParams& bio, double c_abeta = 0.0) {
  const double conv = bio.k3_tilde * c_abeta + bio.k12_tilde;
  return (bio.k1_tilde / conv) * (1.0 - bio.k1 * bio.k1_tilde / (bio.k0_tilde * conv));
}

// ---------------------------------------------------------------------------
// Config file I/O
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_double(const std::string& value, const std::string& key, long line) {
  if (value == "inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': cannot parse number '" + value + "'", line);
  }
  if (pos != value.size())
    throw ParseError("key '" + key + "': trailing characters in '" + value + "'", line);
  return v;
}

inline int parse_int(const std::string& value, const std::string& key, long line) {
  const double v = parse_double(value, key, line);
  if (v != std::floor(v))
    throw ParseError("key '" + key + "': expected integer, got '" + value + "'", line);
  return static_cast<int>(v);
}

inline bool parse_bool(const std::string& value, const std::string& key, long line) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ParseError("key '" + key + "': expected boolean, got '" + value + "'", line);
}

struct RawRegionSection {
  std::optional<int> label;
  std::optional<Tissue> tissue;
  std::optional<double> lambda, shear_G, G0, Gc;
};

}  // namespace detail

// Parses a run configuration. Omitted sections and keys take the published
// defaults; an empty path yields default_config(). Declaring any
// [regions.<name>] section replaces the standard region set with exactly the
// declared one.
inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open config file: " + path.string());

  std::map<std::string, detail::RawRegionSection> raw_regions;
  std::vector<std::string> region_order;
  BioParams bio;
  SolverSettings solver;
  SeedSpec seeds;
  bool seeds_section_seen = false;

  std::string section;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.rfind("regions.", 0) == 0) {
        const std::string name = section.substr(8);
        if (name.empty()) throw ParseError("empty region name in section header", lineno);
        if (!raw_regions.count(name)) {
          raw_regions[name] = {};
          region_order.push_back(name);
        }
      } else if (section == "seeds") {
        seeds_section_seen = true;
      } else if (section != "bio" && section != "solver") {
        throw ParseError("unknown section [" + section + "]", lineno);
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("empty key or value", lineno);
    if (section.empty()) throw ParseError("key '" + key + "' outside any section", lineno);

    if (section.rfind("regions.", 0) == 0) {
      auto& r = raw_regions[section.substr(8)];
      if (key == "label") r.label = detail::parse_int(value, key, lineno);
      else if (key == "class") r.tissue = tissue_from_string(value);
      else if (key == "lambda") r.lambda = detail::parse_double(value, key, lineno);
      else if (key == "shear_g") r.shear_G = detail::parse_double(value, key, lineno);
      else if (key == "g0") r.G0 = detail::parse_double(value, key, lineno);
      else if (key == "gc") r.Gc = detail::parse_double(value, key, lineno);
      else throw ParseError("unknown key '" + key + "' in [" + section + "]", lineno);
    } else if (section == "bio") {
      if (key == "d_ext") bio.d_ext = detail::parse_double(value, key, lineno);
      else if (key == "d_axn") bio.d_axn = detail::parse_double(value, key, lineno);
      else if (key == "c_crit_tau") bio.c_crit_tau = detail::parse_double(value, key, lineno);
      else if (key == "kappa") bio.kappa = detail::parse_double(value, key, lineno);
      else if (key == "alpha_abeta") bio.alpha_abeta = detail::parse_double(value, key, lineno);
      else if (key == "a0_tilde") bio.a0_tilde = detail::parse_double(value, key, lineno);
      else if (key == "a1_tilde") bio.a1_tilde = detail::parse_double(value, key, lineno);
      else if (key == "a12_tilde") bio.a12_tilde = detail::parse_double(value, key, lineno);
      else if (key == "a1") bio.a1 = detail::parse_double(value, key, lineno);
      else if (key == "k0_tilde") bio.k0_tilde = detail::parse_double(value, key, lineno);
      else if (key == "k1_tilde") bio.k1_tilde = detail::parse_double(value, key, lineno);
      else if (key == "k12_tilde") bio.k12_tilde = detail::parse_double(value, key, lineno);
      else if (key == "k1") bio.k1 = detail::parse_double(value, key, lineno);
      else if (key == "k3_tilde") bio.k3_tilde = detail::parse_double(value, key, lineno);
      else if (key == "theta_floor") bio.theta_floor = detail::parse_double(value, key, lineno);
      else if (key == "k_theta") bio.k_theta = detail::parse_double(value, key, lineno);
      else if (key == "eta_theta") bio.eta_theta = detail::parse_double(value, key, lineno);
      else if (key == "alpha_tau_mode") {
        if (value == "kinetic") bio.alpha_tau_mode = AlphaTauMode::Kinetic;
        else if (value == "table_closed_form") bio.alpha_tau_mode = AlphaTauMode::TableClosedForm;
        else throw ParseError("alpha_tau_mode must be kinetic|table_closed_form", lineno);
      } else if (key == "alpha_abeta_mode") {
        if (value == "direct") bio.alpha_abeta_mode = AlphaAbetaMode::Direct;
        else if (value == "derived") bio.alpha_abeta_mode = AlphaAbetaMode::Derived;
        else throw ParseError("alpha_abeta_mode must be direct|derived", lineno);
      } else {
        throw ParseError("unknown key '" + key + "' in [bio]", lineno);
      }
    } else if (section == "seeds") {
      const auto dot = key.find('.');
      if (dot == std::string::npos)
        throw ParseError("seed keys look like tau.<region> or abeta.<region>", lineno);
      const std::string species = key.substr(0, dot);
      const std::string region = key.substr(dot + 1);
      const double v = detail::parse_double(value, key, lineno);
      if (species == "tau") seeds.tau[region] = v;
      else if (species == "abeta") seeds.abeta[region] = v;
      else throw ParseError("unknown species '" + species + "' in seed key", lineno);
    } else if (section == "solver") {
      if (key == "dt") solver.dt = detail::parse_double(value, key, lineno);
      else if (key == "years") solver.years = detail::parse_double(value, key, lineno);
      else if (key == "snapshot_every") solver.snapshot_every = detail::parse_double(value, key, lineno);
      else if (key == "newton_tol") solver.newton_tol = detail::parse_double(value, key, lineno);
      else if (key == "newton_max_iters") solver.newton_max_iters = detail::parse_int(value, key, lineno);
      else if (key == "chem_tol") solver.chem_tol = detail::parse_double(value, key, lineno);
      else if (key == "max_chem_iters") solver.max_chem_iters = detail::parse_int(value, key, lineno);
      else if (key == "max_dt_halvings") solver.max_dt_halvings = detail::parse_int(value, key, lineno);
      else if (key == "lin_tol_mech") solver.lin_tol_mech = detail::parse_double(value, key, lineno);
      else if (key == "lin_tol_chem") solver.lin_tol_chem = detail::parse_double(value, key, lineno);
      else if (key == "direct_dof_limit") solver.direct_dof_limit = detail::parse_int(value, key, lineno);
      else if (key == "mech_every_n") solver.mech_every_n = detail::parse_int(value, key, lineno);
      else if (key == "corrector_pass") solver.corrector_pass = detail::parse_bool(value, key, lineno);
      else if (key == "threads") solver.threads = detail::parse_int(value, key, lineno);
      else if (key == "axonal_search_radius") solver.axonal_search_radius = detail::parse_double(value, key, lineno);
      else throw ParseError("unknown key '" + key + "' in [solver]", lineno);
    }
  }

  Config cfg;
  cfg.bio = bio;
  cfg.solver = solver;

  if (raw_regions.empty()) {
    cfg.regions = RegionSet::standard_brain();
    cfg.region_params = detail::standard_region_params();
  } else {
    // A declared region list replaces the standard set. Standard names keep
    // their published label/class/parameters unless overridden.
    const RegionSet std_set = RegionSet::standard_brain();
    const auto std_params = detail::standard_region_params();
    for (const auto& name : region_order) {
      const auto& r = raw_regions.at(name);
      int label;
      Tissue tissue;
      RegionParams rp;
      if (std_set.has_name(name)) {
        label = r.label.value_or(std_set.label_of(name));
        tissue = r.tissue.value_or(std_set.info(std_set.label_of(name)).tissue);
        rp = std_params.at(std_set.label_of(name));
      } else {
        if (!r.label) throw ValidationError("region '" + name + "': 'label' is required");
        if (!r.tissue) throw ValidationError("region '" + name + "': 'class' is required");
        label = *r.label;
        tissue = *r.tissue;
        rp = detail::class_defaults(tissue);
      }
      rp.tissue = tissue;
      if (r.lambda) rp.lambda = *r.lambda;
      if (r.shear_G) rp.shear_G = *r.shear_G;
      if (r.G0) rp.G0 = *r.G0;
      if (r.Gc) rp.Gc = *r.Gc;
      cfg.regions.add(label, name, tissue);
      cfg.region_params[label] = rp;
    }
  }

  if (seeds_section_seen || !seeds.tau.empty() || !seeds.abeta.empty()) {
    cfg.seeds = seeds;
  } else {
    // Published default seeding, applied only where those regions exist.
    if (cfg.regions.has_name("entorhinal")) cfg.seeds.tau["entorhinal"] = 0.4;
    if (cfg.regions.has_name("cerebral_cortex")) cfg.seeds.abeta["cerebral_cortex"] = 0.2;
  }

  cfg.validate();
  return cfg;
}

namespace detail {

inline std::string fmt_full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

// Writes a config with every value resolved; load_config(save_config(cfg))
// reproduces cfg exactly.
inline void save_config(const Config& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot write config file: " + path.string());
  using detail::fmt_full;

  for (const auto& [label, info] : cfg.regions.all()) {
    const RegionParams& rp = cfg.params_for(label);
    out << "[regions." << info.name << "]\n";
    out << "label = " << label << "\n";
    out << "class = " << to_string(info.tissue) << "\n";
    out << "lambda = " << fmt_full(rp.lambda) << "\n";
    out << "shear_g = " << fmt_full(rp.shear_G) << "\n";
    out << "g0 = " << fmt_full(rp.G0) << "\n";
    out << "gc = " << fmt_full(rp.Gc) << "\n\n";
  }

  const BioParams& b = cfg.bio;
  out << "[bio]\n";
  out << "d_ext = " << fmt_full(b.d_ext) << "\n";
  out << "d_axn = " << fmt_full(b.d_axn) << "\n";
  out << "c_crit_tau = " << fmt_full(b.c_crit_tau) << "\n";
  out << "kappa = " << fmt_full(b.kappa) << "\n";
  out << "alpha_abeta = " << fmt_full(b.alpha_abeta) << "\n";
  out << "a0_tilde = " << fmt_full(b.a0_tilde) << "\n";
  out << "a1_tilde = " << fmt_full(b.a1_tilde) << "\n";
  out << "a12_tilde = " << fmt_full(b.a12_tilde) << "\n";
  out << "a1 = " << fmt_full(b.a1) << "\n";
  out << "k0_tilde = " << fmt_full(b.k0_tilde) << "\n";
  out << "k1_tilde = " << fmt_full(b.k1_tilde) << "\n";
  out << "k12_tilde = " << fmt_full(b.k12_tilde) << "\n";
  out << "k1 = " << fmt_full(b.k1) << "\n";
  out << "k3_tilde = " << fmt_full(b.k3_tilde) << "\n";
  out << "theta_floor = " << fmt_full(b.theta_floor) << "\n";
  out << "k_theta = " << fmt_full(b.k_theta) << "\n";
  out << "eta_theta = " << fmt_full(b.eta_theta) << "\n";
  out << "alpha_tau_mode = "
      << (b.alpha_tau_mode == AlphaTauMode::Kinetic ? "kinetic" : "table_closed_form") << "\n";
  out << "alpha_abeta_mode = "
      << (b.alpha_abeta_mode == AlphaAbetaMode::Direct ? "direct" : "derived") << "\n\n";

  out << "[seeds]\n";
  for (const auto& [name, v] : cfg.seeds.tau) out << "tau." << name << " = " << fmt_full(v) << "\n";
  for (const auto& [name, v] : cfg.seeds.abeta) out << "abeta." << name << " = " << fmt_full(v) << "\n";
  out << "\n";

  const SolverSettings& s = cfg.solver;
  out << "[solver]\n";
  out << "dt = " << fmt_full(s.dt) << "\n";
  out << "years = " << fmt_full(s.years) << "\n";
  out << "snapshot_every = " << fmt_full(s.snapshot_every) << "\n";
  out << "newton_tol = " << fmt_full(s.newton_tol) << "\n";
  out << "newton_max_iters = " << s.newton_max_iters << "\n";
  out << "chem_tol = " << fmt_full(s.chem_tol) << "\n";
  out << "max_chem_iters = " << s.max_chem_iters << "\n";
  out << "max_dt_halvings = " << s.max_dt_halvings << "\n";
  out << "lin_tol_mech = " << fmt_full(s.lin_tol_mech) << "\n";
  out << "lin_tol_chem = " << fmt_full(s.lin_tol_chem) << "\n";
  out << "direct_dof_limit = " << s.direct_dof_limit << "\n";
  out << "mech_every_n = " << s.mech_every_n << "\n";
  out << "corrector_pass = " << (s.corrector_pass ? "true" : "false") << "\n";
  out << "threads = " << s.threads << "\n";
  out << "axonal_search_radius = " << fmt_full(s.axonal_search_radius) << "\n";
  if (!out) throw MissingInputError("I/O failure writing " + path.string());
}

}  // namespace cerebra
