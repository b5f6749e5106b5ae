// Generates the synthetic meshes and axonal fields used by the verification
// studies and the quickstart examples.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>

#include "cerebra/meshio.hpp"
#include "cerebra/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

// One entry per white node; nearest-neighbour mapping then reproduces the
// field exactly.
void write_axonal_entries(const cerebra::LabeledMesh& mesh, const cerebra::AxonalField& field,
                          const fs::path& path) {
  std::ofstream out(path);
  out.precision(17);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (!field.node_dir[i]) continue;
    const auto& p = mesh.nodes[i];
    const auto& d = *field.node_dir[i];
    out << p.x() << " " << p.y() << " " << p.z() << " " << d.x() << " " << d.y() << " " << d.z()
        << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cerebra-mkmesh: synthetic meshes for verification and demos"};
  app.require_subcommand(1);

  std::string out = "mesh.txt";
  std::string axonal_out;
  double h = 2.0;
  int n = 8;
  int nx = 0, ny = 0, nz = 0;
  std::string region = "cerebral_cortex";
  std::string fiber = "y";

  CLI::App* cube = app.add_subcommand("cube", "uniform single-region cube, free boundary");
  cube->add_option("--n", n, "elements per edge");
  cube->add_option("--spacing", h, "edge length of one cube, mm");
  cube->add_option("--region", region, "region name from the standard set");
  cube->add_option("--out", out, "mesh output path")->required();

  CLI::App* box = app.add_subcommand("box", "uniform single-region box, free boundary");
  box->add_option("--nx", nx)->required();
  box->add_option("--ny", ny)->required();
  box->add_option("--nz", nz)->required();
  box->add_option("--spacing", h, "cube edge, mm");
  box->add_option("--region", region, "region name from the standard set");
  box->add_option("--out", out, "mesh output path")->required();

  CLI::App* toy = app.add_subcommand(
      "toybrain", "three-region toy brain (entorhinal | cerebral_cortex | white_matter)");
  toy->add_option("--spacing", h, "cube edge, mm");
  toy->add_option("--fiber", fiber, "white fibre direction: x|y|z")
      ->check(CLI::IsMember({"x", "y", "z"}));
  toy->add_option("--out", out, "mesh output path")->required();
  toy->add_option("--axonal-out", axonal_out, "axonal field output path");

  CLI11_PARSE(app, argc, argv);

  const cerebra::RegionSet regions = cerebra::RegionSet::standard_brain();
  try {
    if (cube->parsed() || box->parsed()) {
      if (cube->parsed()) nx = ny = nz = n;
      const int label = regions.label_of(region);
      const cerebra::LabeledMesh mesh = cerebra::make_box_mesh(nx, ny, nz, h, label);
      cerebra::write_mesh(mesh, out);
      std::printf("wrote %s: %d nodes, %d tets, region %s\n", out.c_str(), mesh.num_nodes(),
                  mesh.num_tets(), region.c_str());
    } else if (toy->parsed()) {
      const cerebra::Vec3 dir = fiber == "x"   ? cerebra::Vec3(1, 0, 0)
                                : fiber == "y" ? cerebra::Vec3(0, 1, 0)
                                               : cerebra::Vec3(0, 0, 1);
      const cerebra::ToyBrain tb = cerebra::make_toy_brain(h, regions, dir);
      cerebra::write_mesh(tb.mesh, out);
      std::printf("wrote %s: %d nodes, %d tets\n", out.c_str(), tb.mesh.num_nodes(),
                  tb.mesh.num_tets());
      if (!axonal_out.empty()) {
        write_axonal_entries(tb.mesh, tb.axonal, axonal_out);
        std::printf("wrote %s: %zu entries\n", axonal_out.c_str(), tb.axonal.directed_count());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
