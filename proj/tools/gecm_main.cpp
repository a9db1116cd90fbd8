// gecm: derive, render and batch-render GECM conditioning rasters.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gecm/cli_io.hpp"
#include "gecm/mesh.hpp"
#include "gecm/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  int workers = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_workers) {
  cmd->add_option("--config", c.config, "key=value config file (default: $GECM_CONFIG)");
  cmd->add_option("--set", c.overrides, "config override, e.g. --set trace.max_bounces=2")->take_all();
  if (with_workers) cmd->add_option("--workers,-j", c.workers, "worker threads")->check(CLI::Range(1, 1024));
}

int report_error(const gecm::Error& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  return 1;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GECM conditioning-map toolkit"};
  app.set_version_flag("--version", std::string(gecm::kVersion));
  app.require_subcommand(1);

  // derive
  Common dc;
  fs::path manifest, derive_out;
  auto* derive = app.add_subcommand("derive", "derive GECMs from the images listed in a manifest");
  derive->add_option("--manifest,-m", manifest, "CSV (with header) or JSON-lines manifest")->required();
  derive->add_option("--out,-o", derive_out, "output directory")->required();
  add_common(derive, dc, true);

  // render
  Common rc;
  fs::path mesh_path, render_out;
  std::optional<fs::path> paths_dump;
  gecm::ParamRecord rp;
  std::optional<double> r_dep, r_wl, r_res;
  std::optional<std::string> r_pol, r_band, r_class;
  auto* render = app.add_subcommand("render", "render one GECM from a mesh");
  render->add_option("--mesh", mesh_path, "OBJ or binary STL mesh (nose -x, wings +-y, up +z)")->required();
  render->add_option("--azimuth", rp.azimuth_deg, "degrees, 0 = West, clockwise")->required();
  render->add_option("--depression", r_dep, "degrees");
  render->add_option("--wavelength", r_wl, "metres");
  render->add_option("--polarization", r_pol, "HH, HV, VH or VV");
  render->add_option("--resolution", r_res, "metres per pixel");
  render->add_option("--band", r_band, "band label for the text condition");
  render->add_option("--class", r_class, "class label for the text condition");
  render->add_option("--out,-o", render_out, "output PNG; the sidecar is written next to it")->required();
  render->add_option("--paths-jsonl", paths_dump, "write every traced path as JSON lines");
  add_common(render, rc, false);

  // grid
  Common gc;
  fs::path grid_mesh, grid_out;
  gecm::GridSpec spec;
  std::string deps = "20,30,40,50,60,70", pols = "HH";
  std::optional<double> g_wl, g_res;
  auto* grid = app.add_subcommand("grid", "render every (azimuth, depression, polarization) cell");
  grid->add_option("--mesh", grid_mesh, "OBJ or binary STL mesh")->required();
  grid->add_option("--az-start", spec.azimuth_start, "first azimuth (degrees)");
  grid->add_option("--az-stop", spec.azimuth_stop, "last azimuth, inclusive (degrees)");
  grid->add_option("--az-step", spec.azimuth_step, "azimuth step (degrees)");
  grid->add_option("--depressions", deps, "comma-separated depression angles");
  grid->add_option("--polarizations", pols, "comma-separated polarizations");
  grid->add_option("--wavelength", g_wl, "metres");
  grid->add_option("--resolution", g_res, "metres per pixel");
  grid->add_option("--band", spec.band_label, "band label");
  grid->add_option("--class", spec.class_label, "class label");
  grid->add_option("--out,-o", grid_out, "output directory")->required();
  add_common(grid, gc, true);

  // inspect
  fs::path sidecar_path;
  auto* inspect = app.add_subcommand("inspect", "print a sidecar human-readably");
  inspect->add_option("sidecar", sidecar_path, "sidecar JSON")->required();

  // synth
  std::string shape = "aircraft";
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic test mesh");
  synth->add_option("--shape", shape, "aircraft, dihedral, plate, cube, ellipsoid or cross")
      ->check(CLI::IsMember({"aircraft", "dihedral", "plate", "cube", "ellipsoid", "cross"}));
  synth->add_option("--out,-o", synth_out, "output .obj or .stl")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*derive) {
      const gecm::Config cfg = gecm::resolve_config(dc.config, dc.overrides);
      const auto rep = gecm::run_derive(manifest, derive_out, cfg, dc.workers);
      std::printf("%zu ok, %zu failed; summary: %s\n", rep.ok, rep.failed, (derive_out / "summary.json").c_str());
      return rep.success() ? 0 : 1;
    }
    if (*render) {
      const gecm::Config cfg = gecm::resolve_config(rc.config, rc.overrides);
      rp.depression_deg = r_dep.value_or(cfg.defaults.depression_deg);
      rp.wavelength_m = r_wl.value_or(cfg.defaults.wavelength_m);
      rp.resolution_m_per_px = r_res.value_or(cfg.defaults.resolution_m_per_px);
      rp.polarization = r_pol.value_or(cfg.defaults.polarization);
      rp.band_label = r_band;
      rp.class_label = r_class;
      const gecm::ImagingParams params = gecm::validate_params(rp);
      const fs::path side = gecm::run_render(mesh_path, params, render_out, cfg, paths_dump);
      std::printf("%s\n", side.c_str());
      return 0;
    }
    if (*grid) {
      const gecm::Config cfg = gecm::resolve_config(gc.config, gc.overrides);
      spec.depressions.clear();
      for (const auto& d : split_list(deps)) {
        try {
          spec.depressions.push_back(std::stod(d));
        } catch (const std::exception&) {
          throw gecm::Error(gecm::ErrorCode::InvalidGrid, "bad depression angle '" + d + "'", "depressions");
        }
      }
      spec.polarizations = split_list(pols);
      spec.wavelength_m = g_wl.value_or(cfg.defaults.wavelength_m);
      spec.resolution_m_per_px = g_res.value_or(cfg.defaults.resolution_m_per_px);
      const auto rep = gecm::run_grid(grid_mesh, spec, grid_out, cfg, gc.workers);
      std::printf("%zu ok, %zu failed; index: %s\n", rep.ok, rep.failed, (grid_out / "index.json").c_str());
      return rep.success() ? 0 : 1;
    }
    if (*inspect) {
      std::ifstream in(sidecar_path);
      if (!in) throw gecm::Error(gecm::ErrorCode::FileNotFound, "cannot open " + sidecar_path.string());
      nlohmann::ordered_json j;
      try {
        j = nlohmann::ordered_json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw gecm::Error(gecm::ErrorCode::ParseError, e.what());
      }
      std::cout << gecm::describe_sidecar(j);
      return 0;
    }
    if (*synth) {
      gecm::TriangleMesh m;
      if (shape == "aircraft") m = gecm::make_aircraft();
      else if (shape == "dihedral") m = gecm::make_dihedral(4.0, 8);
      else if (shape == "plate") m = gecm::make_plate(2.0, 4);
      else if (shape == "cube") m = gecm::make_box(gecm::Vec3(-1, -1, -1), gecm::Vec3(1, 1, 1), 4);
      else if (shape == "ellipsoid") m = gecm::make_ellipsoid(gecm::Vec3(6, 2, 1.5));
      else m = gecm::make_box_cross(12.0, 10.0, 1.0);
      if (synth_out.extension() == ".stl") gecm::write_stl_binary(synth_out, m);
      else gecm::write_obj(synth_out, m);
      std::printf("%s: %zu faces\n", synth_out.c_str(), m.face_count());
      return 0;
    }
  } catch (const gecm::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
