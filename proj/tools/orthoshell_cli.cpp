#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "orthoshell/run.hpp"

using namespace orthoshell;

namespace {

/// "MxN" -> (M, N).
std::pair<int, int> parse_resolution(const std::string& text) {
  int m = 0, n = 0;
  char sep = 0;
  if (std::sscanf(text.c_str(), "%d%c%d", &m, &sep, &n) != 3 || (sep != 'x' && sep != 'X') || m < 1 || n < 1)
    throw CLI::ValidationError("--resolution", "expected MxN, got '" + text + "'");
  return {m, n};
}

int report(const RunResult& r) {
  if (!r.completed) {
    std::cerr << "solver failure: " << r.message << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthotropic subdivision thin-shell solver"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress per-step progress output");

  // bench hemisphere / wrinkle
  auto* bench = app.add_subcommand("bench", "Run a predefined benchmark");
  bench->require_subcommand(1);

  auto* hemi = bench->add_subcommand("hemisphere", "Pinched hemisphere with an 18 degree hole");
  HemisphereCase hc;
  std::string hemi_res = "16x64", hemi_out, hemi_vtk, hemi_mode = to_string(hc.mode);
  bool hemi_print = false;
  hemi->add_option("--lambda", hc.lambda, "Orthotropy degree E_m / E_c (1.0, 0.9, 0.5 or 0.1)")->required();
  hemi->add_option("--resolution", hemi_res, "Elements along the meridian x around the circumference")
      ->capture_default_str();
  hemi->add_option("--out", hemi_out, "CSV file for the load-displacement curve");
  hemi->add_option("--vtk", hemi_vtk, "VTK file for the final state");
  hemi->add_option("--constitutive", hemi_mode, "paper, voigt or isotropic")->capture_default_str();
  hemi->add_option("--load", hc.load, "Maximum point load")->capture_default_str();
  hemi->add_option("--steps", hc.steps, "Load steps")->capture_default_str();
  hemi->add_option("--threads", hc.threads, "Assembly threads")->capture_default_str();
  hemi->add_flag("--print-config", hemi_print, "Print the equivalent config file and exit");

  auto* wr = bench->add_subcommand("wrinkle", "Sheared rectangular sheet");
  WrinkleCase wc;
  std::string wr_material = "iso", wr_res = "56x28", wr_prefix, wr_mode = to_string(wc.ortho_mode);
  bool wr_vtk = false, wr_print = false;
  wr->add_option("--material", wr_material, "iso or ortho")->check(CLI::IsMember({"iso", "ortho"}))
      ->capture_default_str();
  wr->add_option("--resolution", wr_res, "Elements along x by y")->capture_default_str();
  wr->add_option("--out-prefix", wr_prefix, "Prefix of the CSV (and VTK) output files");
  wr->add_flag("--vtk", wr_vtk, "Also write <prefix>.vtk with the final state");
  wr->add_option("--constitutive", wr_mode, "Constitutive mode of the ortho material")->capture_default_str();
  wr->add_option("--shear-steps", wc.shear_steps, "Steps of the shear ramp")->capture_default_str();
  wr->add_option("--seed", wc.seed, "Perturbation seed")->capture_default_str();
  wr->add_option("--threads", wc.threads, "Assembly threads")->capture_default_str();
  wr->add_flag("--print-config", wr_print, "Print the equivalent config file and exit");

  // run <config>
  auto* run = app.add_subcommand("run", "Run a config file");
  std::string cfg_path, run_csv, run_vtk;
  bool run_check = false;
  run->add_option("config", cfg_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_csv, "CSV file (overrides [output] csv)");
  run->add_option("--vtk", run_vtk, "VTK file (overrides [output] vtk)");
  run->add_flag("--check", run_check, "Validate the config, print it normalized and exit");

  // mesh-stats <file>
  auto* stats = app.add_subcommand("mesh-stats", "Validate a mesh file and print its statistics");
  std::string mesh_path;
  stats->add_option("mesh", mesh_path, "OFF or OBJ file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  std::ostream* log = quiet ? nullptr : &std::cout;

  try {
    if (*hemi) {
      const auto [m, n] = parse_resolution(hemi_res);
      hc.n_meridian = m;
      hc.n_circumference = n;
      hc.mode = parse_constitutive_mode(hemi_mode);
      const RunConfig cfg = hemisphere_config(hc);
      if (hemi_print) {
        std::cout << serialize_config(cfg);
        return 0;
      }
      RunOptions opt;
      opt.log = log;
      opt.csv = hemi_out;
      opt.vtk = hemi_vtk;
      const RunResult r = run_config(cfg, opt);
      if (!r.records.empty()) {
        const auto& last = r.records.back();
        std::cout << "load " << last.parameter << "  disp_A " << last.metrics[0] << "  disp_B " << last.metrics[1]
                  << '\n';
      }
      return report(r);
    }
    if (*wr) {
      const auto [nx, ny] = parse_resolution(wr_res);
      wc.nx = nx;
      wc.ny = ny;
      wc.material = wr_material == "iso" ? WrinkleMaterial::Iso : WrinkleMaterial::Ortho;
      wc.ortho_mode = parse_constitutive_mode(wr_mode);
      const RunConfig cfg = wrinkle_config(wc);
      if (wr_print) {
        std::cout << serialize_config(cfg);
        return 0;
      }
      RunOptions opt;
      opt.log = log;
      if (!wr_prefix.empty()) {
        opt.csv = wr_prefix + ".csv";
        if (wr_vtk) opt.vtk = wr_prefix + ".vtk";
      }
      const RunResult r = run_config(cfg, opt);
      if (r.completed) {
        if (r.critical.found)
          std::cout << "u_c " << r.critical.u_c << "  (" << r.critical.lo << " .. " << r.critical.hi << ")\n";
        else
          std::cout << "no wrinkling\n";
        std::cout << "wrinkles " << r.wrinkles.count << "  amplitude " << r.wrinkles.amplitude
                  << "  crest amplitude " << r.wrinkles.crest_amplitude << '\n';
      }
      return report(r);
    }
    if (*run) {
      const RunConfig cfg = parse_config(cfg_path);
      if (!quiet)
        for (const auto& note : cfg.notes) std::cerr << "note: " << note << '\n';
      if (run_check) {
        std::cout << serialize_config(cfg);
        return 0;
      }
      RunOptions opt;
      opt.log = log;
      opt.csv = run_csv;
      opt.vtk = run_vtk;
      return report(run_config(cfg, opt));
    }
    if (*stats) {
      const ControlMesh mesh = load_mesh(mesh_path);
      std::cout << mesh.stats() << '\n';
      build_one_rings(mesh);
      std::cout << "patches          ok\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
