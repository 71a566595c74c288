#include "orthoshell/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace orthoshell {

namespace {

int component_index(char c) { return c == 'x' ? 0 : (c == 'y' ? 1 : 2); }

std::string number(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

double max_abs_uz(const Eigen::VectorXd& u) {
  double m = 0;
  for (Eigen::Index i = 2; i < u.size(); i += 3) m = std::max(m, std::abs(u[i]));
  return m;
}

/// Targets of one phase as DOF -> value maps, with the values at the start
/// of the phase for linear interpolation.
struct PhaseTargets {
  std::map<int, double> prescribed_end;
  std::map<int, double> prescribed_start;
  std::map<int, double> loads_end;
  std::map<int, double> loads_start;

  LoadCase at(double s) const {
    LoadCase lc;
    for (const auto& [dof, v1] : prescribed_end) {
      const double v0 = prescribed_start.at(dof);
      lc.prescribed.push_back({dof, v0 + s * (v1 - v0)});
    }
    for (const auto& [dof, v1] : loads_end) {
      const double v0 = loads_start.at(dof);
      const double v = v0 + s * (v1 - v0);
      if (v != 0) lc.loads.push_back({dof / 3, Vec3::Unit(dof % 3) * v});
    }
    return lc;
  }
};

}  // namespace

RunConfig hemisphere_config(const HemisphereCase& c) {
  RunConfig cfg;
  auto& g = cfg.geometry;
  g.generator = "hemisphere";
  g.n_meridian = c.n_meridian;
  g.n_circumference = c.n_circumference;
  g.radius = c.radius;
  g.hole_angle = c.hole_angle;

  const Material m = hemisphere_material(c);
  auto& mc = cfg.material;
  std::ostringstream preset;
  preset.setf(std::ios::fixed);
  preset.precision(1);
  preset << "hemisphere-" << c.lambda;
  mc.preset = preset.str();
  mc.h = m.h;
  mc.rho = m.rho;
  mc.E1 = m.E1;
  mc.E2 = m.E2;
  mc.nu1 = m.nu1;
  mc.G12 = m.G12;
  mc.d = m.d;
  mc.mode = m.mode;

  const double R = c.radius;
  auto at = [](double x, double y) { return Selector{"nearest:" + number(x) + "," + number(y) + ",0"}; };
  cfg.fixes = {{at(R, 0), "yz"}, {at(-R, 0), "yz"}, {at(0, R), "xz"}};
  PhaseConfig p;
  p.name = "load";
  p.steps = c.steps;
  p.parameter_start = 0;
  p.parameter_end = c.load;
  p.loads = {{at(R, 0), Vec3(-c.load, 0, 0)},
             {at(-R, 0), Vec3(c.load, 0, 0)},
             {at(0, R), Vec3(0, c.load, 0)},
             {at(0, -R), Vec3(0, -c.load, 0)}};
  cfg.phases.push_back(p);
  cfg.solver.threads = c.threads;
  cfg.output.metrics = "hemisphere";
  return cfg;
}

RunConfig wrinkle_config(const WrinkleCase& c) {
  RunConfig cfg;
  auto& g = cfg.geometry;
  g.generator = "sheet";
  g.nx = c.nx;
  g.ny = c.ny;
  g.lx = c.lx;
  g.ly = c.ly;
  cfg.material = material_preset(c.material == WrinkleMaterial::Iso ? "wrinkle-iso" : "wrinkle-ortho");
  if (c.material == WrinkleMaterial::Ortho) cfg.material.mode = c.ortho_mode;
  cfg.fixes = {{Selector{"edge:bottom"}, "xyz"}, {Selector{"edge:top"}, "z"}};

  PhaseConfig pre;
  pre.name = "prestretch";
  pre.steps = c.prestretch_steps;
  pre.parameter_start = 0;
  pre.parameter_end = c.prestretch;
  pre.prescribe = {{Selector{"edge:top"}, 'x', 0.0}, {Selector{"edge:top"}, 'y', c.prestretch}};
  PhaseConfig shear;
  shear.name = "shear";
  shear.steps = c.shear_steps;
  shear.parameter_start = 0;
  shear.parameter_end = c.shear;
  shear.prescribe = {{Selector{"edge:top"}, 'x', c.shear}};
  shear.perturb = c.perturbation < 0 ? 1e-4 * cfg.material.h : c.perturbation;
  shear.minimize = true;
  cfg.phases = {pre, shear};
  cfg.solver.seed = c.seed;
  cfg.solver.threads = c.threads;
  cfg.output.metrics = "wrinkle";
  return cfg;
}

RunResult run_config(const RunConfig& cfg, const RunOptions& options) {
  const ControlMesh mesh = build_mesh(cfg.geometry, cfg.base_dir);
  validate_config(cfg, mesh);
  const Material material = cfg.material.to_material();
  ModelOptions mopt;
  mopt.alignment = parse_alignment(cfg.material.align);
  mopt.threads = cfg.solver.threads;
  const ShellModel model(mesh, material, mopt);
  const Eigen::Index ndof = model.size();
  std::ostream* log = options.log;

  RunResult result;
  std::vector<std::pair<std::vector<int>, int>> monitors;
  for (const auto& [sel, c] : cfg.output.monitors) {
    monitors.emplace_back(resolve_selector(sel, mesh), component_index(c));
    std::string name = std::string("u") + c + "@" + sel.text;
    std::replace(name.begin(), name.end(), ',', ';');
    result.monitor_names.push_back(name);
  }
  std::array<int, 4> hemi_nodes{};
  if (cfg.output.metrics == "hemisphere") {
    hemi_nodes = hemisphere_load_nodes(mesh, cfg.geometry.radius);
    result.metric_names = {"disp_A", "disp_B"};
  } else if (cfg.output.metrics == "wrinkle") {
    result.metric_names = {"amplitude"};
  }
  auto metrics = [&](const Eigen::VectorXd& u) -> std::vector<double> {
    if (cfg.output.metrics == "hemisphere") {
      const auto [a, b] = hemisphere_displacements(mesh, u, hemi_nodes);
      return {a, b};
    }
    if (cfg.output.metrics == "wrinkle") return {max_abs_uz(u)};
    return {};
  };

  std::map<int, double> fixed;
  for (const auto& f : cfg.fixes)
    for (int n : resolve_selector(f.where, mesh))
      for (char c : f.components) fixed[3 * n + component_index(c)] = 0.0;
  std::map<int, double> prescribed = fixed;
  std::map<int, double> loads;

  StaticOptions sopt;
  sopt.tol_rel = cfg.solver.tol_rel;
  sopt.tol_abs = cfg.solver.tol_abs;
  sopt.max_iterations = cfg.solver.max_iterations;
  sopt.max_bisections = cfg.solver.max_bisections;
  NewmarkOptions nopt;
  nopt.damping = cfg.solver.damping;

  SolverState state = SolverState::zero(ndof);
  std::mt19937 rng(cfg.solver.seed);
  const bool wrinkle = cfg.output.metrics == "wrinkle";
  std::vector<SolverState> last_phase_states;
  PhaseTargets last_targets;
  result.completed = true;

  for (std::size_t pi = 0; pi < cfg.phases.size() && result.completed; ++pi) {
    const PhaseConfig& phase = cfg.phases[pi];
    PhaseTargets t;
    for (const auto& q : phase.prescribe) {
      for (int n : resolve_selector(q.where, mesh)) {
        const int dof = 3 * n + component_index(q.component);
        if (fixed.count(dof))
          throw ConfigError("phase '" + phase.name + "': prescribe on a fixed DOF (" + q.where.text + " " +
                                q.component + ")",
                            q.where.line);
        prescribed[dof] = q.value;
      }
    }
    std::map<int, double> phase_loads;
    for (const auto& l : phase.loads)
      for (int n : resolve_selector(l.where, mesh))
        for (int c = 0; c < 3; ++c)
          if (l.force[c] != 0 || loads.count(3 * n + c)) phase_loads[3 * n + c] += l.force[c];
    for (const auto& [dof, v] : phase_loads) loads[dof] = v;
    for (const auto& [dof, v] : prescribed) {
      t.prescribed_end[dof] = v;
      t.prescribed_start[dof] = state.u[dof];
    }
    for (const auto& [dof, v] : loads) {
      t.loads_end[dof] = v;
      t.loads_start[dof] = state.f_ext[dof];
    }
    for (const auto& [dof, v] : t.loads_end)
      if (prescribed.count(dof)) throw ConfigError("phase '" + phase.name + "': a DOF is both loaded and prescribed");

    if (phase.perturb > 0) {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (Eigen::Index n = 0; n < ndof / 3; ++n) {
        const double r = dist(rng);
        if (!prescribed.count(static_cast<int>(3 * n + 2))) state.u[3 * n + 2] += phase.perturb * r;
      }
    }
    const bool last = pi + 1 == cfg.phases.size();
    if (wrinkle && last) {
      last_phase_states.assign(1, state);
      last_targets = t;
    }
    auto record = [&](const SolverState& st, int step, double s, int iterations, int substeps, double residual,
                      double potential, int negative_pivots) {
      StepRecord r;
      r.step = static_cast<int>(result.records.size()) + 1;
      r.phase = static_cast<int>(pi) + 1;
      r.phase_step = step;
      r.s = s;
      r.parameter = phase.parameter_start + s * (phase.parameter_end - phase.parameter_start);
      r.time = st.time;
      r.iterations = iterations;
      r.substeps = substeps;
      r.residual = residual;
      r.potential = potential;
      const EnergyDensity e = model.energy_split(st.u);
      r.membrane = e.membrane;
      r.bending = e.bending;
      r.kinetic = st.v.size() ? kinetic_energy(model, st.v) : 0.0;
      r.negative_pivots = negative_pivots;
      for (const auto& [nodes, c] : monitors) {
        double sum = 0;
        for (int n : nodes) sum += st.u[3 * n + c];
        r.monitors.push_back(sum / static_cast<double>(nodes.size()));
      }
      r.metrics = metrics(st.u);
      if (log) {
        *log << phase.name << " step " << step << "/" << phase.steps << "  parameter " << number(r.parameter)
             << "  iterations " << iterations << "  energy " << number(r.membrane + r.bending);
        for (std::size_t k = 0; k < r.metrics.size(); ++k)
          *log << "  " << result.metric_names[k] << " " << number(r.metrics[k]);
        *log << std::endl;
      }
      result.records.push_back(std::move(r));
      if (wrinkle && last) last_phase_states.push_back(st);
    };

    if (cfg.solver.mode == "static") {
      StaticOptions o = sopt;
      o.steps = phase.steps;
      o.minimize_energy = phase.minimize.value_or(cfg.solver.minimize);
      state.s = 0;
      const StaticResult sr =
          static_solve(model, t.at(1.0), state, o, [&](SolverState& st, const StepReport& rep) {
            record(st, rep.step, rep.s, rep.iterations, rep.substeps, rep.residual, rep.energy, rep.negative_pivots);
          });
      if (!sr.completed) {
        result.completed = false;
        result.message = "phase '" + phase.name + "': " + sr.message;
      }
    } else {
      for (int k = 1; k <= phase.steps; ++k) {
        const double s = static_cast<double>(k) / phase.steps;
        const NewmarkResult nr = newmark_step(model, t.at(s), state, phase.dt, nopt);
        if (!nr.converged) {
          result.completed = false;
          result.message = "phase '" + phase.name + "': time step " + std::to_string(k) + " did not converge";
          break;
        }
        state.s = s;
        Eigen::VectorXd f;
        const double stored = model.internal(state.u, &f);
        const double potential = stored - state.f_ext.dot(state.u);
        record(state, k, s, nr.iterations, nr.substeps, 0.0, potential, 0);
      }
    }
  }
  result.u = state.u;

  if (wrinkle && result.completed) {
    const PhaseConfig& phase = cfg.phases.back();
    for (std::size_t k = 1; k < last_phase_states.size(); ++k) {
      const StepRecord& r = result.records[result.records.size() - (last_phase_states.size() - 1) + (k - 1)];
      result.trajectory.push_back({r.parameter, r.metrics.at(0)});
    }
    const double threshold = 5.0 * (phase.perturb > 0 ? phase.perturb : 1e-4 * material.h);
    const double span = phase.parameter_end - phase.parameter_start;
    auto probe = [&](double shear) {
      std::size_t base = 0;
      for (std::size_t k = 0; k < result.trajectory.size(); ++k)
        if (result.trajectory[k].shear <= shear) base = k + 1;
      SolverState st = last_phase_states[base];
      StaticOptions o = sopt;
      o.steps = 1;
      o.minimize_energy = true;
      const double s = (shear - phase.parameter_start) / span;
      const StaticResult pr = static_solve(model, last_targets.at(s), st, o);
      const double amp = max_abs_uz(st.u);
      if (log)
        *log << "probe parameter " << number(shear) << "  amplitude " << number(amp)
             << (pr.completed ? "" : "  (not converged)") << std::endl;
      return amp;
    };
    if (cfg.solver.mode == "static" && span != 0)
      result.critical = detect_critical_shear(result.trajectory, threshold, probe);
    else
      result.critical = detect_critical_shear(result.trajectory, threshold);
    const auto& g = cfg.geometry;
    result.wrinkles = count_wrinkles(sample_sheet_uz(model, g.nx * (1 << g.refine), g.ny * (1 << g.refine), g.lx,
                                                     g.ly, state.u, 4));
    if (log) {
      if (result.critical.found)
        *log << "critical parameter " << number(result.critical.u_c) << " (bracket " << number(result.critical.lo)
             << " .. " << number(result.critical.hi) << ")" << std::endl;
      else
        *log << "no wrinkling" << std::endl;
      *log << "wrinkles " << result.wrinkles.count << "  amplitude " << number(result.wrinkles.amplitude)
           << "  crest amplitude " << number(result.wrinkles.crest_amplitude) << std::endl;
    }
  }

  const std::string csv = options.csv.empty() ? cfg.output.csv : options.csv;
  if (!csv.empty()) write_csv(result, csv);
  const std::string vtk = options.vtk.empty() ? cfg.output.vtk : options.vtk;
  if (!vtk.empty()) export_fields(model, state.u, vtk);
  return result;
}

void write_csv(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,phase,phase_step,s,parameter,time,iterations,substeps,residual,potential,membrane,bending,kinetic,"
         "negative_pivots";
  for (const auto& n : result.monitor_names) out << ',' << n;
  for (const auto& n : result.metric_names) out << ',' << n;
  out << '\n';
  out.precision(12);
  for (const auto& r : result.records) {
    out << r.step << ',' << r.phase << ',' << r.phase_step << ',' << r.s << ',' << r.parameter << ',' << r.time << ','
        << r.iterations << ',' << r.substeps << ',' << r.residual << ',' << r.potential << ',' << r.membrane << ','
        << r.bending << ',' << r.kinetic << ',' << r.negative_pivots;
    for (double v : r.monitors) out << ',' << v;
    for (double v : r.metrics) out << ',' << v;
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace orthoshell
