#include "orthoshell/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "orthoshell/run.hpp"

namespace orthoshell {

// ---------------------------------------------------------------------------
// Pinched hemisphere
// ---------------------------------------------------------------------------

const std::vector<HemisphereRow>& hemisphere_table() {
  static const std::vector<HemisphereRow> rows{
      {1.0, 6.825e7, 2.625e7}, {0.9, 6.143e7, 2.518e7}, {0.5, 3.413e7, 1.896e7}, {0.1, 6.825e6, 5.884e6}};
  return rows;
}

HemisphereRow hemisphere_row(double lambda) {
  for (const auto& r : hemisphere_table())
    if (std::abs(r.lambda - lambda) < 1e-9) return r;
  throw std::invalid_argument("no tabulated hemisphere material for lambda = " + std::to_string(lambda) +
                              " (expected 1.0, 0.9, 0.5 or 0.1)");
}

Material hemisphere_material(const HemisphereCase& c) {
  const HemisphereRow row = hemisphere_row(c.lambda);
  Material m;
  m.h = c.h;
  m.rho = 1;
  m.E1 = row.E_m;
  m.E2 = c.E_c;
  m.nu1 = c.nu_c * row.E_m / c.E_c;
  m.G12 = row.G;
  m.d = Vec3::UnitZ();
  m.mode = c.mode;
  return m;
}

std::array<int, 4> hemisphere_load_nodes(const ControlMesh& mesh, double radius) {
  const std::array<Vec3, 4> targets{Vec3(radius, 0, 0), Vec3(-radius, 0, 0), Vec3(0, radius, 0),
                                    Vec3(0, -radius, 0)};
  std::array<int, 4> out{};
  for (int k = 0; k < 4; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      const double d = (mesh.nodes()[i] - targets[k]).squaredNorm();
      if (d < best) {
        best = d;
        out[k] = static_cast<int>(i);
      }
    }
  }
  return out;
}

std::pair<double, double> hemisphere_displacements(const ControlMesh& mesh, const Eigen::VectorXd& u,
                                                   const std::array<int, 4>& nodes) {
  auto X = [&](int n) { return mesh.nodes()[n]; };
  auto x = [&](int n) -> Vec3 { return mesh.nodes()[n] + u.segment<3>(3 * n); };
  const double a = 0.5 * ((X(nodes[0]) - X(nodes[1])).norm() - (x(nodes[0]) - x(nodes[1])).norm());
  const double b = 0.5 * ((x(nodes[2]) - x(nodes[3])).norm() - (X(nodes[2]) - X(nodes[3])).norm());
  return {a, b};
}

HemisphereResult run_hemisphere(const HemisphereCase& c, const std::filesystem::path& csv,
                                const std::filesystem::path& vtk) {
  RunOptions opt;
  opt.csv = csv.string();
  opt.vtk = vtk.string();
  const RunResult r = run_config(hemisphere_config(c), opt);
  HemisphereResult out;
  out.completed = r.completed;
  out.message = r.message;
  out.u = r.u;
  for (const auto& rec : r.records) {
    HemispherePoint p;
    p.step = rec.step;
    p.load = rec.parameter;
    p.a = rec.metrics.at(0);
    p.b = rec.metrics.at(1);
    p.iterations = rec.iterations;
    p.energy = rec.membrane + rec.bending;
    out.curve.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sheet wrinkling
// ---------------------------------------------------------------------------

Material wrinkle_material(WrinkleMaterial which, ConstitutiveMode ortho_mode) {
  MaterialConfig m = material_preset(which == WrinkleMaterial::Iso ? "wrinkle-iso" : "wrinkle-ortho");
  if (which == WrinkleMaterial::Ortho) m.mode = ortho_mode;
  return m.to_material();
}

CriticalShear detect_critical_shear(const std::vector<ShearSample>& traj, double threshold,
                                    const std::function<double(double)>& probe, double resolution) {
  CriticalShear out;
  const std::size_t n = traj.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(traj[i].amplitude > threshold)) continue;
    bool growing = true;
    for (std::size_t k = i + 1; k < std::min(n, i + 3); ++k)
      if (traj[k].amplitude < traj[k - 1].amplitude) growing = false;
    if (!growing) continue;
    out.found = true;
    out.hi = traj[i].shear;
    out.lo = i > 0 ? traj[i - 1].shear : 0.0;
    break;
  }
  if (!out.found) return out;
  if (probe) {
    while (out.hi - out.lo > resolution) {
      const double mid = 0.5 * (out.lo + out.hi);
      if (probe(mid) > threshold)
        out.hi = mid;
      else
        out.lo = mid;
    }
  }
  out.u_c = 0.5 * (out.lo + out.hi);
  return out;
}

double GridField::sample(double x, double y) const {
  const double fx = std::clamp(x / lx, 0.0, 1.0) * (nx - 1);
  const double fy = std::clamp(y / ly, 0.0, 1.0) * (ny - 1);
  const int i = std::min(static_cast<int>(fx), nx - 2);
  const int j = std::min(static_cast<int>(fy), ny - 2);
  const double s = fx - i;
  const double t = fy - j;
  return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
         s * t * at(i + 1, j + 1);
}

GridField sample_sheet_uz(const ShellModel& model, int nx, int ny, double lx, double ly, const Eigen::VectorXd& u,
                          int factor) {
  const ControlMesh& mesh = model.mesh();
  if (mesh.triangle_count() != static_cast<std::size_t>(2 * nx * ny))
    throw std::invalid_argument("sample_sheet_uz: mesh is not an nx x ny structured sheet");
  struct Patch {
    OneRing ring;
    PatchExpansion ex;
  };
  std::vector<Patch> patches(mesh.triangle_count());
  for (std::size_t e = 0; e < patches.size(); ++e) {
    patches[e].ring = build_one_ring(mesh, static_cast<int>(e));
    patches[e].ex = expand(patches[e].ring);
  }
  GridField g;
  g.nx = nx * factor + 1;
  g.ny = ny * factor + 1;
  g.lx = lx;
  g.ly = ly;
  g.values.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  const double dx = lx / nx;
  const double dy = ly / ny;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = lx * i / (g.nx - 1);
      const double y = ly * j / (g.ny - 1);
      const int ci = std::min(static_cast<int>(x / dx), nx - 1);
      const int cj = std::min(static_cast<int>(y / dy), ny - 1);
      const double s = std::clamp(x / dx - ci, 0.0, 1.0);
      const double t = std::clamp(y / dy - cj, 0.0, 1.0);
      // Cell triangles: (p00, p10, p11) below the diagonal, (p00, p11, p01) above.
      const int e = 2 * (cj * nx + ci) + (s >= t ? 0 : 1);
      const Triangle& tri = mesh.triangles()[e];
      const std::array<double, 3> bary = s >= t ? std::array<double, 3>{1 - s, s - t, t}
                                                : std::array<double, 3>{1 - t, s, t - s};
      const Patch& p = patches[e];
      auto weight_of = [&](int node) {
        for (int k = 0; k < 3; ++k)
          if (tri[k] == node) return bary[k];
        throw std::logic_error("patch vertex not in triangle");
      };
      const double xi = weight_of(p.ring.vertices[1]);
      const double eta = weight_of(p.ring.vertices[2]);
      const ShapeTable tab = collapse(patch_table(p.ring, xi, eta), p.ex);
      double uz = 0;
      for (std::size_t k = 0; k < p.ex.real_nodes.size(); ++k) uz += tab.n[k] * u[3 * p.ex.real_nodes[k] + 2];
      g.values[static_cast<std::size_t>(j) * g.nx + i] = uz;
    }
  }
  return g;
}

WrinkleCount count_wrinkles(const GridField& f, double threshold) {
  WrinkleCount out;
  for (double v : f.values) out.amplitude = std::max(out.amplitude, std::abs(v));
  if (out.amplitude == 0) return out;

  // Structure tensor of the gradient: its leading eigenvector is normal to
  // the crests.
  const double hx = f.lx / (f.nx - 1);
  const double hy = f.ly / (f.ny - 1);
  double jxx = 0, jyy = 0, jxy = 0;
  for (int j = 1; j + 1 < f.ny; ++j) {
    for (int i = 1; i + 1 < f.nx; ++i) {
      const double gx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * hx);
      const double gy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * hy);
      jxx += gx * gx;
      jyy += gy * gy;
      jxy += gx * gy;
    }
  }
  const double normal_angle = 0.5 * std::atan2(2 * jxy, jxx - jyy);
  out.crest_angle = normal_angle + 0.5 * std::numbers::pi;
  const double cx = std::cos(normal_angle);
  const double cy = std::sin(normal_angle);

  // Sample the line through the centre along the crest normal, clipped to
  // the sheet.
  const double x0 = 0.5 * f.lx;
  const double y0 = 0.5 * f.ly;
  double tmax = std::numeric_limits<double>::infinity();
  if (std::abs(cx) > 1e-12) tmax = std::min(tmax, x0 / std::abs(cx));
  if (std::abs(cy) > 1e-12) tmax = std::min(tmax, y0 / std::abs(cy));
  const double h = std::min(hx, hy) * 0.5;
  const int n = static_cast<int>(std::floor(tmax / h));
  const double cut = threshold * out.amplitude;
  int sign = 0;
  double peak = 0;
  for (int k = -n; k <= n; ++k) {
    const double v = f.sample(x0 + k * h * cx, y0 + k * h * cy);
    const int sg = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (sg != 0 && sg != sign) {
      if (sign != 0 && peak > cut) {
        ++out.count;
        out.crest_amplitude = std::max(out.crest_amplitude, peak);
      }
      sign = sg;
      peak = 0;
    }
    peak = std::max(peak, std::abs(v));
  }
  if (sign != 0 && peak > cut) {
    ++out.count;
    out.crest_amplitude = std::max(out.crest_amplitude, peak);
  }
  return out;
}

WrinkleResult run_wrinkle(const WrinkleCase& c, const std::string& out_prefix, bool vtk) {
  RunOptions opt;
  if (!out_prefix.empty()) {
    opt.csv = out_prefix + ".csv";
    if (vtk) opt.vtk = out_prefix + ".vtk";
  }
  const RunResult r = run_config(wrinkle_config(c), opt);
  WrinkleResult out;
  out.completed = r.completed;
  out.message = r.message;
  out.trajectory = r.trajectory;
  out.critical = r.critical;
  out.wrinkles = r.wrinkles;
  out.u = r.u;
  return out;
}

// ---------------------------------------------------------------------------
// Field export
// ---------------------------------------------------------------------------

void export_fields(const ShellModel& model, const Eigen::VectorXd& u, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  const ControlMesh& mesh = model.mesh();
  const auto dens = model.energy_densities(u);
  const std::size_t nn = mesh.node_count();
  const std::size_t nt = mesh.triangle_count();
  out << "# vtk DataFile Version 3.0\northoshell fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nn << " double\n";
  for (std::size_t i = 0; i < nn; ++i) {
    const Vec3 x = mesh.nodes()[i] + u.segment<3>(3 * i);
    out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
  }
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t e = 0; e < nt; ++e) out << "5\n";
  out << "POINT_DATA " << nn << "\nVECTORS u double\n";
  for (std::size_t i = 0; i < nn; ++i) out << u[3 * i] << ' ' << u[3 * i + 1] << ' ' << u[3 * i + 2] << '\n';
  out << "SCALARS u_z double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < nn; ++i) out << u[3 * i + 2] << '\n';
  out << "CELL_DATA " << nt << "\nSCALARS bending_energy_density double 1\nLOOKUP_TABLE default\n";
  for (const auto& d : dens) out << d.bending << '\n';
  out << "SCALARS membrane_energy_density double 1\nLOOKUP_TABLE default\n";
  for (const auto& d : dens) out << d.membrane << '\n';
  out << "SCALARS reference_area double 1\nLOOKUP_TABLE default\n";
  for (const auto& rec : model.elements()) out << rec.area << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace orthoshell
