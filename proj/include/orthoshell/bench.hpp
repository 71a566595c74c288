#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orthoshell/solver.hpp"

namespace orthoshell {

// ---------------------------------------------------------------------------
// Pinched hemisphere
// ---------------------------------------------------------------------------

struct HemisphereCase {
  double lambda = 1.0;
  int n_meridian = 16;
  int n_circumference = 64;
  double radius = 10;
  double hole_angle = 18;
  double h = 0.04;
  double E_c = 6.825e7;
  double nu_c = 0.3;
  double load = 100;
  int steps = 20;
  ConstitutiveMode mode = ConstitutiveMode::Voigt;
  int threads = 1;
};

/// Meridional modulus and shear modulus for the tabulated orthotropy
/// degrees 1.0, 0.9, 0.5 and 0.1; throws for other values.
struct HemisphereRow {
  double lambda;
  double E_m;
  double G;
};
const std::vector<HemisphereRow>& hemisphere_table();
HemisphereRow hemisphere_row(double lambda);

/// Material with index 1 meridional (d = polar axis) and index 2
/// circumferential; nu1 follows from nu_c on the circumferential modulus.
Material hemisphere_material(const HemisphereCase& c);

struct HemispherePoint {
  int step = 0;
  double load = 0;
  double a = 0;  // radial displacement magnitude of the inward-loaded pair
  double b = 0;  // radial displacement magnitude of the outward-loaded pair
  int iterations = 0;
  double energy = 0;
};

struct HemisphereResult {
  bool completed = false;
  std::string message;
  std::vector<HemispherePoint> curve;
  Eigen::VectorXd u;
};

/// Nodes of the hemisphere mesh nearest to (R,0,0), (-R,0,0), (0,R,0) and
/// (0,-R,0): the inward-loaded pair A1, A2 and the outward-loaded pair
/// B1, B2.
std::array<int, 4> hemisphere_load_nodes(const ControlMesh& mesh, double radius);

/// Half the shortening of the A1-A2 distance and half the lengthening of the
/// B1-B2 distance.
std::pair<double, double> hemisphere_displacements(const ControlMesh& mesh, const Eigen::VectorXd& u,
                                                   const std::array<int, 4>& nodes);

HemisphereResult run_hemisphere(const HemisphereCase& c, const std::filesystem::path& csv = {},
                                const std::filesystem::path& vtk = {});

// ---------------------------------------------------------------------------
// Sheet wrinkling
// ---------------------------------------------------------------------------

enum class WrinkleMaterial { Iso, Ortho };

struct WrinkleCase {
  WrinkleMaterial material = WrinkleMaterial::Iso;
  int nx = 56;
  int ny = 28;
  double lx = 200;
  double ly = 100;
  double prestretch = 1;
  double shear = 10;
  int prestretch_steps = 5;
  int shear_steps = 100;
  double perturbation = -1;  // amplitude of the seeded noise; < 0 means 1e-4 h
  unsigned seed = 20240501;
  ConstitutiveMode ortho_mode = ConstitutiveMode::Voigt;
  int threads = 1;
};

Material wrinkle_material(WrinkleMaterial which, ConstitutiveMode ortho_mode = ConstitutiveMode::Voigt);

/// Max |u_z| along the shear ramp.
struct ShearSample {
  double shear = 0;
  double amplitude = 0;
};

struct CriticalShear {
  bool found = false;
  double u_c = 0;
  double lo = 0;  // bracket after refinement
  double hi = 0;
};

/// Smallest shear at which the amplitude exceeds `threshold` and keeps
/// growing (non-decreasing) over the following samples (3 in total). With a
/// probe (shear -> amplitude) the bracket is bisected down to `resolution`.
CriticalShear detect_critical_shear(const std::vector<ShearSample>& trajectory, double threshold,
                                    const std::function<double(double)>& probe = {}, double resolution = 0.01);

/// Scalar field on a regular grid over [0, lx] x [0, ly], row-major in y.
struct GridField {
  int nx = 0;  // samples along x
  int ny = 0;
  double lx = 0;
  double ly = 0;
  std::vector<double> values;
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  double sample(double x, double y) const;  // bilinear
};

/// u_z of the limit surface of a flat structured sheet, sampled with
/// `factor` points per element edge.
GridField sample_sheet_uz(const ShellModel& model, int nx, int ny, double lx, double ly, const Eigen::VectorXd& u,
                          int factor = 4);

struct WrinkleCount {
  int count = 0;
  double amplitude = 0;        // max |u_z| over the field
  double crest_amplitude = 0;  // largest peak of the counted lobes
  double crest_angle = 0;  // crest direction, radians from the x axis
};

/// Counts sign-consistent lobes with peak |u_z| above `threshold` times the
/// field maximum along the line through the centre perpendicular to the
/// crests. The crest direction comes from the structure tensor of u_z.
WrinkleCount count_wrinkles(const GridField& uz, double threshold = 0.1);

struct WrinkleResult {
  bool completed = false;
  std::string message;
  std::vector<ShearSample> trajectory;
  CriticalShear critical;
  WrinkleCount wrinkles;
  Eigen::VectorXd u;
};

WrinkleResult run_wrinkle(const WrinkleCase& c, const std::string& out_prefix = {}, bool vtk = false);

// ---------------------------------------------------------------------------
// Field export
// ---------------------------------------------------------------------------

/// Legacy ASCII VTK unstructured grid of the control mesh with point data
/// u and u_z and cell data bending/membrane energy density and reference
/// area.
void export_fields(const ShellModel& model, const Eigen::VectorXd& u, const std::filesystem::path& path);

}  // namespace orthoshell
