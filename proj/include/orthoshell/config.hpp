#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "orthoshell/material.hpp"
#include "orthoshell/mesh.hpp"
#include "orthoshell/solver.hpp"

namespace orthoshell {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Node set selector: "edge:bottom|top|left|right|equator|rim", "boundary",
/// "all", "node:<id>" or "nearest:x,y,z".
struct Selector {
  std::string text;
  int line = 0;  // source line for error messages; not part of the value
  bool operator==(const Selector& o) const { return text == o.text; }
};

/// Resolves a selector against a mesh; throws ConfigError when it is
/// malformed or matches nothing.
std::vector<int> resolve_selector(const Selector& sel, const ControlMesh& mesh);

/// "fix = <selector> <components>" with components a subset of "xyz".
struct FixSpec {
  Selector where;
  std::string components;
  bool operator==(const FixSpec&) const = default;
};

/// "prescribe = <selector> <component> <value>": target displacement at the
/// end of the phase.
struct PrescribeSpec {
  Selector where;
  char component = 'x';
  double value = 0;
  bool operator==(const PrescribeSpec&) const = default;
};

/// "load = <selector> fx fy fz": total force per selected node at the end of
/// the phase.
struct LoadSpec {
  Selector where;
  Vec3 force = Vec3::Zero();
  bool operator==(const LoadSpec& o) const { return where == o.where && force == o.force; }
};

struct GeometryConfig {
  std::string generator = "sheet";  // hemisphere | sheet | file
  int n_meridian = 16;
  int n_circumference = 64;
  double radius = 10;
  double hole_angle = 18;
  int nx = 8;
  int ny = 4;
  double lx = 200;
  double ly = 100;
  std::string path;
  int refine = 0;  // quadrisection levels applied after generation
  bool operator==(const GeometryConfig&) const = default;
};

struct MaterialConfig {
  std::string preset;  // empty when given explicitly
  double h = 0;
  double rho = 1;
  double E1 = 0;
  double E2 = 0;
  double nu1 = 0;
  double G12 = 0;
  Vec3 d = Vec3::UnitX();
  /// In-plane angle of d from the +y axis, counterclockwise about +z:
  /// d = (-sin a, cos a, 0). Overrides d.
  std::optional<double> alpha_degrees;
  ConstitutiveMode mode = ConstitutiveMode::Voigt;
  std::string align = "auto";  // auto | always | never

  Material to_material() const;
  bool operator==(const MaterialConfig& o) const;
};

struct PhaseConfig {
  std::string name;
  int steps = 10;
  double dt = 0;  // dynamic mode: time step
  std::vector<PrescribeSpec> prescribe;
  std::vector<LoadSpec> loads;
  double perturb = 0;  // seeded u_z noise amplitude applied at phase start
  std::optional<bool> minimize;
  /// Reported ramp parameter: value at the start and end of the phase.
  double parameter_start = 0;
  double parameter_end = 1;
  bool operator==(const PhaseConfig&) const = default;
};

struct SolverConfig {
  std::string mode = "static";  // static | dynamic
  double tol_rel = 1e-6;
  double tol_abs = 1e-10;
  int max_iterations = 30;
  int max_bisections = 12;
  bool minimize = false;
  double damping = 0;
  unsigned seed = 20240501;
  int threads = 1;
  bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
  std::string csv;
  std::string vtk;  // path of the final-state VTK file; empty for none
  std::vector<std::pair<Selector, char>> monitors;  // "monitor = <selector> <component>"
  std::string metrics = "none";                      // none | hemisphere | wrinkle
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  MaterialConfig material;
  std::vector<FixSpec> fixes;
  std::vector<PhaseConfig> phases;
  SolverConfig solver;
  OutputConfig output;
  /// Informational notes produced while parsing (defaults applied, presets
  /// expanded).
  std::vector<std::string> notes;
  /// Directory that relative mesh paths are resolved against.
  std::filesystem::path base_dir;

  bool operator==(const RunConfig& o) const;
};

/// Parses and validates a config file: syntax, required and unknown keys,
/// value ranges, the material, and every selector against the built mesh.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>",
                            const std::filesystem::path& base_dir = {});
std::string serialize_config(const RunConfig& cfg);

/// Checks the material and resolves every selector against `mesh`.
void validate_config(const RunConfig& cfg, const ControlMesh& mesh);

/// Material presets: "hemisphere-1.0", "hemisphere-0.9", "hemisphere-0.5",
/// "hemisphere-0.1", "hemisphere-iso", "wrinkle-iso", "wrinkle-ortho".
MaterialConfig material_preset(const std::string& name);
std::vector<std::string> material_preset_names();

/// Builds the mesh described by the geometry block.
ControlMesh build_mesh(const GeometryConfig& g, const std::filesystem::path& base_dir = {});

Alignment parse_alignment(const std::string& name);

}  // namespace orthoshell
