#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "orthoshell/material.hpp"
#include "orthoshell/mesh.hpp"
#include "orthoshell/orthotropy.hpp"

namespace orthoshell {

using SparseMatrix = Eigen::SparseMatrix<double>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by force evaluation when a deformed element degenerates; the
/// solvers treat it as a failed trial and cut the step.
class StepRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free-DOF numbering after eliminating prescribed DOFs.
struct DofMap {
  std::vector<int> free_index;  // per global DOF, -1 when prescribed
  std::vector<int> free_dofs;   // global DOF per free index
  Eigen::Index free_count() const { return static_cast<Eigen::Index>(free_dofs.size()); }
  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
  void scatter_add(const Eigen::VectorXd& reduced, Eigen::VectorXd& full) const;
};

/// Anything the static and dynamic solvers can drive.
class MechanicalSystem {
 public:
  virtual ~MechanicalSystem() = default;
  virtual Eigen::Index size() const = 0;
  /// Stored energy; fills the internal force (its gradient) when asked.
  virtual double internal(const Eigen::VectorXd& u, Eigen::VectorXd* force) const = 0;
  /// Tangent restricted to the free DOFs of `map`.
  virtual SparseMatrix tangent(const Eigen::VectorXd& u, const DofMap& map) const = 0;
  /// Diagonal mass per DOF.
  virtual Eigen::VectorXd lumped_mass() const = 0;
  /// Typical nodal force magnitude; absolute tolerances are relative to it.
  virtual double force_scale() const = 0;
  /// Typical element length.
  virtual double length_scale() const = 0;
};

// ---------------------------------------------------------------------------
// Shell model
// ---------------------------------------------------------------------------

/// Everything one element needs at run time, fixed in the reference state.
struct ElementRecord {
  int id = -1;
  std::vector<int> nodes;  // real nodes, columns of the table
  ShapeTable table;        // collapsed and, if aligned, transformed
  SurfaceGeometry ref;
  Tensor4 C;
  double weight = 0;  // quadrature weight
  double area = 0;    // J_ref * weight
  bool ghosts = false;
  bool aligned = false;
  double theta = 0;
  Mat2 T = Mat2::Identity();
};

enum class Alignment {
  Auto,    // transform when the constitutive mode needs it
  Always,  // transform also for the isotropic mode
  Never,   // only valid for the isotropic mode
};

struct ModelOptions {
  Alignment alignment = Alignment::Auto;
  /// Worker threads for element loops; results do not depend on it.
  int threads = 1;
};

ElementRecord setup_element(const ControlMesh& mesh, int element, const Material& material, bool align);

/// Energy of one element for node positions x (columns match rec.nodes);
/// optionally its force and energy densities.
double element_internal(const ElementRecord& rec, const NodeMatrix& x, double h, Eigen::VectorXd* force,
                        EnergyDensity* density = nullptr, StrainState* strain = nullptr);

class ShellModel : public MechanicalSystem {
 public:
  ShellModel(ControlMesh mesh, Material material, ModelOptions options = {});

  const ControlMesh& mesh() const { return mesh_; }
  const Material& material() const { return material_; }
  const std::vector<ElementRecord>& elements() const { return elements_; }

  Eigen::Index size() const override { return static_cast<Eigen::Index>(mesh_.dof_count()); }
  double internal(const Eigen::VectorXd& u, Eigen::VectorXd* force) const override;
  SparseMatrix tangent(const Eigen::VectorXd& u, const DofMap& map) const override;
  Eigen::VectorXd lumped_mass() const override;
  double force_scale() const override { return force_scale_; }
  double length_scale() const override { return length_scale_; }

  /// Element stiffness by central differences of the element force.
  Eigen::MatrixXd element_tangent(const ElementRecord& rec, const Eigen::VectorXd& u) const;

  /// Membrane and bending energy density per element.
  std::vector<EnergyDensity> energy_densities(const Eigen::VectorXd& u) const;
  /// Membrane and bending energy totals.
  EnergyDensity energy_split(const Eigen::VectorXd& u) const;
  double reference_area() const;

 private:
  struct Pattern;
  template <class F>
  void for_elements(F&& f) const;
  const Pattern& pattern(const DofMap& map) const;

  ControlMesh mesh_;
  Material material_;
  ModelOptions options_;
  std::vector<ElementRecord> elements_;
  double force_scale_ = 1;
  double length_scale_ = 1;
  mutable std::mutex pattern_mutex_;
  mutable std::vector<std::shared_ptr<Pattern>> patterns_;
};

// ---------------------------------------------------------------------------
// Loads, constraints and solvers
// ---------------------------------------------------------------------------

struct PointLoad {
  int node = -1;
  Vec3 force = Vec3::Zero();
};

struct PrescribedDof {
  int dof = -1;
  double value = 0;
};

/// Target of one loading phase: point loads and prescribed DOF values
/// reached at the end of the phase. Both ramp linearly from the state at the
/// start of the phase.
struct LoadCase {
  std::vector<PointLoad> loads;
  std::vector<PrescribedDof> prescribed;
};

/// Builds the DOF map. Throws SolverError on a DOF prescribed twice with
/// different values or both loaded and prescribed.
DofMap apply_constraints(Eigen::Index ndof, const LoadCase& load);

Eigen::VectorXd load_vector(Eigen::Index ndof, const std::vector<PointLoad>& loads);

struct SolverState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd a;
  Eigen::VectorXd f_ext;  // currently applied nodal loads
  double s = 0;           // load factor within the current phase
  double time = 0;
  int step = 0;

  static SolverState zero(Eigen::Index ndof);
};

struct StaticOptions {
  int steps = 20;
  double tol_rel = 1e-6;
  double tol_abs = 1e-10;  // multiplied by the system force scale
  int max_iterations = 30;
  int max_bisections = 12;
  /// Shifted Newton with energy line search and negative-curvature steps,
  /// so that converged states are local energy minima.
  bool minimize_energy = false;
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0;
  double energy = 0;         // total potential
  int negative_pivots = 0;   // of the tangent at the returned state
  std::string message;
};

/// Newton iterations at fixed loads and prescribed values. `u` must already
/// hold the prescribed values; on failure it is left at the last iterate.
NewtonResult equilibrate(const MechanicalSystem& system, const DofMap& map, const Eigen::VectorXd& f_ext,
                         Eigen::VectorXd& u, const StaticOptions& options);

struct StepReport {
  int step = 0;       // nominal step index within the phase (1-based)
  double s = 0;       // load factor reached
  int iterations = 0; // Newton iterations summed over sub-steps
  int substeps = 0;
  double residual = 0;
  double energy = 0;
  int negative_pivots = 0;
};

/// Called after every converged nominal step; may modify the state
/// (for example to seed a perturbation) before the next step.
using StepCallback = std::function<void(SolverState&, const StepReport&)>;

struct StaticResult {
  bool completed = false;
  std::string message;
  std::vector<StepReport> steps;
};

/// Load and displacement continuation from `state` to the targets of
/// `load`, with step bisection on failure. On failure the state holds the
/// last converged point.
StaticResult static_solve(const MechanicalSystem& system, const LoadCase& load, SolverState& state,
                          const StaticOptions& options, const StepCallback& callback = {});

/// Reaction forces f_int - f_ext at every DOF (zero at free DOFs in
/// equilibrium).
Eigen::VectorXd reactions(const MechanicalSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& f_ext);

struct NewmarkOptions {
  double gamma = 0.5;
  double beta = 0.25;
  double damping = 0;  // mass-proportional coefficient c in C = c M
  double min_dt = 0;   // floor for dt halving; 0 means dt / 2^10
  double tol_rel = 1e-8;
  double tol_abs = 1e-10;
  int max_iterations = 25;
};

struct NewmarkResult {
  bool converged = false;
  int iterations = 0;
  int substeps = 0;
};

/// Advances the state by dt with the average-acceleration scheme. `at_end`
/// holds the loads and prescribed values at t + dt; within the step they
/// are interpolated linearly when dt has to be cut.
NewmarkResult newmark_step(const MechanicalSystem& system, const LoadCase& at_end, SolverState& state, double dt,
                           const NewmarkOptions& options);

/// Kinetic energy 1/2 v^T M v.
double kinetic_energy(const MechanicalSystem& system, const Eigen::VectorXd& v);

}  // namespace orthoshell
