#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "orthoshell/bench.hpp"
#include "orthoshell/config.hpp"

namespace orthoshell {

/// One converged step of a run.
struct StepRecord {
  int step = 0;  // global counter over all phases
  int phase = 0;
  int phase_step = 0;
  double s = 0;  // load factor within the phase
  double parameter = 0;
  double time = 0;
  int iterations = 0;
  int substeps = 0;
  double residual = 0;
  double potential = 0;  // stored energy minus work of the applied loads
  double membrane = 0;
  double bending = 0;
  double kinetic = 0;
  int negative_pivots = 0;
  std::vector<double> monitors;
  std::vector<double> metrics;
};

struct RunResult {
  bool completed = false;
  std::string message;
  std::vector<std::string> monitor_names;
  std::vector<std::string> metric_names;
  std::vector<StepRecord> records;
  Eigen::VectorXd u;
  /// metrics = wrinkle: shear trajectory of the last phase and derived metrics.
  std::vector<ShearSample> trajectory;
  CriticalShear critical;
  WrinkleCount wrinkles;
};

struct RunOptions {
  std::ostream* log = nullptr;  // progress lines; null for silent
  /// Overrides the output paths of the config when non-empty.
  std::string csv;
  std::string vtk;
};

/// Builds the mesh and model, runs every phase and writes the configured
/// outputs. Solver failures end the run with completed = false; the records
/// up to the failure are kept and written.
RunResult run_config(const RunConfig& cfg, const RunOptions& options = {});

/// CSV with the columns step, phase, phase_step, s, parameter, time,
/// iterations, substeps, residual, potential, membrane, bending, kinetic,
/// negative_pivots, then one column per monitor and per metric.
void write_csv(const RunResult& result, const std::filesystem::path& path);

/// Preset configs behind the bench subcommands.
RunConfig hemisphere_config(const HemisphereCase& c);
RunConfig wrinkle_config(const WrinkleCase& c);

}  // namespace orthoshell
