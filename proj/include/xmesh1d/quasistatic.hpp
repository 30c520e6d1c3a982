// Quasi-static loading of the bar: one constrained minimisation per load
// increment, irreversibility bookkeeping and post-processing diagnostics.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xmesh1d/mesh.hpp"
#include "xmesh1d/model.hpp"
#include "xmesh1d/optimizer.hpp"

namespace xmesh1d {

enum class MeshMode { Fixed, XMesh };

std::string to_string(MeshMode m);
MeshMode mesh_mode_from_string(const std::string& s);

struct ZoomWindow {
  double lo = 0;  // [m]
  double hi = 0;  // [m]
  int steps = 0;
};

/// Elongation values U_0 = 0 <= U_1 <= ... <= U_N.
struct LoadSchedule {
  std::vector<double> U;

  std::size_t increments() const { return U.empty() ? 0 : U.size() - 1; }
  static LoadSchedule uniform(double U_max, int steps);
  /// Uniform schedule merged with `zoom.steps` evenly spaced values in [lo, hi].
  static LoadSchedule zoomed(double U_max, int steps, const ZoomWindow& zoom);
  /// 200 increments to 1.1 wc, optionally with 200 more in [0.95 wc, 1.01 wc].
  static LoadSchedule standard(const Bar& bar, bool zoom);
};

struct StepState {
  int index = 0;
  double U = 0;
  Vector d;  // nodal damage d_1..d_{n+1}
  Vector h;  // element sizes h_0..h_n
  Vector x;  // node positions
  Vector u;  // nodal displacements
  double sigma = 0;
  double F = 0;
  double K = 1;
  double W = 0;
  bool broken = false;
  bool solved = false;  // an NLP was solved for this step
  SolverStatus status = SolverStatus::Converged;
  double kkt_residual = 0;
  double max_violation = 0;
  int iterations = 0;
  double lambda = 0;  // equality multiplier of the length constraint [N/m^2] (X-Mesh only)
  double max_complementarity = 0;
  Vector mu;                       // inequality multipliers (scaled problem)
  std::vector<std::string> mu_kind;  // "lip" or "irr" per inequality

  double d0() const { return d[0]; }
  double h0() const { return h[0]; }
};

struct History {
  Bar bar;
  MeshMode mode = MeshMode::Fixed;
  int n_c = 0;
  std::vector<StepState> steps;  // steps[0] is the unloaded state
  std::vector<double> Wd;        // dissipated energy per step [N/m]
  bool broken = false;
  double U_star = 0;   // first elongation with a broken bar
  int break_step = -1;

  bool all_converged() const;
};

struct RunOptions {
  SolverOptions solver;
  bool allow_invalid = false;  // run even when the validity report fails
};

/// Throws std::invalid_argument when the bar fails the validity bounds and
/// allow_invalid is not set.
History run(const Bar& bar, MeshMode mode, int n_c, const LoadSchedule& schedule, const RunOptions& opts = {});

/// Same loop on an explicit starting mesh.
History run_on_mesh(const Bar& bar, MeshMode mode, const HalfMesh& mesh, const LoadSchedule& schedule,
                    const RunOptions& opts = {});

/// Solve one increment from a given previous state; exposed for testing.
StepState solve_increment(const Bar& bar, MeshMode mode, const StepState& prev, double U, const RunOptions& opts);

/// Relative L2 error of element-midpoint displacements against the reference solution.
double l2_error(const Bar& bar, const StepState& step);

/// Trapezoidal external work minus stored elastic energy, per step.
std::vector<double> dissipated_energy(const Bar& bar, const std::vector<StepState>& steps);

enum class SlopeClass { Zero, Unit, Other };

struct ResidualReport {
  double stress_law = 0;        // |sigma/sigc - law(d0)|
  Vector element_stationarity;  // length-stationarity residual / (Gc/(c lc)); NaN where skipped
  double max_stationarity = 0;
  Vector gradient_relation;     // phase-field |lc |dd|/h - H(dbar, d0)|; NaN where skipped
  double max_gradient_relation = 0;
  std::vector<SlopeClass> slopes;  // lip: class of |dd|/h * lc per element (element 0 is Zero)
  int damaged_elements = 0;
  int other_slopes = 0;
};

ResidualReport xmesh_residuals(const Bar& bar, const StepState& step);

/// Steps k where sigma rises while the dissipated energy grows by at most
/// 1e-12 Gc, once damage has started.
std::vector<int> detect_reloading(const History& history);

/// Number of maximal runs of consecutive indices.
int count_episodes(const std::vector<int>& indices);

/// F^h of the ansatz d_i = <d0 - x_i/lc>_+ on a fixed lip mesh.
double basin_value(const Bar& bar, const HalfMesh& mesh, double U, double d0);
std::vector<double> basin_scan(const Bar& bar, const HalfMesh& mesh, double U, const std::vector<double>& d0_grid);

}  // namespace xmesh1d
