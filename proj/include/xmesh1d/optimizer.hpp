// Augmented-Lagrangian minimiser for small dense problems
//   min f(x)  s.t.  lower <= x <= upper,  c(x) = 0,  g(x) <= 0
// with a projected quasi-Newton inner solve over the box.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace xmesh1d {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A block of constraints sharing one evaluator. The evaluator fills
/// `values` (size count) and, when J is non-null, the dense Jacobian (count x n).
struct ConstraintBlock {
  Eigen::Index count = 0;
  std::function<void(const Vector& x, Vector& values, Matrix* J)> eval;

  bool empty() const { return count == 0; }
};

struct NlpProblem {
  /// Returns f(x); fills the gradient when grad is non-null.
  std::function<double(const Vector& x, Vector* grad)> objective;
  Vector lower;
  Vector upper;
  ConstraintBlock equalities;    // c(x) = 0
  ConstraintBlock inequalities;  // g(x) <= 0
  Vector x0;
  Vector lambda0;  // optional warm start for equality multipliers
  Vector mu0;      // optional warm start for inequality multipliers
};

struct SolverOptions {
  double kkt_tol = 1e-8;      // relative to max(1, |f|)
  double feas_tol = 1e-10;
  int max_outer = 30;
  int max_inner = 500;
  double rho0 = 10.0;
  double rho_growth = 10.0;
  double rho_max = 1e12;
  double stall_ratio = 0.25;  // required decrease of the violation per outer iteration
  bool polish = true;
};

enum class SolverStatus { Converged, MaxIterations, Infeasible };

std::string to_string(SolverStatus s);

struct NlpResult {
  Vector x;
  Vector lambda;  // equality multipliers, Lagrangian f - lambda.c + mu.g
  Vector mu;      // inequality multipliers (>= 0)
  SolverStatus status = SolverStatus::MaxIterations;
  double f = 0;
  double kkt_residual = 0;   // ||x - P(x - grad L)||_inf
  double max_violation = 0;  // max(|c|, g+)
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged() const { return status == SolverStatus::Converged; }
};

/// Deterministic local minimisation from problem.x0.
NlpResult minimize(const NlpProblem& problem, const SolverOptions& opts = {});

struct MultiplierReport {
  Vector lambda;
  Vector mu;
  Vector g;                          // inequality values at the solution
  double max_complementarity = 0;    // max |mu_i g_i|
  double min_multiplier = 0;         // min mu_i (>= 0 for a valid report)
};

MultiplierReport multiplier_report(const NlpProblem& problem, const NlpResult& result);

/// Projected-gradient stationarity measure of the Lagrangian at (x, lambda, mu).
double kkt_residual(const NlpProblem& problem, const Vector& x, const Vector& lambda, const Vector& mu);

}  // namespace xmesh1d
