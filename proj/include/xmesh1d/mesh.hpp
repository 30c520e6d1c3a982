// Symmetric half-bar mesh: element sizes h_0..h_n (h_0 is the central
// element, counted once), nodes x_1..x_{n+1} and nodal damage d_1..d_{n+1}.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "xmesh1d/model.hpp"

namespace xmesh1d {

using Vector = Eigen::VectorXd;

/// Multiplicity of half-mesh element i in the full bar.
inline double element_weight(Eigen::Index i) { return i == 0 ? 1.0 : 2.0; }

struct HalfMesh {
  double L = 0;
  Vector h;  // h_0..h_n

  Eigen::Index n() const { return h.size() - 1; }
  /// Node positions x_1..x_{n+1}; the last one is pinned to L/2.
  Vector nodes() const;
  /// h_0 + 2 sum h_i - L
  double length_residual() const;
};

/// Cumulative node positions from h without closure correction.
Vector node_positions(const Vector& h);

/// Uniform mesh with the odd element count closest to L/h*, h* = band/n_c.
HalfMesh build_uniform(const Bar& bar, int n_c);

/// Value at |x| of the piecewise-linear field with nodal values d on nodes x,
/// mirrored about the centre (the central element is flat at d_1).
double interpolate(const Vector& d, const Vector& nodes, double x);

/// Element containing |x| for the mirrored field: -1 for the central element,
/// otherwise k such that nodes[k] <= |x| <= nodes[k+1].
Eigen::Index locate(const Vector& nodes, double ax);

struct PrevSnapshot {
  Vector x;  // node positions
  Vector d;  // nodal damage
  Vector h;  // element sizes
};

/// Constraint residuals in g <= 0 form (positive = violated).
struct ConstraintReport {
  double length = 0;             // |h_0 + 2 sum h_i - L| / L
  double box = 0;                // max violation of 0 <= d <= 1, h >= 0
  Vector irrev_prev_at_current;  // prev(x_i) - d_i
  Vector irrev_current_at_prev;  // prev_d_j - d(prev_x_j)
  Vector lipschitz;              // |d_{i+1}-d_i| - h_i/lc, elements 1..n (lip only)

  double max_irreversibility() const;
  double max_lipschitz() const;
  bool feasible(double tol) const;
};

ConstraintReport constraint_residuals(const Vector& d, const Vector& h, double L, const PrevSnapshot& prev,
                                      const Bar& bar);

}  // namespace xmesh1d
