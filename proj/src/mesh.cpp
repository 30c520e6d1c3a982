#include "xmesh1d/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xmesh1d {

Vector node_positions(const Vector& h) {
  const Eigen::Index n = h.size() - 1;
  Vector x(n + 1);
  x[0] = 0.5 * h[0];
  for (Eigen::Index i = 1; i <= n; ++i) x[i] = x[i - 1] + h[i];
  return x;
}

Vector HalfMesh::nodes() const {
  Vector x = node_positions(h);
  const double closure = x[x.size() - 1] - 0.5 * L;
  if (std::abs(closure) > 1e-12 * L) throw std::logic_error("mesh does not close: residual " + std::to_string(closure));
  x[x.size() - 1] = 0.5 * L;
  return x;
}

double HalfMesh::length_residual() const {
  double s = h[0];
  for (Eigen::Index i = 1; i < h.size(); ++i) s += 2.0 * h[i];
  return s - L;
}

HalfMesh build_uniform(const Bar& bar, int n_c) {
  if (n_c < 1) throw std::invalid_argument("n_c must be >= 1");
  const double band = bar.model == ModelKind::PhaseField ? 0.5 * std::numbers::pi * bar.p.lc : bar.p.lc;
  const double target = band / n_c;
  const double ratio = bar.p.L / target;
  // nearest odd integer
  const long ne = 2 * std::lround((ratio - 1.0) / 2.0) + 1;
  if (ne < 3) throw std::invalid_argument("mesh needs at least 3 elements (got " + std::to_string(ne) + ")");
  HalfMesh m;
  m.L = bar.p.L;
  m.h = Vector::Constant((ne - 1) / 2 + 1, bar.p.L / static_cast<double>(ne));
  return m;
}

Eigen::Index locate(const Vector& nodes, double ax) {
  if (ax <= nodes[0]) return -1;
  const auto* begin = nodes.data();
  const auto* end = nodes.data() + nodes.size();
  // first node strictly greater than ax
  const auto* it = std::upper_bound(begin, end, ax);
  if (it == end) return nodes.size() - 2;
  return static_cast<Eigen::Index>(it - begin) - 1;
}

double interpolate(const Vector& d, const Vector& nodes, double x) {
  const double ax = std::abs(x);
  if (ax > nodes[nodes.size() - 1] * (1.0 + 1e-12)) throw std::domain_error("interpolation point outside the bar");
  const Eigen::Index k = locate(nodes, ax);
  if (k < 0) return d[0];
  const double len = nodes[k + 1] - nodes[k];
  if (len <= 0.0) return d[k + 1];
  const double t = std::clamp((ax - nodes[k]) / len, 0.0, 1.0);
  return d[k] + t * (d[k + 1] - d[k]);
}

double ConstraintReport::max_irreversibility() const {
  double m = -std::numeric_limits<double>::infinity();
  if (irrev_prev_at_current.size()) m = std::max(m, irrev_prev_at_current.maxCoeff());
  if (irrev_current_at_prev.size()) m = std::max(m, irrev_current_at_prev.maxCoeff());
  return m;
}

double ConstraintReport::max_lipschitz() const {
  return lipschitz.size() ? lipschitz.maxCoeff() : -std::numeric_limits<double>::infinity();
}

bool ConstraintReport::feasible(double tol) const {
  return length <= tol && box <= tol && max_irreversibility() <= tol && max_lipschitz() <= tol;
}

ConstraintReport constraint_residuals(const Vector& d, const Vector& h, double L, const PrevSnapshot& prev,
                                      const Bar& bar) {
  if (d.size() != h.size() || prev.d.size() != prev.x.size())
    throw std::invalid_argument("constraint_residuals: inconsistent sizes");
  ConstraintReport r;
  const HalfMesh mesh{L, h};
  r.length = std::abs(mesh.length_residual()) / L;
  double box = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) box = std::max({box, -d[i], d[i] - 1.0});
  for (Eigen::Index i = 0; i < h.size(); ++i) box = std::max(box, -h[i]);
  r.box = box;

  Vector x = node_positions(h);
  x[x.size() - 1] = std::max(x[x.size() - 1], x[x.size() - 2]);
  const Vector dc = d.cwiseMax(0.0).cwiseMin(1.0);
  r.irrev_prev_at_current.resize(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    r.irrev_prev_at_current[i] = interpolate(prev.d, prev.x, std::min(x[i], prev.x[prev.x.size() - 1])) - d[i];
  r.irrev_current_at_prev.resize(prev.d.size());
  for (Eigen::Index j = 0; j < prev.d.size(); ++j)
    r.irrev_current_at_prev[j] = prev.d[j] - interpolate(dc, x, std::min(prev.x[j], x[x.size() - 1]));

  if (bar.model == ModelKind::LipField) {
    const Eigen::Index n = h.size() - 1;
    r.lipschitz.resize(n);
    for (Eigen::Index i = 1; i <= n; ++i) r.lipschitz[i - 1] = std::abs(d[i] - d[i - 1]) - h[i] / bar.p.lc;
  }
  return r;
}

}  // namespace xmesh1d
