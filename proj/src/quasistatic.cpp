#include "xmesh1d/quasistatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "xmesh1d/analytic.hpp"
#include "xmesh1d/potential.hpp"

namespace xmesh1d {

std::string to_string(MeshMode m) { return m == MeshMode::Fixed ? "fixed" : "xmesh"; }

MeshMode mesh_mode_from_string(const std::string& s) {
  if (s == "fixed") return MeshMode::Fixed;
  if (s == "xmesh") return MeshMode::XMesh;
  throw std::invalid_argument("unknown mesh mode '" + s + "' (expected fixed or xmesh)");
}

LoadSchedule LoadSchedule::uniform(double U_max, int steps) {
  if (steps < 1) throw std::invalid_argument("schedule needs at least one increment");
  if (!(U_max > 0.0)) throw std::invalid_argument("schedule needs U_max > 0");
  LoadSchedule s;
  s.U.resize(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) s.U[static_cast<std::size_t>(k)] = U_max * k / steps;
  return s;
}

LoadSchedule LoadSchedule::zoomed(double U_max, int steps, const ZoomWindow& zoom) {
  LoadSchedule s = uniform(U_max, steps);
  if (zoom.steps <= 0) return s;
  if (!(zoom.lo > 0.0 && zoom.hi > zoom.lo)) throw std::invalid_argument("zoom window needs 0 < lo < hi");
  for (int j = 0; j < zoom.steps; ++j) {
    const double t = zoom.steps == 1 ? 0.0 : static_cast<double>(j) / (zoom.steps - 1);
    s.U.push_back(zoom.lo + t * (zoom.hi - zoom.lo));
  }
  std::sort(s.U.begin(), s.U.end());
  s.U.erase(std::unique(s.U.begin(), s.U.end()), s.U.end());
  return s;
}

LoadSchedule LoadSchedule::standard(const Bar& bar, bool zoom) {
  const double wc = bar.q.wc;
  if (!zoom) return uniform(1.1 * wc, 200);
  return zoomed(1.1 * wc, 200, {0.95 * wc, 1.01 * wc, 200});
}

bool History::all_converged() const {
  return std::all_of(steps.begin(), steps.end(), [](const StepState& s) { return s.status == SolverStatus::Converged; });
}

namespace {

constexpr double kBrokenDamage = 1.0 - 1e-9;

Vector pinned_nodes(const Bar& bar, const Vector& h) {
  Vector x = node_positions(h);
  x[x.size() - 1] = 0.5 * bar.p.L;
  return x;
}

void fill_state(const Bar& bar, StepState& s) {
  const PotentialEval ev = f_potential(bar, s.d, s.h, s.U);
  s.F = ev.F;
  s.K = ev.K;
  s.W = ev.W;
  s.sigma = ev.sigma;
  s.x = pinned_nodes(bar, s.h);
  s.u = displacement_from(bar, s.d, s.h, s.U);
}

// Lipschitz rows: for element e = 1..n, +-(d_{e-1} - d_e) - h_e/lc <= 0.
void lipschitz_rows(const Bar& bar, const Vector& d, const Vector& h, Eigen::Index row0, Vector& g, Matrix* J,
                    Eigen::Index eta_col0) {
  const double lc = bar.p.lc;
  for (Eigen::Index e = 1; e < d.size(); ++e) {
    const double jump = d[e - 1] - d[e];
    const Eigen::Index r = row0 + 2 * (e - 1);
    g[r] = jump - h[e] / lc;
    g[r + 1] = -jump - h[e] / lc;
    if (J) {
      (*J)(r, e - 1) = 1.0;
      (*J)(r, e) = -1.0;
      (*J)(r + 1, e - 1) = -1.0;
      (*J)(r + 1, e) = 1.0;
      if (eta_col0 >= 0) {
        (*J)(r, eta_col0 + e) = -bar.p.L / lc;
        (*J)(r + 1, eta_col0 + e) = -bar.p.L / lc;
      }
    }
  }
}

// Slope of the piecewise-linear field (d, nodes) at a, mirrored about the centre.
double field_slope(const Vector& d, const Vector& nodes, double a) {
  if (a >= nodes[nodes.size() - 1]) return 0.0;
  const Eigen::Index k = locate(nodes, a);
  if (k < 0) return 0.0;
  const double len = nodes[k + 1] - nodes[k];
  return len > 0.0 ? (d[k + 1] - d[k]) / len : 0.0;
}

struct XMeshLayout {
  Eigen::Index m = 0;       // nodes = elements
  Eigen::Index n_lip = 0;   // Lipschitz rows
  Eigen::Index n_prev = 0;  // prev field at current nodes, two rows per node
  std::vector<Eigen::Index> prev_nodes;  // previous nodes carrying damage
  Eigen::Index count() const { return n_lip + 2 * n_prev + static_cast<Eigen::Index>(prev_nodes.size()); }
};

void xmesh_inequalities(const Bar& bar, const PrevSnapshot& prev, const XMeshLayout& lay, const Vector& z, Vector& g,
                        Matrix* J) {
  const Eigen::Index m = lay.m;
  const double L = bar.p.L;
  const Vector d = z.head(m);
  const Vector h = L * z.tail(m);
  g.resize(lay.count());
  if (J) J->setZero(lay.count(), 2 * m);
  if (lay.n_lip) lipschitz_rows(bar, d, h, 0, g, J, m);

  const Vector x = node_positions(h);
  const double x_end = prev.x[prev.x.size() - 1];
  Eigen::Index row = lay.n_lip;
  auto position_jacobian = [&](Eigen::Index r, Eigen::Index i, double slope) {
    (*J)(r, i) = -1.0;
    if (slope == 0.0) return;
    (*J)(r, m) = slope * 0.5 * L;
    for (Eigen::Index k = 1; k <= i; ++k) (*J)(r, m + k) = slope * L;
  };
  const Eigen::Index last = prev.x.size() - 1;
  auto piece_slope = [&](Eigen::Index k) {
    return k < 0 ? 0.0 : (prev.d[k + 1] - prev.d[k]) / (prev.x[k + 1] - prev.x[k]);
  };
  for (Eigen::Index i = 0; i < lay.n_prev; ++i, row += 2) {
    const double xi = std::min(x[i], x_end);
    // Near a convex kink of the previous field the constraint is the max of
    // the two adjacent lines, one row each; elsewhere a single row.
    const Eigen::Index k = locate(prev.x, xi);
    Eigen::Index q = k < 0 ? 0 : k;
    if (k >= 0 && k + 1 < last && prev.x[k + 1] - xi < xi - prev.x[k]) q = k + 1;
    const double s_in = piece_slope(q - 1);
    const double s_out = q < last ? piece_slope(q) : 0.0;
    if (q < last && x[i] < x_end && s_out > s_in) {
      g[row] = prev.d[q] + s_in * (xi - prev.x[q]) - d[i];
      g[row + 1] = prev.d[q] + s_out * (xi - prev.x[q]) - d[i];
      if (J) {
        position_jacobian(row, i, s_in);
        position_jacobian(row + 1, i, s_out);
      }
    } else {
      g[row] = interpolate(prev.d, prev.x, xi) - d[i];
      g[row + 1] = -1.0;
      if (J) position_jacobian(row, i, x[i] < x_end ? field_slope(prev.d, prev.x, xi) : 0.0);
    }
  }

  for (Eigen::Index j : lay.prev_nodes) {
    const double xh = prev.x[j];
    const Eigen::Index k = locate(x, xh);
    if (k < 0) {
      g[row] = prev.d[j] - d[0];
      if (J) (*J)(row, 0) = -1.0;
    } else {
      const double len = x[k + 1] - x[k];
      double t = len > 0.0 ? (xh - x[k]) / len : 1.0;
      const bool clamped = t <= 0.0 || t >= 1.0;
      t = std::clamp(t, 0.0, 1.0);
      const double jump = d[k + 1] - d[k];
      g[row] = prev.d[j] - (d[k] + t * jump);
      if (J) {
        (*J)(row, k) = -(1.0 - t);
        (*J)(row, k + 1) = -t;
        if (!clamped && len > 0.0) {
          // dt/dx_k = -1/len, dt/dlen = -t/len
          (*J)(row, m) = jump * 0.5 * L / len;
          for (Eigen::Index p = 1; p <= k; ++p) (*J)(row, m + p) = jump * L / len;
          (*J)(row, m + k + 1) = jump * t * L / len;
        }
      }
    }
    ++row;
  }
}

}  // namespace

StepState solve_increment(const Bar& bar, MeshMode mode, const StepState& prev, double U, const RunOptions& opts) {
  StepState s;
  s.index = prev.index + 1;
  s.U = U;
  s.d = prev.d;
  s.h = prev.h;

  if (prev.broken) {
    s.broken = true;
    s.status = SolverStatus::Converged;
    fill_state(bar, s);
    return s;
  }

  const Eigen::Index m = prev.d.size();
  const double L = bar.p.L;
  const double Gc = bar.p.Gc;
  const double h_min = min_element_size(bar);
  const PrevSnapshot snap{prev.x, prev.d, prev.h};
  const bool lip = bar.model == ModelKind::LipField;

  // Localise on the central element with the reference profile as first guess.
  Vector d_start = prev.d;
  if (prev.d.maxCoeff() == 0.0 && U > bar.q.Uc) {
    const AnalyticSolution ref(bar, d0_of_U(bar, U));
    const Vector x = pinned_nodes(bar, prev.h);
    for (Eigen::Index i = 0; i < m; ++i) d_start[i] = ref.damage(std::min(x[i] - x[0], 0.5 * L));
    d_start = d_start.cwiseMax(prev.d).cwiseMin(1.0);
    // On a coarse mesh the sampled profile can sit above the intact energy;
    // rescale it to the best amplitude so the solver stays in its basin.
    const Vector shape = d_start;
    const auto along = [&](double t) { return f_potential(bar, Vector(t * shape), prev.h, U).F; };
    const auto best = boost::math::tools::brent_find_minima(along, 0.0, 1.0, 40);
    if (best.first > 0.0) d_start = best.first * shape;
  }

  NlpProblem p;
  if (mode == MeshMode::Fixed) {
    const Vector h = prev.h;
    p.objective = [&bar, h, U, Gc](const Vector& d, Vector* grad) {
      const PotentialEval ev = f_potential(bar, d, h, U);
      if (grad) *grad = ev.grad_d / Gc;
      return ev.F / Gc;
    };
    p.lower = prev.d;
    p.upper = Vector::Ones(m);
    p.x0 = d_start;
    if (lip && m > 1) {
      p.inequalities.count = 2 * (m - 1);
      p.inequalities.eval = [&bar, h](const Vector& d, Vector& g, Matrix* J) {
        g.resize(2 * (d.size() - 1));
        if (J) J->setZero(g.size(), d.size());
        lipschitz_rows(bar, d, h, 0, g, J, -1);
      };
      s.mu_kind.assign(static_cast<std::size_t>(2 * (m - 1)), "lip");
    }
  } else {
    p.objective = [&bar, U, Gc, L, m](const Vector& z, Vector* grad) {
      const Vector d = z.head(m);
      const Vector h = L * z.tail(m);
      const PotentialEval ev = f_potential(bar, d, h, U);
      if (grad) {
        grad->resize(2 * m);
        grad->head(m) = ev.grad_d / Gc;
        grad->tail(m) = ev.grad_h * (L / Gc);
      }
      return ev.F / Gc;
    };
    p.lower.resize(2 * m);
    p.upper.resize(2 * m);
    p.lower << Vector::Zero(m), Vector::Constant(m, h_min / L);
    p.upper << Vector::Ones(m), Vector::Ones(m);
    p.x0.resize(2 * m);
    p.x0 << d_start, prev.h / L;

    p.equalities.count = 1;
    p.equalities.eval = [m](const Vector& z, Vector& c, Matrix* J) {
      c.resize(1);
      double sum = z[m];
      for (Eigen::Index i = 1; i < m; ++i) sum += 2.0 * z[m + i];
      c[0] = sum - 1.0;
      if (J) {
        J->setZero(1, 2 * m);
        (*J)(0, m) = 1.0;
        for (Eigen::Index i = 1; i < m; ++i) (*J)(0, m + i) = 2.0;
      }
    };

    XMeshLayout lay;
    lay.m = m;
    lay.n_lip = lip ? 2 * (m - 1) : 0;
    if (prev.d.maxCoeff() > 0.0) {
      lay.n_prev = m;
      for (Eigen::Index j = 0; j < m; ++j)
        if (prev.d[j] > 0.0) lay.prev_nodes.push_back(j);
    }
    if (lay.count() > 0) {
      p.inequalities.count = lay.count();
      p.inequalities.eval = [&bar, snap, lay](const Vector& z, Vector& g, Matrix* J) {
        xmesh_inequalities(bar, snap, lay, z, g, J);
      };
      s.mu_kind.assign(static_cast<std::size_t>(lay.n_lip), "lip");
      s.mu_kind.resize(static_cast<std::size_t>(lay.count()), "irr");
    }
  }

  // warm start the inequality multipliers from the previous increment
  if (prev.solved && prev.mu.size() == p.inequalities.count) p.mu0 = prev.mu;
  const NlpResult r = minimize(p, opts.solver);
  s.solved = true;
  s.status = r.status;
  s.kkt_residual = r.kkt_residual;
  s.max_violation = r.max_violation;
  s.iterations = r.inner_iterations;
  s.mu = r.mu;
  if (!p.inequalities.empty()) s.max_complementarity = multiplier_report(p, r).max_complementarity;

  if (mode == MeshMode::Fixed) {
    s.d = r.x;
  } else {
    s.d = r.x.head(m);
    s.h = L * r.x.tail(m);
    s.lambda = r.lambda[0] * Gc / L;
    if (s.d[0] >= kBrokenDamage && s.h[0] <= 2.0 * h_min) {
      // the central element has opened: snap to the exact broken state
      const double freed = s.h[0] - h_min;
      s.d[0] = 1.0;
      s.h[0] = h_min;
      s.h[m - 1] += 0.5 * freed;
      s.broken = true;
    }
  }
  fill_state(bar, s);
  return s;
}

History run_on_mesh(const Bar& bar, MeshMode mode, const HalfMesh& mesh, const LoadSchedule& schedule,
                    const RunOptions& opts) {
  if (!opts.allow_invalid) {
    const ValidityReport v = validity(bar.model, bar.p, bar.q);
    if (!v.valid()) throw std::invalid_argument("bar outside the cohesive-equivalence range: " + v.describe());
  }
  if (schedule.U.empty() || schedule.U.front() != 0.0) throw std::invalid_argument("schedule must start at U = 0");
  for (std::size_t k = 1; k < schedule.U.size(); ++k)
    if (schedule.U[k] < schedule.U[k - 1]) throw std::invalid_argument("schedule must be non-decreasing");

  History hist;
  hist.bar = bar;
  hist.mode = mode;

  StepState s0;
  s0.U = 0.0;
  s0.h = mesh.h;
  s0.d = Vector::Zero(mesh.h.size());
  fill_state(bar, s0);
  hist.steps.push_back(s0);

  for (std::size_t k = 1; k < schedule.U.size(); ++k) {
    StepState s = solve_increment(bar, mode, hist.steps.back(), schedule.U[k], opts);
    if (s.broken && !hist.broken) {
      hist.broken = true;
      hist.U_star = s.U;
      hist.break_step = s.index;
    }
    hist.steps.push_back(std::move(s));
  }
  hist.Wd = dissipated_energy(bar, hist.steps);
  return hist;
}

History run(const Bar& bar, MeshMode mode, int n_c, const LoadSchedule& schedule, const RunOptions& opts) {
  History h = run_on_mesh(bar, mode, build_uniform(bar, n_c), schedule, opts);
  h.n_c = n_c;
  return h;
}

double l2_error(const Bar& bar, const StepState& s) {
  const double U = s.U;
  std::optional<AnalyticSolution> ref;
  if (U > bar.q.Uc && U < bar.q.wc) ref.emplace(bar, d0_of_U(bar, U));
  auto exact = [&](double x) { return ref ? ref->displacement(x) : displacement_at_load(bar, U, x); };

  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 1; i < s.h.size(); ++i) {
    const double xm = std::min(0.5 * (s.x[i - 1] + s.x[i]), 0.5 * bar.p.L);  // nodes sit on L/2 to within roundoff
    const double um = 0.5 * (s.u[i - 1] + s.u[i]);
    const double ue = exact(xm);
    num += s.h[i] * (um - ue) * (um - ue);
    den += s.h[i] * ue * ue;
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

std::vector<double> dissipated_energy(const Bar& bar, const std::vector<StepState>& steps) {
  std::vector<double> Wd(steps.size(), 0.0);
  double work = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (k > 0) work += 0.5 * (steps[k].sigma + steps[k - 1].sigma) * (steps[k].U - steps[k - 1].U);
    Wd[k] = work - bar.elastic_energy(steps[k].U) * steps[k].K;
  }
  return Wd;
}

ResidualReport xmesh_residuals(const Bar& bar, const StepState& s) {
  ResidualReport rep;
  const Eigen::Index m = s.h.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double d0 = s.d[0];
  const double gamma = bar.q.gamma;
  const double lc = bar.p.lc;
  const double scale = bar.p.Gc / (bar.c() * lc);
  const double h_min = min_element_size(bar);
  const double strain = s.U / bar.p.L;
  const bool lip = bar.model == ModelKind::LipField;

  rep.stress_law = std::abs(s.sigma / bar.p.sigc - stress_of_d0(bar, d0) / bar.p.sigc);
  rep.element_stationarity = Vector::Constant(m, nan);
  rep.gradient_relation = Vector::Constant(m, nan);
  rep.slopes.assign(static_cast<std::size_t>(m), SlopeClass::Zero);

  for (Eigen::Index i = 0; i < m; ++i) {
    const double db = element_damage(s.d, i);
    const double jump = i == 0 ? 0.0 : s.d[i] - s.d[i - 1];
    const double slope = i == 0 ? 0.0 : jump / s.h[i];
    if (db > 0.0) ++rep.damaged_elements;

    if (lip && i > 0 && db > 0.0) {
      const double a = std::abs(slope) * lc;
      SlopeClass c = SlopeClass::Other;
      if (a <= 1e-3)
        c = SlopeClass::Zero;
      else if (std::abs(a - 1.0) <= 1e-3)
        c = SlopeClass::Unit;
      rep.slopes[static_cast<std::size_t>(i)] = c;
      if (c == SlopeClass::Other) ++rep.other_slopes;
    }

    bool skip = s.h[i] <= 2.0 * h_min || s.broken;
    const bool undamaged = db == 0.0;
    if (!undamaged) {
      const double lo_node = i == 0 ? s.d[0] : std::min(s.d[i - 1], s.d[i]);
      const double hi_node = i == 0 ? s.d[0] : std::max(s.d[i - 1], s.d[i]);
      if (lo_node == 0.0 || hi_node == 1.0) skip = true;
      if (lip && i > 0 && std::abs(std::abs(jump) - s.h[i] / lc) <= 1e-9) skip = true;
    }
    if (skip) continue;

    const double w = omega(bar.model, db, gamma);
    double r = 0.5 * bar.p.E * strain * strain * s.K * s.K * (1.0 - 1.0 / w) / scale + alpha(bar.model, db);
    if (bar.r() == 1 && i > 0) r -= lc * lc * slope * slope;
    rep.element_stationarity[i] = r;
    rep.max_stationarity = std::max(rep.max_stationarity, std::abs(r));

    if (!lip && i > 0 && !undamaged) {
      const double g = std::abs(lc * std::abs(slope) - H_kernel(std::min(db, d0), d0));
      rep.gradient_relation[i] = g;
      rep.max_gradient_relation = std::max(rep.max_gradient_relation, g);
    }
  }
  return rep;
}

std::vector<int> detect_reloading(const History& h) {
  std::vector<int> out;
  const double tol = 1e-12 * h.bar.p.Gc;
  for (std::size_t k = 1; k < h.steps.size(); ++k) {
    if (!(h.steps[k - 1].d0() > 0.0)) continue;
    if (h.steps[k].sigma > h.steps[k - 1].sigma && h.Wd[k] - h.Wd[k - 1] <= tol) out.push_back(static_cast<int>(k));
  }
  return out;
}

int count_episodes(const std::vector<int>& idx) {
  int n = 0;
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (k == 0 || idx[k] != idx[k - 1] + 1) ++n;
  return n;
}

double basin_value(const Bar& bar, const HalfMesh& mesh, double U, double d0) {
  if (bar.model != ModelKind::LipField) throw std::invalid_argument("basin_scan is defined for the lip-field model");
  const Vector x = mesh.nodes();
  Vector d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) d[i] = std::clamp(d0 - x[i] / bar.p.lc, 0.0, 1.0);
  return f_potential(bar, d, mesh.h, U).F;
}

std::vector<double> basin_scan(const Bar& bar, const HalfMesh& mesh, double U, const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double d0 : grid) out.push_back(basin_value(bar, mesh, U, d0));
  return out;
}

}  // namespace xmesh1d
