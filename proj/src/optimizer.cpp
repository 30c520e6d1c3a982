#include "xmesh1d/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xmesh1d {

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iter";
    case SolverStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector project(const Vector& x, const Vector& lo, const Vector& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

double projected_gradient_norm(const Vector& x, const Vector& g, const Vector& lo, const Vector& hi) {
  if (x.size() == 0) return 0.0;
  return (x - project(x - g, lo, hi)).lpNorm<Eigen::Infinity>();
}

struct Evaluation {
  double f = 0;
  Vector grad;
  Vector c, g;
  Matrix Jc, Jg;
};

Evaluation evaluate(const NlpProblem& p, const Vector& x, bool derivatives) {
  Evaluation e;
  e.f = p.objective(x, derivatives ? &e.grad : nullptr);
  if (!p.equalities.empty()) p.equalities.eval(x, e.c, derivatives ? &e.Jc : nullptr);
  if (!p.inequalities.empty()) p.inequalities.eval(x, e.g, derivatives ? &e.Jg : nullptr);
  return e;
}

double violation(const Evaluation& e) {
  double v = 0.0;
  if (e.c.size()) v = std::max(v, e.c.lpNorm<Eigen::Infinity>());
  if (e.g.size()) v = std::max(v, e.g.maxCoeff());
  return v;
}

double complementarity(const Vector& mu, const Vector& g) {
  return mu.size() ? mu.cwiseProduct(g).cwiseAbs().maxCoeff() : 0.0;
}

Vector lagrangian_gradient(const Evaluation& e, const Vector& lambda, const Vector& mu) {
  Vector r = e.grad;
  if (e.c.size()) r -= e.Jc.transpose() * lambda;
  if (e.g.size()) r += e.Jg.transpose() * mu;
  return r;
}

// Augmented Lagrangian f - lambda.c + rho/2 |c|^2 + 1/(2 rho) sum(max(0, mu + rho g)^2 - mu^2).
class Merit {
 public:
  Merit(const NlpProblem& p, const Vector& lambda, const Vector& mu, double rho)
      : p_(p), lambda_(lambda), mu_(mu), rho_(rho) {}

  double operator()(const Vector& x, Vector* grad) const {
    ++evaluations;
    Vector gf;
    double v = p_.objective(x, grad ? &gf : nullptr);
    if (grad) *grad = gf;
    if (!p_.equalities.empty()) {
      Vector c;
      Matrix J;
      p_.equalities.eval(x, c, grad ? &J : nullptr);
      v += -lambda_.dot(c) + 0.5 * rho_ * c.squaredNorm();
      if (grad) *grad += J.transpose() * (rho_ * c - lambda_);
    }
    if (!p_.inequalities.empty()) {
      Vector g;
      Matrix J;
      p_.inequalities.eval(x, g, grad ? &J : nullptr);
      const Vector shifted = (mu_ + rho_ * g).cwiseMax(0.0);
      v += (shifted.squaredNorm() - mu_.squaredNorm()) / (2.0 * rho_);
      if (grad) *grad += J.transpose() * shifted;
    }
    return v;
  }

  mutable long evaluations = 0;

 private:
  const NlpProblem& p_;
  const Vector& lambda_;
  const Vector& mu_;
  double rho_;
};

// Forward-difference Hessian of the merit from its analytic gradient; each
// step stays inside the box.
Matrix fd_hessian(const Merit& m, const Vector& x, const Vector& g, const Vector& lo, const Vector& hi) {
  const Eigen::Index n = x.size();
  Matrix H(n, n);
  Vector gp;
  for (Eigen::Index j = 0; j < n; ++j) {
    double step = 1e-7 * std::max(std::abs(x[j]), 1e-2);
    if (x[j] + step > hi[j]) step = -step;
    if (x[j] + step < lo[j]) step = hi[j] - x[j] > x[j] - lo[j] ? hi[j] - x[j] : lo[j] - x[j];
    if (step == 0.0) {
      H.col(j).setZero();
      H(j, j) = 1.0;
      continue;
    }
    Vector xp = x;
    xp[j] += step;
    m(xp, &gp);
    H.col(j) = (gp - g) / step;
  }
  Matrix S = 0.5 * (H + H.transpose());
  return S;
}

struct InnerOutcome {
  int iterations = 0;
  bool converged = false;
};

// Projected quasi-Newton (Bertsekas-style active set with a damped BFGS
// matrix) for min m(x) over lo <= x <= hi.
InnerOutcome inner_solve(const Merit& m, Vector& x, double& f, Vector& g, const Vector& lo, const Vector& hi,
                         double tol, int max_iter) {
  InnerOutcome out;
  const Eigen::Index n = x.size();
  f = m(x, &g);
  Matrix B = fd_hessian(m, x, g, lo, hi);
  int quiet = 0;
  int refreshes = 0;

  for (int it = 0; it < max_iter; ++it) {
    const double pgn = projected_gradient_norm(x, g, lo, hi);
    if (pgn <= tol) {
      out.converged = true;
      break;
    }
    out.iterations = it + 1;

    const double eps = std::min(1e-6, pgn);
    std::vector<Eigen::Index> free_idx;
    Eigen::Array<bool, Eigen::Dynamic, 1> active(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      active[i] = (x[i] - lo[i] <= eps && g[i] > 0.0) || (hi[i] - x[i] <= eps && g[i] < 0.0);
      if (!active[i]) free_idx.push_back(i);
    }

    Vector p = Vector::Zero(n);
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
    if (nf > 0) {
      Matrix Bf(nf, nf);
      Vector gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = g[free_idx[a]];
        for (Eigen::Index b = 0; b < nf; ++b) Bf(a, b) = B(free_idx[a], free_idx[b]);
      }
      const double scale = std::max(1.0, Bf.cwiseAbs().maxCoeff());
      double tau = 0.0;
      Vector pf;
      for (int attempt = 0; attempt < 30; ++attempt) {
        Eigen::LLT<Matrix> llt(Bf + tau * Matrix::Identity(nf, nf));
        if (llt.info() == Eigen::Success) {
          pf = -llt.solve(gf);
          if (pf.allFinite() && pf.dot(gf) < 0.0) break;
        }
        pf.resize(0);
        tau = tau == 0.0 ? 1e-10 * scale : 10.0 * tau;
      }
      if (pf.size() == 0) pf = -gf;
      for (Eigen::Index a = 0; a < nf; ++a) p[free_idx[a]] = pf[a];
    }
    for (Eigen::Index i = 0; i < n; ++i)
      if (active[i]) p[i] = -g[i] / std::max(B(i, i), 1e-12);

    auto line_search = [&](const Vector& dir, double alpha0, Vector& x_new, double& f_new) {
      double alpha = alpha0;
      for (int k = 0; k < 60; ++k) {
        x_new = project(x + alpha * dir, lo, hi);
        const double slope = g.dot(x_new - x);
        if (slope >= 0.0 && (x_new - x).lpNorm<Eigen::Infinity>() == 0.0) return false;
        f_new = m(x_new, nullptr);
        if (std::isfinite(f_new) && slope < 0.0 && f_new <= f + 1e-4 * slope) return true;
        alpha *= 0.5;
      }
      return false;
    };

    Vector x_new;
    double f_new = f;
    bool ok = line_search(p, 1.0, x_new, f_new);
    bool fallback = false;
    if (!ok) {
      const double gmax = g.lpNorm<Eigen::Infinity>();
      ok = line_search(-g, 1.0 / std::max(1.0, gmax), x_new, f_new);
      fallback = true;
    }
    if (!ok) break;  // no further decrease representable

    Vector g_new;
    f_new = m(x_new, &g_new);
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double df = f - f_new;
    x = x_new;
    g = g_new;
    f = f_new;

    if (fallback && refreshes < 20) {
      B = fd_hessian(m, x, g, lo, hi);
      ++refreshes;
    } else {
      const Vector Bs = B * s;
      const double sBs = s.dot(Bs);
      if (sBs > 0.0) {
        const double sy = s.dot(y);
        const double theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
        const Vector r = theta * y + (1.0 - theta) * Bs;
        const double sr = s.dot(r);
        if (sr > 0.0) B += r * r.transpose() / sr - Bs * Bs.transpose() / sBs;
      }
    }

    if (df <= 1e-16 * std::max(1.0, std::abs(f))) {
      if (++quiet >= 5) break;
    } else {
      quiet = 0;
    }
  }
  if (!out.converged) out.converged = projected_gradient_norm(x, g, lo, hi) <= tol;
  return out;
}

// Minimum-norm Newton correction of the selected constraint rows, moving only
// the free variables; clipped to the box after every step.
void restore_rows(const NlpProblem& p, Vector& x, const std::vector<Eigen::Index>& eq_rows,
                  const std::vector<Eigen::Index>& in_rows, const std::vector<Eigen::Index>& free_idx) {
  const Eigen::Index nr = static_cast<Eigen::Index>(eq_rows.size() + in_rows.size());
  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  if (nr == 0 || nf == 0) return;
  double last = kInf;
  for (int it = 0; it < 10; ++it) {
    const Evaluation e = evaluate(p, x, true);
    Vector r(nr);
    Matrix J(nr, nf);
    Eigen::Index row = 0;
    for (Eigen::Index k : eq_rows) {
      r[row] = e.c[k];
      for (Eigen::Index a = 0; a < nf; ++a) J(row, a) = e.Jc(k, free_idx[a]);
      ++row;
    }
    for (Eigen::Index k : in_rows) {
      r[row] = e.g[k];
      for (Eigen::Index a = 0; a < nf; ++a) J(row, a) = e.Jg(k, free_idx[a]);
      ++row;
    }
    const double norm = r.lpNorm<Eigen::Infinity>();
    if (norm == 0.0 || norm >= last) break;
    last = norm;
    const Vector dx = Eigen::CompleteOrthogonalDecomposition<Matrix>(J).solve(r);
    for (Eigen::Index a = 0; a < nf; ++a) x[free_idx[a]] -= dx[a];
    x = project(x, p.lower, p.upper);
  }
}

struct Polished {
  Vector x, lambda, mu;
  double kkt = kInf;
  double viol = kInf;
  double f = 0;
};

// Put the AL iterate exactly on its active set and refit the multipliers.
Polished polish(const NlpProblem& p, const Vector& x_in, const Vector& lambda, const Vector& mu, double act_tol) {
  Polished out;
  Vector x = x_in;
  Evaluation e = evaluate(p, x, true);
  const Vector gl = lagrangian_gradient(e, lambda, mu);
  const Eigen::Index n = x.size();

  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] - p.lower[i] <= act_tol && gl[i] >= 0.0) {
      x[i] = p.lower[i];
    } else if (p.upper[i] - x[i] <= act_tol && gl[i] <= 0.0) {
      x[i] = p.upper[i];
    } else {
      free_idx.push_back(i);
    }
  }
  std::vector<Eigen::Index> eq_rows, in_rows;
  for (Eigen::Index k = 0; k < e.c.size(); ++k) eq_rows.push_back(k);
  for (Eigen::Index k = 0; k < e.g.size(); ++k)
    if (e.g[k] >= -act_tol || mu[k] > 0.0) in_rows.push_back(k);

  restore_rows(p, x, eq_rows, in_rows, free_idx);

  e = evaluate(p, x, true);
  out.x = x;
  out.f = e.f;
  out.viol = violation(e);
  out.lambda = lambda;
  out.mu = mu;
  out.kkt = kkt_residual(p, x, lambda, mu);

  // least-squares multipliers on the free variables
  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  const Eigen::Index nr = static_cast<Eigen::Index>(eq_rows.size() + in_rows.size());
  if (nf > 0 && nr > 0) {
    Matrix A(nf, nr);
    Vector b(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      b[a] = e.grad[free_idx[a]];
      Eigen::Index col = 0;
      for (Eigen::Index k : eq_rows) A(a, col++) = e.Jc(k, free_idx[a]);
      for (Eigen::Index k : in_rows) A(a, col++) = -e.Jg(k, free_idx[a]);
    }
    const Vector nu = Eigen::CompleteOrthogonalDecomposition<Matrix>(A).solve(b);
    Vector lam = lambda;
    Vector m = Vector::Zero(mu.size());
    Eigen::Index col = 0;
    for (Eigen::Index k : eq_rows) lam[k] = nu[col++];
    for (Eigen::Index k : in_rows) m[k] = std::max(0.0, nu[col++]);
    const double kkt = kkt_residual(p, x, lam, m);
    if (kkt < out.kkt) {
      out.kkt = kkt;
      out.lambda = lam;
      out.mu = m;
    }
  }
  return out;
}

// Newton iterations on the KKT system of the identified active set, with a
// forward-difference Hessian of the Lagrangian on the free variables.
Polished newton_refine(const NlpProblem& p, const Polished& start, double act_tol, double target, double feas_tol) {
  Polished best = start;
  const Eigen::Index n = start.x.size();
  for (int it = 0; it < 8 && best.kkt > target; ++it) {
    const Evaluation e = evaluate(p, best.x, true);
    const Vector gl = lagrangian_gradient(e, best.lambda, best.mu);
    std::vector<Eigen::Index> free_idx, rows_c, rows_g;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = best.x[i] - p.lower[i] <= act_tol && gl[i] >= 0.0;
      const bool at_hi = p.upper[i] - best.x[i] <= act_tol && gl[i] <= 0.0;
      if (!at_lo && !at_hi) free_idx.push_back(i);
    }
    for (Eigen::Index k = 0; k < e.c.size(); ++k) rows_c.push_back(k);
    for (Eigen::Index k = 0; k < e.g.size(); ++k)
      if (e.g[k] >= -act_tol) rows_g.push_back(k);
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
    const Eigen::Index nr = static_cast<Eigen::Index>(rows_c.size() + rows_g.size());
    if (nf == 0) break;

    Matrix H(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index j = free_idx[a];
      double step = 1e-7 * std::max(std::abs(best.x[j]), 1e-2);
      if (best.x[j] + step > p.upper[j]) step = -step;
      Vector xp = best.x;
      xp[j] += step;
      // curvature of the objective and equalities only: the inequality rows
      // are piecewise linear in the node positions
      const Evaluation ep = evaluate(p, xp, true);
      Vector dg = ep.grad - e.grad;
      if (e.c.size()) dg -= (ep.Jc - e.Jc).transpose() * best.lambda;
      for (Eigen::Index b = 0; b < nf; ++b) H(b, a) = dg[free_idx[b]] / step;
    }
    H = 0.5 * (H + H.transpose()).eval();

    // [H  -C^T; C  0] [dx; dnu] = [-gl; -r], nu = (lambda, -mu)
    Matrix KKT = Matrix::Zero(nf + nr, nf + nr);
    Vector rhs(nf + nr);
    KKT.topLeftCorner(nf, nf) = H;
    for (Eigen::Index a = 0; a < nf; ++a) rhs[a] = -gl[free_idx[a]];
    Eigen::Index r = 0;
    for (Eigen::Index k : rows_c) {
      for (Eigen::Index a = 0; a < nf; ++a) KKT(nf + r, a) = KKT(a, nf + r) = e.Jc(k, free_idx[a]);
      rhs[nf + r++] = -e.c[k];
    }
    for (Eigen::Index k : rows_g) {
      for (Eigen::Index a = 0; a < nf; ++a) KKT(nf + r, a) = KKT(a, nf + r) = e.Jg(k, free_idx[a]);
      rhs[nf + r++] = -e.g[k];
    }
    KKT.topRightCorner(nf, nr) *= -1.0;
    const Vector sol = Eigen::CompleteOrthogonalDecomposition<Matrix>(KKT).solve(rhs);
    if (!sol.allFinite()) break;

    Polished trial = best;
    for (Eigen::Index a = 0; a < nf; ++a) trial.x[free_idx[a]] += sol[a];
    trial.x = project(trial.x, p.lower, p.upper);
    r = 0;
    for (Eigen::Index k : rows_c) trial.lambda[k] += sol[nf + r++];
    for (Eigen::Index k : rows_g) trial.mu[k] = std::max(0.0, trial.mu[k] - sol[nf + r++]);
    const Evaluation et = evaluate(p, trial.x, false);
    trial.f = et.f;
    trial.viol = violation(et);
    trial.kkt = kkt_residual(p, trial.x, trial.lambda, trial.mu);
    const double comp = et.g.size() ? complementarity(trial.mu, et.g) : 0.0;
    if (!(trial.kkt < best.kkt) || trial.viol > std::max(feas_tol, best.viol) || comp > feas_tol) break;
    best = trial;
  }
  return best;
}

Vector least_squares_lambda(const Evaluation& e, const Vector& x, const Vector& lo, const Vector& hi) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (x[i] > lo[i] && x[i] < hi[i]) free_idx.push_back(i);
  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  if (nf == 0) return Vector::Zero(e.c.size());
  Matrix A(nf, e.c.size());
  Vector b(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    b[a] = e.grad[free_idx[a]];
    A.row(a) = e.Jc.col(free_idx[a]).transpose();
  }
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(A).solve(b);
}

}  // namespace

double kkt_residual(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu) {
  const Evaluation e = evaluate(p, x, true);
  return projected_gradient_norm(x, lagrangian_gradient(e, lambda, mu), p.lower, p.upper);
}

NlpResult minimize(const NlpProblem& p, const SolverOptions& opts) {
  const Eigen::Index n = p.x0.size();
  if (p.lower.size() != n || p.upper.size() != n) throw std::invalid_argument("minimize: bound sizes differ from x0");
  if ((p.lower.array() > p.upper.array()).any()) throw std::invalid_argument("minimize: empty box");
  if (!p.equalities.empty() && !p.equalities.eval) throw std::invalid_argument("minimize: missing equality evaluator");
  if (!p.inequalities.empty() && !p.inequalities.eval)
    throw std::invalid_argument("minimize: missing inequality evaluator");

  NlpResult res;
  Vector x = project(p.x0, p.lower, p.upper);
  if (!p.equalities.empty()) {
    std::vector<Eigen::Index> rows, all;
    for (Eigen::Index k = 0; k < p.equalities.count; ++k) rows.push_back(k);
    for (Eigen::Index i = 0; i < n; ++i) all.push_back(i);
    Evaluation e0 = evaluate(p, x, false);
    if (e0.c.lpNorm<Eigen::Infinity>() > opts.feas_tol) restore_rows(p, x, rows, {}, all);
  }

  Evaluation e = evaluate(p, x, true);
  Vector lambda = p.lambda0.size() == p.equalities.count ? p.lambda0 : least_squares_lambda(e, x, p.lower, p.upper);
  if (p.equalities.empty()) lambda.resize(0);
  Vector mu = p.mu0.size() == p.inequalities.count ? Vector(p.mu0.cwiseMax(0.0)) : Vector::Zero(p.inequalities.count);

  double rho = opts.rho0;
  double prev_viol = violation(e);
  double inner_tol = std::max(1e-3 * std::max(1.0, std::abs(e.f)), opts.kkt_tol);
  double f = e.f;
  Vector g;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    res.outer_iterations = outer + 1;
    const Merit merit(p, lambda, mu, rho);
    double m_val = 0.0;
    const InnerOutcome io = inner_solve(merit, x, m_val, g, p.lower, p.upper, inner_tol, opts.max_inner);
    res.inner_iterations += io.iterations;

    e = evaluate(p, x, true);
    f = e.f;
    if (e.c.size()) lambda -= rho * e.c;
    if (e.g.size()) mu = (mu + rho * e.g).cwiseMax(0.0);

    const double kkt_abs = opts.kkt_tol * std::max(1.0, std::abs(f));
    const double viol = violation(e);
    const double kkt = projected_gradient_norm(x, lagrangian_gradient(e, lambda, mu), p.lower, p.upper);
    const double comp = e.g.size() ? complementarity(mu, e.g) : 0.0;
    res.kkt_residual = kkt;
    res.max_violation = viol;
    if (viol <= opts.feas_tol && kkt <= kkt_abs && comp <= opts.feas_tol) {
      res.status = SolverStatus::Converged;
      break;
    }
    if (viol > opts.feas_tol && viol > opts.stall_ratio * prev_viol) rho = std::min(rho * opts.rho_growth, opts.rho_max);
    prev_viol = viol;
    inner_tol = std::max(0.1 * kkt_abs, 0.1 * inner_tol);
  }

  res.x = x;
  res.lambda = lambda;
  res.mu = mu;
  res.f = f;

  if (opts.polish && res.max_violation <= 1e-6) {
    const double kkt_abs = opts.kkt_tol * std::max(1.0, std::abs(f));
    Polished pol = polish(p, x, lambda, mu, 1e-8);
    if (pol.viol <= std::max(opts.feas_tol, res.max_violation) && pol.kkt > kkt_abs)
      pol = newton_refine(p, pol, 1e-8, kkt_abs, std::max(opts.feas_tol, res.max_violation));
    const bool feasible = pol.viol <= std::max(opts.feas_tol, res.max_violation);
    const bool stationary = pol.kkt <= std::max(kkt_abs, res.kkt_residual);
    const bool no_worse = pol.f <= f + 1e-10 * std::max(1.0, std::abs(f));
    if (feasible && stationary && no_worse) {
      res.x = pol.x;
      res.lambda = pol.lambda;
      res.mu = pol.mu;
      res.f = pol.f;
      res.kkt_residual = pol.kkt;
      res.max_violation = pol.viol;
      const Evaluation ep = evaluate(p, res.x, false);
      const double comp = ep.g.size() ? complementarity(res.mu, ep.g) : 0.0;
      if (pol.viol <= opts.feas_tol && pol.kkt <= kkt_abs && comp <= opts.feas_tol)
        res.status = SolverStatus::Converged;
    }
  }

  if (res.status != SolverStatus::Converged && res.max_violation > 1e-6) res.status = SolverStatus::Infeasible;
  return res;
}

MultiplierReport multiplier_report(const NlpProblem& p, const NlpResult& r) {
  MultiplierReport rep;
  rep.lambda = r.lambda;
  rep.mu = r.mu;
  if (!p.inequalities.empty()) {
    Vector g;
    p.inequalities.eval(r.x, g, nullptr);
    rep.g = g;
    rep.max_complementarity = complementarity(r.mu, g);
    rep.min_multiplier = r.mu.size() ? r.mu.minCoeff() : 0.0;
  }
  return rep;
}

}  // namespace xmesh1d
