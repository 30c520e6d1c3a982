#include "xmesh1d/potential.hpp"

#include <algorithm>
#include <cmath>

namespace xmesh1d {

PotentialEval f_potential(const Bar& bar, const Vector& d, const Vector& h, double U) {
  if (d.size() != h.size()) throw std::invalid_argument("f_potential: d and h sizes differ");
  const Eigen::Index m = h.size();
  const double L = bar.p.L;
  const double lc = bar.p.lc;
  const double cl = bar.c() * lc;
  const double gamma = bar.q.gamma;

  PotentialEval ev;
  ev.K = k_factor(bar, d, h);
  ev.W = w_dissipation(bar, d, h);
  const double Fe = bar.elastic_energy(U);
  ev.F = Fe * ev.K + bar.p.Gc * ev.W;
  ev.sigma = bar.p.E * ev.K * U / L;

  Vector dK_dd = Vector::Zero(m);
  Vector dK_dh = Vector::Zero(m);
  Vector dW_dd = Vector::Zero(m);
  Vector dW_dh = Vector::Zero(m);

  // With K = 0 every dK/d. vanishes (omega'(1) = 0 for both models).
  if (ev.K > 0.0) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double db = element_damage(d, i);
      const double q = ev.K / omega(bar.model, db, gamma);
      const double wgt = element_weight(i);
      dK_dh[i] = -ev.K * q * wgt / L;
      const double dk = q * q * omega_prime(bar.model, db, gamma) * wgt * h[i] / L;
      if (i == 0) {
        dK_dd[0] += dk;
      } else {
        dK_dd[i - 1] += 0.5 * dk;
        dK_dd[i] += 0.5 * dk;
      }
    }
  }

  dW_dh[0] = alpha(bar.model, d[0]) / cl;
  dW_dd[0] += h[0] * alpha_prime(bar.model, d[0]) / cl;
  for (Eigen::Index i = 1; i < m; ++i) {
    const double db = element_damage(d, i);
    const double a_prime = alpha_prime(bar.model, db);
    dW_dh[i] = 2.0 * alpha(bar.model, db) / cl;
    dW_dd[i - 1] += h[i] * a_prime / cl;
    dW_dd[i] += h[i] * a_prime / cl;
    if (bar.r() == 1) {
      const double jump = d[i] - d[i - 1];
      if (jump != 0.0) {
        const double slope = jump / h[i];
        dW_dh[i] -= 2.0 * lc * lc * slope * slope / cl;
        dW_dd[i] += 4.0 * lc * lc * slope / cl;
        dW_dd[i - 1] -= 4.0 * lc * lc * slope / cl;
      }
    }
  }

  ev.grad_d = Fe * dK_dd + bar.p.Gc * dW_dd;
  ev.grad_h = Fe * dK_dh + bar.p.Gc * dW_dh;
  return ev;
}

Vector displacement_from(const Bar& bar, const Vector& d, const Vector& h, double U) {
  const Eigen::Index m = h.size();
  const double gamma = bar.q.gamma;
  Vector u(m);
  Eigen::Index broken = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (omega(bar.model, element_damage(d, i), gamma) == 0.0) ++broken;

  if (broken > 0) {
    if (broken > 1) throw std::domain_error("several broken elements: displacement jump is ambiguous");
    // sigma = 0: intact elements carry no strain, the broken one takes the jump
    Eigen::Index b = 0;
    while (omega(bar.model, element_damage(d, b), gamma) != 0.0) ++b;
    for (Eigen::Index i = 0; i < m; ++i) u[i] = i >= b ? 0.5 * U : -0.5 * U;
    u[m - 1] = 0.5 * U;
    return u;
  }

  const double sigma = bar.p.E * k_factor(bar, d, h) * U / bar.p.L;
  const double E = bar.p.E;
  u[0] = sigma * 0.5 * h[0] / (E * omega(bar.model, d[0], gamma));
  for (Eigen::Index i = 1; i < m; ++i) u[i] = u[i - 1] + sigma * h[i] / (E * omega(bar.model, element_damage(d, i), gamma));
  u[m - 1] = 0.5 * U;
  return u;
}

double grad_check(const Bar& bar, const Vector& d, const Vector& h, double U, bool include_h) {
  const double h_min = min_element_size(bar);
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0 && d[i] < 1.0)) throw std::invalid_argument("grad_check needs 0 < d < 1 at every node");
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (!(h[i] > 10.0 * h_min)) throw std::invalid_argument("grad_check needs h > 10 h_min");

  const PotentialEval ev = f_potential(bar, d, h, U);
  const Eigen::Index m = d.size();
  const Eigen::Index nv = include_h ? 2 * m : m;
  Vector analytic(nv);
  analytic.head(m) = ev.grad_d;
  if (include_h) analytic.tail(m) = ev.grad_h;
  Vector numeric(nv);

  for (Eigen::Index j = 0; j < nv; ++j) {
    Vector dp = d, dm = d, hp = h, hm = h;
    double step;
    if (j < m) {
      step = 1e-6 * d[j];
      dp[j] += step;
      dm[j] -= step;
    } else {
      step = 1e-6 * h[j - m];
      hp[j - m] += step;
      hm[j - m] -= step;
    }
    const double fp = f_potential(bar, dp, hp, U).F;
    const double fm = f_potential(bar, dm, hm, U).F;
    numeric[j] = (fp - fm) / (2.0 * step);
  }

  return (numeric - analytic).cwiseAbs().maxCoeff() / analytic.cwiseAbs().maxCoeff();
}

}  // namespace xmesh1d
