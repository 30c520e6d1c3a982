#include "xmesh1d/analytic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>

namespace xmesh1d {

namespace {

constexpr double kQuadTarget = 1e-11;
constexpr double kQuadAccept = 1e-9;

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadTarget, &err, &l1);
  // band integrals are O(1); slivers are held to an absolute error on that scale
  const double rel = err / std::max(l1, 1.0);
  if (!std::isfinite(v) || rel > kQuadAccept) throw QuadratureError("phase-field band quadrature failed", rel);
  return v;
}

// integral_{lo}^{hi} w(s)/H(s,d0) ds for 0 <= lo <= hi <= d0 <= 1.
// Below d0/2 we integrate in t with 2s - s^2 = t^2, above it in r with
// s = d0 - r^2; both Jacobians cancel the inverse square-root singularities.
double band_integral(double lo, double hi, double d0, const std::function<double(double)>& w) {
  const double mid = 0.5 * d0;
  const double a = 1.0 - d0;
  double total = 0.0;
  if (lo < mid) {
    const double top = std::min(hi, mid);
    auto t_of = [](double d) { return std::sqrt(std::max(0.0, 2.0 * d - d * d)); };
    total += integrate(
        [&](double t) {
          const double t2 = t * t;
          const double s = t2 / (1.0 + std::sqrt(1.0 - t2));
          return w(s) / std::sqrt(1.0 - t2 - a * a);
        },
        t_of(lo), t_of(top));
  }
  if (hi > mid) {
    const double bottom = std::max(lo, mid);
    total += integrate(
        [&](double r) {
          const double s = d0 - r * r;
          const double alpha = 2.0 * s - s * s;
          return 2.0 * (1.0 - s) * w(s) / std::sqrt(alpha * (2.0 - s - d0));
        },
        std::sqrt(std::max(0.0, d0 - hi)), std::sqrt(d0 - bottom));
  }
  return total;
}

double unit_weight(double) { return 1.0; }

}  // namespace

double d0_of_U(const Bar& bar, double U) {
  const double Uc = bar.q.Uc;
  const double wc = bar.q.wc;
  if (U <= Uc) return 0.0;
  if (U >= wc) return 1.0;
  const double ratio = (U - Uc) / (wc - Uc);
  return bar.model == ModelKind::PhaseField ? ratio : std::sqrt(ratio);
}

double U_of_d0(const Bar& bar, double d0) {
  detail::check_damage(d0);
  const double f = bar.model == ModelKind::PhaseField ? d0 : d0 * d0;
  return bar.q.Uc + f * (bar.q.wc - bar.q.Uc);
}

double stress_of_d0(const Bar& bar, double d0) {
  detail::check_damage(d0);
  return bar.model == ModelKind::PhaseField ? bar.p.sigc * (1.0 - d0) : bar.p.sigc * (1.0 - d0 * d0);
}

double cohesive_law(const Bar& bar, double w) {
  if (w < 0.0 || w > bar.q.wc) throw std::domain_error("opening outside [0, wc]");
  return bar.p.sigc * (1.0 - w / bar.q.wc);
}

double H_kernel(double d, double d0) {
  if (!(d >= 0.0 && d <= d0 && d0 <= 1.0 && d < 1.0)) throw std::domain_error("H_kernel requires 0 <= d <= d0 <= 1, d < 1");
  const double s = 1.0 - d;
  // 1 - ((1-d0)/(1-d))^2 written without cancellation
  const double ratio_term = (d0 - d) * (2.0 - d - d0) / (s * s);
  return std::sqrt((2.0 * d - d * d) * ratio_term);
}

double phase_field_position(double d, double d0, double lc) {
  if (!(d >= 0.0 && d <= d0 && d0 <= 1.0)) throw std::domain_error("phase_field_position requires 0 <= d <= d0 <= 1");
  return lc * band_integral(d, d0, d0, unit_weight);
}

AnalyticSolution::AnalyticSolution(const Bar& bar, double d0)
    : bar_(bar), d0_(d0), U_(U_of_d0(bar, d0)), sigma_(stress_of_d0(bar, d0)) {
  const double lc = bar.p.lc;
  if (bar.model == ModelKind::LipField) {
    band_ = d0 * lc;
    return;
  }
  if (d0 == 0.0) return;
  band_ = lc * band_integral(0.0, d0, d0, unit_weight);
  if (d0 < 1.0) full_integral_ = pf_compliance_integral(0.0);
}

double AnalyticSolution::pf_compliance_integral(double d_lo) const {
  const double k = 2.0 / (std::numbers::pi * bar_.q.gamma);
  auto inv_omega = [k](double s) {
    const double a = 2.0 * s - s * s;
    return 1.0 + k * a / ((1.0 - s) * (1.0 - s));
  };
  return bar_.p.lc * band_integral(d_lo, d0_, d0_, inv_omega);
}

double AnalyticSolution::pf_damage(double ax) const {
  const double lc = bar_.p.lc;
  if (ax >= band_) return 0.0;
  if (d0_ == 1.0) return 1.0 - std::sin(ax / lc);
  if (ax == 0.0) return d0_;
  // position(d) decreases from band_ at d = 0 to 0 at d = d0
  double lo = 0.0;
  double hi = d0_;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double pos = lc * band_integral(mid, d0_, d0_, unit_weight);
    if (std::abs(pos - ax) <= 1e-12 * lc) break;
    if (pos > ax)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16) break;
  }
  return mid;
}

double AnalyticSolution::damage(double x) const {
  const double ax = std::abs(x);
  if (ax > 0.5 * bar_.p.L * (1.0 + 1e-12)) throw std::domain_error("position outside the bar");
  if (bar_.model == ModelKind::LipField) return std::max(0.0, d0_ - ax / bar_.p.lc);
  if (d0_ == 0.0) return 0.0;
  return pf_damage(ax);
}

double AnalyticSolution::displacement(double x) const {
  const double ax = std::abs(x);
  if (ax > 0.5 * bar_.p.L * (1.0 + 1e-12)) throw std::domain_error("position outside the bar");
  const double sign = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  const double E = bar_.p.E;
  const double lc = bar_.p.lc;
  if (d0_ == 1.0) return sign * 0.5 * bar_.q.wc;
  if (d0_ == 0.0) return sigma_ * x / E;

  if (bar_.model == ModelKind::LipField) {
    const double g = bar_.q.gamma;
    const double dl = std::max(0.0, d0_ - ax / lc);
    const double inner = lc * (d0_ - dl + (1.0 / g) * (1.0 / (1.0 - d0_ * d0_) - 1.0 / (1.0 - dl * dl)));
    const double outer = ax > band_ ? ax - band_ : 0.0;
    return sign * sigma_ / E * (inner + outer);
  }

  if (ax >= band_) return sign * sigma_ / E * (full_integral_ + ax - band_);
  return sign * sigma_ / E * pf_compliance_integral(pf_damage(ax));
}

double damage_profile(const Bar& bar, double d0, double x) { return AnalyticSolution(bar, d0).damage(x); }

double band_halfwidth(const Bar& bar, double d0) {
  if (!(d0 > 0.0 && d0 <= 1.0)) throw std::domain_error("band_halfwidth requires d0 in (0,1]");
  return AnalyticSolution(bar, d0).band_halfwidth();
}

double displacement_profile(const Bar& bar, double d0, double x) {
  return AnalyticSolution(bar, d0).displacement(x);
}

double displacement_at_load(const Bar& bar, double U, double x) {
  if (U <= bar.q.Uc) return U * x / bar.p.L;
  if (U >= bar.q.wc) return x > 0 ? 0.5 * U : (x < 0 ? -0.5 * U : 0.0);
  return AnalyticSolution(bar, d0_of_U(bar, U)).displacement(x);
}

}  // namespace xmesh1d
