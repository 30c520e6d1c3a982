#include "xmesh1d/five_element.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xmesh1d {

namespace {

void check_inputs(double d0, double h0) {
  detail::check_damage(d0);
  if (!(h0 >= 0.0)) throw std::domain_error("h0 must be non-negative");
}

double golden_section(const std::function<double(double)>& f, double a, double b, double width) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double k5(double d0, double h0, const FiveElemSetup& s) {
  check_inputs(d0, h0);
  const double gamma = derive(s.p).gamma;
  const double lc = s.p.lc;
  const double L = s.p.L;
  const double w0 = omega(ModelKind::LipField, d0, gamma);
  const double w1 = omega(ModelKind::LipField, 0.5 * d0, gamma);
  double central;
  if (w0 == 0.0) {
    if (h0 > 0.0) return 0.0;
    central = 0.0;
  } else {
    central = h0 / w0;
  }
  return L / (central + 2.0 * d0 * lc / w1 + L - (h0 + 2.0 * d0 * lc));
}

double f5(double d0, double h0, double U, const FiveElemSetup& s) {
  check_inputs(d0, h0);
  if (s.h2(d0, h0) < -1e-12 * s.p.L) throw std::domain_error("five-element geometry infeasible: h2 < 0");
  const Bar bar = s.bar();
  const double lc = s.p.lc;
  const double W = (h0 * alpha(ModelKind::LipField, d0) + 2.0 * d0 * lc * alpha(ModelKind::LipField, 0.5 * d0)) / lc;
  return bar.elastic_energy(U) * k5(d0, h0, s) + s.p.Gc * W;
}

void five_element_mesh(double d0, double h0, const FiveElemSetup& s, Vector& d, Vector& h) {
  check_inputs(d0, h0);
  const double h2 = std::max(0.0, s.h2(d0, h0));
  h.resize(3);
  h << h0, d0 * s.p.lc, h2;
  d.resize(3);
  d << d0, 0.0, 0.0;
}

double h0d0_of(double d0, double U, const FiveElemSetup& s) {
  detail::check_damage(d0);
  const DerivedParams q = derive(s.p);
  if (std::abs(q.gamma - 0.5) > 1e-12) throw std::invalid_argument("the reduced five-element branch assumes gamma = 1/2");
  const double E = s.p.E;
  const double sc = s.p.sigc;
  const double L = s.p.L;
  const double lc = s.p.lc;
  const double a = 1.0 - d0 * d0;
  const double b = 1.0 - 0.25 * d0 * d0;
  return E * U * a / (4.0 * sc) - 0.25 * L * a * a - lc * d0 * d0 * a * a / (b * b);
}

double f5_reduced(double d0, double U, const FiveElemSetup& s) {
  const double sc = s.p.sigc;
  const double hd = h0d0_of(d0, U, s);
  return 0.5 * U * sc * (1.0 - d0 * d0) + 2.0 * sc * sc / s.p.E * (hd + d0 * d0 * s.p.lc);
}

std::string to_string(H0Rule r) { return r == H0Rule::Zero ? "zero" : "from_reduction"; }

H0Rule h0_rule_from_string(const std::string& s) {
  if (s == "zero") return H0Rule::Zero;
  if (s == "from_reduction") return H0Rule::FromReduction;
  throw std::invalid_argument("unknown h0 rule '" + s + "' (expected zero or from_reduction)");
}

double f_inf_at(double d0, double h0, double U, const FiveElemSetup& s) {
  check_inputs(d0, h0);
  const Bar bar = s.bar();
  const double gamma = bar.q.gamma;
  const double lc = s.p.lc;
  const double L = s.p.L;
  const double w0 = omega(ModelKind::LipField, d0, gamma);
  const double w1 = omega(ModelKind::LipField, 0.5 * d0, gamma);
  const double Fe = bar.elastic_energy(U);
  double elastic;
  if (w0 == 0.0) {
    // a broken central element of zero size carries no compliance
    elastic = h0 > 0.0 ? 0.0 : Fe * L / (2.0 * d0 * lc / w1 + L - 2.0 * d0 * lc);
  } else {
    elastic = Fe * L * w0 / (h0 + 2.0 * d0 * lc * w0 / w1 + w0 * (L - (h0 + 2.0 * d0 * lc)));
  }
  return elastic + s.p.Gc * d0 * d0;
}

double f_inf(double d0, double U, const FiveElemSetup& s, H0Rule rule) {
  double h0 = 0.0;
  if (rule == H0Rule::FromReduction && d0 > 0.0) h0 = std::max(0.0, h0d0_of(d0, U, s) / d0);
  return f_inf_at(d0, h0, U, s);
}

std::vector<LocalMin> local_minima(const std::function<double(double)>& f, int grid) {
  if (grid < 3) throw std::invalid_argument("local_minima needs at least 3 grid points");
  const int last = grid - 1;
  std::vector<double> x(static_cast<std::size_t>(grid)), v(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    x[static_cast<std::size_t>(i)] = i == last ? 1.0 : static_cast<double>(i) / last;
    v[static_cast<std::size_t>(i)] = f(x[static_cast<std::size_t>(i)]);
  }
  std::vector<LocalMin> out;
  if (v[0] < v[1]) out.push_back({0.0, v[0]});
  for (int i = 1; i < last; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (v[k] < v[k - 1] && v[k] < v[k + 1]) {
      const double xm = golden_section(f, x[k - 1], x[k + 1], 1e-10);
      const double fm = f(xm);
      out.push_back(fm <= v[k] ? LocalMin{xm, fm} : LocalMin{x[k], v[k]});
    }
  }
  const auto e = static_cast<std::size_t>(last);
  if (v[e] < v[e - 1]) out.push_back({1.0, v[e]});
  return out;
}

StageReport classify_stage(double U, const FiveElemSetup& s, int grid) {
  if (grid < 2001) throw std::invalid_argument("stage classification needs at least 2001 grid points");
  StageReport rep;
  rep.minima = local_minima([&](double d0) { return f5_reduced(d0, U, s); }, grid);
  if (rep.minima.empty()) return rep;

  const LocalMin* lower = nullptr;
  for (const LocalMin& m : rep.minima) {
    if (m.d0 == 1.0) {
      rep.broken_min = true;
    } else if (!lower || m.value < lower->value) {
      lower = &m;
    }
  }
  rep.global = *std::min_element(rep.minima.begin(), rep.minima.end(),
                                 [](const LocalMin& a, const LocalMin& b) { return a.value < b.value; });
  if (!rep.broken_min) {
    rep.stage = lower->d0 == 0.0 ? 'a' : 'b';
  } else if (lower) {
    rep.stage = rep.global.d0 == 1.0 ? 'd' : 'c';
  } else {
    rep.stage = 'e';
  }
  return rep;
}

}  // namespace xmesh1d
