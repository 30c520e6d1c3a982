#include <doctest.h>

#include <random>

#include "xmesh1d/analytic.hpp"
#include "xmesh1d/potential.hpp"

using namespace xmesh1d;

namespace {

const MaterialParams kP = MaterialParams::bar_example();
const Bar kPF = Bar::make(ModelKind::PhaseField, kP);
const Bar kLip = Bar::make(ModelKind::LipField, kP);

// element-by-element sums written out independently of the library loops
double oracle_K(const Bar& b, const Vector& d, const Vector& h) {
  double c = h[0] / omega(b.model, d[0], b.q.gamma);
  for (Eigen::Index i = 1; i < h.size(); ++i) c += 2.0 * h[i] / omega(b.model, 0.5 * (d[i - 1] + d[i]), b.q.gamma);
  return b.p.L / c;
}

double oracle_W(const Bar& b, const Vector& d, const Vector& h) {
  double w = h[0] * alpha(b.model, d[0]);
  for (Eigen::Index i = 1; i < h.size(); ++i) {
    const double jump = d[i] - d[i - 1];
    w += 2.0 * (h[i] * alpha(b.model, 0.5 * (d[i - 1] + d[i])) + b.r() * b.p.lc * b.p.lc * jump * jump / h[i]);
  }
  return w / (b.c() * b.p.lc);
}

void random_interior(std::mt19937& rng, Eigen::Index m, double L, Vector& d, Vector& h) {
  std::uniform_real_distribution<double> ud(0.05, 0.95), uh(0.5, 1.5);
  d.resize(m);
  h.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    d[i] = ud(rng);
    h[i] = uh(rng);
  }
  h *= L / (h[0] + 2.0 * h.tail(m - 1).sum());
}

}  // namespace

TEST_CASE("undamaged bar has unit stiffness and no dissipation") {
  for (const Bar& b : {kPF, kLip}) {
    const HalfMesh m = build_uniform(b, 5);
    const Vector d = Vector::Zero(m.h.size());
    CHECK(k_factor(b, d, m.h) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w_dissipation(b, d, m.h) == 0.0);
    const double U = 1e-5;
    const PotentialEval ev = f_potential(b, d, m.h, U);
    CHECK(ev.F == doctest::Approx(0.5 * kP.E * U * U / kP.L).epsilon(1e-14));
    CHECK(ev.sigma == doctest::Approx(kP.E * U / kP.L).epsilon(1e-14));
  }
}

TEST_CASE("a broken central element of positive size has zero stiffness") {
  const HalfMesh m = build_uniform(kPF, 5);
  Vector d = Vector::Zero(m.h.size());
  d[0] = 1.0;
  CHECK(k_factor(kPF, d, m.h) == 0.0);
  Vector h = m.h;
  h[0] = 0.0;
  h[h.size() - 1] += 0.5 * m.h[0];
  CHECK(k_factor(kPF, d, h) > 0.0);
}

TEST_CASE("stiffness and dissipation match an element-sum oracle") {
  std::mt19937 rng(7);
  for (const Bar& b : {kPF, kLip}) {
    for (int trial = 0; trial < 10; ++trial) {
      Vector d, h;
      random_interior(rng, 8, kP.L, d, h);
      CHECK(k_factor(b, d, h) == doctest::Approx(oracle_K(b, d, h)).epsilon(1e-13));
      CHECK(w_dissipation(b, d, h) == doctest::Approx(oracle_W(b, d, h)).epsilon(1e-13));
    }
  }
}

TEST_CASE("lip triangle resolved by the mesh dissipates exactly Gc") {
  const int n = 10;
  Vector h(n + 2), d(n + 2);
  h[0] = 0.0;
  d[0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    h[i] = kP.lc / n;
    d[i] = 1.0 - static_cast<double>(i) / n;
  }
  h[n + 1] = 0.5 * kP.L - kP.lc;
  d[n + 1] = 0.0;
  CHECK(w_dissipation(kLip, d, h) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f_potential(kLip, d, h, 0.0).F == doctest::Approx(kP.Gc).epsilon(1e-14));
}

TEST_CASE("central phase-field element contributes h alpha / (pi lc)") {
  const HalfMesh m = build_uniform(kPF, 5);
  Vector d = Vector::Zero(m.h.size());
  d[0] = 0.4;
  Vector h0 = m.h;
  h0[0] = 0.0;
  const double gap = w_dissipation(kPF, d, m.h) - w_dissipation(kPF, d, h0);
  CHECK(gap == doctest::Approx(m.h[0] * alpha(ModelKind::PhaseField, 0.4) / (std::numbers::pi * kP.lc)).epsilon(1e-12));
}

TEST_CASE("without load the potential is the dissipation") {
  std::mt19937 rng(11);
  for (const Bar& b : {kPF, kLip}) {
    Vector d, h;
    random_interior(rng, 6, kP.L, d, h);
    CHECK(f_potential(b, d, h, 0.0).F == doctest::Approx(kP.Gc * oracle_W(b, d, h)).epsilon(1e-13));
  }
}

TEST_CASE("lip triangle on the nc = 5 mesh matches the element-sum oracle") {
  const HalfMesh m = build_uniform(kLip, 5);
  const Vector x = m.nodes();
  Vector d(m.h.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::max(0.0, 0.5 - x[i] / kP.lc);
  const double U = 0.5 * (kLip.q.Uc + kLip.q.wc);
  const double F = 0.5 * kP.E * U * U / kP.L * oracle_K(kLip, d, m.h) + kP.Gc * oracle_W(kLip, d, m.h);
  CHECK(f_potential(kLip, d, m.h, U).F == doctest::Approx(F).epsilon(1e-13));
}

TEST_CASE("displacement of an undamaged bar is linear") {
  const HalfMesh m = build_uniform(kLip, 5);
  const double U = 1.5e-5;
  const Vector u = displacement_from(kLip, Vector::Zero(m.h.size()), m.h, U);
  const Vector x = m.nodes();
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(u[i] == doctest::Approx(U * x[i] / kP.L).epsilon(1e-13));
}

TEST_CASE("a broken central element takes the whole jump") {
  const HalfMesh m = build_uniform(kPF, 5);
  Vector d = Vector::Zero(m.h.size());
  d[0] = 1.0;
  const double U = 9e-5;
  const Vector u = displacement_from(kPF, d, m.h, U);
  for (Eigen::Index i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(0.5 * U));
}

TEST_CASE("reconstructed element stresses are uniform") {
  std::mt19937 rng(3);
  for (const Bar& b : {kPF, kLip}) {
    Vector d, h;
    random_interior(rng, 9, kP.L, d, h);
    const double U = 4e-5;
    const Vector u = displacement_from(b, d, h, U);
    const double sigma = f_potential(b, d, h, U).sigma;
    // the central element spans [-x_1, x_1] with u antisymmetric
    CHECK(std::abs(kP.E * omega(b.model, d[0], b.q.gamma) * 2.0 * u[0] / h[0] - sigma) <= 1e-9 * kP.sigc);
    for (Eigen::Index i = 1; i < h.size(); ++i) {
      const double s = kP.E * omega(b.model, 0.5 * (d[i - 1] + d[i]), b.q.gamma) * (u[i] - u[i - 1]) / h[i];
      CHECK(std::abs(s - sigma) <= 1e-9 * kP.sigc);
    }
  }
}

TEST_CASE("analytic gradient agrees with central differences") {
  std::mt19937 rng(2024);
  for (const Bar& b : {kPF, kLip}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector d, h;
      random_interior(rng, 7, kP.L, d, h);
      const double U = std::uniform_real_distribution<double>(0.5, 1.2)(rng) * b.q.wc;
      CHECK(grad_check(b, d, h, U, false) <= 1e-6);
      CHECK(grad_check(b, d, h, U, true) <= 1e-6);
    }
  }
}

TEST_CASE("grad_check rejects boundary points") {
  const HalfMesh m = build_uniform(kPF, 5);
  CHECK_THROWS_AS(grad_check(kPF, Vector::Zero(m.h.size()), m.h, 1e-5, true), std::invalid_argument);
}
