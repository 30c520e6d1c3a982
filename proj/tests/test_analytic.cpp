#include <doctest.h>

#include <cmath>
#include <numbers>

#include "xmesh1d/analytic.hpp"
#include "xmesh1d/mesh.hpp"
#include "xmesh1d/potential.hpp"

using namespace xmesh1d;

namespace {
const Bar kPF = Bar::make(ModelKind::PhaseField, MaterialParams::bar_example());
const Bar kLip = Bar::make(ModelKind::LipField, MaterialParams::bar_example());
}  // namespace

TEST_CASE("peak damage at the branch ends") {
  for (const Bar& b : {kPF, kLip}) {
    CHECK(d0_of_U(b, b.q.Uc) == doctest::Approx(0.0));
    CHECK(d0_of_U(b, b.q.wc) == doctest::Approx(1.0));
    CHECK(d0_of_U(b, 0.5 * b.q.Uc) == 0.0);
    CHECK(d0_of_U(b, 2.0 * b.q.wc) == 1.0);
  }
  const double Um = 0.5 * (kPF.q.Uc + kPF.q.wc);
  CHECK(d0_of_U(kPF, Um) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d0_of_U(kLip, Um) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("U_of_d0 inverts d0_of_U") {
  for (const Bar& b : {kPF, kLip})
    for (double d0 : {0.05, 0.3, 0.6, 0.95}) CHECK(d0_of_U(b, U_of_d0(b, d0)) == doctest::Approx(d0).epsilon(1e-12));
}

TEST_CASE("stress laws") {
  for (const Bar& b : {kPF, kLip}) {
    CHECK(stress_of_d0(b, 0.0) == doctest::Approx(b.p.sigc));
    CHECK(stress_of_d0(b, 1.0) == doctest::Approx(0.0));
  }
  CHECK(stress_of_d0(kPF, 0.5) == doctest::Approx(0.5 * kPF.p.sigc));
  CHECK(stress_of_d0(kLip, 0.5) == doctest::Approx(0.75 * kLip.p.sigc));
}

TEST_CASE("H kernel") {
  CHECK(H_kernel(0.0, 0.5) == doctest::Approx(0.0));
  CHECK(H_kernel(0.5, 0.5) == doctest::Approx(0.0));
  CHECK(H_kernel(0.5, 0.75) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("damage profiles") {
  const double lc = kPF.p.lc;
  for (const Bar& b : {kPF, kLip})
    for (double d0 : {0.2, 0.7}) CHECK(damage_profile(b, d0, 0.0) == doctest::Approx(d0));
  CHECK(damage_profile(kPF, 1.0, 0.5 * lc) == doctest::Approx(1.0 - std::sin(0.5)).epsilon(1e-9));
  CHECK(damage_profile(kPF, 1.0, 0.5 * lc) == doctest::Approx(0.52057).epsilon(1e-5));
  CHECK(damage_profile(kLip, 0.6, 0.3 * lc) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("phase-field band half-width does not depend on the peak damage") {
  const double expected = 0.5 * std::numbers::pi * kPF.p.lc;
  for (double d0 : {0.1, 0.5, 0.9}) CHECK(std::abs(band_halfwidth(kPF, d0) - expected) <= 1e-6 * expected);
}

TEST_CASE("lip band is the triangle support") {
  CHECK(band_halfwidth(kLip, 1.0) == doctest::Approx(kLip.p.lc));
  CHECK(band_halfwidth(kLip, 0.25) == doctest::Approx(0.25 * kLip.p.lc));
}

TEST_CASE("displacement profile") {
  for (const Bar& b : {kPF, kLip}) {
    CHECK(displacement_profile(b, 0.5, 0.0) == doctest::Approx(0.0));
    const double eps = 1e-6 * b.p.L;
    CHECK(displacement_profile(b, 1.0, eps) == doctest::Approx(0.5 * b.q.wc).epsilon(1e-9));
    CHECK(displacement_profile(b, 1.0, -eps) == doctest::Approx(-0.5 * b.q.wc).epsilon(1e-9));
  }
  const double U = 0.5 * (kPF.q.Uc + kPF.q.wc);
  CHECK(displacement_profile(kPF, 0.5, 0.5 * kPF.p.L) == doctest::Approx(0.5 * U).epsilon(1e-8));
}

TEST_CASE("displacement profile agrees with a fine fixed-mesh elasticity solve") {
  for (const Bar& b : {kPF, kLip}) {
    const double d0 = 0.5;
    const double U = U_of_d0(b, d0);
    const int n = 5000;
    Vector h = Vector::Constant(n + 1, b.p.L / (2 * n + 1));
    const Vector x = HalfMesh{b.p.L, h}.nodes();
    Vector d(n + 1);
    for (int i = 0; i <= n; ++i) d[i] = damage_profile(b, d0, x[i]);
    const Vector u = displacement_from(b, d, h, U);
    for (int i : {n / 8, n / 4, n / 2}) CHECK(u[i] == doctest::Approx(displacement_profile(b, d0, x[i])).epsilon(1e-5));
  }
}

TEST_CASE("cohesive law") {
  CHECK(cohesive_law(kPF, 0.0) == doctest::Approx(kPF.p.sigc));
  CHECK(cohesive_law(kPF, kPF.q.wc) == doctest::Approx(0.0));
  // trapezoid rule is exact on the linear law
  const int n = 100;
  double area = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w0 = kPF.q.wc * i / n, w1 = kPF.q.wc * (i + 1) / n;
    area += 0.5 * (cohesive_law(kPF, w0) + cohesive_law(kPF, w1)) * (w1 - w0);
  }
  CHECK(std::abs(area - kPF.p.Gc) <= 1e-12 * kPF.p.Gc);
}

TEST_CASE("reference displacement at load") {
  const double L = kPF.p.L;
  CHECK(displacement_at_load(kPF, 0.5 * kPF.q.Uc, 0.25 * L) == doctest::Approx(0.5 * kPF.q.Uc * 0.25));
  CHECK(displacement_at_load(kPF, 1.2 * kPF.q.wc, 0.3 * L) == doctest::Approx(0.6 * kPF.q.wc));
  CHECK(displacement_at_load(kPF, 1.2 * kPF.q.wc, -0.3 * L) == doctest::Approx(-0.6 * kPF.q.wc));
}
