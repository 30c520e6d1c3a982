#include <doctest.h>

#include <numbers>

#include "xmesh1d/mesh.hpp"

using namespace xmesh1d;

namespace {
const MaterialParams kP = MaterialParams::bar_example();
const Bar kPF = Bar::make(ModelKind::PhaseField, kP);
const Bar kLip = Bar::make(ModelKind::LipField, kP);
}  // namespace

TEST_CASE("uniform lip mesh at nc = 5") {
  const HalfMesh m = build_uniform(kLip, 5);
  CHECK(2 * m.n() + 1 == 25);
  CHECK(m.h[0] == doctest::Approx(0.008).epsilon(1e-14));
  CHECK(m.length_residual() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("uniform phase-field mesh at nc = 5") {
  const double target = std::numbers::pi * 0.04 / 10.0;
  CHECK(kP.L / target == doctest::Approx(15.915).epsilon(1e-4));
  const HalfMesh m = build_uniform(kPF, 5);
  CHECK(2 * m.n() + 1 == 15);
  CHECK(m.h[3] == doctest::Approx(kP.L / 15).epsilon(1e-14));
}

TEST_CASE("element counts are odd for every nc") {
  for (int nc = 1; nc <= 12; ++nc) {
    for (const Bar& b : {kPF, kLip}) {
      const HalfMesh m = build_uniform(b, nc);
      CHECK(m.h.size() >= 2);
      CHECK(std::abs(m.length_residual()) <= 1e-15);
    }
  }
}

TEST_CASE("a mesh with a single element is rejected") {
  MaterialParams p = kP;
  p.L = 1.2 * p.lc;
  CHECK_THROWS_AS(build_uniform(Bar::make(ModelKind::LipField, p), 1), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform(kLip, 0), std::invalid_argument);
}

TEST_CASE("nodes end at the bar end") {
  Vector h(3);
  h << 0.02, 0.03, 0.06;
  const Vector x = HalfMesh{0.2, h}.nodes();
  CHECK(x[0] == doctest::Approx(0.01));
  CHECK(x[1] == doctest::Approx(0.04));
  CHECK(x[2] == 0.1);
}

TEST_CASE("interpolation") {
  Vector x(3), d(3);
  x << 0.01, 0.04, 0.1;
  d << 0.8, 0.5, 0.0;
  CHECK(interpolate(d, x, 0.04) == doctest::Approx(0.5));
  CHECK(interpolate(d, x, 0.1) == doctest::Approx(0.0));
  CHECK(interpolate(d, x, 0.0) == 0.8);
  CHECK(interpolate(d, x, -0.005) == 0.8);
  CHECK(interpolate(d, x, 0.025) == doctest::Approx(0.65));
  CHECK(interpolate(d, x, -0.07) == doctest::Approx(0.25));
  CHECK_THROWS_AS(interpolate(d, x, 0.2), std::domain_error);
}

TEST_CASE("identity step is feasible") {
  const HalfMesh m = build_uniform(kLip, 5);
  const Vector x = m.nodes();
  Vector d = Vector::Zero(m.h.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::max(0.0, 0.5 - x[i] / kP.lc);
  const ConstraintReport r = constraint_residuals(d, m.h, kP.L, {x, d, m.h}, kLip);
  CHECK(r.max_irreversibility() <= 1e-15);
  CHECK(r.max_lipschitz() <= 1e-15);
  CHECK(r.feasible(1e-12));
}

TEST_CASE("Lipschitz bound attained exactly is active") {
  const HalfMesh m = build_uniform(kLip, 5);
  const Vector x = m.nodes();
  Vector d = Vector::Zero(m.h.size());
  d[0] = 2.0 * m.h[1] / kP.lc;
  d[1] = m.h[1] / kP.lc;
  const ConstraintReport r = constraint_residuals(d, m.h, kP.L, {x, d, m.h}, kLip);
  CHECK(r.lipschitz[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(r.lipschitz[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(r.feasible(1e-12));
}

TEST_CASE("healing is flagged as an irreversibility violation") {
  const HalfMesh m = build_uniform(kPF, 5);
  const Vector x = m.nodes();
  Vector prev = Vector::Zero(m.h.size());
  prev[0] = 0.4;
  prev[1] = 0.2;
  Vector d = prev;
  d[1] = 0.1;
  const ConstraintReport r = constraint_residuals(d, m.h, kP.L, {x, prev, m.h}, kPF);
  CHECK(r.irrev_prev_at_current[1] == doctest::Approx(0.1));
  CHECK_FALSE(r.feasible(1e-8));
}

TEST_CASE("moving nodes checks both interpolation directions") {
  Vector h(3);
  h << 0.02, 0.03, 0.06;
  const Vector x = HalfMesh{0.2, h}.nodes();
  Vector prev(3);
  prev << 0.6, 0.3, 0.0;
  Vector h2(3);
  h2 << 0.02, 0.05, 0.04;  // the second node moves outwards from 0.04 to 0.06
  Vector d = prev;
  const ConstraintReport r = constraint_residuals(d, h2, 0.2, {x, prev, h}, kPF);
  // current field at the old node 0.04 interpolates between 0.6 and 0.3
  CHECK(r.irrev_current_at_prev[1] <= 0.0);
  // prev field at the new node 0.06 is 0.3 - 0.3*(0.02/0.06) = 0.2 < 0.3
  CHECK(r.irrev_prev_at_current[1] == doctest::Approx(0.2 - 0.3));
  d[1] = 0.1;
  const ConstraintReport bad = constraint_residuals(d, h2, 0.2, {x, prev, h}, kPF);
  CHECK(bad.irrev_prev_at_current[1] == doctest::Approx(0.1));
}

TEST_CASE("length residual") {
  Vector h(3);
  h << 0.02, 0.03, 0.06;
  CHECK(HalfMesh{0.2, h}.length_residual() == doctest::Approx(0.0).scale(1.0));
  h[2] = 0.07;
  const ConstraintReport r = constraint_residuals(Vector::Zero(3), h, 0.2, {node_positions(h), Vector::Zero(3), h}, kPF);
  CHECK(r.length == doctest::Approx(0.1));
}
