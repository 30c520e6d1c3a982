#include <doctest.h>

#include <boost/math/tools/roots.hpp>
#include <random>

#include "xmesh1d/five_element.hpp"
#include "xmesh1d/potential.hpp"

using namespace xmesh1d;

namespace {

const FiveElemSetup kSetup;
const double kWc = kSetup.bar().q.wc;

FiveElemSetup long_bar() {
  FiveElemSetup s;
  s.p.L = 1.0;  // room for a fully damaged ramp of length 2 lc
  return s;
}

}  // namespace

TEST_CASE("five-element setup") {
  CHECK(kSetup.bar().q.gamma == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(kSetup.bar().q.Uc == doctest::Approx(2.2e-5).epsilon(1e-14));
  CHECK(kSetup.h2(0.2, 0.01) == doctest::Approx(0.11 - 0.005 - 0.04));
}

TEST_CASE("f5 of the intact bar is the elastic energy") {
  for (double U : {0.0, 1e-5, 5e-5}) CHECK(f5(0.0, 0.0, U, kSetup) == doctest::Approx(0.5 * 3e10 * U * U / 0.22).epsilon(1e-14));
}

TEST_CASE("f5 of a broken central element") {
  const FiveElemSetup s = long_bar();
  const double h0 = 0.01;
  CHECK(k5(1.0, h0, s) == 0.0);
  CHECK(f5(1.0, h0, 3e-5, s) == doctest::Approx(s.p.Gc / s.p.lc * h0 + s.p.Gc).epsilon(1e-14));
}

TEST_CASE("f5 refuses an infeasible geometry") {
  CHECK_THROWS_AS(f5(1.0, 0.01, 1e-5, kSetup), std::domain_error);
}

TEST_CASE("f5 agrees with the generic potential on the explicit mesh") {
  const Bar bar = kSetup.bar();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double d0 = 0.54 * u01(rng);
    const double h0 = u01(rng) * (kSetup.p.L - 2.0 * d0 * kSetup.p.lc);
    const double U = 1.2 * kWc * u01(rng);
    Vector d, h;
    five_element_mesh(d0, h0, kSetup, d, h);
    const double generic = f_potential(bar, d, h, U).F;
    CHECK(std::abs(f5(d0, h0, U, kSetup) - generic) <= 1e-10 * std::abs(generic));
  }
}

TEST_CASE("h0 d0 vanishes at full damage") {
  for (double U : {0.3 * kWc, 0.7 * kWc}) {
    CHECK(h0d0_of(1.0, U, kSetup) == doctest::Approx(0.0).scale(1.0));
    CHECK(std::abs(h0d0_of(1.0 - 1e-6, U, kSetup)) < 1e-6);
  }
}

TEST_CASE("h0 d0 solves the stress relation of the five-element bar") {
  const double d0 = 0.5, U = 0.5 * kWc;
  const double target = kSetup.p.sigc * (1.0 - d0 * d0);
  auto residual = [&](double h0) { return kSetup.p.E * k5(d0, h0, kSetup) * U / kSetup.p.L - target; };
  boost::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(residual, 0.0, 0.1, boost::math::tools::eps_tolerance<double>(50), iters);
  const double h0 = 0.5 * (bracket.first + bracket.second);
  CHECK(h0 * d0 == doctest::Approx(h0d0_of(d0, U, kSetup)).epsilon(1e-10));
}

TEST_CASE("the reduced branch is unreachable at small loads") {
  CHECK(h0d0_of(0.5, 0.5 * kSetup.bar().q.Uc, kSetup) < 0.0);
  CHECK_THROWS_AS(h0d0_of(0.5, 1e-5, FiveElemSetup{MaterialParams::bar_example()}), std::invalid_argument);
}

TEST_CASE("reduced potential") {
  const double s = kSetup.p.sigc;
  for (double U : {0.4 * kWc, 0.9 * kWc})
    CHECK(f5_reduced(1.0, U, kSetup) == doctest::Approx(2.0 * s * s / kSetup.p.E * kSetup.p.lc).epsilon(1e-14));
  // at the onset the d0 = 0 end of the branch is the elastic energy
  const double Uc = kSetup.bar().q.Uc;
  CHECK(f5_reduced(0.0, Uc, kSetup) == doctest::Approx(f5(0.0, 0.0, Uc, kSetup)).epsilon(1e-12));
}

TEST_CASE("reduced potential composes h0d0_of and f5") {
  int checked = 0;
  for (double U : {0.4 * kWc, 0.6 * kWc, 0.8 * kWc}) {
    for (int i = 1; i < 100; ++i) {
      const double d0 = i / 100.0;
      const double hd = h0d0_of(d0, U, kSetup);
      if (hd < 0.0 || kSetup.h2(d0, hd / d0) < 0.0) continue;
      const double direct = f5(d0, hd / d0, U, kSetup);
      CHECK(std::abs(f5_reduced(d0, U, kSetup) - direct) <= 1e-9 * std::abs(direct));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("infinite-element potential end values") {
  for (H0Rule rule : {H0Rule::Zero, H0Rule::FromReduction}) {
    for (double U : {0.2 * kWc, 0.9 * kWc}) {
      CHECK(f_inf(0.0, U, kSetup, rule) == doctest::Approx(0.5 * kSetup.p.E * U * U / kSetup.p.L).epsilon(1e-14));
      CHECK(f_inf_at(1.0, 0.01, U, kSetup) == doctest::Approx(kSetup.p.Gc).epsilon(1e-14));
      // with h0 = 0 the printed ratio is 0/0 at d0 = 1; the value is its limit d0 -> 1
      const double limit = f_inf(1.0, U, kSetup, rule);
      CHECK(limit > kSetup.p.Gc);
      CHECK(f_inf(1.0 - 1e-9, U, kSetup, H0Rule::Zero) == doctest::Approx(limit).epsilon(1e-6));
    }
  }
  CHECK(h0_rule_from_string(to_string(H0Rule::FromReduction)) == H0Rule::FromReduction);
  CHECK_THROWS_AS(h0_rule_from_string("other"), std::invalid_argument);
}

TEST_CASE("infinite-element potential has one global minimum for every load") {
  for (int k = 0; k <= 120; ++k) {
    const double U = 1.2 * kWc * k / 120;
    const std::vector<LocalMin> mins = local_minima([&](double d0) { return f_inf(d0, U, kSetup); }, 2001);
    REQUIRE_FALSE(mins.empty());
    double best = mins.front().value;
    for (const LocalMin& m : mins) best = std::min(best, m.value);
    int at_best = 0;
    for (const LocalMin& m : mins)
      if (m.value <= best + 1e-12 * std::abs(best)) ++at_best;
    CHECK(at_best == 1);
  }
}

TEST_CASE("local minima detection") {
  const auto mins = local_minima([](double x) { return (x - 0.3) * (x - 0.3) * (x - 1.2); }, 2001);
  REQUIRE(mins.size() == 2);
  CHECK(mins[0].d0 == 0.0);
  const auto one = local_minima([](double x) { return (x - 0.3141) * (x - 0.3141); }, 2001);
  REQUIRE(one.size() == 1);
  CHECK(one[0].d0 == doctest::Approx(0.3141).epsilon(1e-8));
  CHECK_THROWS_AS(local_minima([](double x) { return x; }, 2), std::invalid_argument);
}

TEST_CASE("below the onset the bar is in stage a") {
  const double Uc = kSetup.bar().q.Uc;
  for (double f : {0.1, 0.5, 0.99}) CHECK(classify_stage(f * Uc, kSetup).stage == 'a');
  CHECK_THROWS_AS(classify_stage(0.5 * Uc, kSetup, 1000), std::invalid_argument);
}

TEST_CASE("stage sequence a to e as the load grows") {
  std::string seq;
  double first_c = -1, first_e = -1;
  for (int k = 0; k <= 240; ++k) {
    const double U = 1.2 * kWc * k / 240;
    const StageReport r = classify_stage(U, kSetup);
    if (seq.empty() || seq.back() != r.stage) seq += r.stage;
    if (r.stage == 'c' && first_c < 0) first_c = U;
    if (r.stage == 'e' && first_e < 0) first_e = U;
  }
  CHECK(seq == "abcde");
  CHECK(first_e > first_c);
}

TEST_CASE("stage transition loads") {
  // regression pins from a 12001-point load scan, in units of wc
  const std::pair<double, char> edges[] = {{0.2750, 'a'}, {0.5011, 'b'}, {0.7329, 'c'}, {0.7997, 'd'}};
  const char next[] = {'b', 'c', 'd', 'e'};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(classify_stage((edges[i].first - 2e-4) * kWc, kSetup).stage == edges[i].second);
    CHECK(classify_stage((edges[i].first + 2e-4) * kWc, kSetup).stage == next[i]);
  }
}

TEST_CASE("the interior minimum disappears at the d/e boundary") {
  const StageReport d = classify_stage(0.7990 * kWc, kSetup);
  const StageReport e = classify_stage(0.8000 * kWc, kSetup);
  CHECK(d.stage == 'd');
  CHECK(e.stage == 'e');
  CHECK(e.minima.size() == 1);
  CHECK(e.minima.front().d0 == 1.0);
  CHECK(e.global.d0 == 1.0);
}
