// Five-element lip-field bar: central element h_0, a damaged ramp of length
// d_0 lc on each side and an undamaged remainder. Used to explain the
// stress drop through the local minima of the reduced potential.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "xmesh1d/mesh.hpp"
#include "xmesh1d/model.hpp"

namespace xmesh1d {

struct FiveElemSetup {
  MaterialParams p = MaterialParams::five_element_example();

  Bar bar() const { return Bar::make(ModelKind::LipField, p); }
  /// Outer element size L/2 - (h_0/2 + d_0 lc).
  double h2(double d0, double h0) const { return 0.5 * p.L - (0.5 * h0 + d0 * p.lc); }
};

/// Stiffness factor of the five-element bar.
double k5(double d0, double h0, const FiveElemSetup& s);

/// F_5(d_0, h_0); throws std::domain_error when h_2 < 0.
double f5(double d0, double h0, double U, const FiveElemSetup& s);

/// The explicit half mesh (h_0, d_0 lc, h_2) with nodal damage (d_0, 0, 0).
void five_element_mesh(double d0, double h0, const FiveElemSetup& s, Vector& d, Vector& h);

/// h_0 d_0 on the branch where sigma follows the exact lip stress law
/// (assumes gamma = 1/2). A negative value means the branch is not reachable.
double h0d0_of(double d0, double U, const FiveElemSetup& s);

/// F_5 along that branch as a function of d_0 alone.
double f5_reduced(double d0, double U, const FiveElemSetup& s);

enum class H0Rule { FromReduction, Zero };
std::string to_string(H0Rule r);
H0Rule h0_rule_from_string(const std::string& s);

/// Infinite-element potential with an explicit central size.
double f_inf_at(double d0, double h0, double U, const FiveElemSetup& s);
/// Infinite-element potential with h_0 chosen by `rule` (zero by default).
double f_inf(double d0, double U, const FiveElemSetup& s, H0Rule rule = H0Rule::Zero);

struct LocalMin {
  double d0 = 0;
  double value = 0;
};

/// Grid candidates (strict interior minima, one-sided endpoint minima) refined
/// by golden section to width 1e-10. Sorted by d0.
std::vector<LocalMin> local_minima(const std::function<double(double)>& f, int grid = 2001);

struct StageReport {
  char stage = '?';              // a..e
  std::vector<LocalMin> minima;  // all local minima on [0, 1]
  LocalMin global;
  bool broken_min = false;       // a local minimum sits at d0 = 1
};

StageReport classify_stage(double U, const FiveElemSetup& s, int grid = 2001);

}  // namespace xmesh1d
