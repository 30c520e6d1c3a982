// Closed-form and semi-analytical reference solutions of the bar problem.
#pragma once

#include <stdexcept>
#include <string>

#include "xmesh1d/model.hpp"

namespace xmesh1d {

/// Raised when adaptive quadrature cannot reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved relative error " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Peak damage reached at elongation U (0 below Uc, 1 beyond wc).
double d0_of_U(const Bar& bar, double U);
/// Inverse of d0_of_U on [Uc, wc].
double U_of_d0(const Bar& bar, double d0);
double stress_of_d0(const Bar& bar, double d0);
double cohesive_law(const Bar& bar, double w);

/// H(d, d0) from the phase-field damage ODE d' = -H/lc.
double H_kernel(double d, double d0);

/// Distance from the band centre where the phase-field profile of peak d0
/// takes the value d, i.e. lc * integral_d^d0 1/H.
double phase_field_position(double d, double d0, double lc);

/// Reference solution at fixed peak damage d0.
class AnalyticSolution {
 public:
  AnalyticSolution(const Bar& bar, double d0);

  double d0() const { return d0_; }
  double U() const { return U_; }
  double sigma() const { return sigma_; }
  double band_halfwidth() const { return band_; }
  double damage(double x) const;
  double displacement(double x) const;

 private:
  double pf_damage(double ax) const;
  double pf_compliance_integral(double d_lo) const;

  Bar bar_;
  double d0_;
  double U_;
  double sigma_;
  double band_ = 0;
  double full_integral_ = 0;  // lc * int_0^d0 1/(H omega)
};

double damage_profile(const Bar& bar, double d0, double x);
double band_halfwidth(const Bar& bar, double d0);
double displacement_profile(const Bar& bar, double d0, double x);

/// Reference displacement at imposed elongation U: uniform strain below Uc,
/// rigid halves at +-U/2 once U >= wc.
double displacement_at_load(const Bar& bar, double U, double x);

}  // namespace xmesh1d
