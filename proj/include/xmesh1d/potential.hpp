// Discrete incremental potential F^h = F_e(U) K^h(d,h) + Gc W^h(d,h) on the
// half mesh, with the displacement eliminated.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "xmesh1d/mesh.hpp"
#include "xmesh1d/model.hpp"

namespace xmesh1d {

/// Element-size floor used as a bound during mesh optimisation.
inline double min_element_size(const Bar& bar) { return 1e-12 * bar.p.L; }

/// Average damage of half-mesh element i (the central one takes d_1).
template <class Derived>
typename Derived::Scalar element_damage(const Eigen::MatrixBase<Derived>& d, Eigen::Index i) {
  using Scalar = typename Derived::Scalar;
  return i == 0 ? d[0] : Scalar(0.5) * (d[i - 1] + d[i]);
}

/// Stiffness factor K^h = L / (h_0/omega(d_0) + 2 sum h_i/omega(dbar_i)).
/// A fully damaged element of positive size makes the bar compliance infinite.
template <class DerivedD, class DerivedH>
typename DerivedD::Scalar k_factor(const Bar& bar, const Eigen::MatrixBase<DerivedD>& d,
                                   const Eigen::MatrixBase<DerivedH>& h) {
  using Scalar = typename DerivedD::Scalar;
  const Scalar gamma(bar.q.gamma);
  Scalar compliance(0);
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const Scalar w = omega(bar.model, element_damage(d, i), gamma);
    if (w == Scalar(0)) {
      if (h[i] > Scalar(0)) return Scalar(0);
      continue;
    }
    compliance += Scalar(element_weight(i)) * h[i] / w;
  }
  return Scalar(bar.p.L) / compliance;
}

/// Dimensionless dissipation W^h (one-point rule plus the r-weighted gradient term).
template <class DerivedD, class DerivedH>
typename DerivedD::Scalar w_dissipation(const Bar& bar, const Eigen::MatrixBase<DerivedD>& d,
                                        const Eigen::MatrixBase<DerivedH>& h) {
  using Scalar = typename DerivedD::Scalar;
  const Scalar lc(bar.p.lc);
  const Scalar cl = Scalar(bar.c()) * lc;
  const double h_min = min_element_size(bar);
  Scalar sum = h[0] * alpha(bar.model, d[0]);
  for (Eigen::Index i = 1; i < h.size(); ++i) {
    Scalar term = h[i] * alpha(bar.model, element_damage(d, i));
    if (bar.r() == 1) {
      const Scalar jump = d[i] - d[i - 1];
      if (jump != Scalar(0)) {
        if (static_cast<double>(h[i]) < h_min * (1.0 - 1e-6))
          throw std::domain_error("damage jump across an element below the size floor");
        term += lc * lc * jump * jump / h[i];
      }
    }
    sum += Scalar(2) * term;
  }
  return sum / cl;
}

struct PotentialEval {
  double F = 0;      // F^h [N/m]
  double K = 0;      // stiffness factor [-]
  double W = 0;      // dissipation [-]
  double sigma = 0;  // uniform stress E K U / L [Pa]
  Vector grad_d;     // dF/dd_i
  Vector grad_h;     // dF/dh_i
};

PotentialEval f_potential(const Bar& bar, const Vector& d, const Vector& h, double U);

/// Nodal displacements u_1..u_{n+1} of the elasticity problem with known damage.
Vector displacement_from(const Bar& bar, const Vector& d, const Vector& h, double U);

/// Largest relative gap between the analytic gradient and central differences
/// (step 1e-6 relative) in the max norm, relative to max|g|. Components that
/// nearly cancel carry finite-difference roundoff and are not judged alone.
/// Requires a strictly interior point: 0 < d < 1 and h > 10 h_min.
double grad_check(const Bar& bar, const Vector& d, const Vector& h, double U, bool include_h);

}  // namespace xmesh1d
