// Material constants and the degradation/dissipation functions of the
// phase-field and lip-field bar models.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace xmesh1d {

enum class ModelKind { PhaseField, LipField };

/// Weight of the damage-gradient term: 1 for phase-field, 0 for lip-field.
constexpr int gradient_weight(ModelKind m) { return m == ModelKind::PhaseField ? 1 : 0; }

/// Normalisation constant c of the dissipation functional.
constexpr double scaling_constant(ModelKind m) {
  return m == ModelKind::PhaseField ? std::numbers::pi : 1.0;
}

std::string to_string(ModelKind m);
ModelKind model_from_string(const std::string& s);

struct MaterialParams {
  double L = 0.2;      // bar length [m]
  double lc = 0.04;    // regularisation length [m]
  double E = 3e10;     // Young's modulus [Pa]
  double Gc = 120.0;   // toughness [N/m]
  double sigc = 3e6;   // critical stress [Pa]

  static MaterialParams bar_example() { return {}; }
  static MaterialParams five_element_example() { return {0.22, 0.2, 3e10, 120.0, 3e6}; }
};

struct DerivedParams {
  double lch = 0;    // E Gc / sigc^2
  double gamma = 0;  // lc / lch
  double wc = 0;     // critical opening 2 Gc / sigc
  double Uc = 0;     // damage onset elongation L sigc / E
};

/// Throws std::invalid_argument on non-positive inputs.
DerivedParams derive(const MaterialParams& p);

/// Upper bound on gamma that keeps omega convex (8/(3 pi) for phase-field, 1/2 for lip-field).
constexpr double gamma_bound(ModelKind m) {
  return m == ModelKind::PhaseField ? 8.0 / (3.0 * std::numbers::pi) : 0.5;
}

/// A gamma above the bound is a warning, never an error.
inline bool gamma_within_bound(ModelKind m, double gamma) { return gamma <= gamma_bound(m); }

struct ValidityReport {
  double ratio = 0;        // L/(pi lc) or L/lc
  double upper_bound = 0;  // 2/(pi gamma) or 2/gamma
  bool band_fits = false;  // ratio >= 1: damaged zone lies inside the bar
  bool no_snap_back = false;
  bool gamma_ok = false;
  bool valid() const { return band_fits && no_snap_back; }
  std::string describe() const;
};

ValidityReport validity(ModelKind m, const MaterialParams& p, const DerivedParams& q);

/// Model selector bundled with its material and derived constants.
struct Bar {
  ModelKind model = ModelKind::PhaseField;
  MaterialParams p;
  DerivedParams q;

  static Bar make(ModelKind m, const MaterialParams& params) { return {m, params, derive(params)}; }
  double c() const { return scaling_constant(model); }
  int r() const { return gradient_weight(model); }
  /// Elastic energy of the intact bar, E U^2 / (2 L).
  double elastic_energy(double U) const { return 0.5 * p.E * U * U / p.L; }
};

namespace detail {
inline void check_damage(double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw std::domain_error("damage outside [0,1]: " + std::to_string(d));
}
}  // namespace detail

template <class Scalar>
Scalar alpha(ModelKind m, Scalar d) {
  detail::check_damage(static_cast<double>(d));
  return m == ModelKind::PhaseField ? Scalar(2) * d - d * d : d;
}

template <class Scalar>
Scalar alpha_prime(ModelKind m, Scalar d) {
  detail::check_damage(static_cast<double>(d));
  return m == ModelKind::PhaseField ? Scalar(2) - Scalar(2) * d : Scalar(1);
}

// omega(d) = s^2 / (s^2 + k alpha(d)) with s = 1-d, k = 2/(pi gamma) for
// phase-field and s = 1-d^2, k = 2/gamma for lip-field.
namespace detail {
template <class Scalar>
void omega_parts(ModelKind m, Scalar d, Scalar gamma, Scalar& s, Scalar& ds, Scalar& k) {
  if (m == ModelKind::PhaseField) {
    s = Scalar(1) - d;
    ds = Scalar(-1);
    k = Scalar(2) / (Scalar(std::numbers::pi) * gamma);
  } else {
    s = Scalar(1) - d * d;
    ds = Scalar(-2) * d;
    k = Scalar(2) / gamma;
  }
}
}  // namespace detail

template <class Scalar>
Scalar omega(ModelKind m, Scalar d, Scalar gamma) {
  detail::check_damage(static_cast<double>(d));
  if (d == Scalar(1)) return Scalar(0);
  Scalar s, ds, k;
  detail::omega_parts(m, d, gamma, s, ds, k);
  const Scalar s2 = s * s;
  return s2 / (s2 + k * alpha(m, d));
}

template <class Scalar>
Scalar omega_prime(ModelKind m, Scalar d, Scalar gamma) {
  detail::check_damage(static_cast<double>(d));
  Scalar s, ds, k;
  detail::omega_parts(m, d, gamma, s, ds, k);
  const Scalar a = alpha(m, d);
  const Scalar den = s * s + k * a;
  return k * s * (Scalar(2) * ds * a - s * alpha_prime(m, d)) / (den * den);
}

}  // namespace xmesh1d
