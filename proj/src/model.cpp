#include "xmesh1d/model.hpp"

#include <sstream>

namespace xmesh1d {

std::string to_string(ModelKind m) { return m == ModelKind::PhaseField ? "phase" : "lip"; }

ModelKind model_from_string(const std::string& s) {
  if (s == "phase" || s == "phase-field" || s == "pf") return ModelKind::PhaseField;
  if (s == "lip" || s == "lip-field") return ModelKind::LipField;
  throw std::invalid_argument("unknown model '" + s + "' (expected phase or lip)");
}

DerivedParams derive(const MaterialParams& p) {
  auto require = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be strictly positive");
  };
  require(p.L, "L");
  require(p.lc, "lc");
  require(p.E, "E");
  require(p.Gc, "Gc");
  require(p.sigc, "sigc");

  DerivedParams q;
  q.lch = p.E * p.Gc / (p.sigc * p.sigc);
  q.gamma = p.lc / q.lch;
  q.wc = 2.0 * p.Gc / p.sigc;
  q.Uc = p.L * p.sigc / p.E;
  return q;
}

ValidityReport validity(ModelKind m, const MaterialParams& p, const DerivedParams& q) {
  ValidityReport r;
  if (m == ModelKind::PhaseField) {
    r.ratio = p.L / (std::numbers::pi * p.lc);
    r.upper_bound = 2.0 / (std::numbers::pi * q.gamma);
  } else {
    r.ratio = p.L / p.lc;
    r.upper_bound = 2.0 / q.gamma;
  }
  r.band_fits = r.ratio >= 1.0;
  r.no_snap_back = r.ratio <= r.upper_bound;
  r.gamma_ok = gamma_within_bound(m, q.gamma);
  return r;
}

std::string ValidityReport::describe() const {
  std::ostringstream os;
  os << "length ratio " << ratio << " (admissible range [1, " << upper_bound << "])";
  if (!band_fits) os << "; damaged band does not fit inside the bar";
  if (!no_snap_back) os << "; bar long enough to snap back";
  if (!gamma_ok) os << "; warning: gamma above the convexity bound";
  return os.str();
}

}  // namespace xmesh1d
