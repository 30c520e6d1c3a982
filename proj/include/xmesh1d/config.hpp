// Run configuration in a plain key=value format.
//
//   # comment
//   model = phase | lip                     (phase)
//   mesh = fixed | xmesh                    (fixed)
//   nc = <int >= 1>                         (5)
//   L, lc, E, Gc, sigc = <real > 0>         (bar example, or the five-element
//                                            example when five_elem = true)
//   steps = <int >= 1>                      (200)
//   umax_factor = <real > 0>                (1.1, or 1.2 with five_elem)
//   zoom = <lo>, <hi>, <steps>              (none; lo and hi in units of wc)
//   out = <directory>                       (xmesh1d_out)
//   svg = true | false                      (false)
//   five_elem = true | false                (false)
//   h0_rule = zero | from_reduction         (zero)
//   grid = <int >= 2001>                    (2001)
//   allow_invalid = true | false            (false)
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xmesh1d/five_element.hpp"
#include "xmesh1d/model.hpp"
#include "xmesh1d/quasistatic.hpp"

namespace xmesh1d {

struct ZoomSpec {
  double lo = 0.95;  // [wc]
  double hi = 1.01;  // [wc]
  int steps = 200;
};

struct RunConfig {
  ModelKind model = ModelKind::PhaseField;
  MeshMode mesh = MeshMode::Fixed;
  int n_c = 5;
  MaterialParams material = MaterialParams::bar_example();
  int steps = 200;
  double umax_factor = 1.1;
  std::optional<ZoomSpec> zoom;
  std::filesystem::path out_dir = "xmesh1d_out";
  bool svg = false;
  bool five_elem = false;
  H0Rule h0_rule = H0Rule::Zero;
  int grid = 2001;
  bool allow_invalid = false;

  Bar bar() const { return Bar::make(five_elem ? ModelKind::LipField : model, material); }
  LoadSchedule schedule() const;
};

/// Carries every problem found in a configuration, one message per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Semantic problems of an already parsed configuration; empty when valid.
std::vector<std::string> validate(const RunConfig& cfg);

/// Throws ConfigError listing all syntax and semantic errors. `five_elem`
/// sets the default of the five_elem key.
RunConfig parse_config(const std::string& text, bool five_elem = false);
RunConfig load_config(const std::filesystem::path& path, bool five_elem = false);

}  // namespace xmesh1d
