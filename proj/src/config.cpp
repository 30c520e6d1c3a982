#include "xmesh1d/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace xmesh1d {

namespace {

std::string join_lines(const std::vector<std::string>& v) {
  std::string out;
  for (const std::string& s : v) {
    if (!out.empty()) out += '\n';
    out += s;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::vector<std::pair<int, std::string>>& errors)
      : entries_(std::move(entries)), errors_(errors) {}

  template <class T, class Parse>
  void read(const std::string& key, T& target, Parse parse, const char* expected) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return;
    try {
      target = parse(it->second.value);
    } catch (const std::exception&) {
      const std::string where = "line " + std::to_string(it->second.line) + ": ";
      errors_.emplace_back(it->second.line, where + key + ": expected " + expected + ", got '" + it->second.value + "'");
    }
  }

 private:
  std::map<std::string, Entry> entries_;
  std::vector<std::pair<int, std::string>>& errors_;
};

double to_double(const std::string& s) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument(s);
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument(s);
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument(s);
}

ZoomSpec to_zoom(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(trim(item));
  if (parts.size() != 3) throw std::invalid_argument(s);
  return {to_double(parts[0]), to_double(parts[1]), to_int(parts[2])};
}

const std::vector<std::string> kKeys = {"model", "mesh",  "nc",  "L",   "lc",       "E",         "Gc",
                                        "sigc",  "steps", "umax_factor", "zoom", "out", "svg",
                                        "five_elem", "h0_rule", "grid", "allow_invalid"};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_lines(errors)), errors_(std::move(errors)) {}

LoadSchedule RunConfig::schedule() const {
  const double wc = bar().q.wc;
  if (!zoom) return LoadSchedule::uniform(umax_factor * wc, steps);
  return LoadSchedule::zoomed(umax_factor * wc, steps, {zoom->lo * wc, zoom->hi * wc, zoom->steps});
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> e;
  if (c.n_c < 1) e.push_back("nc must be ≥ 1");
  if (c.steps < 1) e.push_back("steps must be ≥ 1");
  if (!(c.umax_factor > 0.0)) e.push_back("umax_factor must be > 0");
  const std::pair<const char*, double> material[] = {
      {"L", c.material.L}, {"lc", c.material.lc}, {"E", c.material.E}, {"Gc", c.material.Gc}, {"sigc", c.material.sigc}};
  bool material_ok = true;
  for (const auto& [name, v] : material) {
    if (!(v > 0.0 && std::isfinite(v))) {
      e.push_back(std::string(name) + " must be > 0");
      material_ok = false;
    }
  }
  if (c.zoom) {
    if (!(c.zoom->lo > 0.0 && c.zoom->hi > c.zoom->lo)) e.push_back("zoom needs 0 < lo < hi");
    if (c.zoom->steps < 1) e.push_back("zoom steps must be ≥ 1");
  }
  if (c.grid < 2001) e.push_back("grid must be ≥ 2001");
  if (material_ok) {
    const Bar bar = c.bar();
    if (c.five_elem) {
      if (std::abs(bar.q.gamma - 0.5) > 1e-12)
        e.push_back("five_elem requires gamma = lc sigc^2/(E Gc) = 1/2, got " + std::to_string(bar.q.gamma));
    } else if (!c.allow_invalid) {
      const ValidityReport v = validity(bar.model, bar.p, bar.q);
      if (!v.valid()) e.push_back("bar outside the cohesive-equivalence range: " + v.describe());
    }
  }
  return e;
}

RunConfig parse_config(const std::string& text, bool five_elem) {
  std::vector<std::pair<int, std::string>> located;
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      located.emplace_back(line_no, where + "expected key = value, got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      located.emplace_back(line_no, where + "unknown key '" + key + "'");
      continue;
    }
    if (entries.count(key)) {
      located.emplace_back(line_no, where + "duplicate key '" + key + "' (first set on line " +
                                        std::to_string(entries[key].line) + ")");
      continue;
    }
    entries[key] = {value, line_no};
  }

  RunConfig c;
  c.five_elem = five_elem;
  Reader r(std::move(entries), located);
  r.read("five_elem", c.five_elem, to_bool, "true or false");
  if (c.five_elem) {
    c.material = MaterialParams::five_element_example();
    c.umax_factor = 1.2;
  }
  r.read("model", c.model, model_from_string, "phase or lip");
  r.read("mesh", c.mesh, mesh_mode_from_string, "fixed or xmesh");
  r.read("nc", c.n_c, to_int, "an integer");
  r.read("L", c.material.L, to_double, "a number");
  r.read("lc", c.material.lc, to_double, "a number");
  r.read("E", c.material.E, to_double, "a number");
  r.read("Gc", c.material.Gc, to_double, "a number");
  r.read("sigc", c.material.sigc, to_double, "a number");
  r.read("steps", c.steps, to_int, "an integer");
  r.read("umax_factor", c.umax_factor, to_double, "a number");
  r.read("zoom", c.zoom, to_zoom, "lo, hi, steps");
  r.read("out", c.out_dir, [](const std::string& s) {
    if (s.empty()) throw std::invalid_argument(s);
    return std::filesystem::path(s);
  }, "a directory");
  r.read("svg", c.svg, to_bool, "true or false");
  r.read("h0_rule", c.h0_rule, h0_rule_from_string, "from_reduction or zero");
  r.read("grid", c.grid, to_int, "an integer");
  r.read("allow_invalid", c.allow_invalid, to_bool, "true or false");

  std::stable_sort(located.begin(), located.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> errors;
  for (auto& e : located) errors.push_back(std::move(e.second));
  const std::vector<std::string> semantic = validate(c);
  errors.insert(errors.end(), semantic.begin(), semantic.end());
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool five_elem) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), five_elem);
}

}  // namespace xmesh1d
