#include "xmesh1d/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "xmesh1d/analytic.hpp"
#include "xmesh1d/five_element.hpp"
#include "xmesh1d/mesh.hpp"
#include "xmesh1d/potential.hpp"

namespace xmesh1d {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSnapshotTol = 1e-8;

// Tracks written files and deletes them unless the run completes.
class ArtifactSet {
 public:
  explicit ArtifactSet(const fs::path& dir) : dir_(dir) {
    created_dir_ = !fs::exists(dir_);
    fs::create_directories(dir_);
  }
  ArtifactSet(const ArtifactSet&) = delete;
  ArtifactSet& operator=(const ArtifactSet&) = delete;
  ~ArtifactSet() {
    if (committed_) return;
    std::error_code ec;
    for (const fs::path& p : files_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    files_.push_back(p);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out = open(name);
    out << content;
    close(out, name);
  }

  void close(std::ofstream& out, const std::string& name) {
    out.close();
    if (!out) throw std::runtime_error("I/O error while writing " + (dir_ / name).string());
  }

  std::vector<fs::path> commit() {
    committed_ = true;
    return files_;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool created_dir_ = false;
  bool committed_ = false;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  CsvWriter& operator<<(double v) { return cell(format_number(v)); }
  CsvWriter& operator<<(int v) { return cell(std::to_string(v)); }
  CsvWriter& operator<<(bool v) { return cell(v ? "1" : "0"); }
  CsvWriter& operator<<(const std::string& v) { return cell(v); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& out_;
  bool first_ = true;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct MirroredField {
  std::vector<double> x, u, d;
};

MirroredField mirrored(const StepState& s) {
  MirroredField f;
  const Eigen::Index m = s.x.size();
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    f.x.push_back(-s.x[i]);
    f.u.push_back(-s.u[i]);
    f.d.push_back(s.d[i]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    f.x.push_back(s.x[i]);
    f.u.push_back(s.u[i]);
    f.d.push_back(s.d[i]);
  }
  return f;
}

void check_snapshot(const Bar& bar, const StepState& s, const StepState& prev) {
  const PrevSnapshot snap{prev.x, prev.d, prev.h};
  const ConstraintReport rep = constraint_residuals(s.d, s.h, bar.p.L, snap, bar);
  if (!rep.feasible(kSnapshotTol)) {
    std::ostringstream msg;
    msg << "field snapshot at step " << s.index << " fails the feasibility check (length " << rep.length << ", box "
        << rep.box << ", irreversibility " << rep.max_irreversibility() << ", lipschitz " << rep.max_lipschitz()
        << ")";
    throw std::runtime_error(msg.str());
  }
}

RunReport execute_quasistatic(const RunConfig& cfg, std::ostream& log) {
  const Bar bar = cfg.bar();
  const LoadSchedule schedule = cfg.schedule();
  RunOptions opts;
  opts.allow_invalid = cfg.allow_invalid;

  ArtifactSet files(cfg.out_dir);
  log << "running " << to_string(bar.model) << " " << to_string(cfg.mesh) << " nc=" << cfg.n_c << " with "
      << schedule.increments() << " increments up to U = " << schedule.U.back() << " m\n";
  const History hist = run(bar, cfg.mesh, cfg.n_c, schedule, opts);
  const int N = static_cast<int>(hist.steps.size()) - 1;

  RunReport rep;
  rep.increments = N;
  rep.broken = hist.broken;
  rep.U_star = hist.U_star;

  {
    std::ofstream out = files.open("steps.csv");
    CsvWriter csv(out, {"step", "U", "sigma", "d0", "h0", "K", "Wd", "err2", "broken", "solver_status",
                        "kkt_residual"});
    for (int k = 1; k <= N; ++k) {
      const StepState& s = hist.steps[static_cast<std::size_t>(k)];
      if (s.status != SolverStatus::Converged) ++rep.nonconverged;
      csv << k << s.U << s.sigma << s.d0() << s.h0() << s.K << hist.Wd[static_cast<std::size_t>(k)]
          << l2_error(bar, s) << s.broken << to_string(s.status) << s.kkt_residual;
      csv.end_row();
    }
    files.close(out, "steps.csv");
  }

  const std::vector<int> snaps = snapshot_steps(N);
  std::vector<Series> damage_plot, displacement_plot;
  for (int k : snaps) {
    const StepState& s = hist.steps[static_cast<std::size_t>(k)];
    check_snapshot(bar, s, hist.steps[static_cast<std::size_t>(k - 1)]);
    const MirroredField f = mirrored(s);
    const std::string name = "fields_" + std::to_string(k) + ".csv";
    std::ofstream out = files.open(name);
    CsvWriter csv(out, {"x", "u", "d"});
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      csv << f.x[i] << f.u[i] << f.d[i];
      csv.end_row();
    }
    files.close(out, name);
    const std::string label = "step " + std::to_string(k);
    damage_plot.push_back({label, f.x, f.d});
    displacement_plot.push_back({label, f.x, f.u});
  }

  if (cfg.mesh == MeshMode::XMesh) {
    std::ofstream out = files.open("residuals.csv");
    CsvWriter csv(out, {"step", "U", "stress_law", "max_stationarity", "max_gradient_relation", "damaged_elements",
                        "other_slopes", "lambda", "lambda_ref", "max_complementarity", "jump", "cohesive_sigma",
                        "solver_status"});
    for (int k = 1; k <= N; ++k) {
      const StepState& s = hist.steps[static_cast<std::size_t>(k)];
      const ResidualReport r = xmesh_residuals(bar, s);
      const double strain = s.U / bar.p.L;
      const double lambda_ref = -0.5 * bar.p.E * s.K * s.K * strain * strain;
      const bool softening = s.d0() > 0.0 && s.d0() < 1.0;
      const double jump = 2.0 * s.u[0];  // opening of the central element
      csv << k << s.U << (softening ? r.stress_law : kNaN) << r.max_stationarity << r.max_gradient_relation << r.damaged_elements
          << r.other_slopes << (s.solved ? s.lambda : kNaN) << lambda_ref << s.max_complementarity << jump
          << (jump < bar.q.wc ? cohesive_law(bar, std::max(jump, 0.0)) : 0.0) << to_string(s.status);
      csv.end_row();
    }
    files.close(out, "residuals.csv");
  }

  if (cfg.svg) {
    Series stress{"sigma", {}, {}}, dissipation{"Wd", {}, {}};
    for (std::size_t k = 0; k < hist.steps.size(); ++k) {
      stress.x.push_back(hist.steps[k].U);
      stress.y.push_back(hist.steps[k].sigma);
      dissipation.x.push_back(hist.steps[k].U);
      dissipation.y.push_back(hist.Wd[k]);
    }
    files.write("sigma_U.svg", svg_line_plot("stress", "U [m]", "sigma [Pa]", {stress}));
    files.write("damage.svg", svg_line_plot("damage", "x [m]", "d", damage_plot));
    files.write("displacement.svg", svg_line_plot("displacement", "x [m]", "u [m]", displacement_plot));
    files.write("dissipation.svg", svg_line_plot("dissipated energy", "U [m]", "Wd [N/m]", {dissipation}));
  }

  rep.exit_code = rep.nonconverged == 0 ? 0 : 2;
  rep.files = files.commit();
  log << N - rep.nonconverged << "/" << N << " increments converged; ";
  if (hist.broken)
    log << "broken at U = " << hist.U_star << " m (" << hist.U_star / bar.q.wc << " wc)";
  else
    log << "not broken";
  log << "; final Wd = " << hist.Wd.back() << " N/m\n";
  return rep;
}

struct FInfMin {
  double d0 = 0;
  double value = 0;
};

FInfMin f_inf_global(double U, const FiveElemSetup& s, H0Rule rule, int grid) {
  const auto mins = local_minima([&](double d0) { return f_inf(d0, U, s, rule); }, grid);
  if (mins.empty()) return {kNaN, kNaN};
  const auto it = std::min_element(mins.begin(), mins.end(),
                                   [](const LocalMin& a, const LocalMin& b) { return a.value < b.value; });
  return {it->d0, it->value};
}

RunReport execute_five_element(const RunConfig& cfg, std::ostream& log) {
  FiveElemSetup setup;
  setup.p = cfg.material;
  const double wc = setup.bar().q.wc;
  const int N = cfg.steps;
  const double U_max = cfg.umax_factor * wc;

  ArtifactSet files(cfg.out_dir);
  log << "five-element study with " << N << " load values up to " << cfg.umax_factor << " wc, h0 rule "
      << to_string(cfg.h0_rule) << "\n";

  std::vector<double> Us;
  std::vector<char> labels;
  {
    std::ofstream out = files.open("stages.csv");
    CsvWriter csv(out, {"U", "U_over_wc", "stage", "minima", "interior_d0", "interior_value", "broken_value",
                        "global_d0", "global_value", "f_inf_d0", "f_inf_value", "h0_rule"});
    for (int k = 0; k <= N; ++k) {
      const double U = U_max * k / N;
      const StageReport st = classify_stage(U, setup, cfg.grid);
      double interior_d0 = kNaN, interior_value = kNaN, broken_value = kNaN;
      for (const LocalMin& m : st.minima) {
        if (m.d0 == 1.0) {
          broken_value = m.value;
        } else if (std::isnan(interior_value) || m.value < interior_value) {
          interior_d0 = m.d0;
          interior_value = m.value;
        }
      }
      const FInfMin fi = f_inf_global(U, setup, cfg.h0_rule, cfg.grid);
      csv << U << U / wc << std::string(1, st.stage) << static_cast<int>(st.minima.size()) << interior_d0
          << interior_value << broken_value << st.global.d0 << st.global.value << fi.d0 << fi.value
          << to_string(cfg.h0_rule);
      csv.end_row();
      Us.push_back(U);
      labels.push_back(st.stage);
    }
    files.close(out, "stages.csv");
  }

  // one representative load per stage: the middle of its first run of labels
  std::map<char, double> representative;
  for (std::size_t k = 0; k < labels.size();) {
    std::size_t e = k;
    while (e + 1 < labels.size() && labels[e + 1] == labels[k]) ++e;
    representative.emplace(labels[k], Us[(k + e) / 2]);
    k = e + 1;
  }

  std::vector<Series> reduced_plot;
  for (const auto& [stage, U] : representative) {
    const std::string tag(1, stage);
    {
      const std::string name = "surface_" + tag + ".csv";
      std::ofstream out = files.open(name);
      CsvWriter csv(out, {"U", "d0", "h0", "F5"});
      constexpr int n = 101;
      for (int i = 0; i < n; ++i) {
        const double d0 = static_cast<double>(i) / (n - 1);
        const double h0_max = setup.p.L - 2.0 * d0 * setup.p.lc;
        if (h0_max < 0.0) break;
        for (int j = 0; j < n; ++j) {
          const double h0 = h0_max * j / (n - 1);
          csv << U << d0 << h0 << f5(d0, h0, U, setup);
          csv.end_row();
        }
      }
      files.close(out, name);
    }
    {
      const std::string name = "reduced_" + tag + ".csv";
      std::ofstream out = files.open(name);
      CsvWriter csv(out, {"U", "d0", "h0d0", "F5_reduced", "F_inf"});
      Series curve{"stage " + tag + " F5", {}, {}}, limit{"stage " + tag + " F_inf (" + to_string(cfg.h0_rule) + ")", {}, {}};
      constexpr int n = 1001;
      for (int i = 0; i < n; ++i) {
        const double d0 = static_cast<double>(i) / (n - 1);
        const double hd = h0d0_of(d0, U, setup);
        const double fr = f5_reduced(d0, U, setup);
        const double fi = f_inf(d0, U, setup, cfg.h0_rule);
        csv << U << d0 << hd << fr << fi;
        csv.end_row();
        curve.x.push_back(d0);
        curve.y.push_back(fr);
        limit.x.push_back(d0);
        limit.y.push_back(fi);
      }
      files.close(out, name);
      reduced_plot.push_back(std::move(curve));
      reduced_plot.push_back(std::move(limit));
    }
  }

  if (cfg.svg) files.write("reduced.svg", svg_line_plot("reduced five-element potential", "d0", "F [N/m]", reduced_plot));

  std::string sequence;
  for (char c : labels)
    if (sequence.empty() || sequence.back() != c) sequence += c;
  log << "stage sequence: " << sequence << "\n";

  RunReport rep;
  rep.increments = N;
  rep.files = files.commit();
  return rep;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> snapshot_steps(int increments) {
  std::vector<int> out;
  for (int j = 1; j <= 10; ++j) {
    const int k = static_cast<int>(std::lround(static_cast<double>(j) * increments / 10.0));
    if (k >= 1 && (out.empty() || out.back() != k)) out.push_back(k);
  }
  return out;
}

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series) {
  constexpr double W = 720, H = 480, left = 90, right = 180, top = 40, bottom = 60;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << px(xv) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(xv)
      << "</text>\n";
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\"" << py(yv)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << tick_label(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(xlabel)
    << "</text>\n";
  o << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << top + ph / 2
    << ")\">" << xml_escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = palette[k % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << px(s.x[i]) << "," << py(s.y[i]);
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 12 + 16.0 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

RunReport execute(const RunConfig& cfg, std::ostream& log) {
  const std::vector<std::string> errors = validate(cfg);
  if (!errors.empty()) throw ConfigError(errors);
  return cfg.five_elem ? execute_five_element(cfg, log) : execute_quasistatic(cfg, log);
}

std::vector<StepRow> read_steps(const fs::path& run_dir) {
  const fs::path p = run_dir / "steps.csv";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,U,sigma", 0) != 0)
    throw std::runtime_error(p.string() + ": missing steps.csv header");
  std::vector<StepRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> c = split(line);
    if (c.size() != 11) throw std::runtime_error(p.string() + ":" + std::to_string(line_no) + ": expected 11 columns");
    try {
      StepRow r;
      r.step = std::stoi(c[0]);
      r.U = std::stod(c[1]);
      r.sigma = std::stod(c[2]);
      r.d0 = std::stod(c[3]);
      r.h0 = std::stod(c[4]);
      r.K = std::stod(c[5]);
      r.Wd = std::stod(c[6]);
      r.err2 = std::stod(c[7]);
      r.broken = c[8] == "1";
      r.status = c[9];
      r.kkt = std::stod(c[10]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error(p.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

RunSummary summarize(const std::vector<StepRow>& rows) {
  RunSummary s;
  s.U_star = kNaN;
  if (rows.empty()) return s;
  s.final_Wd = rows.back().Wd;
  for (const StepRow& r : rows) {
    if (r.broken) {
      s.broken = true;
      s.U_star = r.U;
      break;
    }
  }
  return s;
}

CompareReport compare(const fs::path& run_a, const fs::path& run_b, const fs::path& out_dir) {
  const std::vector<StepRow> a = read_steps(run_a);
  const std::vector<StepRow> b = read_steps(run_b);
  if (a.size() != b.size())
    throw std::runtime_error("schedule mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                             " steps");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].step != b[k].step || std::abs(a[k].U - b[k].U) > 1e-12 * std::max(std::abs(a[k].U), std::abs(b[k].U)))
      throw std::runtime_error("schedule mismatch at step " + std::to_string(a[k].step));
  }

  CompareReport rep;
  rep.a = summarize(a);
  rep.b = summarize(b);
  ArtifactSet files(out_dir);
  {
    std::ofstream out = files.open("merged.csv");
    CsvWriter csv(out, {"step", "U", "sigma_a", "sigma_b", "d0_a", "d0_b", "Wd_a", "Wd_b", "err2_a", "err2_b",
                        "broken_a", "broken_b"});
    for (std::size_t k = 0; k < a.size(); ++k) {
      rep.max_err2_gap = std::max(rep.max_err2_gap, std::abs(a[k].err2 - b[k].err2));
      rep.max_sigma_gap = std::max(rep.max_sigma_gap, std::abs(a[k].sigma - b[k].sigma));
      csv << a[k].step << a[k].U << a[k].sigma << b[k].sigma << a[k].d0 << b[k].d0 << a[k].Wd << b[k].Wd << a[k].err2
          << b[k].err2 << a[k].broken << b[k].broken;
      csv.end_row();
    }
    files.close(out, "merged.csv");
  }
  {
    std::ofstream out = files.open("summary.csv");
    CsvWriter csv(out, {"run", "final_Wd", "broken", "U_star", "max_err2_gap", "max_sigma_gap"});
    csv << run_a.string() << rep.a.final_Wd << rep.a.broken << rep.a.U_star << rep.max_err2_gap << rep.max_sigma_gap;
    csv.end_row();
    csv << run_b.string() << rep.b.final_Wd << rep.b.broken << rep.b.U_star << rep.max_err2_gap << rep.max_sigma_gap;
    csv.end_row();
    files.close(out, "summary.csv");
  }
  rep.merged = out_dir / "merged.csv";
  rep.summary = out_dir / "summary.csv";
  files.commit();
  return rep;
}

}  // namespace xmesh1d
