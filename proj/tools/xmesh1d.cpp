#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "xmesh1d/config.hpp"
#include "xmesh1d/output.hpp"

namespace {

std::filesystem::path output_dir(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("XMESH1D_OUT"); env && *env) return env;
  return fallback;
}

int run_config(const std::string& path, const std::string& out, bool svg, bool five_elem) {
  xmesh1d::RunConfig cfg = xmesh1d::load_config(path, five_elem);
  if (!out.empty()) cfg.out_dir = out;
  cfg.out_dir = output_dir(cfg.out_dir);
  if (svg) cfg.svg = true;
  const xmesh1d::RunReport rep = xmesh1d::execute(cfg, std::cout);
  std::cout << "wrote " << rep.files.size() << " files to " << cfg.out_dir.string() << "\n";
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static 1D phase-field and lip-field fracture with fixed and X-Mesh discretisations"};
  app.require_subcommand(1);

  std::string config, out;
  bool svg = false;
  auto* run = app.add_subcommand("run", "run a quasi-static loading from a config file");
  run->add_option("config", config, "key=value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_flag("--svg", svg, "also write SVG plots");

  std::string five_config, five_out;
  bool five_svg = false;
  auto* five = app.add_subcommand("five-elem", "five-element stage study");
  five->add_option("config", five_config, "key=value config file")->required()->check(CLI::ExistingFile);
  five->add_option("--out", five_out, "output directory");
  five->add_flag("--svg", five_svg, "also write SVG plots");

  std::string dir_a, dir_b, cmp_out = "compare_out";
  auto* cmp = app.add_subcommand("compare", "merge two completed runs");
  cmp->add_option("dirA", dir_a, "first run directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("dirB", dir_b, "second run directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--out", cmp_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_config(config, out, svg, false);
    if (*five) return run_config(five_config, five_out, five_svg, true);
    const auto rep = xmesh1d::compare(dir_a, dir_b, output_dir(cmp_out));
    auto show = [](const char* name, const xmesh1d::RunSummary& s) {
      std::cout << name << ": final Wd = " << s.final_Wd << " N/m, ";
      if (s.broken)
        std::cout << "broken at U = " << s.U_star << " m\n";
      else
        std::cout << "never broken\n";
    };
    show("A", rep.a);
    show("B", rep.b);
    std::cout << "max err2 gap = " << rep.max_err2_gap << ", max sigma gap = " << rep.max_sigma_gap << " Pa\n"
              << "wrote " << rep.merged.string() << " and " << rep.summary.string() << "\n";
    return 0;
  } catch (const xmesh1d::ConfigError& e) {
    std::cerr << "invalid configuration:\n";
    for (const std::string& msg : e.errors()) std::cerr << "  " << msg << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
