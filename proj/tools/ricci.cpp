#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricci/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Normalized Ricci flow on flat tori and round spheres"};
  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  bool plots = false;
  app.add_option("command", command,
                 "simulate, uniqueness, convergence, manufactured or inequalities "
                 "(default: the config's command key, else simulate)");
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", sets, "override one key, e.g. --set flow.dt=5e-4 (repeatable)");
  app.add_option("--out", out_dir, "output directory (output.dir)");
  app.add_flag("--plots", plots, "write SVG plots (output.plots)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ricci::kExitUsage;
  }

  std::vector<std::string> overrides = sets;
  if (!command.empty()) overrides.push_back("command=" + command);
  if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);
  if (plots) overrides.push_back("output.plots=true");

  ricci::RunConfig cfg;
  try {
    cfg = ricci::load_config(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ricci::kExitUsage;
  }
  return ricci::run(cfg, std::cout, std::cerr);
}
