// nstraj run <config> | plot <dir> | verify <dir>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nstraj/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes trajectory experiments"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  auto* run = app.add_subcommand("run", "run the experiment described by a key=value config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--threads", threads, "override the config thread count")->check(CLI::PositiveNumber);

  std::string dir;
  auto* plot = app.add_subcommand("plot", "write SVG log-log plots for an artifact directory");
  plot->add_option("dir", dir, "artifact directory")->required();
  auto* verify = app.add_subcommand("verify", "recheck summary assertions against the CSVs");
  verify->add_option("dir", dir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : nstraj::kExitConfig;
  }

  if (*run) {
    nstraj::ExperimentConfig cfg;
    try {
      cfg = nstraj::parse_config_file(config_path);
    } catch (const nstraj::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return nstraj::kExitConfig;
    }
    if (threads > 0) cfg.threads = threads;
    const auto res = nstraj::run_experiment(cfg);
    for (const auto& a : res.assertions) {
      std::cout << fmt::format("{} {}: {} {} {}\n", a.passed ? "PASS" : "FAIL", a.name, a.value, a.op, a.threshold);
    }
    std::cout << fmt::format("{} ({}) -> {}\n", res.message, res.status, res.directory.string());
    if (res.status == nstraj::kExitConfig) std::cerr << "config error: " << res.message << '\n';
    return res.status;
  }
  if (*plot) {
    try {
      for (const auto& p : nstraj::emit_plots(dir)) std::cout << p.string() << '\n';
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return nstraj::kExitConfig;
    }
    return 0;
  }
  return nstraj::verify_artifacts(dir, std::cout);
}
