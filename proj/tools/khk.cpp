// khk: simulate, verify and scan Kahan discretizations of quadratic flows.
//
//   khk simulate --system lagrange --steps 500 --out run1
//   khk verify --config first_clebsch.json --out run1
//   khk hk-scan --system kirchhoff --max-order 4
//   khk report --config cfg.json

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "khk/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kahan discretization: orbits, integrals and HK bases"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string system_name;
  std::optional<double> eps;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_order;
  std::string out_dir = ".";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--system", system_name,
                    "system kind: general_clebsch, first_clebsch, second_clebsch, kirchhoff, "
                    "lagrange, planar_family");
    sub->add_option("--eps", eps, "step size");
    sub->add_option("--steps", steps, "number of map steps")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
  };

  CLI::App* simulate = app.add_subcommand("simulate", "write orbit.csv with per-step integrals");
  CLI::App* verify = app.add_subcommand("verify", "run the property suite, write verify.json");
  CLI::App* scan = app.add_subcommand("hk-scan", "Wronskian null spaces, write hkscan.json");
  CLI::App* report = app.add_subcommand("report", "run the property suite, write report.txt");
  for (CLI::App* sub : {simulate, verify, scan, report}) add_common(sub);
  scan->add_option("--max-order", max_order, "highest Wronskian order")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  khk::ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      config = khk::load_config(config_path);
      if (!system_name.empty() && system_name != khk::kind_name(config.kind())) {
        throw khk::ConfigError("--system " + system_name + " contradicts the configured kind " +
                               std::string(khk::kind_name(config.kind())));
      }
    } else if (!system_name.empty()) {
      config = khk::default_config(khk::kind_from_name(system_name));
    } else {
      throw khk::ConfigError("either --config or --system is required");
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return khk::kExitConfig;
  }
  if (eps) config.eps = *eps;
  if (steps) config.steps = *steps;
  if (seed) config.seed = *seed;
  if (max_order) config.hk.max_order = *max_order;

  const CLI::App* chosen = app.get_subcommands().front();
  const khk::Command command = khk::command_from_name(chosen->get_name());
  return khk::run_command(config, command, out_dir, std::cerr);
}
