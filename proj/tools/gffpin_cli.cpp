#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gffpin/errors.hpp"
#include "gffpin/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Disordered pinning of the lattice Gaussian free field"};
  app.require_subcommand(1);

  std::string config;
  gffpin::ConfigOverrides o;

  for (const auto& kind : gffpin::experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { o.seed = v; }, "master seed");
    sub->add_option_function<int>("--threads", [&](const int& v) { o.threads = v; }, "worker threads");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { o.out_dir = v; }, "output directory");
    sub->add_option_function<double>("--budget-minutes", [&](const double& v) { o.budget_minutes = v; },
                                      "wall clock budget, 0 for none");
    if (kind == "hc2-scan")
      sub->add_option_function<double>("--beta", [&](const double& v) { o.beta = v; }, "single inverse temperature");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gffpin::kExitValidation;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    const gffpin::ExperimentConfig cfg = gffpin::load_config(kind, config, o);
    return gffpin::run_experiment(cfg, std::cerr);
  } catch (const gffpin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gffpin::kExitValidation;
  }
}
