#include <iostream>

#include <CLI11.hpp>

#include "waning/cli.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Bifurcation analysis of an immune-age structured epidemic model"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::optional<double> beta_s, bar_beta;
  bool label = false;

  for (const char* name : {"summary", "equilibria", "branch", "simulate", "bistab"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--beta-s", beta_s, "override beta_s");
    sub->add_option("--bar-beta", bar_beta, "override bar_beta");
    if (std::string(name) == "branch")
      sub->add_flag("--label-stability", label, "probe every branch point by simulation");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = waning::load_config(config);
    if (beta_s)
      cfg.params.beta_s = *beta_s;
    if (bar_beta)
      cfg.params.bar_beta = *bar_beta;
    waning::validate_params(cfg.params);
    waning::CommandOptions opt;
    opt.out_dir = out_dir;
    opt.label_stability = label;
    waning::run_command(app.get_subcommands().front()->get_name(), cfg, opt, std::cout);
  }
  catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
