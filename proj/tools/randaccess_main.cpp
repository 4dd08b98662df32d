#include <iostream>

#include "CLI11.hpp"
#include "randaccess/commands.hpp"

int main(int argc, char** argv) {
  using randaccess::CommandRequest;

  CLI::App app{"Channel-aware random access design for wireless control loops"};
  app.require_subcommand(1);

  CommandRequest req;
  std::string out_dir;
  std::string mode;
  std::uint64_t seed = 0;
  long horizon = 0;
  std::string policies;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", req.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "expectation mode")->check(CLI::IsMember({"quadrature", "mc"}));
  };

  CLI::App* rates = app.add_subcommand("rates", "success requirement of every loop");
  add_common(rates);

  CLI::App* optimize = app.add_subcommand("optimize", "run the dual access-policy iteration");
  add_common(optimize);
  add_mode(optimize);
  optimize->add_option("--seed", seed, "Monte-Carlo seed");

  CLI::App* simulate = app.add_subcommand("simulate", "simulate the loops under given policies");
  add_common(simulate);
  simulate->add_option("--policies", policies, "policy file written by optimize")->required();
  simulate->add_option("--horizon", horizon, "number of slots")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "simulation seed");

  CLI::App* pipeline = app.add_subcommand("pipeline", "rates, optimize and simulate in one run");
  add_common(pipeline);
  add_mode(pipeline);
  pipeline->add_option("--seed", seed, "seed for sampling and simulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : randaccess::kExitParse;
  }

  CLI::App* chosen = app.get_subcommands().front();
  req.command = chosen->get_name();
  if (chosen->count("--out")) req.out_dir = out_dir;
  if (chosen->get_option_no_throw("--mode") && chosen->count("--mode")) req.mode = mode;
  if (chosen->get_option_no_throw("--seed") && chosen->count("--seed")) req.seed = seed;
  if (chosen->get_option_no_throw("--horizon") && chosen->count("--horizon")) req.horizon = horizon;
  if (chosen->get_option_no_throw("--policies") && chosen->count("--policies")) req.policies_path = policies;

  return randaccess::run_command(req, std::cout, std::cerr);
}
