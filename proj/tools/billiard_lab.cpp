#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "billiards/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"billiard-lab: open billiards, Lyapunov exponents and deformation sweeps"};
  app.require_subcommand(1);

  billiards::CommandOptions opt;
  std::string config, word, out;
  double alpha = 0.0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  bool serial = false;

  const std::pair<const char*, const char*> commands[] = {
      {"check", "table bounds and no-eclipse certificates over the alpha grid"},
      {"orbit", "solve orbits for the selected words"},
      {"lyapunov", "exponent estimate with bounds and convergence table"},
      {"sweep", "continuation sweep over the alpha grid (writes sweep.csv)"},
      {"derivative", "differentiability experiment at alpha = 0"},
      {"oracle", "monodromy oracle and front-expansion check"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config file")->required();
    sub->add_option("--word", word, "word such as 1,2 (periodic) or open:1,2,3");
    sub->add_option("--alpha", alpha, "deformation parameter");
    sub->add_option("--m", m, "orbit length / number of flights");
    sub->add_option("--seed", seed, "sample a word of length --m with this seed");
    sub->add_flag("--oracle", opt.oracle, "cross-check with the monodromy oracle");
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_flag("--serial", serial, "run the serial reference path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.config = config;
  if (sub->count("--word")) opt.word = word;
  if (sub->count("--alpha")) opt.alpha = alpha;
  if (sub->count("--m")) opt.m = m;
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--out")) opt.out = out;
  if (serial) opt.exec = billiards::Execution::serial;
  return billiards::run_command(sub->get_name(), opt, std::cout, std::cerr);
}
