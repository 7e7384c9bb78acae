#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "stable_tmle/errors.hpp"
#include "stable_tmle/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::map<std::string, std::string> values;
};

// Registers the shared flags on a subcommand; each one lands in flags.values
// under its config-file key so that flags override the file.
void add_flags(CLI::App* cmd, Flags& flags) {
  struct Spec {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Spec specs[] = {
      {"--theta0", "theta0", "stable parameters mu,sigma,alpha,beta"},
      {"--ou", "ou", "OU parameters alpha,sigma,lambda"},
      {"--n", "n", "sample size or number of observations"},
      {"--h", "h", "sampling interval"},
      {"--reps", "reps", "number of replications"},
      {"--seed", "seed", "base seed"},
      {"--grid", "grid", "frequency grid start,step,k"},
      {"--estimator", "estimator", "comma list of tmle, explicit-gmm, preliminary"},
      {"--out", "out", "output directory"},
      {"--data", "data", "input series (one value per line, last CSV field)"},
      {"--trim", "trim", "smallest lambda* values dropped in the trimmed summary"},
      {"--max-iter", "max_iter", "scoring iteration cap"},
  };
  for (const auto& s : specs) {
    const std::string key = s.key;
    cmd->add_option_function<std::string>(
        s.flag, [&flags, key](const std::string& v) { flags.values[key] = v; }, s.help);
  }
  cmd->add_option("--config", flags.config, "key=value configuration file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trigonometric ML estimation for stable laws and stable OU processes"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Flags flags;
  const std::pair<const char*, const char*> modes[] = {
      {"sample", "draw i.i.d. stable samples"},
      {"fit", "fit a stable law to a data file"},
      {"sim-ou", "simulate a stable OU path"},
      {"fit-ou", "fit a stable OU process to an observed path"},
      {"montecarlo", "replication study for i.i.d. samples"},
      {"montecarlo-ou", "replication study for OU paths"},
  };
  for (const auto& [name, help] : modes) add_flags(app.add_subcommand(name, help), flags);

  CLI11_PARSE(app, argc, argv);

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    stable_tmle::ExperimentConfig cfg;
    if (!flags.config.empty()) cfg = stable_tmle::apply_settings(cfg, stable_tmle::read_config_file(flags.config));
    cfg.mode = stable_tmle::parse_mode(mode);
    cfg = stable_tmle::apply_settings(cfg, flags.values);
    return stable_tmle::run(cfg, std::cout);
  } catch (const stable_tmle::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
