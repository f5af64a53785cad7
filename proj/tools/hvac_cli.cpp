#include "hvac/app.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"HVAC day scheduling: MILP labelling, imitation training and evaluation"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--seed", seed, "seed for synthetic data, training and forecast noise");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override a configuration key (key=value), repeatable")
      ->allow_extra_args(false);
  app.add_flag_callback(
      "--list-keys",
      [] {
        std::cout << "configuration keys:\n";
        hvac::describe_keys(std::cout);
        std::exit(0);
      },
      "print accepted configuration keys and exit");

  const std::pair<const char *, const char *> commands[] = {
      {"solve-day", "solve one day's MILP and write its schedule"},
      {"build-dataset", "label the training days with MILP optima"},
      {"train", "fit the imitation network to the dataset"},
      {"simulate", "run the trained controller closed-loop on one day"},
      {"evaluate", "compare controllers against the end-of-day optimum"},
      {"sweep-alpha", "solve the season for each discomfort weight"},
      {"gen-synth", "write a synthetic season as timestamp,value CSVs"}};
  for (const auto &[name, help] : commands)
    app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  hvac::RunConfig config;
  try {
    hvac::Settings settings;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw hvac::UsageError("cannot open config file " + config_path);
      settings = hvac::read_settings(in, config_path);
    }
    for (const auto &o : overrides) {
      const auto [key, value] = hvac::parse_override(o);
      settings[key] = value;
    }
    if (seed)
      settings["seed"] = std::to_string(*seed);
    if (!out_dir.empty())
      settings["out_dir"] = out_dir;
    config = hvac::resolve_config(settings);
  } catch (const hvac::UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  return hvac::run_command(app.get_subcommands().front()->get_name(), config, std::cout,
                           std::cerr);
}
