// Command-line driver: <tool> <experiment> --config <path> [--out <dir>] [--threads n]

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "nhrm/experiments.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "experiment config (JSON)")
      ->required();
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_option("--threads", o.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-Hermitian Rice-Mele toolkit"};
  app.require_subcommand(1);

  const std::vector<std::string> experiments = {
      "spectrum_scan", "chern", "zak", "edge_profile", "pump"};
  std::map<std::string, CommonOpts> opts;
  for (const auto& name : experiments)
    add_common(app.add_subcommand(name, "run the " + name + " experiment"),
               opts[name]);

  CLI11_PARSE(app, argc, argv);

  const std::string chosen = app.get_subcommands().front()->get_name();
  const CommonOpts& o = opts[chosen];
  const std::string out =
      o.out_dir.empty() ? ("runs/" + chosen) : o.out_dir;

  try {
    nhrm::json config = nhrm::parse_config_file(o.config_path);
    if (!config.is_object()) throw nhrm::ConfigError("config must be an object");
    if (!config.contains("experiment")) config["experiment"] = chosen;
    if (config.at("experiment") != chosen)
      throw nhrm::ConfigError("config experiment \"" +
                              config.at("experiment").get<std::string>() +
                              "\" does not match subcommand \"" + chosen + "\"");
    const nhrm::json summary = nhrm::run_experiment(config, out, o.threads);
    std::cout << summary.dump(2) << "\n";
  } catch (const nhrm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nhrm::Error& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
