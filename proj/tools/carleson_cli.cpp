#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "carleson/harness.hpp"

namespace h = carleson::harness;

namespace {

void print_registry() {
  std::cout << "# experiments, version " << h::version << '\n';
  std::cout << "name,description,anchor\n";
  for (auto const& e : h::registry()) std::cout << e.name << ',' << e.description << ',' << e.anchor << '\n';
}

int run_config(std::string const& path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
               std::vector<std::string> const& overrides) {
  h::RawConfig raw = h::read_config_file(path);
  for (auto const& kv : overrides) h::apply_override(raw, kv);
  if (seed) raw["seed"] = std::to_string(*seed);
  if (out) raw["output_path"] = *out;
  h::ExperimentConfig const cfg = h::validate_config(raw);
  h::RunOutcome const res = h::run(cfg);
  std::cout << res.summary << '\n';
  std::cout << "# wrote " << res.output_path << '\n';
  return res.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random discrete Carleson operator experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(h::version));

  auto* list = app.add_subcommand("list", "List the experiment registry");

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  run->add_option("config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out, "Override output_path");
  run->add_option("--override", overrides, "Override one config entry, key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      print_registry();
      return 0;
    }
    return run_config(config_path, seed, out, overrides);
  } catch (h::ConfigError const& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (std::exception const& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
