// rspace: run experiments, validate configs, list fixtures.
//
// Exit codes: 0 ok, 2 invalid input, 3 a run finished but a check failed.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rspace/harness.hpp"

namespace h = rspace::harness;

int main(int argc, char** argv) {
  CLI::App app{"Random-space particle experiments"};
  app.require_subcommand(1);

  std::string config_path, fixture, out = "out", format = "json", filter;
  std::int64_t seed = -1;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "INI config file");
  run->add_option("--fixture", fixture, "named fixture instead of a config file");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out, "output directory");
  run->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* val = app.add_subcommand("validate", "parse and check a config without running it");
  val->add_option("--config", config_path, "INI config file");
  val->add_option("--fixture", fixture, "named fixture");

  auto* fix = app.add_subcommand("fixtures", "list the fixture catalog");
  fix->add_option("filter", filter, "substring of the fixture name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto load = [&]() {
    if (config_path.empty() == fixture.empty())
      throw rspace::ValidationError("give exactly one of --config or --fixture");
    h::Config c = fixture.empty() ? h::Config::load(config_path) : h::fixture_config(fixture);
    if (seed >= 0) c.set("seed", std::to_string(seed));
    return c;
  };

  try {
    if (*fix) {
      std::cout << h::list_fixtures(filter).dump(2) << '\n';
      return 0;
    }
    if (*val) {
      h::validate(load());
      std::cout << "ok\n";
      return 0;
    }
    const h::RunManifest m = h::run(load(), out, format);
    std::cout << m.to_json().dump(2) << '\n';
    return m.checks_passed ? 0 : 3;
  } catch (const rspace::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
