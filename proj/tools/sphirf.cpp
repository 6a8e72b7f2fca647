// Command-line front end: one subcommand per run, configured by a JSON document.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "sphirf/error.hpp"
#include "sphirf/pipeline.hpp"
#include "sphirf/run_config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Invocation {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> kappa;
  std::optional<int> d;
  std::optional<std::string> out;
  std::optional<std::string> input;
};

CLI::App* add_command(CLI::App& app, sphirf::Command command, const char* help,
                      Invocation& inv) {
  CLI::App* sub = app.add_subcommand(std::string(sphirf::command_name(command)), help);
  sub->add_option("-c,--config", inv.config_path, "JSON run configuration")->required();
  if (command == sphirf::Command::Simulate) sub->add_option("--seed", inv.seed, "Override grid.seed");
  if (command != sphirf::Command::SelectOrder) {
    sub->add_option("--kappa", inv.kappa, "Override intrinsic.kappa");
  }
  if (command != sphirf::Command::Curves) sub->add_option("--d", inv.d, "Override intrinsic.d");
  sub->add_option("--out", inv.out, "Override the output directory");
  if (command != sphirf::Command::Simulate && command != sphirf::Command::Curves) {
    sub->add_option("--input", inv.input, "Override the input field CSV");
  }
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic random functions on the sphere: simulate, estimate, fit, select order"};
  app.require_subcommand(1);
  Invocation inv;
  const std::pair<sphirf::Command, const char*> commands[] = {
      {sphirf::Command::Simulate, "Draw an exact Gaussian IRF(kappa, d) field"},
      {sphirf::Command::Fit, "Fit (alpha, beta, gamma0) to the binned MoM table of a field"},
      {sphirf::Command::Mom, "Binned method-of-moments covariance table of a field"},
      {sphirf::Command::SelectOrder, "M(n) criterion and the selected order kappa"},
      {sphirf::Command::Curves, "Covariance curves of a model for plotting"},
  };
  std::vector<std::pair<sphirf::Command, CLI::App*>> subs;
  for (const auto& [command, help] : commands) {
    subs.emplace_back(command, add_command(app, command, help, inv));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    sphirf::Command command = sphirf::Command::Simulate;
    for (const auto& [c, sub] : subs) {
      if (sub->parsed()) command = c;
    }
    const sphirf::Overrides overrides{inv.seed, inv.kappa, inv.d, inv.out, inv.input};
    const sphirf::RunConfig config = sphirf::load_run_config(command, inv.config_path, overrides);
    for (const auto& path : sphirf::run_command(config)) std::cout << path.string() << '\n';
    return 0;
  } catch (const sphirf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sphirf::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
