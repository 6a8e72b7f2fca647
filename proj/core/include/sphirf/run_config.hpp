#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sphirf/estimation.hpp"
#include "sphirf/field_sim.hpp"
#include "sphirf/kernels.hpp"
#include "sphirf/order_select.hpp"

namespace sphirf {

enum class Command { Simulate, Fit, Mom, SelectOrder, Curves };

std::string_view command_name(Command command) noexcept;
Command parse_command(std::string_view name);

/// Scalar fields that command-line flags may replace.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> kappa;
  std::optional<int> d;
  std::optional<std::string> out;
  std::optional<std::string> input;
};

struct CurveGrid {
  double psi_max = 3.1;
  int psi_points = 32;
  std::vector<int> lags = {0, 1, 2, 3, 4, 5, 6};
};

struct OrderOptions {
  int n_max = 3;
  double drop_ratio = kDefaultDropRatio;
};

/// Validated settings of one subcommand. `effective` is the JSON document after
/// overrides; every output file embeds it.
struct RunConfig {
  Command command = Command::Simulate;
  nlohmann::json effective;

  std::optional<ModelSpec> model;
  std::optional<IntrinsicSpec> intrinsic;
  int kappa = 0;
  int d = 0;
  GridSpec grid;
  long cap = kDefaultCovarianceCap;
  BinSpec bins = BinSpec::defaults();
  FitOptions fit;
  OrderOptions order;
  std::optional<FitParams> truth;
  CurveGrid curves;
  std::filesystem::path input;
  std::filesystem::path output = ".";
};

/// Validates a config document for `command`. Sections the command does not use and
/// unknown keys are errors.
RunConfig parse_run_config(Command command, nlohmann::json document,
                           const Overrides& overrides = {});
RunConfig load_run_config(Command command, const std::filesystem::path& path,
                          const Overrides& overrides = {});

nlohmann::json to_json(const ModelSpec& spec);
nlohmann::json to_json(const IntrinsicSpec& intrinsic);
nlohmann::json to_json(const GridSpec& grid);
nlohmann::json to_json(const BinSpec& bins);

}  // namespace sphirf
