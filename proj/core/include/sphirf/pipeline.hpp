#pragma once

#include <filesystem>
#include <vector>

#include "sphirf/run_config.hpp"

namespace sphirf {

/// Files written by one subcommand, in write order.
using Outputs = std::vector<std::filesystem::path>;

/// field.csv and field.meta.json.
Outputs run_simulate(const RunConfig& config);
/// fit.json and curves.csv (psi,h,mom,fitted[,theoretical]).
Outputs run_fit(const RunConfig& config);
/// mom.json and mom.csv (psi,h,mom,count).
Outputs run_mom(const RunConfig& config);
/// order.json and order.csv (n,logM).
Outputs run_select_order(const RunConfig& config);
/// curves.csv (psi,h,phi0,icf).
Outputs run_curves(const RunConfig& config);

Outputs run_command(const RunConfig& config);

}  // namespace sphirf
