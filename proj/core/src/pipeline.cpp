#include "sphirf/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sphirf/error.hpp"
#include "sphirf/field_csv.hpp"

namespace sphirf {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path prepare_output(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output, ec);
  if (ec) throw IoError("cannot create output directory " + config.output.string());
  return config.output;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json table_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::isfinite(m(i, j))) {
        row.push_back(m(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

json counts_json(const CountMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

/// Truncated, differenced and binned input field.
MoMTable input_table(const RunConfig& config) {
  const SampledField field = read_field_csv(config.input);
  return mom_estimate(difference_time(truncate_harmonics(field, config.kappa), config.d),
                      config.bins);
}

}  // namespace

Outputs run_simulate(const RunConfig& config) {
  if (!config.model || !config.intrinsic) throw ConfigError("simulate needs model and intrinsic");
  const SampledField field = simulate_irf(*config.model, *config.intrinsic, config.grid, config.cap);
  const fs::path dir = prepare_output(config);
  const fs::path csv = dir / "field.csv";
  const fs::path meta = dir / "field.meta.json";
  write_field_csv(field, csv);
  write_json(meta, {{"spec", to_json(*config.model)},
                    {"intrinsic", to_json(*config.intrinsic)},
                    {"grid", to_json(config.grid)},
                    {"seed", config.grid.seed},
                    {"jitter_used", field.meta().jitter_used},
                    {"config", config.effective}});
  return {csv, meta};
}

Outputs run_fit(const RunConfig& config) {
  const MoMTable mom = input_table(config);
  const FitResult result = fit(mom, config.kappa, config.fit);
  const fs::path dir = prepare_output(config);
  const fs::path json_path = dir / "fit.json";
  const fs::path csv_path = dir / "curves.csv";

  write_json(json_path, {{"alpha_hat", result.alpha_hat},
                         {"beta_hat", result.beta_hat},
                         {"gamma0_hat", result.gamma0_hat},
                         {"loss", result.loss},
                         {"iterations", result.iterations},
                         {"converged", result.converged},
                         {"start_index", result.start_index},
                         {"kappa", config.kappa},
                         {"d", config.d},
                         {"bins", to_json(mom.bins())},
                         {"mom", table_json(mom.estimates())},
                         {"counts", counts_json(mom.counts())},
                         {"config", config.effective}});

  const ModelSpec fitted = ModelSpec::generating_function(result.alpha_hat, result.beta_hat);
  std::optional<ModelSpec> truth;
  if (config.truth) truth = ModelSpec::generating_function(config.truth->alpha, config.truth->beta);
  std::ostringstream csv;
  csv << (truth ? "psi,h,mom,fitted,theoretical\n" : "psi,h,mom,fitted\n");
  const BinSpec& bins = mom.bins();
  for (int i = 0; i < bins.psi_count(); ++i) {
    for (int j = 0; j < bins.lag_count(); ++j) {
      const double psi = bins.psi_centers[i];
      const int h = bins.lags[j];
      csv << number(psi) << ',' << h << ',' << number(mom.estimates()(i, j)) << ','
          << number(result.gamma0_hat * icf_core(fitted, config.kappa, psi, h));
      if (truth) csv << ',' << number(config.truth->gamma0 * icf_core(*truth, config.kappa, psi, h));
      csv << '\n';
    }
  }
  write_text(csv_path, csv.str());
  return {json_path, csv_path};
}

Outputs run_mom(const RunConfig& config) {
  const MoMTable mom = input_table(config);
  const fs::path dir = prepare_output(config);
  const fs::path json_path = dir / "mom.json";
  const fs::path csv_path = dir / "mom.csv";
  write_json(json_path, {{"kappa", config.kappa},
                         {"d", config.d},
                         {"bins", to_json(mom.bins())},
                         {"estimates", table_json(mom.estimates())},
                         {"counts", counts_json(mom.counts())},
                         {"config", config.effective}});
  std::ostringstream csv;
  csv << "psi,h,mom,count\n";
  const BinSpec& bins = mom.bins();
  for (int i = 0; i < bins.psi_count(); ++i) {
    for (int j = 0; j < bins.lag_count(); ++j) {
      csv << number(bins.psi_centers[i]) << ',' << bins.lags[j] << ','
          << number(mom.estimates()(i, j)) << ',' << mom.counts()(i, j) << '\n';
    }
  }
  write_text(csv_path, csv.str());
  return {json_path, csv_path};
}

Outputs run_select_order(const RunConfig& config) {
  const SampledField field = read_field_csv(config.input);
  const OrderReport report =
      m_criterion(field, config.d, config.order.n_max, config.bins, config.order.drop_ratio);
  const fs::path dir = prepare_output(config);
  const fs::path json_path = dir / "order.json";
  const fs::path csv_path = dir / "order.csv";
  write_json(json_path, {{"n", report.n_values},
                         {"M", report.M},
                         {"logM", report.logM},
                         {"kappa_hat", report.kappa_hat},
                         {"rule", report.rule},
                         {"config", config.effective}});
  std::ostringstream csv;
  csv << "n,logM\n";
  for (std::size_t k = 0; k < report.n_values.size(); ++k) {
    csv << report.n_values[k] << ',' << number(report.logM[k]) << '\n';
  }
  write_text(csv_path, csv.str());
  return {json_path, csv_path};
}

Outputs run_curves(const RunConfig& config) {
  if (!config.model || !config.intrinsic) throw ConfigError("curves needs a model");
  const CurveGrid& grid = config.curves;
  std::ostringstream csv;
  csv << "psi,h,phi0,icf\n";
  for (int h : grid.lags) {
    for (int k = 0; k < grid.psi_points; ++k) {
      const double psi =
          grid.psi_points == 1 ? 0.0 : grid.psi_max * k / static_cast<double>(grid.psi_points - 1);
      csv << number(psi) << ',' << h << ',' << number(phi0_closed(*config.model, psi, h)) << ','
          << number(icf_value(*config.model, *config.intrinsic, psi, h)) << '\n';
    }
  }
  const fs::path dir = prepare_output(config);
  const fs::path csv_path = dir / "curves.csv";
  write_text(csv_path, csv.str());
  return {csv_path};
}

Outputs run_command(const RunConfig& config) {
  switch (config.command) {
    case Command::Simulate: return run_simulate(config);
    case Command::Fit: return run_fit(config);
    case Command::Mom: return run_mom(config);
    case Command::SelectOrder: return run_select_order(config);
    case Command::Curves: return run_curves(config);
  }
  throw ConfigError("unknown command");
}

}  // namespace sphirf
