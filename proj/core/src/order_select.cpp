#include "sphirf/order_select.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>

#include "sphirf/error.hpp"
#include "sphirf/sphere_math.hpp"

namespace sphirf {

double m_value(int n, const MoMTable& order_n, const MoMTable& order_n1) {
  const BinSpec& bins = order_n.bins();
  if (order_n.estimates().rows() != order_n1.estimates().rows() ||
      order_n.estimates().cols() != order_n1.estimates().cols()) {
    throw ConfigError("M(n) needs MoM tables over the same bins");
  }
  double total = 0.0;
  for (int j = 0; j < bins.lag_count(); ++j) {
    if (!order_n.has(0, j) || !order_n1.has(0, j)) continue;
    const double amplitude = order_n.estimates()(0, j) - order_n1.estimates()(0, j);
    for (int i = 0; i < bins.psi_count(); ++i) {
      if (!order_n.has(i, j) || !order_n1.has(i, j)) continue;
      const double diff = order_n.estimates()(i, j) - order_n1.estimates()(i, j);
      const double band = amplitude * legendre_p(n, std::cos(bins.psi_centers[i]));
      total += (diff - band) * (diff - band);
    }
  }
  return total;
}

std::vector<double> m_from_tables(const std::vector<MoMTable>& tables) {
  if (tables.size() < 2) throw ConfigError("M(n) needs tables for at least two orders");
  std::vector<double> M;
  M.reserve(tables.size() - 1);
  for (std::size_t n = 0; n + 1 < tables.size(); ++n) {
    M.push_back(m_value(static_cast<int>(n), tables[n], tables[n + 1]));
  }
  return M;
}

std::string selection_rule(double drop_ratio) {
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "smallest n with M(m) <= max(M)/%g for all m >= n; "
                "0 if max(M)/min(M) < %g or no such n exists",
                drop_ratio, drop_ratio);
  return buf;
}

OrderReport m_criterion(const SampledField& field, int d, int n_max, const BinSpec& bins,
                        double drop_ratio) {
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  if (d < 0 || d > 1) throw ConfigError("temporal order d must be 0 or 1");
  // The order n_max + 1 regression has (n_max + 1)^2 columns and must leave a residual.
  const int needed = (n_max + 1) * (n_max + 1) + 1;
  if (field.n_locations() < needed) {
    throw ConfigError("M(n) up to n_max = " + std::to_string(n_max) + " needs at least " +
                      std::to_string(needed) + " locations");
  }
  bins.validate();
  std::vector<MoMTable> tables;
  tables.reserve(static_cast<std::size_t>(n_max) + 2);
  for (int n = 0; n <= n_max + 1; ++n) {
    tables.push_back(mom_estimate(difference_time(truncate_harmonics(field, n), d), bins));
  }
  OrderReport report;
  report.M = m_from_tables(tables);
  for (int n = 0; n <= n_max; ++n) {
    report.n_values.push_back(n);
    report.logM.push_back(std::log(std::max(report.M[n], DBL_MIN)));
  }
  report.kappa_hat = select_kappa(report.M, drop_ratio);
  report.rule = selection_rule(drop_ratio);
  return report;
}

int select_kappa(const std::vector<double>& M, double drop_ratio) {
  if (M.empty()) return 0;
  for (double m : M) {
    if (!std::isfinite(m) || m < 0.0) return 0;
  }
  const double hi = *std::max_element(M.begin(), M.end());
  const double lo = *std::min_element(M.begin(), M.end());
  if (!(hi > 0.0) || hi < drop_ratio * lo) return 0;
  const double threshold = hi / drop_ratio;
  // A drop that does not persist to n_max is treated like no drop at all.
  if (M.back() > threshold) return 0;
  int kappa = static_cast<int>(M.size()) - 1;
  while (kappa > 0 && M[kappa - 1] <= threshold) --kappa;
  return kappa;
}

int select_kappa(const OrderReport& report, double drop_ratio) {
  return select_kappa(report.M, drop_ratio);
}

}  // namespace sphirf
