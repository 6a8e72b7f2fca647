#pragma once

#include <string>
#include <vector>

#include "sphirf/estimation.hpp"
#include "sphirf/field_sim.hpp"

namespace sphirf {

/// M(n) for n = 0..n_max and the order picked from it.
struct OrderReport {
  std::vector<int> n_values;
  std::vector<double> M;
  std::vector<double> logM;  ///< log(max(M, DBL_MIN))
  int kappa_hat = 0;
  std::string rule;
};

inline constexpr double kDefaultDropRatio = 10.0;

/// M(n) = sum_ij [D(psi_i, h_j) - D(psi_0, h_j) P_n(cos psi_i)]^2 with D = phi_n - phi_{n+1}.
/// The smallest-psi bin stands in for psi = 0. Bins missing in either table are skipped.
double m_value(int n, const MoMTable& order_n, const MoMTable& order_n1);

/// M(0..tables.size()-2) from MoM tables of consecutive truncation orders 0, 1, ...
std::vector<double> m_from_tables(const std::vector<MoMTable>& tables);

/// Truncate at n = 0..n_max+1, difference d times, bin, then evaluate M(n).
OrderReport m_criterion(const SampledField& field, int d, int n_max, const BinSpec& bins,
                        double drop_ratio = kDefaultDropRatio);

/// Smallest n with M(m) <= max(M) / drop_ratio for every m >= n. 0 when max/min < drop_ratio
/// or when M(n_max) itself is above the threshold.
int select_kappa(const std::vector<double>& M, double drop_ratio = kDefaultDropRatio);
int select_kappa(const OrderReport& report, double drop_ratio = kDefaultDropRatio);

std::string selection_rule(double drop_ratio);

}  // namespace sphirf
