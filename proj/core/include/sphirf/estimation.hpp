#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sphirf/field_sim.hpp"
#include "sphirf/kernels.hpp"

namespace sphirf {

/// Spatial bins [psi_i - epsilon, psi_i + epsilon] crossed with exact time lags h_j.
struct BinSpec {
  std::vector<double> psi_centers;
  double epsilon = 0.05;
  std::vector<int> lags;
  bool allow_overlap = false;

  /// Centers 0.05, 0.15, .., 1.45; epsilon 0.05; lags 0..5.
  static BinSpec defaults();

  void validate() const;
  int psi_count() const noexcept { return static_cast<int>(psi_centers.size()); }
  int lag_count() const noexcept { return static_cast<int>(lags.size()); }
};

using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// Binned method-of-moments covariance estimates. Empty bins hold NaN and count 0.
class MoMTable {
 public:
  MoMTable(BinSpec bins, Eigen::MatrixXd estimates, CountMatrix counts);

  const BinSpec& bins() const noexcept { return bins_; }
  const Eigen::MatrixXd& estimates() const noexcept { return estimates_; }
  const CountMatrix& counts() const noexcept { return counts_; }

  bool has(int i, int j) const noexcept { return counts_(i, j) > 0; }
  int populated() const noexcept;

  MoMTable scaled(double factor) const;

 private:
  BinSpec bins_;
  Eigen::MatrixXd estimates_;
  CountMatrix counts_;
};

/// Average of products X(P, t) X(Q, s) over unordered pairs with
/// |psi(P, Q) - psi_i| <= epsilon and |t - s| = h_j. The field is expected to be
/// truncated and differenced already.
MoMTable mom_estimate(const SampledField& field, const BinSpec& bins);

/// Noise-free table gamma0 * icf_core(psi_i, h_j) with unit counts.
MoMTable theoretical_table(const ModelSpec& spec, int kappa, double gamma0, const BinSpec& bins);

struct FitParams {
  double alpha = 0.5;
  double beta = 0.1;
  double gamma0 = 1.0;
};

/// Sum of squared differences between the populated MoM bins and the model ICF.
/// `shape` supplies the family (and gamma / shape); its alpha and beta are replaced.
double loss(const FitParams& params, const MoMTable& mom, const ModelSpec& shape, int kappa);

struct FitOptions {
  int starts = 5;
  int max_iter = 500;
  double tol = 1e-8;
};

struct FitResult {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double gamma0_hat = 0.0;
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
};

/// The fixed multi-start grid in (alpha, beta) order: alpha in {0.3, 0.6, 0.8} x beta in {0.1, 0.5}.
std::vector<FitParams> start_grid();

/// Least-squares fit of (alpha, beta, gamma0) for the generating-function ICF of order kappa.
/// BFGS on alpha = logistic(u), beta = exp(v), gamma0 = exp(w) with central-difference gradients.
FitResult fit(const MoMTable& mom, int kappa, const FitOptions& options = {});

}  // namespace sphirf
