#include "sphirf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "sphirf/error.hpp"

namespace sphirf {
namespace {

constexpr double kOverlapSlack = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

struct Unconstrained {
  Eigen::Vector3d theta;

  static Unconstrained from(const FitParams& p) {
    return {Eigen::Vector3d(std::log(p.alpha / (1.0 - p.alpha)), std::log(p.beta),
                            std::log(p.gamma0))};
  }
};

FitParams to_params(const Eigen::Vector3d& theta) {
  return {logistic(theta(0)), std::exp(theta(1)), std::exp(theta(2))};
}

class Objective {
 public:
  Objective(const MoMTable& mom, int kappa)
      : mom_(mom), kappa_(kappa), shape_(ModelSpec::generating_function(0.5, 0.1)) {}

  double operator()(const Eigen::Vector3d& theta) const {
    const FitParams p = to_params(theta);
    if (!(p.alpha > 0.0 && p.alpha < 1.0) || !(p.beta > 0.0) || !std::isfinite(p.beta) ||
        !(p.gamma0 > 0.0) || !std::isfinite(p.gamma0)) {
      return std::numeric_limits<double>::infinity();
    }
    return loss(p, mom_, shape_, kappa_);
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& theta) const {
    Eigen::Vector3d g;
    for (int k = 0; k < 3; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(theta(k)));
      Eigen::Vector3d hi = theta;
      Eigen::Vector3d lo = theta;
      hi(k) += step;
      lo(k) -= step;
      g(k) = ((*this)(hi) - (*this)(lo)) / (hi(k) - lo(k));
    }
    return g;
  }

  /// Least-squares gamma0 for fixed (alpha, beta); the model is linear in gamma0.
  double best_gamma0(double alpha, double beta) const {
    const ModelSpec spec = shape_.with_decay(alpha, beta);
    const auto& bins = mom_.bins();
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < bins.psi_count(); ++i) {
      for (int j = 0; j < bins.lag_count(); ++j) {
        if (!mom_.has(i, j)) continue;
        const double m = icf_core(spec, kappa_, bins.psi_centers[i], bins.lags[j]);
        num += m * mom_.estimates()(i, j);
        den += m * m;
      }
    }
    const double g = den > 0.0 ? num / den : 1.0;
    return g > 0.0 && std::isfinite(g) ? g : 1.0;
  }

 private:
  const MoMTable& mom_;
  int kappa_;
  ModelSpec shape_;
};

struct BfgsOutcome {
  Eigen::Vector3d theta;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

BfgsOutcome minimize_bfgs(const Objective& f, Eigen::Vector3d x, const FitOptions& options) {
  constexpr double kArmijo = 1e-4;
  constexpr double kMaxComponentStep = 5.0;
  BfgsOutcome out;
  double fx = f(x);
  Eigen::Vector3d g = f.gradient(x);
  Eigen::Matrix3d inv_hessian = Eigen::Matrix3d::Identity();
  bool fresh = true;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (g.norm() < options.tol) {
      out.converged = true;
      break;
    }
    Eigen::Vector3d dir = -inv_hessian * g;
    if (g.dot(dir) >= 0.0) {
      inv_hessian.setIdentity();
      fresh = true;
      dir = -g;
    }
    const double largest = dir.cwiseAbs().maxCoeff();
    if (largest > kMaxComponentStep) dir *= kMaxComponentStep / largest;
    const double slope = g.dot(dir);
    double step = 1.0;
    Eigen::Vector3d x_new = x + dir;
    double f_new = f(x_new);
    while (!(f_new <= fx + kArmijo * step * slope) && step > 1e-20) {
      step *= 0.5;
      x_new = x + step * dir;
      f_new = f(x_new);
    }
    if (!(f_new <= fx + kArmijo * step * slope)) {
      if (fresh) break;
      inv_hessian.setIdentity();
      fresh = true;
      continue;
    }
    const Eigen::Vector3d g_new = f.gradient(x_new);
    const Eigen::Vector3d s = x_new - x;
    const Eigen::Vector3d y = g_new - g;
    const double decrease = fx - f_new;
    x = x_new;
    g = g_new;
    const double previous = fx;
    fx = f_new;
    if (decrease <= 1e-12 * std::abs(previous)) {
      out.converged = true;
      ++iter;
      break;
    }
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d left = Eigen::Matrix3d::Identity() - rho * s * y.transpose();
      inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
      fresh = false;
    }
  }
  if (!out.converged && g.norm() < options.tol) out.converged = true;
  out.theta = x;
  out.value = fx;
  out.iterations = iter;
  return out;
}

}  // namespace

BinSpec BinSpec::defaults() {
  BinSpec bins;
  for (int k = 0; k < 15; ++k) bins.psi_centers.push_back(0.05 + 0.1 * k);
  bins.epsilon = 0.05;
  bins.lags = {0, 1, 2, 3, 4, 5};
  return bins;
}

void BinSpec::validate() const {
  if (psi_centers.empty()) throw ConfigError("bins need at least one psi center");
  if (lags.empty()) throw ConfigError("bins need at least one lag");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("bin half-width epsilon must be positive");
  }
  for (std::size_t i = 0; i < psi_centers.size(); ++i) {
    const double c = psi_centers[i];
    if (!(c >= 0.0 && c <= kPi)) {
      throw ConfigError("psi center " + std::to_string(c) + " outside [0, pi]");
    }
    if (i > 0) {
      const double gap = c - psi_centers[i - 1];
      if (!(gap > 0.0)) throw ConfigError("psi centers must be strictly increasing");
      if (!allow_overlap && gap < 2.0 * epsilon - kOverlapSlack) {
        throw ConfigError("psi bins around " + std::to_string(psi_centers[i - 1]) + " and " +
                          std::to_string(c) + " overlap; set allow_overlap to permit this");
      }
    }
  }
  std::set<int> seen;
  for (int h : lags) {
    if (h < 0) throw ConfigError("lags must be non-negative");
    if (!seen.insert(h).second) throw ConfigError("lag " + std::to_string(h) + " repeated");
  }
}

MoMTable::MoMTable(BinSpec bins, Eigen::MatrixXd estimates, CountMatrix counts)
    : bins_(std::move(bins)), estimates_(std::move(estimates)), counts_(std::move(counts)) {
  if (estimates_.rows() != bins_.psi_count() || estimates_.cols() != bins_.lag_count() ||
      counts_.rows() != estimates_.rows() || counts_.cols() != estimates_.cols()) {
    throw ConfigError("MoM table shape does not match its bins");
  }
  for (Eigen::Index i = 0; i < estimates_.rows(); ++i) {
    for (Eigen::Index j = 0; j < estimates_.cols(); ++j) {
      if (counts_(i, j) < 0) throw ConfigError("negative pair count");
      if (counts_(i, j) == 0) {
        estimates_(i, j) = kNaN;
      } else if (!std::isfinite(estimates_(i, j))) {
        throw NumericError("non-finite MoM estimate in a populated bin");
      }
    }
  }
}

int MoMTable::populated() const noexcept {
  return static_cast<int>((counts_.array() > 0).count());
}

MoMTable MoMTable::scaled(double factor) const {
  return MoMTable(bins_, estimates_ * factor, counts_);
}

MoMTable mom_estimate(const SampledField& field, const BinSpec& bins) {
  bins.validate();
  const int k1 = bins.psi_count();
  const int k2 = bins.lag_count();
  const int n = field.n_locations();
  const int T = field.n_times();
  const RowMajor x = field.values();
  const auto& centers = bins.psi_centers;
  const double eps = bins.epsilon;

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k1, k2);
  CountMatrix counts = CountMatrix::Zero(k1, k2);

  // Per pair lag products: cross[j] = sum over ordered time pairs with |t - s| = h_j.
  std::vector<double> cross(static_cast<std::size_t>(k2));
  auto pair_products = [&](const double* a, const double* b, bool same) {
    for (int j = 0; j < k2; ++j) {
      const int h = bins.lags[j];
      double acc = 0.0;
      if (h < T) {
        if (h == 0) {
          for (int t = 0; t < T; ++t) acc += a[t] * b[t];
        } else if (same) {
          for (int t = 0; t + h < T; ++t) acc += a[t] * a[t + h];
        } else {
          for (int t = 0; t + h < T; ++t) acc += a[t] * b[t + h] + a[t + h] * b[t];
        }
      }
      cross[j] = acc;
    }
  };
  auto pair_count = [&](int h, bool same) -> long {
    if (h >= T) return 0;
    if (h == 0) return T;
    return same ? T - h : 2L * (T - h);
  };

  const double reach = centers.back() + eps;
  for (int p = 0; p < n; ++p) {
    const double* xp = x.row(p).data();
    for (int q = p; q < n; ++q) {
      const bool same = q == p;
      const double psi = same ? 0.0 : great_circle(field.locations()[p], field.locations()[q]);
      if (psi > reach) continue;
      auto first = std::lower_bound(centers.begin(), centers.end(), psi - eps);
      if (first != centers.begin()) --first;
      bool computed = false;
      for (auto it = first; it != centers.end() && *it - eps <= psi; ++it) {
        if (!(psi >= *it - eps && psi <= *it + eps)) continue;
        if (!computed) {
          pair_products(xp, x.row(q).data(), same);
          computed = true;
        }
        const int i = static_cast<int>(it - centers.begin());
        for (int j = 0; j < k2; ++j) {
          const long c = pair_count(bins.lags[j], same);
          if (c == 0) continue;
          sums(i, j) += cross[j];
          counts(i, j) += c;
        }
      }
    }
  }
  if ((counts.array() == 0).all()) {
    throw ConfigError("every MoM bin is empty: no location pair falls inside the psi bins");
  }
  Eigen::MatrixXd est(k1, k2);
  for (int i = 0; i < k1; ++i) {
    for (int j = 0; j < k2; ++j) {
      est(i, j) = counts(i, j) > 0 ? sums(i, j) / static_cast<double>(counts(i, j)) : kNaN;
    }
  }
  return MoMTable(bins, std::move(est), std::move(counts));
}

MoMTable theoretical_table(const ModelSpec& spec, int kappa, double gamma0, const BinSpec& bins) {
  bins.validate();
  Eigen::MatrixXd est(bins.psi_count(), bins.lag_count());
  for (int i = 0; i < bins.psi_count(); ++i) {
    for (int j = 0; j < bins.lag_count(); ++j) {
      est(i, j) = gamma0 * icf_core(spec, kappa, bins.psi_centers[i], bins.lags[j]);
    }
  }
  return MoMTable(bins, std::move(est), CountMatrix::Ones(bins.psi_count(), bins.lag_count()));
}

double loss(const FitParams& params, const MoMTable& mom, const ModelSpec& shape, int kappa) {
  const ModelSpec spec = shape.with_decay(params.alpha, params.beta);
  const auto& bins = mom.bins();
  double total = 0.0;
  for (int i = 0; i < bins.psi_count(); ++i) {
    for (int j = 0; j < bins.lag_count(); ++j) {
      if (!mom.has(i, j)) continue;
      const double model =
          params.gamma0 * icf_core(spec, kappa, bins.psi_centers[i], bins.lags[j]);
      const double r = mom.estimates()(i, j) - model;
      total += r * r;
    }
  }
  return total;
}

std::vector<FitParams> start_grid() {
  std::vector<FitParams> grid;
  for (double a : {0.3, 0.6, 0.8}) {
    for (double b : {0.1, 0.5}) grid.push_back({a, b, 1.0});
  }
  return grid;
}

FitResult fit(const MoMTable& mom, int kappa, const FitOptions& options) {
  if (mom.populated() < 3) {
    throw ConfigError("fit needs at least 3 populated MoM bins, table has " +
                      std::to_string(mom.populated()));
  }
  if (kappa < 0) throw ConfigError("kappa must be non-negative");
  const auto grid = start_grid();
  if (options.starts < 1 || options.starts > static_cast<int>(grid.size())) {
    throw ConfigError("fit.starts must lie in [1, " + std::to_string(grid.size()) + "]");
  }
  if (options.max_iter < 1) throw ConfigError("fit.max_iter must be positive");
  if (!(options.tol > 0.0)) throw ConfigError("fit.tol must be positive");

  const Objective objective(mom, kappa);
  FitResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.starts; ++k) {
    FitParams start = grid[k];
    start.gamma0 = objective.best_gamma0(start.alpha, start.beta);
    const BfgsOutcome run =
        minimize_bfgs(objective, Unconstrained::from(start).theta, options);
    if (run.value < best.loss) {
      const FitParams p = to_params(run.theta);
      best = {p.alpha, p.beta, p.gamma0, run.value, run.iterations, run.converged, k};
    }
  }
  return best;
}

}  // namespace sphirf
