#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sphirf/sphere_math.hpp"

namespace sphirf {

/// Stationary spatio-temporal families on the sphere. Each is a function of the
/// great-circle distance psi and of rho = alpha * g(h) with g(h) = exp(-beta |h|).
enum class Family {
  GeneratingFunction,
  NegativeBinomial,
  Multiquadric,
  SineSeries,
  SinePower,
  AdaptedMultiquadric,
  Poisson,
};

inline constexpr Family kAllFamilies[] = {
    Family::GeneratingFunction, Family::NegativeBinomial, Family::Multiquadric,
    Family::SineSeries,         Family::SinePower,        Family::AdaptedMultiquadric,
    Family::Poisson,
};

std::string_view family_name(Family family) noexcept;
Family parse_family(std::string_view name);
bool family_has_shape(Family family) noexcept;
/// Shape used when none is supplied: tau = 1, eta = 1, lambda = 1.
double default_shape(Family family);

class ModelSpec {
 public:
  ModelSpec(Family family, double alpha, double beta, double gamma = 1.0,
            std::optional<double> shape = std::nullopt);

  static ModelSpec generating_function(double alpha, double beta, double gamma = 1.0) {
    return ModelSpec(Family::GeneratingFunction, alpha, beta, gamma);
  }

  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  /// Resolved shape (tau, eta or lambda); 0 for families without one.
  double shape() const noexcept { return shape_; }

  ModelSpec with_decay(double alpha, double beta) const;

 private:
  Family family_;
  double alpha_;
  double beta_;
  double gamma_;
  double shape_;
};

inline constexpr double kDefaultNilScale = 0.28209479177387814;  // 1 / (2 sqrt(pi))

/// kappa^2 well-spread anchor points: none, the north pole, a tetrahedron, then a
/// Fibonacci lattice for kappa >= 3.
std::vector<SpherePoint> default_anchors(int kappa);

/// Coefficients C (kappa^2 x kappa^2) with q_nu(P) = sum_j C(nu, j) Y_j(P) and
/// q_nu(anchor_mu) = delta_{nu mu}. Throws SingularConfigurationError when the
/// harmonic evaluation matrix at the anchors has condition number above 1e12.
Eigen::MatrixXd nil_space_basis(int kappa, std::span<const SpherePoint> anchors);

/// Orders (kappa, d), scales gamma0 and gamma_nu, anchors and the nil-space basis.
class IntrinsicSpec {
 public:
  IntrinsicSpec(int kappa, int d, double gamma0, std::vector<double> gamma_nu,
                std::vector<SpherePoint> anchors);

  /// Default anchors and gamma_nu = 1 / (2 sqrt(pi)).
  static IntrinsicSpec with_defaults(int kappa, int d, double gamma0 = 1.0);

  int kappa() const noexcept { return kappa_; }
  int d() const noexcept { return d_; }
  double gamma0() const noexcept { return gamma0_; }
  int basis_size() const noexcept { return kappa_ * kappa_; }
  const std::vector<double>& gamma_nu() const noexcept { return gamma_nu_; }
  const std::vector<SpherePoint>& anchors() const noexcept { return anchors_; }
  const Eigen::MatrixXd& nil_basis() const noexcept { return nil_basis_; }

  /// q_1(p) .. q_{kappa^2}(p).
  Eigen::VectorXd nil_values(const SpherePoint& p) const;

 private:
  int kappa_;
  int d_;
  double gamma0_;
  std::vector<double> gamma_nu_;
  std::vector<SpherePoint> anchors_;
  Eigen::MatrixXd nil_basis_;
};

double temporal_g(const ModelSpec& spec, long h) noexcept;

/// alpha^l g(h)^l.
double a_ell(const ModelSpec& spec, int ell, long h);

/// Closed-form stationary covariance phi0(psi, h) of the selected family.
double phi0_closed(const ModelSpec& spec, double psi, long h);

/// gamma * sum_{l<=L} (2l+1)/(4pi) a_l(h) P_l(cos psi). Equals phi0_closed in the
/// limit for the generating-function family only.
double phi0_series_oracle(const ModelSpec& spec, double psi, long h, int max_degree);

/// Legendre coefficient b_l(h) in phi0 = sum_l (2l+1)/(4pi) b_l(h) P_l(cos psi).
/// Closed form gamma * a_l(h) for the generating function, Gauss-Legendre projection otherwise.
double band_coefficient(const ModelSpec& spec, int ell, long h);

/// phi0 with the degree < kappa bands removed (the intrinsic covariance at gamma0 = 1).
double icf_core(const ModelSpec& spec, int kappa, double psi, long h);

/// gamma0 * icf_core(psi, h).
double icf_value(const ModelSpec& spec, const IntrinsicSpec& intrinsic, double psi, long h);

/// Truncated non-stationary kernel phi_kappa(psi, (t, s)) on the integer grid.
/// d = 0: icf_core(psi, t - s). d = 1: sum_{u=1..t} sum_{v=1..s} icf_core(psi, u - v),
/// the covariance of a process anchored at t = 0 with stationary unit increments.
double integrated_block(const ModelSpec& spec, const IntrinsicSpec& intrinsic, double psi, long t,
                        long s);

/// Non-homogeneous, non-stationary covariance R(P, Q, t, s).
double full_covariance(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                       const SpherePoint& p, const SpherePoint& q, long t, long s);

/// Cached evaluator of phi_kappa blocks for times 0..max_time. Band coefficients for
/// every lag are computed once; blocks are filled by 2D prefix sums. Read-only after
/// construction.
class IntegratedKernel {
 public:
  IntegratedKernel(const ModelSpec& spec, const IntrinsicSpec& intrinsic, int max_time);

  int max_time() const noexcept { return max_time_; }
  const ModelSpec& spec() const noexcept { return spec_; }
  const IntrinsicSpec& intrinsic() const noexcept { return intrinsic_; }

  double icf_core(double psi, long h) const;

  /// (max_time + 1) x (max_time + 1) matrix of phi_kappa(psi, (t, s)), t, s = 0..max_time.
  Eigen::MatrixXd block(double psi) const;
  void block_into(double psi, Eigen::Ref<Eigen::MatrixXd> out) const;

 private:
  ModelSpec spec_;
  IntrinsicSpec intrinsic_;
  int max_time_;
  Eigen::MatrixXd bands_;  // (max_time + 1) x kappa, scaled by (2l+1)/(4pi)
};

}  // namespace sphirf
