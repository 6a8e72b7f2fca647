#include "sphirf/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sphirf/error.hpp"

namespace sphirf {
namespace {

constexpr int kProjectionNodes = 128;
constexpr double kMinAnchorSeparation = 1e-9;
constexpr double kMaxAnchorCondition = 1e12;

const QuadratureRule& projection_rule() {
  static const QuadratureRule rule = gauss_legendre_nodes(kProjectionNodes);
  return rule;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// phi0 as a function of cos(psi), shared by the closed form and the band projection.
double phi0_of_cos(const ModelSpec& spec, double cos_psi, long h) {
  const double g = temporal_g(spec, h);
  const double alpha = spec.alpha();
  const double rho = alpha * g;
  const double z = rho * cos_psi;
  const double scale = spec.gamma() / kFourPi;
  const double shape = spec.shape();
  switch (spec.family()) {
    case Family::GeneratingFunction: {
      const double denom = 1.0 - 2.0 * z + rho * rho;
      return scale * (1.0 - rho * rho) / (denom * std::sqrt(denom));
    }
    case Family::NegativeBinomial:
      return scale * std::pow((1.0 - alpha) / (1.0 - z), shape);
    case Family::Multiquadric:
      return scale * std::pow(1.0 - alpha, 2.0 * shape) /
             std::pow(1.0 + alpha * alpha - 2.0 * z, shape);
    case Family::SineSeries:
      return scale * std::exp(z - 1.0) * (1.0 + z) / 2.0;
    case Family::SinePower:
      return scale * (1.0 - std::pow(2.0, -shape / 2.0) * std::pow(1.0 - z, shape / 2.0));
    case Family::AdaptedMultiquadric:
      return scale * std::pow((1.0 + alpha * g * g) * (1.0 - alpha) / (1.0 + rho * rho - 2.0 * z),
                              shape);
    case Family::Poisson:
      return spec.gamma() * std::exp(shape * (z - 1.0));
  }
  throw ConfigError("unknown covariance family");
}

}  // namespace

std::string_view family_name(Family family) noexcept {
  switch (family) {
    case Family::GeneratingFunction: return "generating_function";
    case Family::NegativeBinomial: return "negative_binomial";
    case Family::Multiquadric: return "multiquadric";
    case Family::SineSeries: return "sine_series";
    case Family::SinePower: return "sine_power";
    case Family::AdaptedMultiquadric: return "adapted_multiquadric";
    case Family::Poisson: return "poisson";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown covariance family '" + std::string(name) + "'");
}

bool family_has_shape(Family family) noexcept {
  return family != Family::GeneratingFunction && family != Family::SineSeries;
}

double default_shape(Family family) {
  return family_has_shape(family) ? 1.0 : 0.0;
}

ModelSpec::ModelSpec(Family family, double alpha, double beta, double gamma,
                     std::optional<double> shape)
    : family_(family), alpha_(alpha), beta_(beta), gamma_(gamma), shape_(0.0) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive, got " + std::to_string(beta));
  require(gamma > 0.0 && std::isfinite(gamma),
          "gamma must be positive, got " + std::to_string(gamma));
  if (!family_has_shape(family)) {
    require(!shape.has_value(),
            std::string(family_name(family)) + " takes no shape parameter");
    return;
  }
  shape_ = shape.value_or(default_shape(family));
  switch (family) {
    case Family::NegativeBinomial:
    case Family::Multiquadric:
    case Family::AdaptedMultiquadric:
      require(shape_ > 0.0 && std::isfinite(shape_), "tau must be positive");
      break;
    case Family::SinePower:
      require(shape_ > 0.0 && shape_ <= 2.0, "eta must lie in (0, 2]");
      break;
    case Family::Poisson:
      require(shape_ > 0.0 && std::isfinite(shape_), "lambda must be positive");
      break;
    default:
      break;
  }
}

ModelSpec ModelSpec::with_decay(double alpha, double beta) const {
  return ModelSpec(family_, alpha, beta, gamma_,
                   family_has_shape(family_) ? std::optional<double>(shape_) : std::nullopt);
}

std::vector<SpherePoint> default_anchors(int kappa) {
  require(kappa >= 0, "kappa must be non-negative");
  std::vector<SpherePoint> anchors;
  if (kappa == 0) return anchors;
  if (kappa == 1) {
    anchors.emplace_back(0.0, kPi / 2.0);
    return anchors;
  }
  if (kappa == 2) {
    constexpr std::array<std::array<double, 3>, 4> tetra{{
        {1.0, 1.0, 1.0}, {1.0, -1.0, -1.0}, {-1.0, 1.0, -1.0}, {-1.0, -1.0, 1.0}}};
    for (const auto& v : tetra) anchors.push_back(SpherePoint::from_unit_vector(v));
    return anchors;
  }
  const int n = kappa * kappa;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    anchors.emplace_back(golden * i, std::asin(z));
  }
  return anchors;
}

Eigen::MatrixXd nil_space_basis(int kappa, std::span<const SpherePoint> anchors) {
  require(kappa >= 0, "kappa must be non-negative");
  const int size = kappa * kappa;
  require(static_cast<int>(anchors.size()) == size,
          "kappa = " + std::to_string(kappa) + " needs " + std::to_string(size) +
              " anchors, got " + std::to_string(anchors.size()));
  if (size == 0) return Eigen::MatrixXd(0, 0);
  for (int a = 0; a < size; ++a) {
    for (int b = a + 1; b < size; ++b) {
      require(great_circle(anchors[a], anchors[b]) > kMinAnchorSeparation,
              "anchor points " + std::to_string(a) + " and " + std::to_string(b) +
                  " coincide");
    }
  }
  Eigen::MatrixXd eval(size, size);
  for (int mu = 0; mu < size; ++mu) {
    const auto y = real_spherical_harmonics(kappa, anchors[mu]);
    for (int j = 0; j < size; ++j) eval(mu, j) = y[j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(eval);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (!(smallest > 0.0) || sv(0) / smallest > kMaxAnchorCondition) {
    throw SingularConfigurationError(
        "anchor configuration is degenerate for the degree < " + std::to_string(kappa) +
        " harmonic space (condition number " +
        (smallest > 0.0 ? std::to_string(sv(0) / smallest) : std::string("inf")) + ")");
  }
  return eval.transpose().fullPivLu().inverse();
}

IntrinsicSpec::IntrinsicSpec(int kappa, int d, double gamma0, std::vector<double> gamma_nu,
                             std::vector<SpherePoint> anchors)
    : kappa_(kappa),
      d_(d),
      gamma0_(gamma0),
      gamma_nu_(std::move(gamma_nu)),
      anchors_(std::move(anchors)) {
  require(kappa >= 0, "kappa must be non-negative");
  require(d == 0 || d == 1, "temporal order d must be 0 or 1, got " + std::to_string(d));
  require(gamma0 > 0.0 && std::isfinite(gamma0), "gamma0 must be positive");
  const auto size = static_cast<std::size_t>(basis_size());
  require(gamma_nu_.size() == size, "expected " + std::to_string(size) + " gamma_nu values, got " +
                                        std::to_string(gamma_nu_.size()));
  for (double g : gamma_nu_) require(g > 0.0 && std::isfinite(g), "gamma_nu must be positive");
  nil_basis_ = nil_space_basis(kappa, anchors_);
  for (int mu = 0; mu < basis_size(); ++mu) {
    const Eigen::VectorXd q = nil_values(anchors_[mu]);
    for (int nu = 0; nu < basis_size(); ++nu) {
      const double expected = nu == mu ? 1.0 : 0.0;
      if (std::abs(q(nu) - expected) > 1e-10) {
        throw SingularConfigurationError("nil-space basis fails to interpolate the anchors");
      }
    }
  }
}

IntrinsicSpec IntrinsicSpec::with_defaults(int kappa, int d, double gamma0) {
  require(kappa >= 0, "kappa must be non-negative");
  return IntrinsicSpec(kappa, d, gamma0,
                       std::vector<double>(static_cast<std::size_t>(kappa) * kappa,
                                           kDefaultNilScale),
                       default_anchors(kappa));
}

Eigen::VectorXd IntrinsicSpec::nil_values(const SpherePoint& p) const {
  const int size = basis_size();
  if (size == 0) return Eigen::VectorXd(0);
  const auto y = real_spherical_harmonics(kappa_, p);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), size);
  return nil_basis_ * yv;
}

double temporal_g(const ModelSpec& spec, long h) noexcept {
  return std::exp(-spec.beta() * std::abs(static_cast<double>(h)));
}

double a_ell(const ModelSpec& spec, int ell, long h) {
  if (ell < 0) throw IndexError("negative degree in a_ell");
  if (ell == 0) return 1.0;
  return std::pow(spec.alpha() * temporal_g(spec, h), ell);
}

double phi0_closed(const ModelSpec& spec, double psi, long h) {
  const double value = phi0_of_cos(spec, std::cos(psi), h);
  if (!std::isfinite(value)) {
    throw NumericError("phi0 evaluation is not finite at psi = " + std::to_string(psi) +
                       ", h = " + std::to_string(h));
  }
  return value;
}

double phi0_series_oracle(const ModelSpec& spec, double psi, long h, int max_degree) {
  const auto p = legendre_p_sequence(max_degree, std::cos(psi));
  const double rho = spec.alpha() * temporal_g(spec, h);
  double sum = 0.0;
  double power = 1.0;
  for (int l = 0; l <= max_degree; ++l) {
    sum += (2.0 * l + 1.0) / kFourPi * power * p[l];
    power *= rho;
  }
  return spec.gamma() * sum;
}

double band_coefficient(const ModelSpec& spec, int ell, long h) {
  if (ell < 0) throw IndexError("negative degree in band_coefficient");
  if (spec.family() == Family::GeneratingFunction) return spec.gamma() * a_ell(spec, ell, h);
  const auto& rule = projection_rule();
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double c = rule.nodes[k];
    sum += rule.weights[k] * phi0_of_cos(spec, c, h) * legendre_p(ell, c);
  }
  return 2.0 * kPi * sum;
}

double icf_core(const ModelSpec& spec, int kappa, double psi, long h) {
  const double c = std::cos(psi);
  double value = phi0_closed(spec, psi, h);
  for (int l = 0; l < kappa; ++l) {
    value -= (2.0 * l + 1.0) / kFourPi * band_coefficient(spec, l, h) * legendre_p(l, c);
  }
  return value;
}

double icf_value(const ModelSpec& spec, const IntrinsicSpec& intrinsic, double psi, long h) {
  return intrinsic.gamma0() * icf_core(spec, intrinsic.kappa(), psi, h);
}

double integrated_block(const ModelSpec& spec, const IntrinsicSpec& intrinsic, double psi, long t,
                        long s) {
  if (t < 0 || s < 0) {
    throw DomainError("integrated_block needs non-negative times, got t = " + std::to_string(t) +
                      ", s = " + std::to_string(s));
  }
  const int kappa = intrinsic.kappa();
  if (intrinsic.d() == 0) return icf_core(spec, kappa, psi, t - s);
  if (t == 0 || s == 0) return 0.0;
  if (t > s) std::swap(t, s);  // one summation order for (t, s) and (s, t)
  std::vector<double> lag(static_cast<std::size_t>(std::max(t, s)));
  for (std::size_t h = 0; h < lag.size(); ++h) {
    lag[h] = icf_core(spec, kappa, psi, static_cast<long>(h));
  }
  double sum = 0.0;
  for (long u = 1; u <= t; ++u) {
    for (long v = 1; v <= s; ++v) sum += lag[static_cast<std::size_t>(std::abs(u - v))];
  }
  return sum;
}

double full_covariance(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                       const SpherePoint& p, const SpherePoint& q, long t, long s) {
  const double g0 = intrinsic.gamma0();
  double r = g0 * g0 * integrated_block(spec, intrinsic, great_circle(p, q), t, s);
  const int size = intrinsic.basis_size();
  if (size == 0) return r;
  const Eigen::VectorXd qp = intrinsic.nil_values(p);
  const Eigen::VectorXd qq = intrinsic.nil_values(q);
  const auto& gam = intrinsic.gamma_nu();
  const auto& tau = intrinsic.anchors();
  // Terms are grouped so that swapping (p, t) with (q, s) only reorders commutative
  // pairs, which keeps R(P, Q, t, s) == R(Q, P, s, t) bit for bit.
  double anchors = 0.0;
  double cross = 0.0;
  const double self = integrated_block(spec, intrinsic, 0.0, t, s);
  for (int nu = 0; nu < size; ++nu) {
    anchors += gam[nu] * gam[nu] * (self * (qp(nu) * qq(nu)) + qp(nu) * qq(nu));
    for (int mu = nu + 1; mu < size; ++mu) {
      const double b = integrated_block(spec, intrinsic, great_circle(tau[nu], tau[mu]), t, s);
      anchors += gam[nu] * gam[mu] * b * (qp(nu) * qq(mu) + qp(mu) * qq(nu));
    }
    const double from_q =
        g0 * gam[nu] * integrated_block(spec, intrinsic, great_circle(q, tau[nu]), t, s) * qp(nu);
    const double from_p =
        g0 * gam[nu] * integrated_block(spec, intrinsic, great_circle(p, tau[nu]), t, s) * qq(nu);
    cross += from_q + from_p;
  }
  r += anchors - cross;
  return r;
}

IntegratedKernel::IntegratedKernel(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                                   int max_time)
    : spec_(spec), intrinsic_(intrinsic), max_time_(max_time) {
  require(max_time >= 0, "max_time must be non-negative");
  const int kappa = intrinsic.kappa();
  bands_.resize(max_time + 1, kappa);
  for (int h = 0; h <= max_time; ++h) {
    for (int l = 0; l < kappa; ++l) {
      bands_(h, l) = (2.0 * l + 1.0) / kFourPi * band_coefficient(spec, l, h);
    }
  }
}

double IntegratedKernel::icf_core(double psi, long h) const {
  const long lag = std::abs(h);
  if (lag > max_time_) return sphirf::icf_core(spec_, intrinsic_.kappa(), psi, lag);
  const double c = std::cos(psi);
  double value = phi0_closed(spec_, psi, lag);
  for (int l = 0; l < intrinsic_.kappa(); ++l) value -= bands_(lag, l) * legendre_p(l, c);
  return value;
}

Eigen::MatrixXd IntegratedKernel::block(double psi) const {
  Eigen::MatrixXd out(max_time_ + 1, max_time_ + 1);
  block_into(psi, out);
  return out;
}

void IntegratedKernel::block_into(double psi, Eigen::Ref<Eigen::MatrixXd> out) const {
  const int n = max_time_ + 1;
  if (out.rows() != n || out.cols() != n) throw ConfigError("block_into: wrong output shape");
  std::vector<double> lag(static_cast<std::size_t>(n));
  for (int h = 0; h < n; ++h) lag[h] = icf_core(psi, h);
  if (intrinsic_.d() == 0) {
    for (int t = 0; t < n; ++t) {
      for (int s = 0; s < n; ++s) out(t, s) = lag[std::abs(t - s)];
    }
    return;
  }
  for (int k = 0; k < n; ++k) {
    out(0, k) = 0.0;
    out(k, 0) = 0.0;
  }
  for (int t = 1; t < n; ++t) {
    for (int s = 1; s < n; ++s) {
      out(t, s) = (out(t - 1, s) + out(t, s - 1)) - out(t - 1, s - 1) + lag[std::abs(t - s)];
    }
  }
}

}  // namespace sphirf
