#include "sphirf/sphere_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sphirf/error.hpp"

namespace sphirf {
namespace {

constexpr double kDomainSlack = 1e-12;

double clamp_argument(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainSlack)) {
    throw DomainError("Legendre argument " + std::to_string(x) + " outside [-1, 1]");
  }
  return std::clamp(x, -1.0, 1.0);
}

void check_degree(int degree, int max_degree) {
  if (degree < 0) {
    throw IndexError("negative Legendre degree " + std::to_string(degree));
  }
  if (degree > max_degree) {
    throw ConfigError("Legendre degree " + std::to_string(degree) + " exceeds configured maximum " +
                      std::to_string(max_degree));
  }
}

// Fully normalized P_l^m(x) for l = m .. m + count - 1, written to out[0..count).
// Sectoral seed accumulates sqrt factors so that (1-x^2)^(m/2) never overflows.
void normalized_column(int order, int count, double x, double* out) {
  const double omx2 = (1.0 - x) * (1.0 + x);
  double pmm = std::sqrt(1.0 / kFourPi);
  for (int i = 1; i <= order; ++i) {
    pmm *= std::sqrt(omx2 * (2.0 * i - 1.0) / (2.0 * i));
  }
  pmm *= std::sqrt(2.0 * order + 1.0);
  if (count <= 0) return;
  out[0] = pmm;
  if (count == 1) return;
  double prev_factor = std::sqrt(2.0 * order + 3.0);
  double p_prev = pmm;
  double p_curr = x * prev_factor * pmm;
  out[1] = p_curr;
  const double m2 = static_cast<double>(order) * order;
  for (int k = 2; k < count; ++k) {
    const double l = static_cast<double>(order + k);
    const double factor = std::sqrt((4.0 * l * l - 1.0) / (l * l - m2));
    const double p_next = (x * p_curr - p_prev / prev_factor) * factor;
    prev_factor = factor;
    p_prev = p_curr;
    p_curr = p_next;
    out[k] = p_curr;
  }
}

}  // namespace

SpherePoint::SpherePoint(double lon, double lat) {
  if (!std::isfinite(lon) || !std::isfinite(lat)) {
    throw DomainError("non-finite sphere coordinate");
  }
  if (lat < -kPi / 2.0 || lat > kPi / 2.0) {
    throw DomainError("latitude " + std::to_string(lat) + " rad outside [-pi/2, pi/2]");
  }
  double wrapped = std::fmod(lon, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  if (wrapped >= 2.0 * kPi) wrapped = 0.0;
  lon_ = wrapped;
  lat_ = lat;
}

SpherePoint SpherePoint::from_degrees(double lat_deg, double lon_deg) {
  return SpherePoint(lon_deg * kPi / 180.0, lat_deg * kPi / 180.0);
}

SpherePoint SpherePoint::from_unit_vector(const std::array<double, 3>& v) {
  const double r = std::hypot(v[0], v[1], v[2]);
  if (!(r > 0.0)) throw DomainError("zero vector has no direction");
  const double z = std::clamp(v[2] / r, -1.0, 1.0);
  return SpherePoint(std::atan2(v[1], v[0]), std::asin(z));
}

double SpherePoint::lat_deg() const noexcept { return lat_ * 180.0 / kPi; }
double SpherePoint::lon_deg() const noexcept { return lon_ * 180.0 / kPi; }

std::array<double, 3> SpherePoint::unit_vector() const noexcept {
  const double c = std::cos(lat_);
  return {c * std::cos(lon_), c * std::sin(lon_), std::sin(lat_)};
}

HarmonicIndex::HarmonicIndex(int degree, int order) : degree_(degree), order_(order) {
  if (degree < 0) throw IndexError("negative harmonic degree " + std::to_string(degree));
  if (std::abs(order) > degree) {
    throw IndexError("harmonic order " + std::to_string(order) + " exceeds degree " +
                     std::to_string(degree));
  }
}

HarmonicIndex HarmonicIndex::from_linear(int j) {
  if (j < 0) throw IndexError("negative packed harmonic index");
  const int l = static_cast<int>(std::sqrt(static_cast<double>(j)));
  int degree = l;
  while (degree * degree > j) --degree;
  while ((degree + 1) * (degree + 1) <= j) ++degree;
  return HarmonicIndex(degree, j - degree * degree - degree);
}

double legendre_p(int degree, double x, int max_degree) {
  check_degree(degree, max_degree);
  x = clamp_argument(x);
  if (degree == 0) return 1.0;
  double p_prev = 1.0;
  double p_curr = x;
  for (int l = 1; l < degree; ++l) {
    const double p_next = ((2.0 * l + 1.0) * x * p_curr - l * p_prev) / (l + 1.0);
    p_prev = p_curr;
    p_curr = p_next;
  }
  return p_curr;
}

std::vector<double> legendre_p_sequence(int max_degree_in_sequence, double x, int max_degree) {
  check_degree(max_degree_in_sequence, max_degree);
  x = clamp_argument(x);
  std::vector<double> out(static_cast<std::size_t>(max_degree_in_sequence) + 1);
  out[0] = 1.0;
  if (max_degree_in_sequence == 0) return out;
  out[1] = x;
  for (int l = 1; l < max_degree_in_sequence; ++l) {
    out[l + 1] = ((2.0 * l + 1.0) * x * out[l] - l * out[l - 1]) / (l + 1.0);
  }
  return out;
}

double assoc_legendre_normalized(int degree, int order, double x, int max_degree) {
  check_degree(degree, max_degree);
  if (order < 0 || order > degree) {
    throw IndexError("associated Legendre order " + std::to_string(order) +
                     " must satisfy 0 <= m <= l = " + std::to_string(degree));
  }
  x = clamp_argument(x);
  const int count = degree - order + 1;
  if (count <= 2) {
    double buf[2];
    normalized_column(order, count, x, buf);
    return buf[count - 1];
  }
  std::vector<double> column(static_cast<std::size_t>(count));
  normalized_column(order, count, x, column.data());
  return column.back();
}

double real_spherical_harmonic(const HarmonicIndex& idx, const SpherePoint& p) {
  const int m = std::abs(idx.order());
  const double plm = assoc_legendre_normalized(idx.degree(), m, std::sin(p.lat()));
  if (idx.order() == 0) return plm;
  const double azimuthal = idx.order() > 0 ? std::cos(m * p.lon()) : std::sin(m * p.lon());
  return std::numbers::sqrt2 * plm * azimuthal;
}

std::vector<double> real_spherical_harmonics(int n_degrees, const SpherePoint& p) {
  if (n_degrees < 0) throw IndexError("negative number of harmonic degrees");
  check_degree(std::max(n_degrees - 1, 0), kDefaultMaxDegree);
  std::vector<double> out(static_cast<std::size_t>(n_degrees) * n_degrees);
  if (n_degrees == 0) return out;
  const double x = std::sin(p.lat());
  std::vector<double> column(static_cast<std::size_t>(n_degrees));
  for (int m = 0; m < n_degrees; ++m) {
    const int count = n_degrees - m;
    normalized_column(m, count, x, column.data());
    const double c = std::cos(m * p.lon());
    const double s = std::sin(m * p.lon());
    for (int k = 0; k < count; ++k) {
      const int l = m + k;
      if (m == 0) {
        out[l * l + l] = column[k];
      } else {
        out[l * l + l + m] = std::numbers::sqrt2 * column[k] * c;
        out[l * l + l - m] = std::numbers::sqrt2 * column[k] * s;
      }
    }
  }
  return out;
}

double great_circle(const SpherePoint& p, const SpherePoint& q) noexcept {
  const double s_lat = std::sin(0.5 * (q.lat() - p.lat()));
  const double s_lon = std::sin(0.5 * (q.lon() - p.lon()));
  const double hav = s_lat * s_lat + std::cos(p.lat()) * std::cos(q.lat()) * (s_lon * s_lon);
  return 2.0 * std::asin(std::sqrt(std::clamp(hav, 0.0, 1.0)));
}

QuadratureRule gauss_legendre_nodes(int n) {
  if (n < 1 || n > 1024) {
    throw ConfigError("Gauss-Legendre order " + std::to_string(n) + " outside [1, 1024]");
  }
  QuadratureRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int l = 1; l < n; ++l) {
        const double p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pn1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace sphirf
