#pragma once

#include <array>
#include <numbers>
#include <vector>

namespace sphirf {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// Largest Legendre degree accepted by the special-function routines.
inline constexpr int kDefaultMaxDegree = 4096;

/// A point on the unit sphere. Longitude is wrapped into [0, 2pi); latitude
/// must lie in [-pi/2, pi/2].
class SpherePoint {
 public:
  SpherePoint() = default;
  SpherePoint(double lon, double lat);

  static SpherePoint from_degrees(double lat_deg, double lon_deg);
  static SpherePoint from_unit_vector(const std::array<double, 3>& v);

  double lon() const noexcept { return lon_; }
  double lat() const noexcept { return lat_; }
  double lat_deg() const noexcept;
  double lon_deg() const noexcept;

  std::array<double, 3> unit_vector() const noexcept;

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;

 private:
  double lon_ = 0.0;
  double lat_ = 0.0;
};

/// Degree/order pair of a real spherical harmonic, |order| <= degree.
class HarmonicIndex {
 public:
  HarmonicIndex(int degree, int order);

  int degree() const noexcept { return degree_; }
  int order() const noexcept { return order_; }

  /// Position in the packed basis {Y_l^m : l < n}: l*l + l + m.
  int linear() const noexcept { return degree_ * degree_ + degree_ + order_; }
  static HarmonicIndex from_linear(int j);

 private:
  int degree_;
  int order_;
};

/// Legendre polynomial P_l(x) by the Bonnet recurrence.
double legendre_p(int degree, double x, int max_degree = kDefaultMaxDegree);

/// P_0(x) .. P_L(x) from one recurrence pass; entry l is bit-identical to legendre_p(l, x).
std::vector<double> legendre_p_sequence(int max_degree_in_sequence, double x,
                                        int max_degree = kDefaultMaxDegree);

/// sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(x) without the Condon-Shortley phase.
double assoc_legendre_normalized(int degree, int order, double x,
                                 int max_degree = kDefaultMaxDegree);

/// Real orthonormal spherical harmonic. The Legendre argument is sin(lat),
/// i.e. the cosine of colatitude; m > 0 pairs with cos(m lon), m < 0 with sin(|m| lon).
double real_spherical_harmonic(const HarmonicIndex& idx, const SpherePoint& p);

/// All Y_l^m with l < n_degrees at p, packed by HarmonicIndex::linear().
std::vector<double> real_spherical_harmonics(int n_degrees, const SpherePoint& p);

/// Central angle in [0, pi] (haversine form).
double great_circle(const SpherePoint& p, const SpherePoint& q) noexcept;

struct QuadratureRule {
  std::vector<double> nodes;    ///< ascending, in (-1, 1)
  std::vector<double> weights;  ///< positive, summing to 2
};

/// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 1024.
QuadratureRule gauss_legendre_nodes(int n);

}  // namespace sphirf
