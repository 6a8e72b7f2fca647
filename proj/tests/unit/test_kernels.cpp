#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphirf/error.hpp"
#include "sphirf/kernels.hpp"

using namespace sphirf;

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * kPi);

SpherePoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lon(0.0, 2.0 * kPi);
  return SpherePoint(lon(rng), std::asin(u(rng)));
}

ModelSpec family_at(Family f, double alpha, double beta) {
  return ModelSpec(f, alpha, beta, 1.0,
                   family_has_shape(f) ? std::optional<double>(default_shape(f)) : std::nullopt);
}

// Direct double sum of the lag sequence, the defining expression of the d = 1 block.
double integrated_oracle(const ModelSpec& spec, int kappa, double psi, long t, long s) {
  double sum = 0.0;
  for (long u = 1; u <= t; ++u) {
    for (long v = 1; v <= s; ++v) sum += oracle::gf_icf(spec.alpha(), spec.beta(), psi, u - v, kappa);
  }
  return sum;
}

}  // namespace

TEST_CASE("model spec validation") {
  CHECK_THROWS_AS(ModelSpec::generating_function(1.0, 0.1), ConfigError);
  CHECK_THROWS_AS(ModelSpec::generating_function(0.0, 0.1), ConfigError);
  CHECK_THROWS_AS(ModelSpec::generating_function(0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(ModelSpec::generating_function(0.5, 0.1, -1.0), ConfigError);
  CHECK_THROWS_AS(ModelSpec(Family::GeneratingFunction, 0.5, 0.1, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(ModelSpec(Family::SineSeries, 0.5, 0.1, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(ModelSpec(Family::SinePower, 0.5, 0.1, 1.0, 2.5), ConfigError);
  CHECK_THROWS_AS(ModelSpec(Family::SinePower, 0.5, 0.1, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(ModelSpec(Family::NegativeBinomial, 0.5, 0.1, 1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(ModelSpec(Family::Poisson, 0.5, 0.1, 1.0, 0.0), ConfigError);
  CHECK(ModelSpec(Family::Multiquadric, 0.5, 0.1).shape() == 1.0);
  CHECK(ModelSpec(Family::SinePower, 0.5, 0.1, 1.0, 2.0).shape() == 2.0);
  const ModelSpec moved = ModelSpec(Family::Poisson, 0.5, 0.1, 2.0, 3.0).with_decay(0.7, 0.4);
  CHECK(moved.alpha() == 0.7);
  CHECK(moved.beta() == 0.4);
  CHECK(moved.gamma() == 2.0);
  CHECK(moved.shape() == 3.0);
  for (Family f : kAllFamilies) CHECK(parse_family(family_name(f)) == f);
  CHECK_THROWS_AS(parse_family("gaussian"), ConfigError);
}

TEST_CASE("temporal factor and degree coefficients") {
  const ModelSpec spec = ModelSpec::generating_function(0.8, 0.1);
  CHECK(temporal_g(spec, 0) == 1.0);
  CHECK(temporal_g(spec, 10) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const ModelSpec fast = ModelSpec::generating_function(0.8, 0.3);
  CHECK(temporal_g(fast, -2) == temporal_g(fast, 2));
  CHECK(temporal_g(fast, -2) == doctest::Approx(std::exp(-0.6)).epsilon(1e-15));
  for (long h = -5; h <= 5; ++h) CHECK(a_ell(spec, 0, h) == 1.0);
  CHECK(a_ell(spec, 1, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(a_ell(spec, 2, 3) == doctest::Approx(0.64 * std::exp(-0.6)).epsilon(1e-14));
  for (int l = 1; l < 20; ++l) {
    for (long h = 0; h < 10; ++h) {
      CHECK(a_ell(spec, l, h + 1) <= a_ell(spec, l, h));
      CHECK(a_ell(spec, l, -h) == a_ell(spec, l, h));
    }
  }
}

TEST_CASE("closed-form kernel values") {
  const ModelSpec gf = ModelSpec::generating_function(0.8, 0.1);
  CHECK(phi0_closed(gf, 0.0, 0) == doctest::Approx(45.0 / (4.0 * kPi)).epsilon(1e-13));
  CHECK(phi0_closed(gf, 0.0, 0) == doctest::Approx(3.5809862).epsilon(1e-7));
  CHECK(phi0_closed(ModelSpec::generating_function(1e-9, 0.1), 1.0, 0) ==
        doctest::Approx(kInv4Pi).epsilon(1e-8));
  const ModelSpec poisson(Family::Poisson, 0.5, 0.1, 1.0, 1.0);
  CHECK(phi0_closed(poisson, kPi / 2.0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  for (double alpha : {0.2, 0.5, 0.8, 0.9}) {
    for (double psi = 0.0; psi <= kPi; psi += 0.25) {
      for (long h = 0; h < 6; ++h) {
        const ModelSpec s = ModelSpec::generating_function(alpha, 0.2, 1.7);
        CHECK(phi0_closed(s, psi, h) ==
              doctest::Approx(oracle::poisson_kernel(alpha, 0.2, 1.7, psi, h)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("series oracle agrees with the generating-function closed form") {
  const ModelSpec gf = ModelSpec::generating_function(0.8, 0.1);
  CHECK(std::abs(phi0_series_oracle(gf, 0.0, 0, 2000) - 3.5809862) <= 1e-7);
  CHECK(std::abs(phi0_series_oracle(gf, kPi / 3.0, 2, 2000) - phi0_closed(gf, kPi / 3.0, 2)) <=
        1e-8);
  CHECK(phi0_series_oracle(ModelSpec::generating_function(0.5, 0.3, 2.0), 1.0, 3, 0) ==
        doctest::Approx(2.0 * kInv4Pi).epsilon(1e-15));
  for (double psi = 0.0; psi <= kPi; psi += 0.3) {
    for (long h = 0; h <= 6; ++h) {
      CHECK(std::abs(phi0_series_oracle(gf, psi, h, 2000) - phi0_closed(gf, psi, h)) <= 1e-8);
    }
  }
}

TEST_CASE("band coefficients reproduce every family") {
  const ModelSpec gf = ModelSpec::generating_function(0.6, 0.2, 1.5);
  for (int l = 0; l < 10; ++l) {
    CHECK(band_coefficient(gf, l, 2) == doctest::Approx(1.5 * a_ell(gf, l, 2)).epsilon(1e-15));
  }
  for (Family f : {Family::NegativeBinomial, Family::Multiquadric, Family::SineSeries,
                   Family::AdaptedMultiquadric, Family::Poisson}) {
    CAPTURE(family_name(f));
    const ModelSpec spec = family_at(f, 0.5, 0.2);
    std::vector<double> bands;
    for (int l = 0; l <= 80; ++l) bands.push_back(band_coefficient(spec, l, 1));
    for (double psi = 0.0; psi <= kPi; psi += 0.2) {
      const auto p = legendre_p_sequence(80, std::cos(psi));
      double series = 0.0;
      for (int l = 0; l <= 80; ++l) series += (2.0 * l + 1.0) * kInv4Pi * bands[l] * p[l];
      CHECK(series == doctest::Approx(phi0_closed(spec, psi, 1)).epsilon(1e-9).scale(1.0));
    }
    for (double b : bands) CHECK(b >= -1e-12);
  }
}

TEST_CASE("intrinsic covariance removes low bands") {
  const ModelSpec gf = ModelSpec::generating_function(0.8, 0.1);
  const double phi = phi0_closed(gf, 0.0, 0);
  const IntrinsicSpec k0 = IntrinsicSpec::with_defaults(0, 0);
  const IntrinsicSpec k1 = IntrinsicSpec::with_defaults(1, 0);
  const IntrinsicSpec k2 = IntrinsicSpec::with_defaults(2, 0);
  for (double psi : {0.0, 0.7, 2.0}) {
    for (long h : {0L, 3L}) CHECK(icf_value(gf, k0, psi, h) == phi0_closed(gf, psi, h));
  }
  CHECK(icf_value(gf, k1, 0.0, 0) == doctest::Approx(phi - kInv4Pi).epsilon(1e-14));
  CHECK(icf_value(gf, k1, 0.0, 0) == doctest::Approx(44.0 / (4.0 * kPi)).epsilon(1e-13));
  CHECK(icf_value(gf, k2, 0.0, 0) ==
        doctest::Approx(phi - kInv4Pi - 3.0 * kInv4Pi * 0.8).epsilon(1e-14));
  const IntrinsicSpec scaled(1, 0, 2.5, {kDefaultNilScale}, default_anchors(1));
  CHECK(icf_value(gf, scaled, 0.4, 1) == doctest::Approx(2.5 * icf_core(gf, 1, 0.4, 1)).epsilon(1e-15));
  for (double psi = 0.0; psi <= kPi; psi += 0.37) {
    for (long h = 0; h < 5; ++h) {
      for (int kappa = 0; kappa <= 3; ++kappa) {
        CHECK(icf_core(gf, kappa, psi, h) ==
              doctest::Approx(oracle::gf_icf(0.8, 0.1, psi, h, kappa)).epsilon(1e-12).scale(1.0));
      }
      // the kappa = 1 correction is the constant 1/(4 pi)
      CHECK(phi0_closed(gf, psi, h) - icf_core(gf, 1, psi, h) ==
            doctest::Approx(kInv4Pi).epsilon(1e-12));
    }
  }
}

TEST_CASE("integrated block for d = 1") {
  const ModelSpec gf = ModelSpec::generating_function(0.8, 0.1);
  const IntrinsicSpec k1d1 = IntrinsicSpec::with_defaults(1, 1);
  for (long s = 0; s < 5; ++s) {
    CHECK(integrated_block(gf, k1d1, 0.3, 0, s) == 0.0);
    CHECK(integrated_block(gf, k1d1, 0.3, s, 0) == 0.0);
  }
  CHECK(integrated_block(gf, k1d1, 0.0, 1, 1) == doctest::Approx(44.0 / (4.0 * kPi)).epsilon(1e-13));
  CHECK(integrated_block(gf, k1d1, 0.0, 2, 1) ==
        doctest::Approx(icf_core(gf, 1, 0.0, 0) + icf_core(gf, 1, 0.0, 1)).epsilon(1e-14));
  CHECK_THROWS_AS(integrated_block(gf, k1d1, 0.0, -1, 1), DomainError);
  const IntrinsicSpec k1d0 = IntrinsicSpec::with_defaults(1, 0);
  CHECK(integrated_block(gf, k1d0, 0.5, 7, 4) == icf_core(gf, 1, 0.5, 3));

  const int T = 12;
  for (int kappa : {0, 1, 2}) {
    const IntrinsicSpec in = IntrinsicSpec::with_defaults(kappa, 1);
    const IntegratedKernel kernel(gf, in, T);
    for (double psi : {0.0, 0.4, 1.3, 3.0}) {
      const Eigen::MatrixXd b = kernel.block(psi);
      for (int t = 0; t <= T; ++t) {
        CHECK(b(0, t) == 0.0);
        for (int s = 0; s <= T; ++s) {
          CHECK(b(t, s) == b(s, t));
          CHECK(b(t, s) == doctest::Approx(integrated_oracle(gf, kappa, psi, t, s))
                               .epsilon(1e-12)
                               .scale(1.0));
          if (t >= 1 && s >= 1) {
            const double second_difference = b(t, s) - b(t, s - 1) - b(t - 1, s) + b(t - 1, s - 1);
            CHECK(std::abs(second_difference - icf_core(gf, kappa, psi, t - s)) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("nil-space basis interpolates the anchors") {
  const auto c1 = nil_space_basis(1, default_anchors(1));
  CHECK(c1(0, 0) == doctest::Approx(2.0 * std::sqrt(kPi)).epsilon(1e-14));
  const IntrinsicSpec k1 = IntrinsicSpec::with_defaults(1, 1);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) CHECK(k1.nil_values(random_point(rng))(0) == doctest::Approx(1.0));

  for (int kappa : {2, 3}) {
    const auto anchors = default_anchors(kappa);
    const Eigen::MatrixXd c = nil_space_basis(kappa, anchors);
    const int size = kappa * kappa;
    Eigen::MatrixXd eval(size, size);
    for (int mu = 0; mu < size; ++mu) {
      for (int j = 0; j < size; ++j) {
        eval(j, mu) = real_spherical_harmonic(HarmonicIndex::from_linear(j), anchors[mu]);
      }
    }
    CHECK((c * eval - Eigen::MatrixXd::Identity(size, size)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  // Four anchors on the equator: Y_1^0 vanishes at all of them.
  std::vector<SpherePoint> flat;
  for (int k = 0; k < 4; ++k) flat.emplace_back(k * kPi / 2.0 + 0.1, 0.0);
  CHECK_THROWS_AS(nil_space_basis(2, flat), SingularConfigurationError);
  CHECK_THROWS_AS(nil_space_basis(2, default_anchors(1)), ConfigError);
  std::vector<SpherePoint> twins = default_anchors(2);
  twins[1] = twins[0];
  CHECK_THROWS_AS(nil_space_basis(2, twins), ConfigError);
  CHECK_THROWS_AS(IntrinsicSpec(1, 2, 1.0, {1.0}, default_anchors(1)), ConfigError);
  CHECK_THROWS_AS(IntrinsicSpec(1, 1, 1.0, {1.0, 1.0}, default_anchors(1)), ConfigError);
  CHECK_THROWS_AS(IntrinsicSpec(1, 1, 0.0, {1.0}, default_anchors(1)), ConfigError);
}

TEST_CASE("full covariance special cases") {
  const ModelSpec gf = ModelSpec::generating_function(0.8, 0.1);
  std::mt19937_64 rng(17);
  const IntrinsicSpec k0 = IntrinsicSpec::with_defaults(0, 0);
  for (int k = 0; k < 10; ++k) {
    const SpherePoint p = random_point(rng);
    const SpherePoint q = random_point(rng);
    CHECK(full_covariance(gf, k0, p, q, 5, 2) == phi0_closed(gf, great_circle(p, q), 3));
  }
  const IntrinsicSpec k1 = IntrinsicSpec::with_defaults(1, 1);
  const SpherePoint tau = k1.anchors()[0];
  CHECK(full_covariance(gf, k1, tau, tau, 0, 0) == doctest::Approx(kInv4Pi).epsilon(1e-14));
  for (int k = 0; k < 20; ++k) {
    const SpherePoint p = random_point(rng);
    const SpherePoint q = random_point(rng);
    for (long t = 0; t < 4; ++t) {
      for (long s = 0; s < 4; ++s) {
        CHECK(full_covariance(gf, k1, p, q, t, s) == full_covariance(gf, k1, q, p, s, t));
      }
    }
  }
}

TEST_CASE("assembled covariance is positive semidefinite for every family") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> time(0, 6);
  for (Family f : kAllFamilies) {
    for (int kappa = 0; kappa <= 2; ++kappa) {
      for (int d = 0; d <= 1; ++d) {
        CAPTURE(family_name(f));
        CAPTURE(kappa);
        CAPTURE(d);
        const ModelSpec spec = family_at(f, 0.7, 0.3);
        const IntrinsicSpec in = IntrinsicSpec::with_defaults(kappa, d, 1.3);
        std::vector<SpherePoint> pts;
        std::vector<long> ts;
        for (int k = 0; k < 30; ++k) {
          pts.push_back(random_point(rng));
          ts.push_back(time(rng));
        }
        Eigen::MatrixXd r(30, 30);
        for (int a = 0; a < 30; ++a) {
          for (int b = 0; b < 30; ++b) r(a, b) = full_covariance(spec, in, pts[a], pts[b], ts[a], ts[b]);
        }
        CHECK(oracle::min_eigenvalue(r) >= -1e-8 * r.diagonal().maxCoeff());
      }
    }
  }
}

TEST_CASE("kernels decay with distance and lag") {
  for (Family f : kAllFamilies) {
    CAPTURE(family_name(f));
    const ModelSpec spec = family_at(f, 0.7, 0.3);
    for (long h = 0; h <= 8; ++h) {
      double prev = phi0_closed(spec, 0.0, h);
      for (int k = 1; k <= 200; ++k) {
        const double psi = kPi * k / 200.0;
        const double v = phi0_closed(spec, psi, h);
        CHECK(v <= prev + 1e-15);
        prev = v;
      }
    }
    // In |h| only where cos(psi) >= 0; the generating function (alpha = 0.7) turns
    // over already near psi = 0.57, where growing h flattens the peak into the shoulder.
    const double psi_max = f == Family::GeneratingFunction ? 0.55 : 0.5 * kPi;
    for (int k = 0; k <= 100; ++k) {
      const double psi = psi_max * k / 100.0;
      for (long h = 0; h < 10; ++h) {
        CHECK(phi0_closed(spec, psi, h + 1) <= phi0_closed(spec, psi, h) + 1e-15);
        CHECK(phi0_closed(spec, psi, -h) == phi0_closed(spec, psi, h));
      }
    }
  }
}
