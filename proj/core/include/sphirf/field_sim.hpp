#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sphirf/kernels.hpp"
#include "sphirf/sphere_math.hpp"

namespace sphirf {

enum class Sampling { UniformRandom, FibonacciLattice, FromFile };

std::string_view sampling_name(Sampling sampling) noexcept;
Sampling parse_sampling(std::string_view name);

/// Location set and time grid 1..T of a simulation.
struct GridSpec {
  int n_locations = 2;
  Sampling sampling = Sampling::UniformRandom;
  int T = 1;
  std::uint64_t seed = 0;
  /// Used only with Sampling::FromFile.
  std::vector<SpherePoint> locations;

  /// n_locations >= 2, T >= d + 1 and a location list of the right size for FromFile.
  void validate(int d) const;
};

/// Area-uniform points: z = sin(lat) uniform on [-1, 1], longitude uniform.
std::vector<SpherePoint> uniform_sphere_points(int n, std::mt19937_64& rng);
std::vector<SpherePoint> fibonacci_points(int n);

/// Locations of the grid; draws from rng only for UniformRandom.
std::vector<SpherePoint> grid_locations(const GridSpec& grid, std::mt19937_64& rng);

struct FieldMeta {
  std::optional<ModelSpec> spec;
  std::optional<IntrinsicSpec> intrinsic;
  std::optional<GridSpec> grid;
  std::optional<std::uint64_t> seed;
  double jitter_used = 0.0;
};

/// Values X(P_i, t_a) on n locations x consecutive integer times.
class SampledField {
 public:
  SampledField(std::vector<SpherePoint> locations, std::vector<long> times, Eigen::MatrixXd values,
               std::vector<std::string> ids = {}, FieldMeta meta = {});

  int n_locations() const noexcept { return static_cast<int>(locations_.size()); }
  int n_times() const noexcept { return static_cast<int>(times_.size()); }
  const std::vector<SpherePoint>& locations() const noexcept { return locations_; }
  const std::vector<long>& times() const noexcept { return times_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const FieldMeta& meta() const noexcept { return meta_; }

  SampledField with_values(Eigen::MatrixXd values, std::vector<long> times) const;

 private:
  std::vector<SpherePoint> locations_;
  std::vector<long> times_;
  Eigen::MatrixXd values_;
  std::vector<std::string> ids_;
  FieldMeta meta_;
};

inline constexpr long kDefaultCovarianceCap = 6000;

/// (nT) x (nT) covariance of the IRF at the given locations and times 1..T. Row
/// i * T + (t - 1) holds (P_i, t).
Eigen::MatrixXd assemble_covariance(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                                    std::span<const SpherePoint> locations, int T,
                                    long cap = kDefaultCovarianceCap);

/// Cholesky factor of a covariance matrix with diagonal jitter escalation
/// (0, then 1e-10 .. 1e-6 times the mean diagonal).
class GaussianSampler {
 public:
  explicit GaussianSampler(const Eigen::MatrixXd& covariance);

  Eigen::VectorXd draw(std::mt19937_64& rng) const;
  double jitter() const noexcept { return jitter_; }
  Eigen::Index dimension() const noexcept { return factor_.rows(); }

 private:
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

struct GaussianDraw {
  Eigen::VectorXd values;
  double jitter = 0.0;
};

GaussianDraw sample_gaussian(const Eigen::MatrixXd& covariance, std::uint64_t seed);

/// Exact draw of an IRF(kappa, d) field on the grid. Locations (when random) and
/// the Gaussian vector come from one generator seeded with grid.seed.
SampledField simulate_irf(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                          const GridSpec& grid, long cap = kDefaultCovarianceCap);

/// d = 0: unchanged. d = 1: X(P, t) - X(P, t - 1) on times 2..T.
SampledField difference_time(const SampledField& field, int d);

/// Per-time-slice least-squares residuals after regressing on {Y_l^m : l < n}.
SampledField truncate_harmonics(const SampledField& field, int n);

}  // namespace sphirf
