#include "sphirf/field_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "sphirf/error.hpp"

namespace sphirf {
namespace {

constexpr double kDuplicateTolerance = 1e-12;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterStop = 1e-6;

void check_distinct(const std::vector<SpherePoint>& locations) {
  const std::size_t n = locations.size();
  std::vector<std::array<double, 3>> unit(n);
  for (std::size_t i = 0; i < n; ++i) unit[i] = locations[i].unit_vector();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return unit[a][2] < unit[b][2]; });
  for (std::size_t a = 0; a < n; ++a) {
    const auto& u = unit[order[a]];
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& v = unit[order[b]];
      if (v[2] - u[2] > kDuplicateTolerance) break;
      const double chord = std::hypot(u[0] - v[0], u[1] - v[1], u[2] - v[2]);
      if (chord <= kDuplicateTolerance) {
        throw ConfigError("duplicate locations " + std::to_string(order[a]) + " and " +
                          std::to_string(order[b]));
      }
    }
  }
}

}  // namespace

std::string_view sampling_name(Sampling sampling) noexcept {
  switch (sampling) {
    case Sampling::UniformRandom: return "uniform";
    case Sampling::FibonacciLattice: return "fibonacci";
    case Sampling::FromFile: return "file";
  }
  return "unknown";
}

Sampling parse_sampling(std::string_view name) {
  for (Sampling s : {Sampling::UniformRandom, Sampling::FibonacciLattice, Sampling::FromFile}) {
    if (sampling_name(s) == name) return s;
  }
  throw ConfigError("unknown sampling scheme '" + std::string(name) +
                    "' (expected uniform, fibonacci or file)");
}

void GridSpec::validate(int d) const {
  if (n_locations < 2) throw ConfigError("grid needs at least 2 locations");
  if (T < d + 1) {
    throw ConfigError("grid needs T >= d + 1 = " + std::to_string(d + 1) + " time points");
  }
  if (sampling == Sampling::FromFile && static_cast<int>(locations.size()) != n_locations) {
    throw ConfigError("location list has " + std::to_string(locations.size()) +
                      " entries, grid expects " + std::to_string(n_locations));
  }
}

std::vector<SpherePoint> uniform_sphere_points(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SpherePoint> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 2.0 * unit(rng) - 1.0;
    const double lon = 2.0 * kPi * unit(rng);
    points.emplace_back(lon, std::asin(z));
  }
  return points;
}

std::vector<SpherePoint> fibonacci_points(int n) {
  std::vector<SpherePoint> points;
  points.reserve(static_cast<std::size_t>(n));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    points.emplace_back(golden * i, std::asin(z));
  }
  return points;
}

std::vector<SpherePoint> grid_locations(const GridSpec& grid, std::mt19937_64& rng) {
  switch (grid.sampling) {
    case Sampling::UniformRandom: return uniform_sphere_points(grid.n_locations, rng);
    case Sampling::FibonacciLattice: return fibonacci_points(grid.n_locations);
    case Sampling::FromFile: return grid.locations;
  }
  throw ConfigError("unknown sampling scheme");
}

SampledField::SampledField(std::vector<SpherePoint> locations, std::vector<long> times,
                           Eigen::MatrixXd values, std::vector<std::string> ids, FieldMeta meta)
    : locations_(std::move(locations)),
      times_(std::move(times)),
      values_(std::move(values)),
      ids_(std::move(ids)),
      meta_(std::move(meta)) {
  if (values_.rows() != static_cast<Eigen::Index>(locations_.size()) ||
      values_.cols() != static_cast<Eigen::Index>(times_.size())) {
    throw ConfigError("field values must be n_locations x n_times");
  }
  for (std::size_t a = 1; a < times_.size(); ++a) {
    if (times_[a] != times_[a - 1] + 1) {
      throw ConfigError("time grid must be consecutive integers (gap after t = " +
                        std::to_string(times_[a - 1]) + ")");
    }
  }
  if (!values_.allFinite()) throw NumericError("field contains non-finite values");
  if (ids_.empty()) {
    ids_.reserve(locations_.size());
    for (std::size_t i = 0; i < locations_.size(); ++i) ids_.push_back(std::to_string(i));
  } else if (ids_.size() != locations_.size()) {
    throw ConfigError("one location id per location required");
  }
  check_distinct(locations_);
}

SampledField SampledField::with_values(Eigen::MatrixXd values, std::vector<long> times) const {
  return SampledField(locations_, std::move(times), std::move(values), ids_, meta_);
}

Eigen::MatrixXd assemble_covariance(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                                    std::span<const SpherePoint> locations, int T, long cap) {
  if (T < 1) throw ConfigError("assemble_covariance needs T >= 1");
  const long n = static_cast<long>(locations.size());
  const long rows = n * T;
  if (rows > cap) {
    throw ConfigError("covariance matrix would have " + std::to_string(rows) +
                      " rows (n = " + std::to_string(n) + ", T = " + std::to_string(T) +
                      "), above the cap of " + std::to_string(cap));
  }
  const IntegratedKernel kernel(spec, intrinsic, T);
  const int size = intrinsic.basis_size();
  const double g0 = intrinsic.gamma0();
  const auto& gam = intrinsic.gamma_nu();
  const auto& tau = intrinsic.anchors();

  // Blocks use times 1..T, i.e. rows/cols 1..T of the kernel's 0..T table.
  Eigen::MatrixXd full(T + 1, T + 1);
  auto block_at = [&](double psi) {
    kernel.block_into(psi, full);
    return Eigen::MatrixXd(full.bottomRightCorner(T, T));
  };

  Eigen::MatrixXd q(n, size);
  std::vector<std::vector<Eigen::MatrixXd>> to_anchor(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    if (size > 0) q.row(i) = intrinsic.nil_values(locations[i]).transpose();
    for (int nu = 0; nu < size; ++nu) {
      to_anchor[i].push_back(block_at(great_circle(locations[i], tau[nu])));
    }
  }
  std::vector<Eigen::MatrixXd> anchor_pair(static_cast<std::size_t>(size) * size);
  for (int nu = 0; nu < size; ++nu) {
    for (int mu = 0; mu < size; ++mu) {
      anchor_pair[nu * size + mu] = block_at(great_circle(tau[nu], tau[mu]));
    }
  }

  Eigen::MatrixXd cov(rows, rows);
  Eigen::MatrixXd blk(T, T);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j <= i; ++j) {
      blk = (g0 * g0) * block_at(great_circle(locations[i], locations[j]));
      for (int nu = 0; nu < size; ++nu) {
        for (int mu = 0; mu < size; ++mu) {
          blk += (gam[nu] * gam[mu] * q(i, nu) * q(j, mu)) * anchor_pair[nu * size + mu];
        }
        blk.array() += gam[nu] * gam[nu] * q(i, nu) * q(j, nu);
        blk -= (g0 * gam[nu] * q(i, nu)) * to_anchor[j][nu];
        blk -= (g0 * gam[nu] * q(j, nu)) * to_anchor[i][nu];
      }
      cov.block(i * T, j * T, T, T) = blk;
      if (j != i) cov.block(j * T, i * T, T, T) = blk.transpose();
    }
  }
  return cov;
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols()) {
    throw ConfigError("covariance matrix must be square");
  }
  const Eigen::Index n = covariance.rows();
  if (n == 0) return;
  const double mean_diag = covariance.diagonal().mean();
  double relative = 0.0;
  while (true) {
    Eigen::MatrixXd work = covariance;
    const double jitter = relative * mean_diag;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(work);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite()) {
      factor_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
    relative = relative == 0.0 ? kJitterStart : relative * 10.0;
    if (relative > kJitterStop * (1.0 + 1e-9)) break;
  }
  throw NotPositiveSemidefiniteError(
      "covariance matrix is not positive semidefinite: Cholesky failed with jitter up to 1e-6 "
      "x mean diagonal");
}

Eigen::VectorXd GaussianSampler::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(factor_.rows());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  return factor_.triangularView<Eigen::Lower>() * z;
}

GaussianDraw sample_gaussian(const Eigen::MatrixXd& covariance, std::uint64_t seed) {
  const GaussianSampler sampler(covariance);
  std::mt19937_64 rng(seed);
  return {sampler.draw(rng), sampler.jitter()};
}

SampledField simulate_irf(const ModelSpec& spec, const IntrinsicSpec& intrinsic,
                          const GridSpec& grid, long cap) {
  grid.validate(intrinsic.d());
  std::mt19937_64 rng(grid.seed);
  auto locations = grid_locations(grid, rng);
  const Eigen::MatrixXd cov = assemble_covariance(spec, intrinsic, locations, grid.T, cap);
  const GaussianSampler sampler(cov);
  const Eigen::VectorXd draw = sampler.draw(rng);
  const Eigen::Index n = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd values(n, grid.T);
  for (Eigen::Index i = 0; i < n; ++i) {
    values.row(i) = draw.segment(i * grid.T, grid.T).transpose();
  }
  std::vector<long> times(static_cast<std::size_t>(grid.T));
  std::iota(times.begin(), times.end(), 1L);
  FieldMeta meta;
  meta.spec = spec;
  meta.intrinsic = intrinsic;
  meta.grid = grid;
  meta.seed = grid.seed;
  meta.jitter_used = sampler.jitter();
  return SampledField(std::move(locations), std::move(times), std::move(values), {},
                      std::move(meta));
}

SampledField difference_time(const SampledField& field, int d) {
  if (d != 0 && d != 1) throw ConfigError("temporal order d must be 0 or 1");
  if (field.n_times() < d + 1) {
    throw ConfigError("series of length " + std::to_string(field.n_times()) +
                      " is too short for differencing of order " + std::to_string(d));
  }
  if (d == 0) return field;
  const int T = field.n_times();
  const auto& v = field.values();
  Eigen::MatrixXd diff = v.rightCols(T - 1) - v.leftCols(T - 1);
  std::vector<long> times(field.times().begin() + 1, field.times().end());
  return field.with_values(std::move(diff), std::move(times));
}

SampledField truncate_harmonics(const SampledField& field, int n) {
  if (n < 0) throw ConfigError("truncation order must be non-negative");
  if (n == 0) return field;
  const int basis = n * n;
  if (field.n_locations() < basis) {
    throw ConfigError("truncation at order " + std::to_string(n) + " needs at least " +
                      std::to_string(basis) + " locations, field has " +
                      std::to_string(field.n_locations()));
  }
  Eigen::MatrixXd design(field.n_locations(), basis);
  for (int i = 0; i < field.n_locations(); ++i) {
    const auto y = real_spherical_harmonics(n, field.locations()[i]);
    for (int j = 0; j < basis; ++j) design(i, j) = y[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < basis) {
    throw RankDeficiencyError("harmonic design matrix of order " + std::to_string(n) +
                              " is rank deficient at these locations (rank " +
                              std::to_string(qr.rank()) + " < " + std::to_string(basis) + ")");
  }
  const Eigen::MatrixXd coef = qr.solve(field.values());
  Eigen::MatrixXd residual = field.values() - design * coef;
  return field.with_values(std::move(residual), field.times());
}

}  // namespace sphirf
