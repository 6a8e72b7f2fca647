// Acceptance experiments. `sphirf_acceptance` runs all criteria; `--only N` runs one.
// Prints one "criterion N: PASS|FAIL ..." line per criterion and exits non-zero on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sphirf/error.hpp"
#include "sphirf/estimation.hpp"
#include "sphirf/field_csv.hpp"
#include "sphirf/field_sim.hpp"
#include "sphirf/kernels.hpp"
#include "sphirf/order_select.hpp"
#include "sphirf/pipeline.hpp"
#include "sphirf/run_config.hpp"
#include "sphirf/sphere_math.hpp"

using namespace sphirf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SpherePoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> z(-1.0, 1.0);
  std::uniform_real_distribution<double> lon(0.0, 2.0 * kPi);
  return SpherePoint(lon(rng), std::asin(z(rng)));
}

constexpr double kInv4Pi = 1.0 / (4.0 * kPi);

// Parameter rows of the 500-replicate simulation table (gamma0 = 1 throughout).
constexpr double kTableRows[5][2] = {{0.90, 0.05}, {0.80, 0.10}, {0.70, 0.20}, {0.60, 0.35}, {0.20, 0.10}};

BinSpec zero_first_bins() {
  BinSpec bins;
  for (int k = 0; k < 15; ++k) bins.psi_centers.push_back(0.1 * k);
  bins.epsilon = 0.05;
  bins.lags = {0, 1, 2, 3, 4, 5};
  return bins;
}

SampledField simulate(int kappa, int d, int n, int T, std::uint64_t seed) {
  GridSpec grid;
  grid.n_locations = n;
  grid.T = T;
  grid.seed = seed;
  return simulate_irf(ModelSpec::generating_function(0.8, 0.1), IntrinsicSpec::with_defaults(kappa, d), grid);
}

Outcome special_functions() {
  std::mt19937_64 rng(1);
  double worst_addition = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const SpherePoint p = random_point(rng);
    const SpherePoint q = random_point(rng);
    const auto yp = real_spherical_harmonics(16, p);
    const auto yq = real_spherical_harmonics(16, q);
    const double c = std::cos(great_circle(p, q));
    for (int l = 0; l <= 15; ++l) {
      double sum = 0.0;
      for (int m = -l; m <= l; ++m) sum += yp[l * l + l + m] * yq[l * l + l + m];
      worst_addition = std::max(worst_addition, std::abs(sum - (2 * l + 1) * kInv4Pi * legendre_p(l, c)));
    }
  }

  const QuadratureRule rule = gauss_legendre_nodes(64);
  const int n_lon = 128;
  const int J = 81;  // degrees 0..8
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(J, J);
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const double lat = std::asin(rule.nodes[a]);
    for (int b = 0; b < n_lon; ++b) {
      const auto y = real_spherical_harmonics(9, SpherePoint(2.0 * kPi * b / n_lon, lat));
      const Eigen::Map<const Eigen::VectorXd> v(y.data(), J);
      gram.noalias() += (rule.weights[a] * 2.0 * kPi / n_lon) * v * v.transpose();
    }
  }
  const double worst_ortho = (gram - Eigen::MatrixXd::Identity(J, J)).cwiseAbs().maxCoeff();
  return {worst_addition <= 1e-10 && worst_ortho <= 1e-8,
          fmt("addition max err %.2e (tol 1e-10), orthonormality max err %.2e (tol 1e-8)", worst_addition,
              worst_ortho)};
}

Outcome series_oracle() {
  double worst = 0.0;
  const int L = 2000;
  for (auto [alpha, beta] : {std::pair{0.8, 0.1}, std::pair{0.9, 0.05}, std::pair{0.2, 0.1}}) {
    const ModelSpec gf = ModelSpec::generating_function(alpha, beta);
    for (int k = 0; k <= 31; ++k) {
      const double psi = 0.1 * k;
      const auto P = legendre_p_sequence(L, std::cos(psi));
      for (long h = 0; h <= 6; ++h) {
        const double r = alpha * std::exp(-beta * static_cast<double>(h));
        double series = 0.0;
        double rl = 1.0;
        for (int l = 0; l <= L; ++l) {
          series += (2 * l + 1) * kInv4Pi * rl * P[l];
          rl *= r;
        }
        worst = std::max(worst, std::abs(series - icf_core(gf, 0, psi, h)));
      }
    }
  }
  return {worst <= 1e-8, fmt("max |closed form - series| = %.2e over 3 x 32 x 7 points (tol 1e-8)", worst)};
}

Outcome psd_property() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> family(0, static_cast<int>(std::size(kAllFamilies)) - 1);
  std::uniform_int_distribution<int> kappa_d(0, 2);
  std::uniform_int_distribution<int> d_d(0, 1);
  std::uniform_real_distribution<double> alpha_d(0.1, 0.95);
  std::uniform_real_distribution<double> beta_d(0.01, 1.0);
  std::uniform_real_distribution<double> gamma0_d(0.5, 2.0);
  std::uniform_int_distribution<long> time_d(1, 8);
  double worst = 0.0;
  int failures = 0;
  for (int rep = 0; rep < 25; ++rep) {
    const Family f = kAllFamilies[family(rng)];
    const ModelSpec spec(f, alpha_d(rng), beta_d(rng));
    const int kappa = kappa_d(rng);
    const int d = d_d(rng);
    const IntrinsicSpec in = IntrinsicSpec::with_defaults(kappa, d, gamma0_d(rng));
    std::vector<SpherePoint> pts;
    std::vector<long> ts;
    for (int k = 0; k < 60; ++k) {
      pts.push_back(random_point(rng));
      ts.push_back(time_d(rng));
    }
    Eigen::MatrixXd r(60, 60);
    for (int a = 0; a < 60; ++a) {
      for (int b = 0; b < 60; ++b) r(a, b) = full_covariance(spec, in, pts[a], pts[b], ts[a], ts[b]);
    }
    const double rel = oracle::min_eigenvalue(r) / r.diagonal().maxCoeff();
    worst = std::min(worst, rel);
    if (rel < -1e-8) ++failures;
  }
  return {failures == 0, fmt("%d/25 specs below -1e-8; worst min eig / max diag = %.2e", failures, worst)};
}

Outcome exact_inversion() {
  const BinSpec bins = BinSpec::defaults();
  double worst = 0.0;
  for (const auto& row : kTableRows) {
    const ModelSpec gf = ModelSpec::generating_function(row[0], row[1]);
    const FitResult r = fit(theoretical_table(gf, 1, 1.0, bins), 1);
    worst = std::max({worst, std::abs(r.alpha_hat - row[0]), std::abs(r.beta_hat - row[1]),
                      std::abs(r.gamma0_hat - 1.0)});
  }
  return {worst <= 1e-4, fmt("max parameter error over 5 rows = %.2e (tol 1e-4)", worst)};
}

Outcome table_reproduction() {
  const BinSpec bins = BinSpec::defaults();
  const int reps = 100;
  double sa = 0.0, sb = 0.0, sg = 0.0;
  double qa = 0.0, qb = 0.0, qg = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const SampledField x = simulate(1, 1, 300, 20, 5000 + rep);
    const MoMTable mom = mom_estimate(difference_time(truncate_harmonics(x, 1), 1), bins);
    const FitResult r = fit(mom, 1);
    sa += r.alpha_hat, sb += r.beta_hat, sg += r.gamma0_hat;
    qa += r.alpha_hat * r.alpha_hat, qb += r.beta_hat * r.beta_hat, qg += r.gamma0_hat * r.gamma0_hat;
  }
  auto sd = [&](double s, double q) { return std::sqrt(std::max(0.0, (q - s * s / reps) / (reps - 1))); };
  const double ma = sa / reps, mb = sb / reps, mg = sg / reps;
  const bool pass = ma >= 0.77 && ma <= 0.83 && mb >= 0.05 && mb <= 0.20 && mg >= 0.85 && mg <= 1.15;
  return {pass, fmt("mean alpha %.4f (sd %.4f) in [0.77,0.83], mean beta %.4f (sd %.4f) in [0.05,0.20], "
                    "mean gamma0 %.4f (sd %.4f) in [0.85,1.15]",
                    ma, sd(sa, qa), mb, sd(sb, qb), mg, sd(sg, qg))};
}

// Paired split comparison: each replicate gives two MoM tables from disjoint halves
// of the same field; a bin agrees when the mean difference is within 4 standard errors.
Outcome stationarity() {
  const BinSpec bins = BinSpec::defaults();
  const int reps = 20;
  const int cells = bins.psi_count() * bins.lag_count();
  std::vector<std::vector<double>> time_diff(cells), space_diff(cells);
  for (int rep = 0; rep < reps; ++rep) {
    const SampledField y = difference_time(truncate_harmonics(simulate(1, 1, 300, 20, 7000 + rep), 1), 1);
    const int T = y.n_times();
    const int half = T / 2;
    const std::vector<long> early(y.times().begin(), y.times().begin() + half);
    const std::vector<long> late(y.times().begin() + half, y.times().end());
    const MoMTable a = mom_estimate(y.with_values(y.values().leftCols(half), early), bins);
    const MoMTable b = mom_estimate(y.with_values(y.values().rightCols(T - half), late), bins);

    std::vector<int> north, south;
    for (int i = 0; i < y.n_locations(); ++i) (y.locations()[i].lat() >= 0.0 ? north : south).push_back(i);
    auto subset = [&](const std::vector<int>& idx) {
      std::vector<SpherePoint> pts;
      Eigen::MatrixXd v(static_cast<Eigen::Index>(idx.size()), T);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        pts.push_back(y.locations()[idx[k]]);
        v.row(static_cast<Eigen::Index>(k)) = y.values().row(idx[k]);
      }
      return SampledField(pts, y.times(), v);
    };
    const MoMTable n = mom_estimate(subset(north), bins);
    const MoMTable s = mom_estimate(subset(south), bins);

    for (int i = 0; i < bins.psi_count(); ++i) {
      for (int j = 0; j < bins.lag_count(); ++j) {
        const int c = i * bins.lag_count() + j;
        if (a.has(i, j) && b.has(i, j)) time_diff[c].push_back(a.estimates()(i, j) - b.estimates()(i, j));
        if (n.has(i, j) && s.has(i, j)) space_diff[c].push_back(n.estimates()(i, j) - s.estimates()(i, j));
      }
    }
  }
  int populated = 0, agree = 0;
  double worst = 0.0;
  for (const auto* diffs : {&time_diff, &space_diff}) {
    for (const auto& d : *diffs) {
      if (static_cast<int>(d.size()) < reps) continue;
      double mean = 0.0, var = 0.0;
      for (double v : d) mean += v;
      mean /= reps;
      for (double v : d) var += (v - mean) * (v - mean);
      var /= reps - 1;
      const double z = std::abs(mean) / std::sqrt(var / reps);
      ++populated;
      worst = std::max(worst, z);
      if (z <= 4.0) ++agree;
    }
  }
  const double frac = populated > 0 ? static_cast<double>(agree) / populated : 0.0;
  return {populated > 0 && frac >= 0.95,
          fmt("%d/%d split bins (time halves and hemispheres) within 4 SE = %.3f (need 0.95); max |z| %.2f",
              agree, populated, frac, worst)};
}

Outcome order_selection() {
  const BinSpec bins = zero_first_bins();
  double identity = 0.0;
  for (const auto& row : kTableRows) {
    const ModelSpec gf = ModelSpec::generating_function(row[0], row[1]);
    std::vector<MoMTable> tables;
    for (int n = 0; n <= 4; ++n) tables.push_back(theoretical_table(gf, n, 1.0, bins));
    for (double m : m_from_tables(tables)) identity = std::max(identity, std::abs(m));
  }

  int irf11_hits = 0, irf00_hits = 0;
  std::vector<int> k11, k00;
  for (int rep = 0; rep < 20; ++rep) {
    const int a = select_kappa(m_criterion(simulate(1, 1, 300, 20, 9000 + rep), 1, 3, bins));
    const int b = select_kappa(m_criterion(simulate(0, 0, 300, 20, 9500 + rep), 0, 3, bins));
    k11.push_back(a);
    k00.push_back(b);
    irf11_hits += a == 1;
    irf00_hits += b == 0;
  }
  auto tally = [](const std::vector<int>& k) {
    std::string out;
    for (int v = 0; v <= 4; ++v) {
      const auto c = std::count(k.begin(), k.end(), v);
      if (c > 0) out += fmt("%s%d:%ld", out.empty() ? "" : " ", v, static_cast<long>(c));
    }
    return out;
  };
  const bool pass = identity <= 1e-10 && irf11_hits >= 16 && irf00_hits >= 16;
  return {pass, fmt("identity max |M| %.2e (tol 1e-10); IRF(1,1) kappa_hat=1 in %d/20 [%s]; "
                    "IRF(0,0) kappa_hat=0 in %d/20 [%s] (need 16/20 each)",
                    identity, irf11_hits, tally(k11).c_str(), irf00_hits, tally(k00).c_str())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sphirf_acceptance_determinism";
  fs::remove_all(root);
  auto load = [](const char* name) {
    std::ifstream in(fs::path(SPHIRF_EXAMPLES_DIR) / name);
    return nlohmann::json::parse(in);
  };
  std::string field[2], fitted[2];
  // both runs write to the same directory because the outputs echo the config paths
  const fs::path dir = root / "run";
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    run_simulate(parse_run_config(Command::Simulate, load("simulate.json"), Overrides{{}, {}, {}, dir.string(), {}}));
    run_fit(parse_run_config(Command::Fit, load("fit.json"),
                             Overrides{{}, {}, {}, dir.string(), (dir / "field.csv").string()}));
    field[run] = slurp(dir / "field.csv") + slurp(dir / "field.meta.json");
    fitted[run] = slurp(dir / "fit.json") + slurp(dir / "curves.csv");
  }
  const bool identical = field[0] == field[1] && fitted[0] == fitted[1] && !fitted[0].empty();

  const SampledField original = read_field_csv(dir / "field.csv");
  write_field_csv(original, root / "copy.csv");
  const SampledField copy = read_field_csv(root / "copy.csv");
  double worst = (copy.values() - original.values()).cwiseAbs().maxCoeff();
  for (int i = 0; i < original.n_locations(); ++i) {
    worst = std::max({worst, std::abs(copy.locations()[i].lat() - original.locations()[i].lat()),
                      std::abs(copy.locations()[i].lon() - original.locations()[i].lon())});
  }
  const bool lossless = worst <= 1e-12 && copy.times() == original.times() && copy.ids() == original.ids();
  fs::remove_all(root);
  return {identical && lossless, fmt("simulate->fit outputs byte-identical: %s; CSV roundtrip max err %.2e",
                                     identical ? "yes" : "no", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      special_functions, series_oracle, psd_property, exact_inversion,
      table_reproduction, stationarity, order_selection, determinism};

  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--only") == 0) {
    only = std::atoi(argv[2]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", criteria.size());
      return 2;
    }
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
    return 2;
  }

  int failed = 0;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (only != 0 && k != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k - 1]();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s %s [%.1f s]\n", k, out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
