// Acceptance suite: one PASS/FAIL line per criterion.
//
//   mpspec_acceptance            run every criterion
//   mpspec_acceptance --only 5   run a single criterion
//
// Exit status is 0 only if every criterion that ran passed.

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mpspec/clt.hpp"
#include "mpspec/estimators.hpp"
#include "mpspec/kernels.hpp"
#include "mpspec/montecarlo.hpp"
#include "mpspec/mp_law.hpp"
#include "mpspec/rng.hpp"
#include "mpspec/spectral.hpp"
#include "oracles.hpp"

using namespace mpspec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) o.pass = false;
  o.detail += (o.detail.empty() ? "" : "; ") + what + (ok ? "" : " [x]");
}

// 1 ------------------------------------------------------------------------
Outcome mp_law_exactness() {
  Timer t;
  Outcome o;
  boost::math::quadrature::tanh_sinh<double> ts;
  double worst_mass = 0.0, worst_fixed = 0.0, worst_trip = 0.0;
  for (double c : {0.1, 0.5, 0.9, 1.5, 2.0}) {
    const MpLaw law(c);
    const double a = law.lower_edge(), b = law.upper_edge();
    const double mass = ts.integrate([&](double x) { return law.density(x); }, a, b) + law.point_mass_at_zero();
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const Complex z(a - 1.0 + (b - a + 2.0) * i / 19.0, 1e-3 + (1.0 - 1e-3) * j / 19.0);
        const Complex m = law.stieltjes(z);
        worst_fixed = std::max(worst_fixed, std::abs(m - 1.0 / (1.0 - c - c * z * m - z)));
      }
    if (c < 1.0)
      for (double alpha : {0.05, 0.25, 0.5, 0.75, 0.95})
        worst_trip = std::max(worst_trip, std::abs(law.cdf(law.quantile(alpha)) - alpha));
  }
  require(o, worst_mass <= 1e-8, fmt("normalisation err %.2e <= 1e-8", worst_mass));
  require(o, worst_fixed <= 1e-10, fmt("fixed-point residual %.2e <= 1e-10 on 400 points", worst_fixed));
  require(o, worst_trip <= 1e-8, fmt("quantile round trip %.2e <= 1e-8", worst_trip));
  require(o, t.seconds() < 5.0, fmt("%.2f s < 5 s", t.seconds()));
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome eigensolver_contract() {
  Timer t;
  Outcome o;
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<int> size(1, 256);
  std::normal_distribution<double> g;
  double worst_trace = 0.0, worst_det = 0.0;
  int sign_mismatch = 0;
  for (int k = 0; k < 100; ++k) {
    const int p = k < 2 ? (k == 0 ? 1 : 256) : size(gen);
    Eigen::MatrixXd a(p, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i <= j; ++i) a(i, j) = a(j, i) = g(gen);
    const auto values = symmetric_eigenvalues(a);
    double sum = 0.0, log_abs = 0.0;
    int sign = 1;
    for (double v : values) {
      sum += v;
      log_abs += std::log(std::abs(v));
      if (v < 0) sign = -sign;
    }
    worst_trace = std::max(worst_trace, std::abs(sum - a.trace()) / a.norm());
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    double lu_log = 0.0;
    int lu_sign = lu.permutationP().determinant();
    for (int i = 0; i < p; ++i) {
      const double u = lu.matrixLU()(i, i);
      lu_log += std::log(std::abs(u));
      if (u < 0) lu_sign = -lu_sign;
    }
    if (sign != lu_sign) ++sign_mismatch;
    // |prod lambda / det_LU - 1|, evaluated in the log domain to avoid overflow.
    worst_det = std::max(worst_det, std::abs(std::expm1(log_abs - lu_log)));
  }
  require(o, worst_trace <= 1e-9, fmt("trace residual %.2e <= 1e-9 (relative to ||A||_F)", worst_trace));
  require(o, worst_det <= 1e-6 && sign_mismatch == 0,
          fmt("determinant residual %.2e <= 1e-6 vs LU, %d sign mismatches", worst_det, sign_mismatch));
  require(o, t.seconds() < 30.0, fmt("%.1f s < 30 s", t.seconds()));
  return o;
}

// 3 ------------------------------------------------------------------------
Outcome esd_convergence() {
  Timer t;
  Outcome o;
  int close = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto sample = SpectralSample::from_data(sample_data_matrix(1000, 2000, stream_seed(3, s)));
    const MpLaw law = sample.law();
    double sup = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double x = law.lower_edge() + (law.upper_edge() - law.lower_edge()) * i / 199.0;
      sup = std::max(sup, std::abs(sample.esd(x) - law.cdf(x)));
    }
    worst = std::max(worst, sup);
    if (sup <= 0.05) ++close;
  }
  require(o, close >= 19, fmt("%d/20 seeds with sup-grid distance <= 0.05 (worst %.4f)", close, worst));
  require(o, t.seconds() < 120.0, fmt("%.1f s < 120 s", t.seconds()));
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome contour_identity() {
  Timer t;
  Outcome o;
  const auto sample = SpectralSample::from_data(sample_data_matrix(200, 400, 404));
  const MpLaw law = sample.law();
  const auto kernel = gaussian_kernel();
  const double h = bandwidth_for_density(400);
  const auto spec = ContourSpec::defaults_for(law);
  auto finer = spec;
  finer.points_per_side *= 2;
  double worst = 0.0, worst_refine = 0.0;
  for (double x : {0.3, 0.8, 1.5, 2.2, 2.7}) {
    const auto r = contour_check(sample, law, kernel, h, x, spec);
    const auto r2 = contour_check(sample, law, kernel, h, x, finer);
    worst = std::max(worst, r.relative_residual);
    worst_refine = std::max(worst_refine, std::abs(r2.rhs - r.rhs) / std::abs(r.rhs));
  }
  require(o, worst <= 1e-3, fmt("relative residual %.2e <= 1e-3 at 5 points", worst));
  require(o, worst_refine <= 1e-6, fmt("refinement change %.2e <= 1e-6", worst_refine));
  require(o, t.seconds() < 60.0, fmt("%.1f s < 60 s", t.seconds()));
  return o;
}

ExperimentConfig clt_config(std::size_t n, BandwidthRegime regime) {
  ExperimentConfig c;
  c.p = n / 2;
  c.n = n;
  c.replications = 400;
  c.points = {1.0, 1.8};
  c.bandwidth_kind = regime;
  c.master_seed = 2100 + n;
  c.threads = 1;
  return c;
}

double mean_abs_gap_from_one(const CltReport& r) {
  double s = 0.0;
  for (double v : r.variance_ratio) s += std::abs(v - 1.0);
  return s / static_cast<double>(r.variance_ratio.size());
}

// 5 ------------------------------------------------------------------------
Outcome cdf_clt() {
  Outcome o;
  Timer t;
  const auto main = run_experiment(clt_config(1000, BandwidthRegime::cdf));
  const double main_seconds = t.seconds();
  const auto small = run_experiment(clt_config(500, BandwidthRegime::cdf));
  const auto large = run_experiment(clt_config(2000, BandwidthRegime::cdf));
  require(o, main.ks[0].p_value > 0.01 && main.ks[1].p_value > 0.01,
          fmt("KS p = %.3g, %.3g > 0.01", main.ks[0].p_value, main.ks[1].p_value));
  const double v0 = main.variance_ratio[0], v1 = main.variance_ratio[1];
  require(o, v0 >= 0.65 && v0 <= 1.4 && v1 >= 0.65 && v1 <= 1.4, fmt("variances %.3f, %.3f in [0.65, 1.4]", v0, v1));
  const double off = main.covariance[0][1];
  require(o, std::abs(off) < 0.2, fmt("|off-diagonal| %.3f < 0.2", std::abs(off)));
  const double g500 = mean_abs_gap_from_one(small), g2000 = mean_abs_gap_from_one(large);
  require(o, g2000 < g500,
          fmt("variance toward 1: n=500 (%.3f, %.3f) -> n=2000 (%.3f, %.3f)", small.variance_ratio[0],
              small.variance_ratio[1], large.variance_ratio[0], large.variance_ratio[1]));
  require(o, main_seconds < 600.0, fmt("p=500 n=1000 R=400 run %.1f s < 600 s", main_seconds));
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome density_clt() {
  Outcome o;
  Timer t;
  const auto r = run_experiment(clt_config(1000, BandwidthRegime::density));
  const double seconds = t.seconds();
  const double sigma2 = r.columns[0].reference_variance;
  for (std::size_t j = 0; j < 2; ++j) {
    const double ratio = r.variance_ratio[j];
    require(o, std::abs(ratio - 1.0) <= 0.35,
            fmt("x=%.1f variance %.5f vs sigma^2 %.5f (ratio %.3f within 35%%)", r.columns[j].point,
                r.covariance[j][j], sigma2, ratio));
    require(o, r.ks[j].p_value > 0.01, fmt("KS p = %.3g > 0.01", r.ks[j].p_value));
  }
  require(o, seconds < 600.0, fmt("%.1f s < 600 s", seconds));
  return o;
}

// 7 ------------------------------------------------------------------------
Outcome quantile_clt() {
  Outcome o;
  Timer t;
  auto c = clt_config(1000, BandwidthRegime::cdf);
  c.points.clear();
  c.alpha_list = {0.5};
  c.coverage_level = 0.95;
  const auto r = run_experiment(c);
  const double seconds = t.seconds();
  require(o, std::abs(r.variance_ratio[0] - 1.0) <= 0.35,
          fmt("variance %.4f vs 1/(2 pi^2 f^2) = %.4f (ratio %.3f within 35%%)", r.covariance[0][0],
              r.columns[0].reference_variance, r.variance_ratio[0]));
  const double cov = r.coverage[0].coverage;
  require(o, cov >= 0.90 && cov <= 0.99, fmt("95%% CI coverage %.4f in [0.90, 0.99]", cov));
  require(o, seconds < 600.0, fmt("%.1f s < 600 s", seconds));
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome sigma2_constant() {
  Outcome o;
  Timer t;
  const auto primary = sigma_squared(gaussian_kernel());
  auto dk = [](double u) { return -u * std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); };
  const double strip = oracle::sigma2_strip_refined(dk, 12.0, 1e-3);
  const double quad_seconds = t.seconds();
  double se = 0.0;
  const double mc = oracle::sigma2_monte_carlo_gaussian(10'000'000, 8, &se);
  const double rel_quad = std::abs(strip - primary.value) / primary.value;
  const double rel_mc = std::abs(mc - primary.value) / primary.value;
  require(o, rel_quad <= 1e-6, fmt("rotated %.12f vs strip %.12f: rel %.2e <= 1e-6", primary.value, strip, rel_quad));
  require(o, rel_mc <= 1e-2, fmt("Monte Carlo 1e7 draws %.6f (se %.1e): rel %.2e <= 1e-2", mc, se, rel_mc));
  require(o, quad_seconds < 60.0, fmt("quadrature %.1f s < 60 s", quad_seconds));
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome bias_rate() {
  Outcome o;
  Timer t;
  BiasCheckConfig b;
  b.p = 250;
  b.n = 500;
  b.replications = 200;
  b.growth = 4;
  b.master_seed = 909;
  b.threads = 1;
  const MpLaw law(0.5);
  for (int i = 0; i < 10; ++i) {
    const double u = law.lower_edge() + 0.1 + (law.upper_edge() - law.lower_edge() - 0.2) * i / 9.0;
    b.z_grid.emplace_back(u, 0.1);
  }
  const auto r = bias_check(b);
  require(o, r.ratio < 3.0,
          fmt("max n v |bias|: n=500 %.4f, n=2000 %.4f, ratio %.3f < 3", r.base.max_scaled_bias,
              r.grown.max_scaled_bias, r.ratio));
  require(o, t.seconds() < 300.0, fmt("%.1f s < 300 s", t.seconds()));
  return o;
}

// 10 -----------------------------------------------------------------------
Outcome determinism() {
  Outcome o;
  int identical = 0, total = 0;
  for (std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
    ExperimentConfig cdf;
    cdf.p = 100;
    cdf.n = 200;
    cdf.replications = 40;
    cdf.points = {0.8, 1.6};
    cdf.alpha_list = {0.5};
    cdf.coverage_level = 0.95;
    cdf.master_seed = seed;
    ExperimentConfig dens = cdf;
    dens.bandwidth_kind = BandwidthRegime::density;
    dens.alpha_list.clear();
    dens.coverage_level.reset();
    for (auto config : {cdf, dens}) {
      config.threads = 1;
      const std::string serial = report_to_json(run_experiment(config), false);
      config.threads = 4;
      const std::string parallel = report_to_json(run_experiment(config), false);
      ++total;
      if (serial == parallel) ++identical;
    }
    BiasCheckConfig b;
    b.p = 50;
    b.n = 100;
    b.replications = 20;
    b.master_seed = seed;
    b.z_grid = {Complex(0.5, 0.3), Complex(1.5, 0.3)};
    b.threads = 1;
    const std::string serial = bias_report_to_json(bias_check(b), false);
    b.threads = 4;
    ++total;
    if (serial == bias_report_to_json(bias_check(b), false)) ++identical;
  }
  require(o, identical == total, fmt("%d/%d reports byte-identical, 1 vs 4 threads, 3 seeds", identical, total));
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "MP law exactness", mp_law_exactness},
      {2, "eigensolver contract", eigensolver_contract},
      {3, "ESD convergence", esd_convergence},
      {4, "contour identity", contour_identity},
      {5, "CDF CLT", cdf_clt},
      {6, "density CLT", density_clt},
      {7, "quantile CLT", quantile_clt},
      {8, "sigma^2 constant", sigma2_constant},
      {9, "Stieltjes bias rate", bias_rate},
      {10, "determinism", determinism},
  };
  bool all = true;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Timer t;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s  criterion %2d  %-20s  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), t.seconds());
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return all ? 0 : 1;
}
