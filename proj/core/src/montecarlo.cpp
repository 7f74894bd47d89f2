#include "mpspec/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <set>
#include <string>
#include <thread>

#include "mpspec/error.hpp"
#include "mpspec/estimators.hpp"
#include "mpspec/rng.hpp"

namespace mpspec {

namespace {

/// Evaluates fn(0..count-1) on `threads` workers. Results land in index
/// order; the exception of the lowest failing index is rethrown.
template <class Row, class Fn>
std::vector<Row> run_indexed(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<Row> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        rows[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw ReplicationError(i, e.what());
    }
  }
  return rows;
}

std::string format_point(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

unsigned resolve_thread_count(unsigned requested) {
  unsigned cap = 0;
  if (const char* env = std::getenv("MPSPEC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<unsigned>(v);
  }
  if (requested == 0) return cap > 0 ? cap : 1;
  return cap > 0 ? std::min(requested, cap) : requested;
}

double ExperimentConfig::resolved_bandwidth() const {
  if (bandwidth) return *bandwidth;
  return BandwidthRule::for_regime(bandwidth_kind, bandwidth_scale)(n);
}

void ExperimentConfig::validate() const {
  if (replications < 2) throw ConfigError("replications must be >= 2");
  if (p < 1 || n < 3) throw ConfigError("need p >= 1 and n >= 3");
  const double c = aspect_ratio();
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("p / n must lie in (0, 1)");
  if (points.empty() && alpha_list.empty()) throw ConfigError("points: need at least one point or quantile level");
  const MpLaw law(c);
  std::set<double> seen;
  for (double x : points) {
    if (!(x > law.lower_edge() && x < law.upper_edge()))
      throw ConfigError("points: " + format_point(x) + " is not inside (a_n, b_n)");
    if (!seen.insert(x).second) throw ConfigError("points: duplicate point " + format_point(x));
  }
  for (double alpha : alpha_list) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha_list: levels must lie in (0, 1)");
  }
  if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(bandwidth_scale > 0.0)) throw ConfigError("bandwidth_scale must be positive");
  if (coverage_level && !(*coverage_level >= 0.0 && *coverage_level < 1.0))
    throw ConfigError("coverage_level must lie in [0, 1)");
  if (!(ks_threshold > 0.0 && ks_threshold < 1.0)) throw ConfigError("ks_threshold must lie in (0, 1)");
  if (!(covariance_tolerance > 0.0)) throw ConfigError("covariance_tolerance must be positive");
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& reference_cdf) {
  if (samples.empty()) throw PreconditionError("KS statistic needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = reference_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / count - f, f - static_cast<double>(i) / count});
  }
  return d;
}

double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  constexpr double kTerm = 1e-12;
  if (x < 1.18) {
    // Jacobi theta form of the distribution function, fast for small x.
    const double factor = std::sqrt(2.0 * std::numbers::pi) / x;
    const double a = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = factor * std::exp(-odd * odd * a);
      cdf += term;
      if (term < kTerm) break;
    }
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < kTerm) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& reference_cdf) {
  if (samples.size() < 2) throw PreconditionError("KS test needs at least two samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw PreconditionError("KS test samples must be finite");
  if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples[0]; }))
    throw PreconditionError("KS test sample is degenerate: all values equal");
  KsResult out;
  out.statistic = ks_statistic(samples, reference_cdf);
  out.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(samples.size())) * out.statistic);
  return out;
}

namespace {

struct Replication {
  std::vector<double> values;
  std::vector<bool> covered;
};

struct Plan {
  MpLaw law;
  KernelProfile kernel;
  double h;
  std::vector<StatisticColumn> columns;
  std::vector<std::size_t> coverage_columns;  ///< indices into columns
};

Plan make_plan(const ExperimentConfig& config) {
  config.validate();
  Plan plan{MpLaw(config.aspect_ratio()), gaussian_kernel(), config.resolved_bandwidth(), {}, {}};
  const double convention = config.rate == RateConvention::dimension
                                ? 1.0
                                : 1.0 / (config.aspect_ratio() * config.aspect_ratio());
  const bool density = config.bandwidth_kind == BandwidthRegime::density;
  const double sigma2 = density ? sigma_squared(plan.kernel).value : 0.0;
  for (double x : config.points) {
    StatisticColumn col;
    col.kind = density ? StatisticKind::density : StatisticKind::cdf;
    col.label = std::string(density ? "density@" : "cdf@") + format_point(x);
    col.point = x;
    col.reference_variance = (density ? sigma2 : 1.0) * convention;
    col.target = density ? plan.law.density(x) : plan.law.cdf(x);
    plan.columns.push_back(col);
  }
  for (double alpha : config.alpha_list) {
    StatisticColumn col;
    col.kind = StatisticKind::quantile;
    col.label = "quantile@" + format_point(alpha);
    col.point = alpha;
    col.target = plan.law.quantile(alpha);
    if (!(col.target > plan.law.lower_edge() && col.target < plan.law.upper_edge()))
      throw ConfigError("alpha_list: quantile at " + format_point(alpha) + " is not interior");
    col.reference_variance = quantile_variance(plan.law, alpha).value * convention;
    plan.columns.push_back(col);
  }
  if (config.coverage_level) {
    for (std::size_t j = 0; j < plan.columns.size(); ++j)
      if (plan.columns[j].kind != StatisticKind::density) plan.coverage_columns.push_back(j);
  }
  return plan;
}

Replication replicate(const ExperimentConfig& config, const Plan& plan, std::size_t index) {
  const auto data = sample_data_matrix(config.p, config.n, stream_seed(config.master_seed, index), config.entry_dist);
  const auto sample = SpectralSample::from_data(data);
  const CltOptions options{config.rate};
  Replication out;
  out.values.reserve(plan.columns.size());
  for (const auto& col : plan.columns) {
    switch (col.kind) {
      case StatisticKind::cdf:
        out.values.push_back(cdf_statistic(plan.law, sample, plan.kernel, plan.h, col.point, options));
        break;
      case StatisticKind::density:
        out.values.push_back(density_statistic(plan.law, sample, plan.kernel, plan.h, col.point, options));
        break;
      case StatisticKind::density_centered:
        out.values.push_back(density_statistic_centered(plan.law, sample, plan.kernel, plan.h, col.point, options));
        break;
      case StatisticKind::quantile:
        out.values.push_back(quantile_statistic(plan.law, sample, plan.kernel, plan.h, col.point, options));
        break;
    }
  }
  for (std::size_t j : plan.coverage_columns) {
    const auto& col = plan.columns[j];
    const Interval ci =
        col.kind == StatisticKind::cdf
            ? confidence_interval_cdf(plan.law, sample, plan.kernel, plan.h, col.point, *config.coverage_level, options)
            : confidence_interval_quantile(plan.law, sample, plan.kernel, plan.h, col.point, *config.coverage_level,
                                           options);
    out.covered.push_back(ci.contains(col.target));
  }
  return out;
}

}  // namespace

CltReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Plan plan = make_plan(config);
  const auto rows = run_indexed<Replication>(config.replications, resolve_thread_count(config.threads),
                                             [&](std::size_t r) { return replicate(config, plan, r); });

  CltReport report;
  report.config = config;
  report.bandwidth = plan.h;
  report.columns = plan.columns;
  const std::size_t d = plan.columns.size();
  const std::size_t count = rows.size();
  const double reps = static_cast<double>(count);

  report.statistics.reserve(count);
  for (const auto& row : rows) report.statistics.push_back(row.values);

  report.mean.assign(d, 0.0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < d; ++j) report.mean[j] += row.values[j];
  for (double& m : report.mean) m /= reps;

  report.covariance.assign(d, std::vector<double>(d, 0.0));
  for (const auto& row : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        report.covariance[i][j] += (row.values[i] - report.mean[i]) * (row.values[j] - report.mean[j]);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      report.covariance[i][j] /= (reps - 1.0);
      report.covariance[j][i] = report.covariance[i][j];
    }

  for (std::size_t j = 0; j < d; ++j) {
    const double ref = plan.columns[j].reference_variance;
    std::vector<double> standardised(count);
    for (std::size_t r = 0; r < count; ++r) standardised[r] = rows[r].values[j] / std::sqrt(ref);
    report.ks.push_back(ks_test(standardised, standard_normal_cdf));
    report.ks_pass.push_back(report.ks.back().p_value > config.ks_threshold);
    report.variance_ratio.push_back(report.covariance[j][j] / ref);
    const double sd = std::sqrt(report.covariance[j][j]);
    report.mean_pass.push_back(std::abs(report.mean[j]) <= 4.0 * sd / std::sqrt(reps));
  }

  for (std::size_t i = 0; i < d; ++i) {
    if (plan.columns[i].kind == StatisticKind::quantile) continue;
    for (std::size_t j = 0; j < i; ++j) {
      if (plan.columns[j].kind == StatisticKind::quantile) continue;
      const double scaled = report.covariance[i][j] /
                            std::sqrt(plan.columns[i].reference_variance * plan.columns[j].reference_variance);
      if (!(std::abs(scaled) < config.covariance_tolerance)) report.covariance_pass = false;
    }
  }

  for (std::size_t k = 0; k < plan.coverage_columns.size(); ++k) {
    double hits = 0.0;
    for (const auto& row : rows) hits += row.covered[k] ? 1.0 : 0.0;
    const double q = hits / reps;
    report.coverage.push_back(
        {plan.columns[plan.coverage_columns[k]].label, *config.coverage_level, q, std::sqrt(q * (1.0 - q) / reps)});
  }

  report.pass = report.covariance_pass &&
                std::all_of(report.ks_pass.begin(), report.ks_pass.end(), [](bool b) { return b; }) &&
                std::all_of(report.mean_pass.begin(), report.mean_pass.end(), [](bool b) { return b; });
  report.seconds = elapsed_seconds(start);
  return report;
}

std::vector<CoverageResult> coverage_check(ExperimentConfig config, double level) {
  if (!(level >= 0.0 && level < 1.0)) throw DomainError("coverage level must lie in [0, 1)");
  config.coverage_level = level;
  return run_experiment(config).coverage;
}

namespace {

BiasLevel bias_level(std::size_t p, std::size_t n, const BiasCheckConfig& config, std::uint64_t seed) {
  const MpLaw law(static_cast<double>(p) / static_cast<double>(n));
  const auto rows = run_indexed<std::vector<Complex>>(
      config.replications, resolve_thread_count(config.threads), [&](std::size_t r) {
        const auto sample = SpectralSample::from_data(sample_data_matrix(p, n, stream_seed(seed, r)));
        std::vector<Complex> values;
        values.reserve(config.z_grid.size());
        for (Complex z : config.z_grid) values.push_back(sample.stieltjes(z));
        return values;
      });
  BiasLevel level;
  level.p = p;
  level.n = n;
  level.replications = config.replications;
  for (std::size_t k = 0; k < config.z_grid.size(); ++k) {
    Complex mean = 0.0;
    for (const auto& row : rows) mean += row[k];
    mean /= static_cast<double>(rows.size());
    const Complex z = config.z_grid[k];
    const double scaled = static_cast<double>(n) * z.imag() * std::abs(mean - law.stieltjes(z));
    level.scaled_bias.push_back(scaled);
    level.max_scaled_bias = std::max(level.max_scaled_bias, scaled);
  }
  return level;
}

}  // namespace

BiasReport bias_check(const BiasCheckConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.replications < 1) throw PreconditionError("bias check needs at least one replication");
  if (config.z_grid.empty()) throw PreconditionError("bias check needs a non-empty z grid");
  if (config.growth < 2) throw PreconditionError("bias check growth factor must be >= 2");
  const double floor = 2.0 / std::sqrt(static_cast<double>(config.n));
  for (Complex z : config.z_grid)
    if (!(z.imag() >= floor))
      throw PreconditionError("bias check grid point has Im z below 2 / sqrt(n)");

  BiasReport report;
  report.base = bias_level(config.p, config.n, config, stream_seed(config.master_seed, 0));
  report.grown = bias_level(config.growth * config.p, config.growth * config.n, config,
                            stream_seed(config.master_seed, 1));
  report.ratio = report.grown.max_scaled_bias / report.base.max_scaled_bias;
  report.low_confidence = config.replications < 2;
  report.pass = std::isfinite(report.ratio) && report.ratio < config.max_ratio;
  report.seconds = elapsed_seconds(start);
  return report;
}

}  // namespace mpspec
