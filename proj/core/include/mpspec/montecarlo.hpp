#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mpspec/clt.hpp"
#include "mpspec/kernels.hpp"
#include "mpspec/mp_law.hpp"
#include "mpspec/spectral.hpp"

namespace mpspec {

/// Invalid experiment configuration (schema or value error).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::size_t p = 500;
  std::size_t n = 1000;
  std::size_t replications = 400;
  std::vector<double> points;      ///< x_j in (a_n, b_n); one statistic column each
  std::vector<double> alpha_list;  ///< quantile levels; one quantile column each
  BandwidthRegime bandwidth_kind = BandwidthRegime::cdf;
  std::optional<double> bandwidth;  ///< overrides the regime's rule
  double bandwidth_scale = 1.0;
  std::uint64_t master_seed = 1;
  EntryDistribution entry_dist = EntryDistribution::gaussian;
  RateConvention rate = RateConvention::dimension;
  std::optional<double> coverage_level;  ///< also evaluate interval coverage
  double ks_threshold = 0.01;
  double covariance_tolerance = 0.2;
  unsigned threads = 0;  ///< 0: MPSPEC_THREADS, else 1; never above MPSPEC_THREADS

  double aspect_ratio() const { return static_cast<double>(p) / static_cast<double>(n); }
  /// The bandwidth actually used.
  double resolved_bandwidth() const;
  /// Throws ConfigError: R >= 2, 0 < p/n < 1, points distinct and interior,
  /// quantile levels in (0, 1) with interior quantiles.
  void validate() const;
};

/// Worker count: the request capped by MPSPEC_THREADS; with no request,
/// MPSPEC_THREADS itself, else 1.
unsigned resolve_thread_count(unsigned requested);

struct KsResult {
  double statistic = 0.0;  ///< D
  double p_value = 0.0;
};

/// sup |ECDF - F| over the sorted sample, both one-sided gaps. Needs at
/// least one finite sample.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& reference_cdf);

/// Asymptotic Kolmogorov tail probability P(K > x), series truncated once
/// terms fall below 1e-12.
double kolmogorov_survival(double x);

/// One-sample KS test with p-value kolmogorov_survival(sqrt(R) D).
/// Throws PreconditionError for fewer than two samples, a non-finite value,
/// or a degenerate sample with all values equal.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& reference_cdf);

struct StatisticColumn {
  std::string label;  ///< e.g. "cdf@1", "quantile@0.5"
  StatisticKind kind = StatisticKind::cdf;
  double point = 0.0;               ///< x_j or alpha
  double reference_variance = 1.0;  ///< limiting variance under the chosen rate convention
  double target = 0.0;              ///< F_{c_n}(x), f_{c_n}(x) or x_alpha
};

struct CoverageResult {
  std::string label;
  double level = 0.0;
  double coverage = 0.0;
  double standard_error = 0.0;  ///< binomial sqrt(q (1 - q) / R)
};

struct CltReport {
  ExperimentConfig config;
  double bandwidth = 0.0;
  std::vector<StatisticColumn> columns;
  std::vector<std::vector<double>> statistics;  ///< R rows x d columns
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;  ///< divisor R - 1, symmetric
  std::vector<KsResult> ks;
  std::vector<double> variance_ratio;  ///< empirical variance / reference variance
  std::vector<bool> ks_pass;
  std::vector<bool> mean_pass;  ///< |mean| <= 4 sd / sqrt(R)
  bool covariance_pass = true;  ///< standardised off-diagonals among point columns
  std::vector<CoverageResult> coverage;
  bool pass = false;
  double seconds = 0.0;
};

/// Runs R seeded replications: replication r samples X from
/// Rng(stream_seed(master_seed, r)), eigendecomposes X X^T / n and evaluates
/// every column statistic. Aggregation is in replication order, so the
/// report does not depend on the number of workers. Eigensolver failures
/// surface as ReplicationError carrying the lowest failing index.
CltReport run_experiment(const ExperimentConfig& config);

/// Coverage of the confidence intervals for F_{c_n}(x_j) (cdf-kind runs)
/// and x_alpha, at the given level.
std::vector<CoverageResult> coverage_check(ExperimentConfig config, double level);

struct BiasCheckConfig {
  std::size_t p = 250;
  std::size_t n = 500;
  std::size_t replications = 200;
  std::vector<Complex> z_grid;
  std::uint64_t master_seed = 1;
  std::size_t growth = 4;   ///< the second run uses (growth p, growth n)
  double max_ratio = 3.0;
  unsigned threads = 0;
};

struct BiasLevel {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::vector<double> scaled_bias;  ///< n v |E^ m_n(z) - m_n^0(z)| per grid point
  double max_scaled_bias = 0.0;
};

struct BiasReport {
  BiasLevel base;
  BiasLevel grown;
  double ratio = 0.0;  ///< grown.max_scaled_bias / base.max_scaled_bias
  bool low_confidence = false;  ///< fewer than two replications per level
  bool pass = false;
  double seconds = 0.0;
};

/// Estimates E m_n(z) by averaging the ESD Stieltjes transform over
/// replications at (p, n) and at (growth p, growth n), and checks that
/// n v |bias| stays bounded (ratio below max_ratio). Throws
/// PreconditionError if some Im z < 2 / sqrt(n).
BiasReport bias_check(const BiasCheckConfig& config);

/// Config schema (JSON object). Required: p, n, replications, points.
/// Optional: alpha_list, bandwidth_kind ("cdf" | "density"), bandwidth,
/// bandwidth_scale, master_seed, entry_dist ("gaussian" | "three-point"),
/// rate ("dimension" | "sample_size"), coverage_level, ks_threshold,
/// covariance_tolerance, threads, kernel ("gaussian").
/// Throws ConfigError naming the offending key.
ExperimentConfig parse_experiment_config(std::string_view json_text);

/// Report JSON with keys config, bandwidth, columns, statistics, mean,
/// covariance, ks, variance_ratio, checks, coverage, pass, seconds.
/// Without timing the output is a deterministic function of the config.
std::string report_to_json(const CltReport& report, bool include_timing = true);

std::string bias_report_to_json(const BiasReport& report, bool include_timing = true);

}  // namespace mpspec
