#include "mpspec/clt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpspec/error.hpp"
#include "mpspec/estimators.hpp"
#include "mpspec/quadrature.hpp"

namespace mpspec {

namespace {

constexpr double kPi = std::numbers::pi;

void require_interior(const MpLaw& law, double x) {
  if (!(x > law.lower_edge() && x < law.upper_edge()))
    throw DomainError("evaluation point must lie in the open bulk (a_n, b_n)");
}

double log_n(double n) {
  if (!(n >= 3.0)) throw DomainError("CLT rates need n >= 3");
  return std::log(n);
}

double normal_critical_value(double level) {
  if (!(level >= 0.0 && level < 1.0)) throw DomainError("confidence level must lie in [0, 1)");
  return level == 0.0 ? 0.0 : standard_normal_quantile(0.5 * (1.0 + level));
}

}  // namespace

double cdf_rate(double size, double n) { return std::numbers::sqrt2 * kPi * size / std::sqrt(log_n(n)); }

double quantile_rate(double size, double n) { return size / std::sqrt(log_n(n)); }

double rate_size(const SpectralSample& sample, RateConvention rate) {
  return static_cast<double>(rate == RateConvention::dimension ? sample.p() : sample.n());
}

double cdf_statistic(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel, double h,
                     double x, CltOptions options) {
  require_interior(law, x);
  const double rate = cdf_rate(rate_size(sample, options.rate), static_cast<double>(sample.n()));
  return rate * (smoothed_cdf(sample, kernel, h, x) - law.cdf(x));
}

double density_statistic(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel, double h,
                         double x, CltOptions options) {
  require_interior(law, x);
  log_n(static_cast<double>(sample.n()));
  return rate_size(sample, options.rate) * h * (smoothed_density(sample, kernel, h, x) - law.density(x));
}

double density_statistic_centered(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel,
                                  double h, double x, CltOptions options) {
  require_interior(law, x);
  log_n(static_cast<double>(sample.n()));
  return rate_size(sample, options.rate) * h *
         (smoothed_density(sample, kernel, h, x) - smoothed_mp_reference(law, kernel, h, x));
}

double quantile_statistic(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel, double h,
                          double alpha, CltOptions options) {
  const double target = law.quantile(alpha);
  require_interior(law, target);
  const double rate = quantile_rate(rate_size(sample, options.rate), static_cast<double>(sample.n()));
  return rate * (smoothed_quantile(sample, kernel, h, alpha) - target);
}

CltStatistic compute_statistic(StatisticKind kind, const MpLaw& law, const SpectralSample& sample,
                               const KernelProfile& kernel, double h, std::span<const double> points,
                               CltOptions options) {
  CltStatistic out;
  out.kind = kind;
  out.points.assign(points.begin(), points.end());
  out.n = sample.n();
  out.h = h;
  out.values.reserve(points.size());
  for (double x : points) {
    switch (kind) {
      case StatisticKind::cdf:
        out.values.push_back(cdf_statistic(law, sample, kernel, h, x, options));
        break;
      case StatisticKind::density:
        out.values.push_back(density_statistic(law, sample, kernel, h, x, options));
        break;
      case StatisticKind::density_centered:
        out.values.push_back(density_statistic_centered(law, sample, kernel, h, x, options));
        break;
      case StatisticKind::quantile:
        out.values.push_back(quantile_statistic(law, sample, kernel, h, x, options));
        break;
    }
  }
  return out;
}

namespace {

/// One evaluation of int_0^S ln(s^2) C(s) ds at a given refinement level.
double rotated_log_integral(const KernelProfile& kernel, int level) {
  const double half_width = kernel.tail_radius();
  const double centre = kernel.centre();
  const double split = half_width / 20.0;
  const std::size_t refine = std::size_t{1} << level;
  const quad::GaussLegendre rule(10);

  // C(s) on the square [centre - L, centre + L]^2: t = u1 + u2 ranges over
  // [2 centre - 2L + s, 2 centre + 2L - s].
  auto correlation = [&](double s) {
    const double t_lo = 2.0 * centre - 2.0 * half_width + s;
    const double t_hi = 2.0 * centre + 2.0 * half_width - s;
    if (t_lo >= t_hi) return 0.0;
    const auto panels = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil((t_hi - t_lo) / (4.0 * half_width) * 320.0)) * refine);
    return rule.integrate(
        [&](double t) { return kernel.derivative(0.5 * (t + s)) * kernel.derivative(0.5 * (t - s)); }, t_lo, t_hi,
        panels);
  };
  auto integrand = [&](double s) { return 2.0 * std::log(s) * correlation(s); };

  const double near = quad::tanh_sinh(integrand, 0.0, split, 1e-13 / static_cast<double>(refine), 14).value;
  const double far = rule.integrate(integrand, split, 2.0 * half_width, 160 * refine);
  return near + far;
}

}  // namespace

VarianceConstant sigma_squared(const KernelProfile& kernel, SigmaSquaredOptions options) {
  double previous = rotated_log_integral(kernel, 0);
  for (int level = 1; level <= options.max_refinements; ++level) {
    const double current = rotated_log_integral(kernel, level);
    const double change = std::abs(current - previous);
    if (change <= options.relative_tolerance * std::abs(current)) {
      const double value = -current / (2.0 * kPi * kPi);
      if (!(value > 0.0)) throw DomainError("sigma^2 is not positive for kernel " + kernel.name());
      return {value, VarianceKind::density_sigma2, change / (2.0 * kPi * kPi)};
    }
    previous = current;
  }
  throw ConvergenceError("sigma^2 quadrature did not stabilise within the refinement cap");
}

VarianceConstant quantile_variance(const MpLaw& law, double alpha) {
  const double x = law.quantile(alpha);
  const double f = law.density(x);
  if (!(f >= 1e-12)) throw DomainError("MP density vanishes at the quantile: variance is unbounded");
  return {1.0 / (2.0 * kPi * kPi * f * f), VarianceKind::quantile, 0.0};
}

Interval confidence_interval_cdf(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel,
                                 double h, double x, double level, CltOptions options) {
  require_interior(law, x);
  const double z = normal_critical_value(level);
  const double half = z / cdf_rate(rate_size(sample, options.rate), static_cast<double>(sample.n()));
  const double centre = smoothed_cdf(sample, kernel, h, x);
  return {std::clamp(centre - half, 0.0, 1.0), std::clamp(centre + half, 0.0, 1.0)};
}

Interval confidence_interval_quantile(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel,
                                      double h, double alpha, double level, CltOptions options,
                                      DensityPlugIn plug_in) {
  const double z = normal_critical_value(level);
  const double target = law.quantile(alpha);
  require_interior(law, target);
  const double estimate = smoothed_quantile(sample, kernel, h, alpha);
  double sd = 0.0;
  if (plug_in == DensityPlugIn::mp_law) {
    sd = std::sqrt(quantile_variance(law, alpha).value);
  } else {
    const double f = smoothed_density(sample, kernel, h, estimate);
    if (!(f >= 1e-12)) throw DomainError("estimated density vanishes at the quantile");
    sd = 1.0 / (std::numbers::sqrt2 * kPi * f);
  }
  const double half = z * sd / quantile_rate(rate_size(sample, options.rate), static_cast<double>(sample.n()));
  return {estimate - half, estimate + half};
}

Complex mean_correction(const MpLaw& law, Complex z) {
  const Complex m = law.companion_stieltjes(z);
  const Complex q = m / (1.0 + m);
  const double c = law.ratio();
  const Complex denom = 1.0 - c * q * q;
  if (std::abs(denom) < 1e-12) throw DomainError("mean correction has a pole at the spectral edge");
  return c * q * q * q / (denom * denom);
}

}  // namespace mpspec
