#pragma once

// Standardised statistics for the smoothed spectral estimators, their
// asymptotic variance constants, and the confidence intervals built on them.
//
// Every centering uses the MP law at the finite-sample ratio c_n = p/n; pass
// sample.law() as `law`. Each statistic is affine in its raw estimator.
//
// Rate prefactor. The statistics are scaled by a "size" times a rate in n:
//   cdf:      sqrt(2) pi size / sqrt(ln n)
//   density:  size h
//   quantile: size / sqrt(ln n)
// With RateConvention::dimension (the default) size = p, which is the
// normalisation under which the limits N(0, 1), N(0, sigma^2) and
// N(0, 1/(2 pi^2 f_c^2(x_alpha))) hold for f_n = (ph)^{-1} sum K. With
// RateConvention::sample_size, size = n; the limiting variances are then
// multiplied by 1/c^2.

#include <cstddef>
#include <span>
#include <vector>

#include "mpspec/kernels.hpp"
#include "mpspec/mp_law.hpp"
#include "mpspec/spectral.hpp"

namespace mpspec {

enum class RateConvention { dimension, sample_size };

struct CltOptions {
  RateConvention rate = RateConvention::dimension;
};

/// sqrt(2) pi size / sqrt(ln n). Throws DomainError for n < 3.
double cdf_rate(double size, double n);
/// size / sqrt(ln n). Throws DomainError for n < 3.
double quantile_rate(double size, double n);
/// p or n according to the convention.
double rate_size(const SpectralSample& sample, RateConvention rate);

enum class StatisticKind { cdf, density, density_centered, quantile };

/// Standardised statistics at several points (or quantile levels).
struct CltStatistic {
  StatisticKind kind = StatisticKind::cdf;
  std::vector<double> points;  ///< x_j, or alpha_j for quantile statistics
  std::vector<double> values;
  std::size_t n = 0;
  double h = 0.0;
};

/// sqrt(2) pi size / sqrt(ln n) (F_n(x) - F_{c_n}(x)). Throws DomainError
/// unless a_n < x < b_n and n >= 3.
double cdf_statistic(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel, double h,
                     double x, CltOptions options = {});

/// size h (f_n(x) - f_{c_n}(x)); limit N(0, sigma^2), independent across points.
double density_statistic(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel, double h,
                         double x, CltOptions options = {});

/// size h (f_n(x) - smoothed_mp_reference(x)); valid for any h -> 0.
double density_statistic_centered(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel,
                                  double h, double x, CltOptions options = {});

/// size / sqrt(ln n) (x_{n,alpha} - x_alpha). Throws DomainError unless
/// a_n < x_alpha < b_n.
double quantile_statistic(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel, double h,
                          double alpha, CltOptions options = {});

/// Vectorised form of the four statistics above.
CltStatistic compute_statistic(StatisticKind kind, const MpLaw& law, const SpectralSample& sample,
                               const KernelProfile& kernel, double h, std::span<const double> points,
                               CltOptions options = {});

enum class VarianceKind { density_sigma2, quantile };

struct VarianceConstant {
  double value = 0.0;
  VarianceKind kind = VarianceKind::density_sigma2;
  double error_estimate = 0.0;
};

struct SigmaSquaredOptions {
  double relative_tolerance = 1e-10;  ///< successive refinements must agree to this
  int max_refinements = 4;
};

/// sigma^2 = -(1 / 2 pi^2) int int K'(u1) K'(u2) ln (u1 - u2)^2 du1 du2.
///
/// Rotating to s = u1 - u2, t = u1 + u2 gives
///   int int ... = int_0^inf ln(s^2) C(s) ds,  C(s) = int K'((t+s)/2) K'((t-s)/2) dt,
/// over the square [centre - L, centre + L]^2 with L the kernel's tail
/// radius. C is smooth and even; the log singularity at s = 0 is handled by
/// tanh-sinh on [0, L/20] and composite Gauss-Legendre beyond. The error
/// estimate is the change between the last two refinements (each halves
/// every panel). Throws ConvergenceError if the refinement cap is hit and
/// DomainError if the result is not positive.
VarianceConstant sigma_squared(const KernelProfile& kernel, SigmaSquaredOptions options = {});

/// 1 / (2 pi^2 f_c(x_alpha)^2). Throws DomainError when f_c(x_alpha) < 1e-12.
VarianceConstant quantile_variance(const MpLaw& law, double alpha);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const noexcept { return upper - lower; }
  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

/// F_n(x) +/- z_{(1+level)/2} sqrt(ln n) / (sqrt(2) pi size), clamped to [0, 1].
/// level = 0 gives the degenerate interval at F_n(x). Throws DomainError
/// unless 0 <= level < 1.
Interval confidence_interval_cdf(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel,
                                 double h, double x, double level, CltOptions options = {});

/// Density used in the quantile-interval half-width.
enum class DensityPlugIn {
  mp_law,    ///< f_{c_n}(x_alpha)
  estimate,  ///< f_n(x_{n,alpha})
};

/// x_{n,alpha} +/- z_{(1+level)/2} / (sqrt(2) pi f) * sqrt(ln n) / size.
Interval confidence_interval_quantile(const MpLaw& law, const SpectralSample& sample, const KernelProfile& kernel,
                                      double h, double alpha, double level, CltOptions options = {},
                                      DensityPlugIn plug_in = DensityPlugIn::mp_law);

/// c q^3 (1 - c q^2)^{-2} with q = m/(1 + m), m the companion transform at z.
/// This is the integrand of the asymptotic mean of the centred resolvent
/// trace; its kernel contour integral vanishes, so it is a diagnostic only.
/// Throws DomainError near the pole 1 - c q^2 = 0 (the spectral edges).
Complex mean_correction(const MpLaw& law, Complex z);

}  // namespace mpspec
