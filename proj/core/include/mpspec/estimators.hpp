#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mpspec/kernels.hpp"
#include "mpspec/mp_law.hpp"
#include "mpspec/spectral.hpp"

namespace mpspec {

/// Kernel density estimate of the spectrum,
///   f_n(x) = (p h)^{-1} sum_i K((x - lambda_i) / h).
/// Summation runs in eigenvalue order. Throws DomainError unless h > 0.
double smoothed_density(const SpectralSample& sample, const KernelProfile& kernel, double h, double x);

/// Smoothed ESD F_n(x) = int_{-inf}^x f_n, evaluated term by term through
/// the kernel antiderivative.
double smoothed_cdf(const SpectralSample& sample, const KernelProfile& kernel, double h, double x);

/// inf{x : F_n(x) >= alpha} by bisection over
/// [min lambda - 10 h, max lambda + 10 h], widened if the kernel has heavier
/// tails than that bracket allows. Throws DomainError unless 0 < alpha < 1.
double smoothed_quantile(const SpectralSample& sample, const KernelProfile& kernel, double h, double alpha);

/// Kernel-smoothed MP density h^{-1} int_a^b K((x - y)/h) f_c(y) dy, the
/// centering of the h -> 0 density CLT. Integrates over [a, b] only, so the
/// atom at zero (c > 1) is excluded. Absolute error below 1e-9.
double smoothed_mp_reference(const MpLaw& law, const KernelProfile& kernel, double h, double x);

/// Estimates on a grid, tagged with the bandwidth and sample provenance.
struct SmoothedEstimate {
  std::vector<double> grid;
  std::vector<double> density_values;
  std::vector<double> cdf_values;
  double bandwidth = 0.0;
  std::size_t p = 0;
  std::size_t n = 0;
};

/// Throws DomainError if the grid is not strictly increasing.
SmoothedEstimate estimate_on_grid(const SpectralSample& sample, const KernelProfile& kernel, double h,
                                  std::span<const double> grid);

/// Columns `x,f_n,F_n` at 17 significant digits.
void write_grid_csv(std::ostream& out, const SmoothedEstimate& estimate);

/// Rectangle with horizontal sides at +/- v0 h spanning [left, right].
struct ContourSpec {
  double left = 0.0;   ///< a_l, strictly below the lower edge
  double right = 0.0;  ///< a_r, strictly above the upper edge
  double v0 = 1.0;
  std::size_t points_per_side = 2000;

  /// a_l = a / 2, a_r = b + 1, v0 = 1, 2000 points per side.
  static ContourSpec defaults_for(const MpLaw& law);
};

/// -(1 / 2 pi i) times the counter-clockwise integral of K((x - z)/h) g(z)
/// over the rectangle, by composite 8-point Gauss-Legendre on each side.
/// Requires a kernel with a complex extension.
Complex contour_integral(const KernelProfile& kernel, double h, double x, const ContourSpec& spec,
                         const std::function<Complex(Complex)>& integrand);

struct ContourReport {
  double lhs = 0.0;  ///< n h (f_n(x) - smoothed_mp_reference(x))
  double rhs = 0.0;  ///< contour integral of the centred resolvent trace
  double imaginary_residue = 0.0;  ///< |Im| of the contour integral, ~0 by symmetry
  double relative_residual = 0.0;  ///< |lhs - rhs| / (|lhs| + 1e-12)
};

/// Cauchy-formula cross-check of the density statistic. The integrand is
/// X_n(z) = n (m_{F^A}(z) - m_n^0(z)), the resolvent trace centred at the MP
/// law with c_n = p/n and scaled so that both sides carry the factor n h.
/// Throws PreconditionError unless all eigenvalues lie in (left, right) and
/// a_n < x < b_n; DomainError for a malformed spec.
ContourReport contour_check(const SpectralSample& sample, const MpLaw& law, const KernelProfile& kernel,
                            double h, double x, const ContourSpec& spec);

}  // namespace mpspec
