#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into mpspec's numerical routines.

#include <cstdint>
#include <functional>

namespace oracle {

/// Closed-form MP distribution function (antiderivative of the density in
/// terms of arcsines), including the atom at 0 when c > 1.
double mp_cdf(double c, double x);

/// Generalised inverse of mp_cdf by bisection.
double mp_quantile(double c, double alpha);

/// Gaussian-kernel sigma^2 by iterated 2-D Gauss-Legendre over
/// [-L, L]^2 minus the strip |u1 - u2| < delta, with the strip replaced by
/// its leading-order value int K'^2 * 4 delta (ln delta - 1).
double sigma2_strip(const std::function<double(double)>& dk, double half_width, double delta);

/// Strip scheme at delta and delta/2, returned as the smaller-delta value;
/// *spread receives their difference.
double sigma2_strip_refined(const std::function<double(double)>& dk, double half_width, double delta,
                            double* spread = nullptr);

/// sigma^2 for the Gaussian kernel by importance sampling u ~ |K'(u)| / Z
/// (Rayleigh magnitude, random sign). *standard_error receives the MC error.
double sigma2_monte_carlo_gaussian(std::uint64_t draws, std::uint64_t seed, double* standard_error = nullptr);

}  // namespace oracle
