#pragma once

// One-dimensional quadrature used throughout the library: fixed-order
// Gauss-Legendre panels, adaptive Simpson with Richardson correction, and
// tanh-sinh for integrands with endpoint singularities.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mpspec/error.hpp"

namespace mpspec::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(std::size_t order);

  std::size_t order() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Integral of f over [a, b] with a single panel.
  template <class F>
  auto integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    using R = decltype(f(mid));
    R sum{};
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return sum * half;
  }

  /// Composite rule over `panels` equal panels of [a, b].
  template <class F>
  auto integrate(F&& f, double a, double b, std::size_t panels) const {
    const double width = (b - a) / static_cast<double>(panels);
    using R = decltype(f(a));
    R sum{};
    for (std::size_t k = 0; k < panels; ++k) {
      const double lo = a + width * static_cast<double>(k);
      const double hi = (k + 1 == panels) ? b : lo + width;
      sum += integrate(f, lo, hi);
    }
    return sum;
  }

  /// Composite rule over consecutive breakpoints.
  template <class F>
  auto integrate(F&& f, std::span<const double> breakpoints) const {
    using R = decltype(f(breakpoints[0]));
    R sum{};
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
      sum += integrate(f, breakpoints[k], breakpoints[k + 1]);
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth, int max_depth, double& err) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= max_depth) {
    err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) {
    err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1, max_depth, err) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1, max_depth, err);
}

}  // namespace detail

/// Adaptive Simpson on [a, b], started from `initial_panels` equal panels so
/// that narrow features are not missed by the first sample.
template <class F>
Estimate adaptive_simpson(F&& f, double a, double b, double tol, std::size_t initial_panels = 8,
                          int max_depth = 40) {
  Estimate out;
  if (a == b) return out;
  const double width = (b - a) / static_cast<double>(initial_panels);
  const double panel_tol = tol / static_cast<double>(initial_panels);
  double lo = a;
  double flo = f(lo);
  for (std::size_t k = 0; k < initial_panels; ++k) {
    const double hi = (k + 1 == initial_panels) ? b : a + width * static_cast<double>(k + 1);
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    const double fhi = f(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    out.value += detail::simpson_step(f, lo, flo, mid, fmid, hi, fhi, whole, panel_tol, 0,
                                      max_depth, out.error);
    lo = hi;
    flo = fhi;
  }
  return out;
}

/// Tanh-sinh (double exponential) quadrature on [a, b]. Tolerates integrable
/// endpoint singularities such as log|x - a|; the integrand is never
/// evaluated at the endpoints themselves. Refines by halving the step until
/// successive levels agree to `rel_tol`; throws ConvergenceError otherwise.
template <class F>
Estimate tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12, int max_level = 12) {
  constexpr double kHalfPi = 1.57079632679489661923;
  const double half = 0.5 * (b - a);
  // Abscissae are taken as distance-from-endpoint to keep resolution near a and b.
  auto term = [&](double t) {
    const double u = kHalfPi * std::sinh(t);
    const double ch = std::cosh(u);
    const double weight = kHalfPi * std::cosh(t) / (ch * ch);
    const double gap = half / (std::exp(u) * ch);  // half * (1 - tanh u)
    if (gap <= 0.0 || weight == 0.0) return 0.0;
    const double xr = b - gap;
    const double xl = a + gap;
    double s = 0.0;
    if (xr > a && xr < b) s += f(xr);
    if (t != 0.0 && xl > a && xl < b) s += f(xl);
    return weight * s;
  };
  constexpr double kTmax = 6.5;
  double step = 1.0;
  double sum = term(0.0);
  for (double t = step; t <= kTmax; t += step) sum += term(t);
  double previous = sum * step * half;
  for (int level = 1; level <= max_level; ++level) {
    step *= 0.5;
    for (double t = step; t <= kTmax; t += 2.0 * step) sum += term(t);
    const double current = sum * step * half;
    const double diff = std::abs(current - previous);
    if (level >= 3 && diff <= rel_tol * std::abs(current)) return {current, diff};
    previous = current;
  }
  throw ConvergenceError("tanh-sinh quadrature did not reach the requested tolerance");
}

}  // namespace mpspec::quad
