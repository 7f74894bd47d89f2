#include "mpspec/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "mp_detail.hpp"
#include "mpspec/error.hpp"
#include "mpspec/quadrature.hpp"

namespace mpspec {

namespace {

void require_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("bandwidth must be positive and finite");
}

constexpr double kReferenceTolerance = 1e-11;

}  // namespace

double smoothed_density(const SpectralSample& sample, const KernelProfile& kernel, double h, double x) {
  require_bandwidth(h);
  double sum = 0.0;
  for (double lambda : sample.eigenvalues()) sum += kernel.value((x - lambda) / h);
  return sum / (static_cast<double>(sample.p()) * h);
}

double smoothed_cdf(const SpectralSample& sample, const KernelProfile& kernel, double h, double x) {
  require_bandwidth(h);
  double sum = 0.0;
  for (double lambda : sample.eigenvalues()) sum += kernel.antiderivative((x - lambda) / h);
  return sum / static_cast<double>(sample.p());
}

double smoothed_quantile(const SpectralSample& sample, const KernelProfile& kernel, double h, double alpha) {
  require_bandwidth(h);
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  auto cdf = [&](double x) { return smoothed_cdf(sample, kernel, h, x); };
  double lo = sample.min() - 10.0 * h;
  double hi = sample.max() + 10.0 * h;
  for (int widen = 0; cdf(lo) >= alpha; ++widen) {
    if (widen > 60) throw ConvergenceError("could not bracket the smoothed quantile from below");
    lo -= 10.0 * h * std::ldexp(1.0, widen);
  }
  for (int widen = 0; cdf(hi) < alpha; ++widen) {
    if (widen > 60) throw ConvergenceError("could not bracket the smoothed quantile from above");
    hi += 10.0 * h * std::ldexp(1.0, widen);
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), h});
  for (int iter = 0; iter < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * scale; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= alpha)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double smoothed_mp_reference(const MpLaw& law, const KernelProfile& kernel, double h, double x) {
  require_bandwidth(h);
  // K((x - y)/h) is negligible unless (x - y)/h lies within tail_radius of the kernel centre.
  const double reach = kernel.tail_radius() * h;
  const double y_lo = std::max(law.lower_edge(), x - kernel.centre() * h - reach);
  const double y_hi = std::min(law.upper_edge(), x - kernel.centre() * h + reach);
  if (y_lo >= y_hi) return 0.0;
  const double t_lo = detail::bulk_angle(law, y_lo);
  const double t_hi = detail::bulk_angle(law, y_hi);
  auto integrand = [&](double t) {
    const double y = detail::bulk_point(law, t);
    return kernel.value((x - y) / h) * detail::bulk_mass_density(law, t) / h;
  };
  return quad::adaptive_simpson(integrand, t_lo, t_hi, kReferenceTolerance, 64).value;
}

SmoothedEstimate estimate_on_grid(const SpectralSample& sample, const KernelProfile& kernel, double h,
                                  std::span<const double> grid) {
  require_bandwidth(h);
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("estimate grid must be strictly increasing");
  SmoothedEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.bandwidth = h;
  out.p = sample.p();
  out.n = sample.n();
  out.density_values.reserve(grid.size());
  out.cdf_values.reserve(grid.size());
  for (double x : grid) {
    out.density_values.push_back(smoothed_density(sample, kernel, h, x));
    out.cdf_values.push_back(smoothed_cdf(sample, kernel, h, x));
  }
  return out;
}

void write_grid_csv(std::ostream& out, const SmoothedEstimate& estimate) {
  out << "x,f_n,F_n\n";
  char buf[96];
  for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", estimate.grid[i], estimate.density_values[i],
                  estimate.cdf_values[i]);
    out << buf;
  }
}

ContourSpec ContourSpec::defaults_for(const MpLaw& law) {
  return {0.5 * law.lower_edge(), law.upper_edge() + 1.0, 1.0, 2000};
}

Complex contour_integral(const KernelProfile& kernel, double h, double x, const ContourSpec& spec,
                         const std::function<Complex(Complex)>& integrand) {
  require_bandwidth(h);
  if (!(spec.left < spec.right) || !(spec.v0 > 0.0) || spec.points_per_side < 8)
    throw DomainError("contour needs left < right, v0 > 0 and at least 8 points per side");
  if (!kernel.has_complex_extension())
    throw PreconditionError("contour integral needs a kernel with a complex extension");

  const quad::GaussLegendre rule(8);
  const std::size_t panels = spec.points_per_side / 8;
  const double height = spec.v0 * h;
  auto weight = [&](Complex z) { return kernel.value(Complex((x - z.real()) / h, -z.imag() / h)) * integrand(z); };

  // Counter-clockwise: bottom left->right, right side up, top right->left, left side down.
  const Complex bottom = rule.integrate([&](double u) { return weight({u, -height}); }, spec.left, spec.right, panels);
  const Complex right = rule.integrate([&](double v) { return weight({spec.right, v}); }, -height, height, panels) *
                        Complex(0.0, 1.0);
  const Complex top = -rule.integrate([&](double u) { return weight({u, height}); }, spec.left, spec.right, panels);
  const Complex left = -rule.integrate([&](double v) { return weight({spec.left, v}); }, -height, height, panels) *
                       Complex(0.0, 1.0);
  const Complex total = bottom + right + top + left;
  return -total / Complex(0.0, 2.0 * std::numbers::pi);
}

ContourReport contour_check(const SpectralSample& sample, const MpLaw& law, const KernelProfile& kernel,
                            double h, double x, const ContourSpec& spec) {
  require_bandwidth(h);
  if (!(spec.left < law.lower_edge()) || !(spec.right > law.upper_edge()))
    throw DomainError("contour sides must satisfy left < a_n and right > b_n");
  if (!(sample.min() > spec.left && sample.max() < spec.right))
    throw PreconditionError("contour does not enclose the spectrum: an eigenvalue lies outside (a_l, a_r)");
  if (!(x > law.lower_edge() && x < law.upper_edge()))
    throw PreconditionError("evaluation point must lie inside (a_n, b_n)");

  const double n = static_cast<double>(sample.n());
  ContourReport report;
  report.lhs = n * h * (smoothed_density(sample, kernel, h, x) - smoothed_mp_reference(law, kernel, h, x));
  const Complex rhs = contour_integral(kernel, h, x, spec, [&](Complex z) {
    return n * (sample.stieltjes(z) - law.stieltjes(z));
  });
  report.rhs = rhs.real();
  report.imaginary_residue = std::abs(rhs.imag());
  report.relative_residual = std::abs(report.lhs - report.rhs) / (std::abs(report.lhs) + 1e-12);
  return report;
}

}  // namespace mpspec
