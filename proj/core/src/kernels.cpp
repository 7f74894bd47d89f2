#include "mpspec/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "mpspec/error.hpp"
#include "mpspec/quadrature.hpp"

namespace mpspec {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

constexpr double kMassTolerance = 1e-8;
constexpr double kDecayTolerance = 1e-8;
constexpr double kConvergenceTolerance = 1e-6;
constexpr double kSmoothnessTolerance = 1e-4;

}  // namespace

KernelProfile::KernelProfile(Parts parts) : parts_(std::move(parts)) {
  if (!parts_.value || !parts_.derivative || !parts_.antiderivative)
    throw PreconditionError("kernel profile needs value, derivative and antiderivative");
  if (!(parts_.tail_radius > 0.0)) throw DomainError("kernel tail radius must be positive");
}

Complex KernelProfile::value(Complex z) const {
  if (!parts_.complex_value)
    throw PreconditionError("kernel '" + parts_.name + "' has no complex extension");
  return parts_.complex_value(z);
}

KernelProfile KernelProfile::shifted(double shift) const {
  Parts p = parts_;
  p.name = parts_.name + "_shift(" + std::to_string(shift) + ")";
  p.value = [f = parts_.value, shift](double x) { return f(x - shift); };
  p.derivative = [f = parts_.derivative, shift](double x) { return f(x - shift); };
  p.antiderivative = [f = parts_.antiderivative, shift](double x) { return f(x - shift); };
  if (parts_.complex_value)
    p.complex_value = [f = parts_.complex_value, shift](Complex z) { return f(z - shift); };
  p.centre = parts_.centre + shift;
  return KernelProfile(std::move(p));
}

KernelProfile KernelProfile::scaled(double s) const {
  if (!(s > 0.0)) throw DomainError("kernel scale must be positive");
  Parts p = parts_;
  p.name = parts_.name + "_scale(" + std::to_string(s) + ")";
  p.value = [f = parts_.value, s](double x) { return s * f(s * x); };
  p.derivative = [f = parts_.derivative, s](double x) { return s * s * f(s * x); };
  p.antiderivative = [f = parts_.antiderivative, s](double x) { return f(s * x); };
  if (parts_.complex_value)
    p.complex_value = [f = parts_.complex_value, s](Complex z) { return s * f(s * z); };
  p.tail_radius = parts_.tail_radius / s;
  p.centre = parts_.centre / s;
  return KernelProfile(std::move(p));
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile level must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  // Solve in the lower tail, where Phi is convex, and reflect.
  const bool upper = p > 0.5;
  const double q = upper ? 1.0 - p : p;
  double x = -std::sqrt(-2.0 * std::log(q));
  for (int iter = 0; iter < 100; ++iter) {
    const double step = (standard_normal_cdf(x) - q) / (kInvSqrt2Pi * std::exp(-0.5 * x * x));
    x -= step;
    if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(x))) break;
  }
  return upper ? -x : x;
}

KernelProfile gaussian_kernel() {
  KernelProfile::Parts p;
  p.name = "gaussian";
  p.value = [](double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); };
  p.derivative = [](double x) { return -x * kInvSqrt2Pi * std::exp(-0.5 * x * x); };
  p.antiderivative = standard_normal_cdf;
  p.complex_value = [](Complex z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); };
  p.tail_radius = 40.0;
  p.analyticity = Analyticity::asserted_by_construction;
  return KernelProfile(std::move(p));
}

KernelProfile uniform_kernel() {
  KernelProfile::Parts p;
  p.name = "uniform";
  p.value = [](double x) { return (x >= -0.5 && x <= 0.5) ? 1.0 : 0.0; };
  p.derivative = [](double) { return 0.0; };
  p.antiderivative = [](double x) { return std::clamp(x + 0.5, 0.0, 1.0); };
  p.tail_radius = 0.5;
  return KernelProfile(std::move(p));
}

bool ConditionReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.passed; });
}

const ConditionVerdict& ConditionReport::at(const std::string& condition) const {
  for (const auto& v : verdicts)
    if (v.condition == condition) return v;
  throw std::out_of_range("no verdict for condition " + condition);
}

ConditionReport check_kernel_conditions(const KernelProfile& kernel, double window) {
  if (!(window > 0.0)) throw DomainError("truncation window must be positive");
  ConditionReport report;
  report.analyticity = kernel.analyticity();

  const double centre = kernel.centre();
  const quad::GaussLegendre rule(10);
  // Panels of width 1/20 keep breakpoints on multiples of 0.05 around the centre,
  // which is where simple piecewise kernels put their jumps.
  auto integrate = [&](auto&& f, double half_width) {
    const auto panels = static_cast<std::size_t>(std::ceil(2.0 * half_width * 20.0));
    return rule.integrate(f, centre - half_width, centre + half_width, panels);
  };
  auto converged = [&](auto&& f, const std::string& name) {
    const double full = integrate(f, window);
    const double half = integrate(f, 0.5 * window);
    const bool ok = std::isfinite(full) &&
                    std::abs(full - half) <= kConvergenceTolerance * (1.0 + std::abs(full));
    report.verdicts.push_back({name, full, ok, ok ? "" : "truncated integral not converged"});
  };

  const double lo = centre - window;
  const double hi = centre + window;
  const double decay_value = std::max(std::abs(lo * kernel.value(lo)), std::abs(hi * kernel.value(hi)));
  const double decay_derivative =
      std::max(std::abs(lo * kernel.derivative(lo)), std::abs(hi * kernel.derivative(hi)));
  report.verdicts.push_back({"a25.decay_value", decay_value, decay_value < kDecayTolerance, ""});
  report.verdicts.push_back(
      {"a25.decay_derivative", decay_derivative, decay_derivative < kDecayTolerance, ""});

  const double mass = integrate([&](double x) { return kernel.value(x); }, window);
  report.verdicts.push_back(
      {"a26.normalization", mass, std::abs(mass - 1.0) <= kMassTolerance, ""});

  converged([&](double x) { return std::abs(x * kernel.derivative(x)); }, "a26.abs_x_derivative");

  // Proxy for int |K''| < inf: K' must agree with finite differences of K
  // everywhere on a fine grid (a jump in K makes K'' a delta), and K' must
  // have finite total variation there.
  {
    constexpr double step = 1e-3;
    const auto count = static_cast<std::size_t>(std::round(2.0 * window / step));
    double mismatch = 0.0;
    double variation = 0.0;
    double previous = kernel.derivative(lo);
    for (std::size_t i = 1; i < count; ++i) {
      const double x = lo + step * static_cast<double>(i);
      const double fd = (kernel.value(x + step) - kernel.value(x - step)) / (2.0 * step);
      const double d = kernel.derivative(x);
      mismatch = std::max(mismatch, std::abs(fd - d));
      variation += std::abs(d - previous);
      previous = d;
    }
    const bool smooth = mismatch <= kSmoothnessTolerance;
    report.verdicts.push_back({"a26.second_derivative", variation, smooth && std::isfinite(variation),
                               smooth ? "" : "derivative inconsistent with value: kernel not smooth"});
  }

  const double mean = integrate([&](double x) { return x * kernel.value(x); }, window);
  report.verdicts.push_back({"a27.mean", mean, std::abs(mean) <= kMassTolerance, ""});

  converged([&](double x) { return x * x * std::abs(kernel.value(x)); }, "a27.second_moment");
  return report;
}

double BandwidthRule::operator()(std::size_t n) const {
  if (n < 2) throw DomainError("bandwidth rules need n >= 2");
  const double nn = static_cast<double>(n);
  return scale * std::pow(nn, -exponent) * std::pow(std::log(nn), -log_exponent);
}

BandwidthRule BandwidthRule::for_cdf(double scale) {
  return {BandwidthRegime::cdf, 0.5, 0.25, scale};
}

BandwidthRule BandwidthRule::for_density(double scale) {
  return {BandwidthRegime::density, 0.4, 0.0, scale};
}

BandwidthRule BandwidthRule::for_regime(BandwidthRegime regime, double scale) {
  return regime == BandwidthRegime::cdf ? for_cdf(scale) : for_density(scale);
}

double bandwidth_for_cdf(std::size_t n) { return BandwidthRule::for_cdf()(n); }

double bandwidth_for_density(std::size_t n) { return BandwidthRule::for_density()(n); }

}  // namespace mpspec
