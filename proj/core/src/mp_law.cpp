#include "mpspec/mp_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "mpspec/error.hpp"
#include "mpspec/quadrature.hpp"
#include "mp_detail.hpp"

namespace mpspec {

namespace {

/// Breakpoints on [0, end] for the bulk angle integral. Near t = 0 the
/// integrand varies on the scale asin(sqrt(a / (b - a))), which is tiny for
/// c close to 1, so panels grow geometrically away from that scale.
std::vector<double> angle_breaks(const MpLaw& law, double end) {
  const double a = law.lower_edge();
  const double scale = std::asin(std::sqrt(a / (law.upper_edge() - a)));
  std::vector<double> out{0.0};
  if (scale > 0.0)
    for (double t = scale / 64.0; t < std::min(end, 0.1); t *= 2.0) out.push_back(t);
  const double from = out.back();
  const int uniform = std::max(1, static_cast<int>(std::ceil((end - from) / 0.05)));
  for (int k = 1; k <= uniform; ++k) out.push_back(from + (end - from) * k / uniform);
  return out;
}

}  // namespace

MpLaw::MpLaw(double c) : c_(c) {
  if (!std::isfinite(c) || c <= 0.0) throw DomainError("MP aspect ratio c must be finite and positive");
  const double root = std::sqrt(c);
  a_ = (1.0 - root) * (1.0 - root);
  b_ = (1.0 + root) * (1.0 + root);
}

double MpLaw::density(double x) const noexcept {
  if (!(x > a_ && x < b_)) return 0.0;
  return std::sqrt((b_ - x) * (x - a_)) / (2.0 * std::numbers::pi * c_ * x);
}

double MpLaw::point_mass_at_zero() const noexcept { return std::max(0.0, 1.0 - 1.0 / c_); }

double MpLaw::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf argument is NaN");
  if (x < 0.0) return 0.0;
  const double atom = point_mass_at_zero();
  if (x <= a_) return atom;
  if (x >= b_) return 1.0;

  static const quad::GaussLegendre rule(20);
  const auto breaks = angle_breaks(*this, detail::bulk_angle(*this, x));
  const double mass = rule.integrate([this](double t) { return detail::bulk_mass_density(*this, t); },
                                     std::span<const double>(breaks));
  return std::clamp(atom + mass, 0.0, 1.0);
}

double MpLaw::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (alpha <= point_mass_at_zero()) return 0.0;
  double lo = (a_ == 0.0) ? 1e-12 : a_;
  double hi = b_;
  if (cdf(lo) >= alpha) return lo;
  for (int iter = 0; iter < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= alpha)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

void MpLaw::check_off_support(Complex z) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("Stieltjes argument must be finite");
  if (z.imag() == 0.0) {
    if (z.real() == 0.0) throw DomainError("Stieltjes transform is not defined at the origin");
    if (z.real() >= a_ && z.real() <= b_)
      throw DomainError("Stieltjes transform is not defined on the support [a, b]");
  }
}

Complex MpLaw::stieltjes(Complex z) const {
  check_off_support(z);
  const Complex root = std::sqrt(z - a_) * std::sqrt(z - b_);
  // The two roots of c z m^2 + (z + c - 1) m + 1 = 0 are (1-c-z +/- root)/(2cz);
  // pick whichever algebraic form avoids cancellation.
  const Complex plus = 1.0 - c_ - z + root;
  const Complex minus = 1.0 - c_ - z - root;
  if (std::abs(plus) >= std::abs(minus)) return plus / (2.0 * c_ * z);
  return 2.0 / minus;
}

Complex MpLaw::companion_stieltjes(Complex z) const {
  return -(1.0 - c_) / z + c_ * stieltjes(z);
}

Complex MpLaw::real_axis_companion(double x) const {
  if (!(x > a_ && x < b_)) throw DomainError("real-axis companion transform needs a < x < b");
  return Complex(-(x + 1.0 - c_), std::sqrt((x - a_) * (b_ - x))) / (2.0 * x);
}

Complex MpLaw::edge_factor(Complex z) const {
  return z + c_ - 1.0 + 2.0 * c_ * z * stieltjes(z);
}

}  // namespace mpspec
