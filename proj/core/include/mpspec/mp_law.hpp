#pragma once

#include <complex>

namespace mpspec {

using Complex = std::complex<double>;

/// Marchenko-Pastur law with aspect ratio c = p/n for identity population
/// covariance. The continuous part lives on [a, b] with
/// a = (1 - sqrt c)^2, b = (1 + sqrt c)^2; for c > 1 there is an additional
/// atom of mass 1 - 1/c at the origin.
///
/// All members are pure; an MpLaw is an immutable value.
class MpLaw {
 public:
  /// Throws DomainError unless c is finite and positive.
  explicit MpLaw(double c);

  double ratio() const noexcept { return c_; }
  double lower_edge() const noexcept { return a_; }
  double upper_edge() const noexcept { return b_; }

  /// Continuous density; zero outside [a, b]. The atom is not included.
  double density(double x) const noexcept;

  /// max(0, 1 - 1/c).
  double point_mass_at_zero() const noexcept;

  /// Distribution function including the atom at zero. Evaluated by adaptive
  /// Simpson after the substitution x = a + (b - a) sin^2(theta), which turns
  /// the square-root edges into a smooth integrand.
  double cdf(double x) const;

  /// Leftmost x with cdf(x) >= alpha, by bisection on [a, b]. Returns 0 when
  /// alpha does not exceed the atom. Throws DomainError unless 0 < alpha < 1.
  double quantile(double alpha) const;

  /// Stieltjes transform m(z) = int dF(x) / (x - z). The square-root branch
  /// is sqrt(z - a) * sqrt(z - b) (principal roots), which is analytic off
  /// [a, b], behaves like z at infinity, and gives Im m * Im z > 0.
  /// Throws DomainError for real z in [a, b] and for z = 0.
  Complex stieltjes(Complex z) const;

  /// Companion transform -(1 - c)/z + c m(z), the limit for X^T X / n.
  Complex companion_stieltjes(Complex z) const;

  /// Boundary value of the companion transform from the upper half plane at
  /// a < x < b. Throws DomainError outside the open bulk.
  Complex real_axis_companion(double x) const;

  /// z + c - 1 + 2 c z m(z); equals sqrt((a - z)(b - z)) on the branch above.
  Complex edge_factor(Complex z) const;

 private:
  void check_off_support(Complex z) const;

  double c_;
  double a_;
  double b_;
};

}  // namespace mpspec
