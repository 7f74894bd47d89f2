#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mpspec/mp_law.hpp"

namespace mpspec {

/// What is known about analyticity of a kernel on a neighbourhood of the
/// real axis; this is not machine-checkable, so it is declared.
enum class Analyticity { asserted_by_construction, unknown };

/// A smoothing kernel K together with K', the distribution function
/// x -> int_{-inf}^x K, and optionally the analytic continuation of K to
/// the complex plane (needed for contour integrals).
class KernelProfile {
 public:
  using RealFn = std::function<double(double)>;
  using ComplexFn = std::function<Complex(Complex)>;

  struct Parts {
    std::string name;
    RealFn value;
    RealFn derivative;
    RealFn antiderivative;
    ComplexFn complex_value;  ///< may be empty
    double tail_radius = 40.0;  ///< |K| and |K'| are negligible beyond this
    double centre = 0.0;        ///< point about which the mass is concentrated
    Analyticity analyticity = Analyticity::unknown;
  };

  explicit KernelProfile(Parts parts);

  const std::string& name() const noexcept { return parts_.name; }
  double value(double x) const { return parts_.value(x); }
  double derivative(double x) const { return parts_.derivative(x); }
  double antiderivative(double x) const { return parts_.antiderivative(x); }

  bool has_complex_extension() const noexcept { return static_cast<bool>(parts_.complex_value); }
  /// Throws PreconditionError if the kernel has no complex extension.
  Complex value(Complex z) const;

  double tail_radius() const noexcept { return parts_.tail_radius; }
  double centre() const noexcept { return parts_.centre; }
  Analyticity analyticity() const noexcept { return parts_.analyticity; }

  /// Kernel x -> K(x - shift), with all parts translated accordingly.
  KernelProfile shifted(double shift) const;
  /// Kernel x -> s K(s x) for s > 0.
  KernelProfile scaled(double s) const;

 private:
  Parts parts_;
};

/// Standard Gaussian kernel (2 pi)^{-1/2} exp(-x^2/2). K' = -x K and the
/// antiderivative is the normal CDF via std::erfc.
KernelProfile gaussian_kernel();

/// Indicator of [-1/2, 1/2]. Admissible in mass and mean but not smooth;
/// shipped for diagnostics of check_kernel_conditions.
KernelProfile uniform_kernel();

struct ConditionVerdict {
  std::string condition;  ///< e.g. "a26.normalization"
  double value = 0.0;     ///< the computed quantity the verdict is based on
  bool passed = false;
  std::string note;
};

struct ConditionReport {
  std::vector<ConditionVerdict> verdicts;
  Analyticity analyticity = Analyticity::unknown;

  bool all_passed() const;
  /// Throws std::out_of_range for an unknown condition name.
  const ConditionVerdict& at(const std::string& condition) const;
};

/// Numerically checks the kernel admissibility conditions over a truncation
/// window [-window, window] (shifted to the kernel's centre):
///   a25.decay_value / a25.decay_derivative   |x K(x)|, |x K'(x)| < 1e-8 at the window edge
///   a26.normalization                        |int K - 1| <= 1e-8
///   a26.abs_x_derivative                     int |x K'| converged on the window
///   a26.second_derivative                    K' consistent with K (no jumps) and of bounded variation
///   a27.mean                                 |int x K| <= 1e-8
///   a27.second_moment                        int x^2 |K| converged on the window
ConditionReport check_kernel_conditions(const KernelProfile& kernel, double window = 40.0);

enum class BandwidthRegime { cdf, density };

/// h(n) = scale * n^{-exponent} * (ln n)^{-log_exponent}.
struct BandwidthRule {
  BandwidthRegime kind = BandwidthRegime::density;
  double exponent = 0.4;
  double log_exponent = 0.0;
  double scale = 1.0;

  /// Throws DomainError for n < 2.
  double operator()(std::size_t n) const;

  /// n^{-1/2} (ln n)^{-1/4}: inside the window nh^2 / sqrt(ln 1/h) -> 0, nh^2 -> inf.
  static BandwidthRule for_cdf(double scale = 1.0);
  /// n^{-0.4}: inside the window ln(1/h)/(nh^2) -> 0, nh^3 -> 0.
  static BandwidthRule for_density(double scale = 1.0);
  static BandwidthRule for_regime(BandwidthRegime regime, double scale = 1.0);
};

double bandwidth_for_cdf(std::size_t n);
double bandwidth_for_density(std::size_t n);

/// Standard normal distribution function.
double standard_normal_cdf(double x);
/// Inverse of standard_normal_cdf by Newton iteration (tolerance 1e-12).
/// Throws DomainError unless 0 < p < 1.
double standard_normal_quantile(double p);

}  // namespace mpspec
