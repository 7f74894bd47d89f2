#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "mpspec/error.hpp"
#include "mpspec/estimators.hpp"
#include "mpspec/kernels.hpp"

using namespace mpspec;

namespace {

const KernelProfile& gauss() {
  static const KernelProfile k = gaussian_kernel();
  return k;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-14);
}

}  // namespace

TEST(SmoothedDensity, SmallCases) {
  EXPECT_NEAR(smoothed_density(SpectralSample({0.0}, 2), gauss(), 1.0, 0.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(smoothed_density(SpectralSample({-1.0, 1.0}, 4), gauss(), 1.0, 0.0), 0.24197072451914337, 1e-15);
  EXPECT_THROW(smoothed_density(SpectralSample({0.0}, 2), gauss(), 0.0, 0.0), DomainError);
}

TEST(SmoothedDensity, ThreeEigenvalueMixture) {
  // (1/3) sum phi(x - lambda) and (1/3) sum Phi(x - lambda) for lambda = 0.5, 1, 2.
  const SpectralSample s({0.5, 1.0, 2.0}, 6);
  const double f[] = {0.21600900593221029, 0.33099277722829185, 0.2568102001954893};
  const double F[] = {0.1633143082018744, 0.45003923840182347, 0.758179181599895};
  for (int x = 0; x <= 2; ++x) {
    EXPECT_NEAR(smoothed_density(s, gauss(), 1.0, x), f[x], 1e-15);
    EXPECT_NEAR(smoothed_cdf(s, gauss(), 1.0, x), F[x], 1e-15);
  }
}

TEST(SmoothedCdf, SmallCases) {
  EXPECT_EQ(smoothed_cdf(SpectralSample({0.0}, 2), gauss(), 1.0, 0.0), 0.5);
  EXPECT_EQ(smoothed_cdf(SpectralSample({0.0}, 2), gauss(), 1.0, 1e6), 1.0);
  EXPECT_NEAR(smoothed_cdf(SpectralSample({1.0, 2.0}, 4), gauss(), 0.1, 1.5), 0.5, 1e-15);
}

TEST(SmoothedCdf, IntegratesDensity) {
  const auto s = SpectralSample::from_data(sample_data_matrix(40, 80, 3));
  const double h = 0.1;
  auto f = [&](double x) { return smoothed_density(s, gauss(), h, x); };
  EXPECT_NEAR(integrate(f, s.min() - 40 * h, s.max() + 40 * h), 1.0, 1e-8);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pick(s.min() - 0.5, s.max() + 0.5);
  for (int i = 0; i < 50; ++i) {
    const double x = pick(gen);
    EXPECT_NEAR(integrate(f, s.min() - 40 * h, x), smoothed_cdf(s, gauss(), h, x), 1e-9);
  }
}

TEST(SmoothedQuantile, InvertsSmoothedCdf) {
  EXPECT_NEAR(smoothed_quantile(SpectralSample({0.0}, 2), gauss(), 1.0, 0.5), 0.0, 1e-14);
  {
    // The smoothed density at 1.5 is only ~1.5e-5, so x is determined to eps / f.
    const SpectralSample pair({1.0, 2.0}, 4);
    const double q = smoothed_quantile(pair, gauss(), 0.1, 0.5);
    const double eps = std::numeric_limits<double>::epsilon();
    EXPECT_NEAR(smoothed_cdf(pair, gauss(), 0.1, q), 0.5, 4 * eps);
    EXPECT_NEAR(q, 1.5, 8 * eps / smoothed_density(pair, gauss(), 0.1, 1.5));
  }
  const auto s = SpectralSample::from_data(sample_data_matrix(50, 100, 12));
  for (double alpha : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
    const double q = smoothed_quantile(s, gauss(), 0.05, alpha);
    EXPECT_NEAR(smoothed_cdf(s, gauss(), 0.05, q), alpha, 1e-10) << alpha;
  }
  EXPECT_THROW(smoothed_quantile(s, gauss(), 0.05, 0.0), DomainError);
  EXPECT_THROW(smoothed_quantile(s, gauss(), 0.05, 1.0), DomainError);
}

TEST(SmoothedEstimators, ShiftAndScale) {
  const std::vector<double> base{0.2, 0.9, 1.1, 2.5};
  std::vector<double> moved = base;
  for (double& v : moved) v += 0.75;
  const SpectralSample a(base, 8), b(moved, 8);
  for (double x : {0.0, 0.5, 1.3, 3.0})
    EXPECT_NEAR(smoothed_density(b, gauss(), 0.3, x + 0.75), smoothed_density(a, gauss(), 0.3, x), 1e-15);
  std::vector<double> stretched = base;
  for (double& v : stretched) v *= 2.5;
  const SpectralSample c(stretched, 8);
  for (double x : {0.0, 0.5, 1.3, 3.0})
    EXPECT_NEAR(4 * 0.75 * smoothed_density(c, gauss(), 0.75, 2.5 * x), 4 * 0.3 * smoothed_density(a, gauss(), 0.3, x),
                1e-14);
}

TEST(EstimateOnGrid, Invariants) {
  const auto s = SpectralSample::from_data(sample_data_matrix(30, 90, 2));
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(-0.5 + 3.5 * i / 100.0);
  const auto est = estimate_on_grid(s, gauss(), 0.1, grid);
  ASSERT_EQ(est.cdf_values.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_GE(est.density_values[i], 0.0);
    EXPECT_GE(est.cdf_values[i], 0.0);
    EXPECT_LE(est.cdf_values[i], 1.0 + 1e-12);
    if (i > 0) EXPECT_GE(est.cdf_values[i], est.cdf_values[i - 1]);
  }
  EXPECT_EQ(est.p, 30u);
  EXPECT_EQ(est.n, 90u);
  std::ostringstream out;
  write_grid_csv(out, est);
  EXPECT_EQ(out.str().substr(0, 10), "x,f_n,F_n\n");
  const std::vector<double> bad{0.0, 0.0};
  EXPECT_THROW(estimate_on_grid(s, gauss(), 0.1, bad), DomainError);
}

TEST(SmoothedMpReference, SmallBandwidthLimit) {
  const MpLaw law(0.5);
  const double ref = smoothed_mp_reference(law, gauss(), 1e-3, 1.0);
  EXPECT_NEAR(ref, 0.421005, 1e-4);
  EXPECT_NEAR(ref, law.density(1.0), 1e-6);
  // Direct convolution against the density as an oracle.
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double x : {0.3, 1.0, 2.6}) {
    const double h = 0.08;
    const double direct = ts.integrate(
        [&](double y) { return gauss().value((x - y) / h) * law.density(y) / h; }, law.lower_edge(), law.upper_edge());
    EXPECT_NEAR(smoothed_mp_reference(law, gauss(), h, x), direct, 1e-9) << x;
  }
}

TEST(SmoothedMpReference, DecayAndMass) {
  const MpLaw law(0.5);
  const double h = 0.05;
  EXPECT_LE(smoothed_mp_reference(law, gauss(), h, law.upper_edge() + 11 * h), 1e-12);
  EXPECT_LE(smoothed_mp_reference(law, gauss(), h, law.lower_edge() - 11 * h), 1e-12);
  const double mass = integrate([&](double x) { return smoothed_mp_reference(law, gauss(), h, x); },
                                law.lower_edge() - 1.0, law.upper_edge() + 1.0);
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(Contour, IdentityAtDefaults) {
  const auto s = SpectralSample::from_data(sample_data_matrix(200, 400, 21));
  const MpLaw law = s.law();
  const double h = bandwidth_for_density(400);
  const auto spec = ContourSpec::defaults_for(law);
  EXPECT_DOUBLE_EQ(spec.left, 0.5 * law.lower_edge());
  EXPECT_DOUBLE_EQ(spec.right, law.upper_edge() + 1.0);
  for (double x : {0.5, 1.0, 2.0}) {
    const auto r = contour_check(s, law, gauss(), h, x, spec);
    EXPECT_LE(r.relative_residual, 1e-3) << x;
    EXPECT_LE(r.imaginary_residue, 1e-8);
    auto finer = spec;
    finer.points_per_side *= 2;
    const auto r2 = contour_check(s, law, gauss(), h, x, finer);
    EXPECT_LE(std::abs(r2.rhs - r.rhs), 1e-6 * std::abs(r.rhs));
  }
}

TEST(Contour, NullIntegrandAndPreconditions) {
  const MpLaw law(0.5);
  const auto spec = ContourSpec::defaults_for(law);
  const Complex zero = contour_integral(gauss(), 0.1, 1.0, spec, [](Complex) { return Complex(0.0); });
  EXPECT_EQ(zero, Complex(0.0));
  const SpectralSample outside({0.5, 1.0, 10.0}, 6);
  EXPECT_THROW(contour_check(outside, law, gauss(), 0.1, 1.0, spec), PreconditionError);
  const SpectralSample inside({0.5, 1.0, 2.0}, 6);
  EXPECT_THROW(contour_check(inside, law, gauss(), 0.1, 5.0, spec), PreconditionError);
  auto bad = spec;
  bad.left = 0.5;
  EXPECT_THROW(contour_check(inside, law, gauss(), 0.1, 1.0, bad), DomainError);
  EXPECT_THROW(contour_integral(uniform_kernel(), 0.1, 1.0, spec, [](Complex) { return Complex(1.0); }),
               PreconditionError);
}

TEST(LargeSample, EstimatorsConsistent) {
  const auto s = SpectralSample::from_data(sample_data_matrix(1000, 2000, 77));
  const MpLaw law = s.law();
  EXPECT_LE(std::abs(smoothed_density(s, gauss(), bandwidth_for_density(2000), 1.0) - law.density(1.0)), 0.1);
  EXPECT_LE(std::abs(smoothed_quantile(s, gauss(), bandwidth_for_cdf(2000), 0.5) - law.quantile(0.5)), 0.05);
}
