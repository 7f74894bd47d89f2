#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mpspec/clt.hpp"
#include "oracles.hpp"

TEST(Oracles, StripSchemeMatchesPrimary) {
  auto dk = [](double u) { return -u * std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); };
  double spread = 0.0;
  const double strip = oracle::sigma2_strip_refined(dk, 12.0, 1e-3, &spread);
  const double primary = mpspec::sigma_squared(mpspec::gaussian_kernel()).value;
  EXPECT_LE(spread, 1e-7 * strip);
  EXPECT_NEAR(strip, primary, 1e-6 * primary);
}

TEST(Oracles, MonteCarloIsUnbiased) {
  double se = 0.0;
  const double mc = oracle::sigma2_monte_carlo_gaussian(200000, 5, &se);
  EXPECT_NEAR(mc, 1.0 / (2.0 * std::numbers::pi * std::numbers::pi), 5.0 * se);
}
