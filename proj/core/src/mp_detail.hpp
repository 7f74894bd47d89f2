#pragma once

// Angle parametrisation of the MP bulk shared by the CDF and smoothed
// reference integrals: x = a + (b - a) sin^2(t), t in [0, pi/2].

#include <cmath>
#include <numbers>

#include "mpspec/mp_law.hpp"

namespace mpspec::detail {

inline double bulk_point(const MpLaw& law, double t) {
  const double s = std::sin(t);
  return law.lower_edge() + (law.upper_edge() - law.lower_edge()) * s * s;
}

inline double bulk_angle(const MpLaw& law, double x) {
  const double a = law.lower_edge();
  const double b = law.upper_edge();
  if (x <= a) return 0.0;
  if (x >= b) return 0.5 * std::numbers::pi;
  return std::asin(std::sqrt((x - a) / (b - a)));
}

/// f_c(x(t)) dx/dt; smooth on [0, pi/2], including c = 1 where a = 0.
inline double bulk_mass_density(const MpLaw& law, double t) {
  const double a = law.lower_edge();
  const double width = law.upper_edge() - a;
  const double c = law.ratio();
  const double s = std::sin(t);
  const double co = std::cos(t);
  if (a == 0.0) return width * co * co / (std::numbers::pi * c);
  const double x = a + width * s * s;
  return width * width * s * s * co * co / (std::numbers::pi * c * x);
}

}  // namespace mpspec::detail
