#pragma once

#include <algorithm>

namespace dpmd {

// Radial taper: 1 below r_smooth, quintic ramp to 0 at r_cut, C2 at both ends.
// The ramp is non-negative in exact arithmetic, but a few ulps from r_cut the
// rounded polynomial can dip below zero; clamping keeps downstream table
// lookups inside their domain.
inline double switch_weight(double r, double r_smooth, double r_cut) {
  if (r >= r_cut) return 0.0;
  if (r <= r_smooth) return 1.0;
  double u = (r - r_smooth) / (r_cut - r_smooth);
  double uu = u * u;
  return std::max(0.0, uu * u * (-6.0 * uu + 15.0 * u - 10.0) + 1.0);
}

inline double switch_weight_deriv(double r, double r_smooth, double r_cut) {
  if (r >= r_cut || r <= r_smooth) return 0.0;
  double inv = 1.0 / (r_cut - r_smooth);
  double u = (r - r_smooth) * inv;
  double um1 = u - 1.0;
  return -30.0 * u * u * um1 * um1 * inv;
}

} // namespace dpmd
