#pragma once

#include <cmath>
#include <vector>

namespace dpmd {

// Quadratic lookup replacement for tanh on [0, 8], odd-extended by a sign
// flip so the symmetry tanh(-x) == -tanh(x) holds bitwise, and saturating to
// exactly +-1 beyond |x| = 8. The boundary itself is a table node, so t(8)
// is the exact tanh(8) rather than the saturated 1.0, keeping the scan error
// at the edge as small as everywhere else. Node spacing 2^-10 keeps the
// absolute error a couple of orders below 1.2e-7.
class TanhTable {
 public:
  TanhTable();

  double operator()(double x) const {
    double ax = std::fabs(x);
    double t;
    if (ax > BOUND) {
      t = 1.0;
    } else {
      int k = static_cast<int>(ax * INV_H);
      double u = ax - k * H;
      const double* c = &coef_[3 * k];
      t = c[0] + u * (c[1] + u * c[2]);
    }
    return std::signbit(x) ? -t : t;
  }

  static constexpr double BOUND = 8.0;
  static constexpr double H = 0x1.0p-10;
  static constexpr double INV_H = 0x1.0p10;

 private:
  std::vector<double> coef_; // per node: value, slope, curvature correction
};

} // namespace dpmd
