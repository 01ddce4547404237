#include "dpmd/tanh_table.hpp"

namespace dpmd {

TanhTable::TanhTable() {
  const int n = static_cast<int>(BOUND * INV_H); // intervals on [0, 8)
  coef_.resize(3 * (n + 1));
  for (int k = 0; k <= n; ++k) {
    double f = std::tanh(k * H);
    coef_[3 * k] = f;
    coef_[3 * k + 1] = 1.0 - f * f;
  }
  // Curvature term fits the right node exactly: f_k + fp_k h + c h^2 = f_{k+1}.
  for (int k = 0; k < n; ++k) {
    double f0 = coef_[3 * k];
    double fp0 = coef_[3 * k + 1];
    double f1 = coef_[3 * (k + 1)];
    coef_[3 * k + 2] = (f1 - f0 - fp0 * H) * (INV_H * INV_H);
  }
  coef_[3 * n + 2] = 0.0;
}

} // namespace dpmd
