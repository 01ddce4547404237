#pragma once

#include <cstddef>

namespace dpmd {

// d[q][p] = sum_a t[a][q] t[a][p] for q < mlt. The left factor reuses the
// first mlt columns of t, nothing is recomputed.
inline void descriptor_from_t(int m, int mlt, const double* t, double* d) {
  for (int q = 0; q < mlt; ++q) {
    for (int p = 0; p < m; ++p) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a) acc += t[a * m + q] * t[a * m + p];
      d[static_cast<std::size_t>(q) * m + p] = acc;
    }
  }
}

// Adjoint of the above: dt[a][p] = sum_{q<mlt} dd[q][p] t[a][q], plus the
// left-factor term sum_r dd[p][r] t[a][r] for p < mlt.
inline void dt_from_dd(int m, int mlt, const double* t, const double* dd, double* dt) {
  for (int a = 0; a < 4; ++a) {
    const double* ta = t + static_cast<std::size_t>(a) * m;
    double* dta = dt + static_cast<std::size_t>(a) * m;
    for (int p = 0; p < m; ++p) dta[p] = 0.0;
    for (int q = 0; q < mlt; ++q) {
      double tq = ta[q];
      const double* ddq = dd + static_cast<std::size_t>(q) * m;
      for (int p = 0; p < m; ++p) dta[p] += ddq[p] * tq;
    }
    for (int p = 0; p < mlt; ++p) {
      const double* ddp = dd + static_cast<std::size_t>(p) * m;
      double acc = 0.0;
      for (int r = 0; r < m; ++r) acc += ddp[r] * ta[r];
      dta[p] += acc;
    }
  }
}

} // namespace dpmd
