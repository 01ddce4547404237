#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpmd/model.hpp"

namespace dpmd {

// Piecewise quintic replacement for one embedding net. Interval theta covers
// [x0 + theta*h, x0 + (theta+1)*h]; the polynomial is written in the local
// coordinate u = x - left_node and matches value, first and second derivative
// of the net at both interval ends.
//
// Coefficients are stored blocked: for each interval, for each run of
// `block` adjacent features, the six coefficient vectors a0..a5 are laid out
// contiguously (block doubles each). One feature's Horner step then walks six
// fixed-stride runs that stay in cache across the whole block.
struct CompressionTable {
  double x0 = 0.0;
  double h = 0.0;
  std::size_t n = 0; // intervals
  int m = 0;         // feature count
  int block = 16;
  std::vector<double> coeffs;

  int n_blocks() const { return (m + block - 1) / block; }
  double x_end() const { return x0 + h * static_cast<double>(n); }
  std::size_t interval_stride() const {
    return static_cast<std::size_t>(n_blocks()) * 6 * block;
  }
  const double* interval(std::size_t idx) const { return coeffs.data() + idx * interval_stride(); }
  double* interval(std::size_t idx) { return coeffs.data() + idx * interval_stride(); }
};

// Build the table on [x0, x_end] with step h, then verify it against the net
// at every node (relative error 1e-10) before returning.
CompressionTable build_table(const EmbeddingNet& net, double x0, double x_end, double h);

// One table per neighbor type, all over [0, s(r_min)] for r_min = 0.5.
std::vector<CompressionTable> build_tables(const DPModel& model, double h);

struct TableEvalInfo {
  bool extrapolated = false;
};

// Value and first derivative of all m features at x. Inputs below x0 are a
// domain error; inputs beyond x_end() use the last interval's polynomial and
// report extrapolated = true.
TableEvalInfo eval_table(const CompressionTable& tab, double x, double* row, double* row1);

// Value only.
TableEvalInfo eval_table_value(const CompressionTable& tab, double x, double* row);

// Largest input the tables accept without extrapolating, from the closest
// approach the taper is built for.
double table_domain_end(const DPModel& model, double r_min = 0.5);

} // namespace dpmd
