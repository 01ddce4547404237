#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpmd/error.hpp"

namespace dpmd {

// Per-neighbor-type embedding network. Maps one scalar (the tapered inverse
// distance) to 4*d1 features through widths d1, 2*d1, 4*d1. The two wider
// layers concatenate their input with itself before adding tanh(x*W + b).
struct EmbeddingNet {
  int d1 = 0;
  std::vector<double> w0, b0; // 1 -> d1
  std::vector<double> w1, b1; // d1 -> 2*d1
  std::vector<double> w2, b2; // 2*d1 -> 4*d1
  int output_width() const { return 4 * d1; }
};

struct DenseLayer {
  int in = 0, out = 0;
  std::vector<double> w; // row-major in x out
  std::vector<double> b;
};

// Per-center-type fitting network: hidden tanh layers with identity shortcut
// whenever input and output widths match, then a linear scalar readout.
struct FittingNet {
  int input_width = 0;
  int width = 0;
  std::vector<DenseLayer> hidden;
  std::vector<double> w_out;
  double b_out = 0.0;
};

struct DPModel {
  double r_cut = 0.0;
  double r_smooth = 0.0;
  std::vector<std::string> species;
  std::vector<double> masses;
  std::vector<int> max_nbr; // slot capacity per neighbor type
  int m_lt = 0;             // columns kept on the left side of the contraction
  std::vector<EmbeddingNet> embedding; // one per neighbor type
  std::vector<FittingNet> fitting;     // one per center type

  int n_types() const { return static_cast<int>(species.size()); }
  int d1() const { return embedding.empty() ? 0 : embedding[0].d1; }
  int feature_width() const { return 4 * d1(); }          // M
  int descriptor_size() const { return m_lt * feature_width(); }
  int total_slots() const {
    int s = 0;
    for (int c : max_nbr) s += c;
    return s;
  }
  void validate() const;
};

// Values of the embedding net for n scalar inputs, g row-major n x 4*d1.
// mults, when given, accumulates the number of multiplications performed by
// the dense layers.
void embedding_forward(const EmbeddingNet& net, const double* s, int n, double* g,
                       unsigned long long* mults = nullptr);

// Value and first derivative at a single input.
void embedding_value_grad(const EmbeddingNet& net, double s, double* g, double* g1);

// Value plus first and second derivative, forward-mode, used by table builds.
void embedding_derivatives(const EmbeddingNet& net, double s, double* g, double* g1, double* g2);

struct FittingWorkspace {
  std::vector<std::vector<double>> t; // tanh output per hidden layer
  std::vector<double> buf_a, buf_b, dz;
};

double fitting_forward(const FittingNet& net, const double* d, FittingWorkspace& ws);

// Gradient of the scalar output with respect to the descriptor input, given
// the workspace of the matching forward call.
void fitting_backward(const FittingNet& net, const FittingWorkspace& ws, double* d_grad);

} // namespace dpmd
