#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dpmd/error.hpp"

namespace dpmd {

// Triclinic simulation cell. Rows of h are the three cell vectors, so a
// cartesian position is r = f0*h_row0 + f1*h_row1 + f2*h_row2.
struct Cell {
  std::array<double, 9> h{};
  std::array<bool, 3> periodic{true, true, true};
  std::array<double, 9> hinv{};
  double vol = 0.0;

  Cell() = default;
  Cell(const std::array<double, 9>& h_in, const std::array<bool, 3>& pbc) : h(h_in), periodic(pbc) {
    refresh();
  }

  // Recompute the inverse and volume after h changes.
  void refresh();

  double volume() const { return vol; }

  // Distance between adjacent lattice planes normal to axis k.
  double plane_spacing(int k) const;

  void cart(const double* f, double* r) const {
    for (int x = 0; x < 3; ++x) {
      r[x] = f[0] * h[x] + f[1] * h[3 + x] + f[2] * h[6 + x];
    }
  }

  void frac(const double* r, double* f) const {
    for (int k = 0; k < 3; ++k) {
      f[k] = r[0] * hinv[k] + r[1] * hinv[3 + k] + r[2] * hinv[6 + k];
    }
  }
};

// Atoms with positions (3n, cartesian) and per-atom type ids. type_names maps
// a type id to its element label for file output.
struct AtomicConfig {
  int n_atoms = 0;
  std::vector<double> pos;
  std::vector<int> type;
  std::vector<std::string> type_names;
  Cell cell;
};

void validate_config(const AtomicConfig& cfg, int n_types);

// The one displacement used everywhere: image of atom j under integer cell
// shift s, relative to atom i. Every code path that needs a pair vector calls
// this so results agree bitwise across serial, threaded and domain paths.
inline std::array<double, 3> displacement(const double* ri, const double* rj, const int* s,
                                          const Cell& c) {
  std::array<double, 3> d;
  for (int x = 0; x < 3; ++x) {
    double img = rj[x] + s[0] * c.h[x] + s[1] * c.h[3 + x] + s[2] * c.h[6 + x];
    d[x] = img - ri[x];
  }
  return d;
}

inline double norm3(const double* v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

} // namespace dpmd
