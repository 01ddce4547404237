#pragma once

#include <array>
#include <vector>

#include "dpmd/geom.hpp"
#include "dpmd/model.hpp"
#include "dpmd/neighbor.hpp"

namespace dpmd {

// Local environment of one center atom, laid out in fixed-capacity slots
// grouped by neighbor type. Real neighbors fill the front of their type
// sector in canonical list order; the rest of the sector stays zero so the
// padded rows carry weight 0.
struct EnvironmentMatrix {
  int n_slots = 0;
  std::vector<double> rows;  // n_slots x 4: weight, then weight * unit vector
  std::vector<double> s_col; // n_slots, first column repeated for convenience
  std::vector<double> dvec;  // n_slots x 3 displacement center -> image
  std::vector<double> deriv; // n_slots x 12: d(row component)/d(displacement)
  std::vector<int> slot_atom;              // global id, -1 for padding
  std::vector<std::array<int, 3>> slot_shift;
  std::vector<int> sector_begin, sector_count;
  int n_real = 0;
};

// Fill env from the center's neighbor entries. Entries beyond the model
// cutoff are dropped (their weight is exactly zero), which lets the caller
// pass lists built with a buffered cutoff. Throws NumericalError when a type
// sector overflows its slot capacity.
void build_environment_matrix(const AtomicConfig& cfg, const DPModel& model,
                              const std::vector<NeighborEntry>& entries, int center,
                              EnvironmentMatrix& env);

} // namespace dpmd
