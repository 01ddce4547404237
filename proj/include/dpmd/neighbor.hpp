#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dpmd/geom.hpp"

namespace dpmd {

// One neighbor record: global atom id plus the integer cell shift of the
// image that is inside the cutoff. An atom can appear several times with
// different shifts, and an atom can neighbor its own periodic images.
struct NeighborEntry {
  int j;
  std::array<int, 3> shift;
};

struct NeighborList {
  double cutoff = 0.0;
  std::vector<std::vector<NeighborEntry>> nbr; // per center, canonically sorted
  std::vector<double> ref_pos;                 // positions at build time
};

// Full periodic neighbor search with multi-image support: when the cutoff
// exceeds half a cell dimension the same atom pair contributes once per
// distinct image. Uses a cell-list walk when the box allows at least three
// bins per periodic axis, otherwise a direct pair scan over the image range.
// Both paths produce identical lists (same entries, same canonical order:
// ascending j, then shift lexicographic).
NeighborList build_neighbor_list(const AtomicConfig& cfg, double cutoff);

// Direct O(n^2 * images) scan, kept as the reference path and used by the
// cell-list equivalence test.
NeighborList build_neighbor_list_brute(const AtomicConfig& cfg, double cutoff);

// Largest atom displacement relative to the positions stored at build time.
double max_displacement_since(const NeighborList& list, const AtomicConfig& cfg);

// Neighbor lists for a subset of centers, searching only the candidate atoms.
// Candidates must cover every atom that can have an image within the cutoff
// of some center. Entries match the global list for the same centers exactly.
void build_neighbor_lists_subset(const AtomicConfig& cfg, double cutoff,
                                 const std::vector<int>& centers,
                                 const std::vector<int>& candidates,
                                 std::vector<std::vector<NeighborEntry>>& out);

} // namespace dpmd
