#pragma once

#include <vector>

#include "dpmd/geom.hpp"

namespace dpmd {

// One worker's share of the system: a contiguous slab of atoms along the
// partition axis plus the halo of atoms whose images can reach an owned
// center within the search cutoff.
struct WorkerDomain {
  std::vector<int> owned;  // ascending global ids
  std::vector<int> ghosts; // ascending global ids, disjoint from owned
  double lo = 0.0, hi = 0.0; // owned extent in wrapped fractional coords
};

struct Partition {
  int axis = 0;
  std::vector<WorkerDomain> workers;
};

// Slab decomposition along the roomiest cell axis. Atoms are ranked by
// wrapped fractional coordinate (ties by id) and split into equal-count
// chunks, so worker loads differ by at most one atom. Ghost membership uses
// the wrapped circular distance to the owned extent against margin converted
// to fractional units, which covers every image that can fall within margin
// of an owned atom. Requests for more workers than atoms are degraded.
Partition partition_domain(const AtomicConfig& cfg, int n_workers, double margin);

} // namespace dpmd
