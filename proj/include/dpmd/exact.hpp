#pragma once

#include <array>
#include <vector>

#include "dpmd/env_mat.hpp"
#include "dpmd/model.hpp"
#include "dpmd/neighbor.hpp"

namespace dpmd {

struct EvalResult {
  double energy = 0.0;
  std::vector<double> per_atom_energy;
  std::vector<double> forces;     // 3n
  std::array<double, 9> virial{}; // sum over pairs of displacement (x) pair gradient
};

struct ExactCounters {
  unsigned long long embed_mults = 0; // multiplications inside embedding layers
};

// Pair gradients grouped by center atom. Capacity offsets are fixed up front
// so independent workers can fill disjoint ranges; the final scatter into
// forces walks centers and slots in ascending order, which makes the result
// independent of how the per-center work was scheduled.
struct PairGradBuffer {
  std::vector<std::size_t> offset; // n+1 capacity prefix
  std::vector<int> count;          // filled entries per center
  std::vector<int> atom;
  std::vector<double> dvec;
  std::vector<double> grad;

  void init(const std::vector<std::vector<NeighborEntry>>& lists);
  void init_counts(const std::vector<std::size_t>& capacity);
};

// Accumulate per-center pair gradients into forces and the virial tensor.
// For each pair the center picks up +g and the neighbor image's source atom
// picks up -g; the virial adds displacement (x) g.
void scatter_pair_grads(const PairGradBuffer& pg, EvalResult& out);

// Scratch state for evaluating one atom at a time.
struct AtomWorkspace {
  EnvironmentMatrix env;
  std::vector<double> g, g1;  // n_slots x M feature values and input gradients
  std::vector<double> t, dt;  // 4 x M
  std::vector<double> d, dd;  // m_lt x M
  FittingWorkspace fit;
};

// Energy and pair gradients of one center through the full networks, with
// every slot of every sector evaluated (padded slots included). Pair
// gradients, source atoms and displacements are appended to pg at the
// center's range. Returns the atomic energy.
double exact_atom_energy(const AtomicConfig& cfg, const DPModel& model,
                         const std::vector<NeighborEntry>& entries, int center,
                         AtomWorkspace& ws, PairGradBuffer& pg, ExactCounters* counters);

// Descriptor of one center through the full networks, for cross-checks.
void exact_descriptor(const AtomicConfig& cfg, const DPModel& model,
                      const std::vector<NeighborEntry>& entries, int center,
                      std::vector<double>& d_out);

// Serial reference evaluation of the whole configuration.
EvalResult compute_energy_forces_virial(const AtomicConfig& cfg, const DPModel& model,
                                        const NeighborList& list,
                                        ExactCounters* counters = nullptr);

} // namespace dpmd
