#pragma once

#include <vector>

#include "dpmd/exact.hpp"
#include "dpmd/table.hpp"

namespace dpmd {

struct FusedCounters {
  unsigned long long rows_forward = 0;  // table row evaluations, forward pass
  unsigned long long rows_backward = 0; // table row evaluations, gradient pass
  unsigned long long extrapolations = 0;

  FusedCounters& operator+=(const FusedCounters& o) {
    rows_forward += o.rows_forward;
    rows_backward += o.rows_backward;
    extrapolations += o.extrapolations;
    return *this;
  }
};

struct FusedWorkspace {
  EnvironmentMatrix env;
  std::vector<double> row, row1; // one table row at a time
  std::vector<double> t, dt;     // 4 x M
  std::vector<double> d, dd;     // m_lt x M
  FittingWorkspace fit;
};

// One center through the tabulated fused path. Only real neighbor slots are
// touched: each table row is folded into the running contraction as soon as
// it is produced, no per-slot feature matrix exists, and the transient state
// is the contraction plus one row. The gradient pass re-evaluates the rows
// from the cached slot inputs instead of storing them.
double fused_atom_energy(const AtomicConfig& cfg, const DPModel& model,
                         const std::vector<CompressionTable>& tables,
                         const std::vector<NeighborEntry>& entries, int center,
                         FusedWorkspace& ws, PairGradBuffer& pg, FusedCounters* counters);

// Descriptor only, for equivalence checks against the full-network path.
void fused_descriptor(const AtomicConfig& cfg, const DPModel& model,
                      const std::vector<CompressionTable>& tables,
                      const std::vector<NeighborEntry>& entries, int center,
                      std::vector<double>& d_out, FusedCounters* counters = nullptr);

// Unfused tabulated reference: the table replaces the embedding net but the
// evaluation keeps the naive structure, materializing the full per-slot
// feature matrix (padded slots included, each evaluating the table at zero)
// before contracting. Used to pin down what fusion is allowed to change.
double unfused_tabulated_atom_energy(const AtomicConfig& cfg, const DPModel& model,
                                     const std::vector<CompressionTable>& tables,
                                     const std::vector<NeighborEntry>& entries, int center,
                                     AtomWorkspace& ws, PairGradBuffer& pg);

void unfused_tabulated_descriptor(const AtomicConfig& cfg, const DPModel& model,
                                  const std::vector<CompressionTable>& tables,
                                  const std::vector<NeighborEntry>& entries, int center,
                                  std::vector<double>& d_out);

EvalResult compute_energy_forces_virial_tabulated_unfused(const AtomicConfig& cfg,
                                                          const DPModel& model,
                                                          const std::vector<CompressionTable>& tables,
                                                          const NeighborList& list);

// Whole-configuration evaluation on the fused path. Centers are distributed
// over n_workers threads; each writes only its own centers' slices, and the
// final reduction walks centers in ascending order, so the result does not
// depend on n_workers at all.
EvalResult compute_energy_forces_virial_tabulated(const AtomicConfig& cfg, const DPModel& model,
                                                  const std::vector<CompressionTable>& tables,
                                                  const NeighborList& list, int n_workers = 1,
                                                  FusedCounters* counters = nullptr);

// Cost model for the embedding stage, in multiplications, following the
// layer shapes: the full nets spend d1 + 10*d1^2 per slot, the tabulated
// fused path a fixed 56 per feature row of width 4*d1.
struct FlopReport {
  double original = 0.0;
  double tabulated = 0.0;
  double ratio = 0.0;           // original / tabulated
  double savings_percent = 0.0; // 100 * (1 - tabulated / original)
};

FlopReport flop_report(double n_atoms, double n_slots, double d1);

} // namespace dpmd
