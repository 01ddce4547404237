#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dpmd/domain.hpp"
#include "dpmd/fused.hpp"
#include "dpmd/model.hpp"
#include "dpmd/table.hpp"

namespace dpmd {

struct MDConfig {
  long n_steps = 0;
  double dt = 1.0;           // fs
  int n_workers = 1;
  double buffer = 2.0;       // added to the model cutoff for list builds
  int rebuild_every = 50;
  int thermo_every = 50;
};

struct ThermoRecord {
  long step = 0;
  double ke = 0.0;          // eV
  double pe = 0.0;          // eV
  double temperature = 0.0; // K
  double pressure = 0.0;    // bar
};

struct MDResult {
  std::vector<ThermoRecord> thermo;
  unsigned long long force_evals = 0;
  unsigned long long staleness_checks = 0;
  double max_drift_seen = 0.0; // largest displacement since rebuild, any check
  FusedCounters counters;
  double final_ke = 0.0, final_pe = 0.0;
  double final_total = 0.0;
};

// Per-component Maxwell-Boltzmann draw, net momentum removed, then rescaled
// so the instantaneous temperature equals t_init exactly. Needs >= 2 atoms.
std::vector<double> init_velocities(const AtomicConfig& cfg, const DPModel& model, double t_init,
                                    std::uint64_t seed);

using ThermoCallback = std::function<void(const AtomicConfig&, const std::vector<double>& vel,
                                          const ThermoRecord&)>;

// Velocity Verlet with the fused tabulated force path. The system is slab
// partitioned over n_workers threads at every list rebuild; each worker keeps
// neighbor lists for its owned centers only (built over owned plus ghost
// candidates) and produces per-center energies and pair gradients. The
// reduction walks centers in ascending order, so trajectories are bitwise
// independent of the worker count. A staleness guard runs every step and
// throws NumericalError if any atom drifted more than buffer/2 since the
// lists were built. Thermo is recorded at every step divisible by
// thermo_every, step 0 included.
MDResult run_md(AtomicConfig& cfg, std::vector<double>& vel, const DPModel& model,
                const std::vector<CompressionTable>& tables, const MDConfig& mc,
                const ThermoCallback& on_thermo = {});

} // namespace dpmd
