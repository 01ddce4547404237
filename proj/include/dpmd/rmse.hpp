#pragma once

#include <vector>

#include "dpmd/fused.hpp"
#include "dpmd/model.hpp"
#include "dpmd/table.hpp"

namespace dpmd {

// Error of the tabulated path against the full-network reference over a set
// of configurations. rmse_e is the root mean square of the per-configuration
// total energy differences divided by the atom count (eV/atom); rmse_f runs
// over every force component of every atom of every configuration (eV/A).
struct RmseReport {
  double rmse_e = 0.0;
  double rmse_f = 0.0;
  int n_configs = 0;
};

RmseReport rmse_compare(const DPModel& model, const std::vector<CompressionTable>& tables,
                        const std::vector<AtomicConfig>& configs, int n_workers = 1);

struct SweepRow {
  double h = 0.0;
  double rmse_e = 0.0;
  double rmse_f = 0.0;
};

// One table build plus comparison per step size. The reference energies and
// forces are evaluated once and shared across all steps.
std::vector<SweepRow> rmse_sweep(const DPModel& model, const std::vector<double>& h_list,
                                 const std::vector<AtomicConfig>& configs, int n_workers = 1);

// Least squares slope of log(rmse_e) against log(h).
double loglog_slope(const std::vector<SweepRow>& rows);

} // namespace dpmd
