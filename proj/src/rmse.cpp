#include "dpmd/rmse.hpp"

#include <cmath>

#include "dpmd/neighbor.hpp"

namespace dpmd {

namespace {

struct Accum {
  double sum_de2 = 0.0;
  double sum_df2 = 0.0;
  long n_force_comps = 0;
  long n_atoms_per_config = 0;
  int n_configs = 0;

  void add(const EvalResult& ref, const EvalResult& tab, int n_atoms) {
    double de = ref.energy - tab.energy;
    sum_de2 += de * de;
    for (std::size_t k = 0; k < ref.forces.size(); ++k) {
      double df = ref.forces[k] - tab.forces[k];
      sum_df2 += df * df;
    }
    n_force_comps += static_cast<long>(ref.forces.size());
    n_atoms_per_config = n_atoms;
    ++n_configs;
  }

  RmseReport report() const {
    RmseReport r;
    r.n_configs = n_configs;
    if (n_configs == 0) return r;
    r.rmse_e = std::sqrt(sum_de2 / n_configs) / static_cast<double>(n_atoms_per_config);
    r.rmse_f = std::sqrt(sum_df2 / static_cast<double>(n_force_comps));
    return r;
  }
};

} // namespace

RmseReport rmse_compare(const DPModel& model, const std::vector<CompressionTable>& tables,
                        const std::vector<AtomicConfig>& configs, int n_workers) {
  Accum acc;
  for (const auto& cfg : configs) {
    NeighborList list = build_neighbor_list(cfg, model.r_cut);
    EvalResult ref = compute_energy_forces_virial(cfg, model, list);
    EvalResult tab = compute_energy_forces_virial_tabulated(cfg, model, tables, list, n_workers);
    acc.add(ref, tab, cfg.n_atoms);
  }
  return acc.report();
}

std::vector<SweepRow> rmse_sweep(const DPModel& model, const std::vector<double>& h_list,
                                 const std::vector<AtomicConfig>& configs, int n_workers) {
  if (h_list.empty()) throw InputError("sweep needs at least one step size");

  std::vector<NeighborList> lists;
  std::vector<EvalResult> refs;
  lists.reserve(configs.size());
  refs.reserve(configs.size());
  for (const auto& cfg : configs) {
    lists.push_back(build_neighbor_list(cfg, model.r_cut));
    refs.push_back(compute_energy_forces_virial(cfg, model, lists.back()));
  }

  std::vector<SweepRow> rows;
  for (double h : h_list) {
    auto tables = build_tables(model, h);
    Accum acc;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      EvalResult tab =
          compute_energy_forces_virial_tabulated(configs[c], model, tables, lists[c], n_workers);
      acc.add(refs[c], tab, configs[c].n_atoms);
    }
    RmseReport rep = acc.report();
    rows.push_back({h, rep.rmse_e, rep.rmse_f});
  }
  return rows;
}

double loglog_slope(const std::vector<SweepRow>& rows) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (!(r.h > 0.0) || !(r.rmse_e > 0.0)) continue;
    double x = std::log(r.h);
    double y = std::log(r.rmse_e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace dpmd
