#include "dpmd/fused.hpp"

#include <omp.h>

#include "dpmd/contract.hpp"
#include "dpmd/env_mat.hpp"

namespace dpmd {

namespace {

// Forward contraction: t[a] += row4[a] * tablerow for each real slot.
void fused_contract(const DPModel& model, const std::vector<CompressionTable>& tables,
                    EnvironmentMatrix& env, FusedWorkspace& ws, FusedCounters* counters) {
  const int m = model.feature_width();
  ws.row.resize(m);
  ws.row1.resize(m);
  ws.t.assign(static_cast<std::size_t>(4) * m, 0.0);
  for (int ty = 0; ty < model.n_types(); ++ty) {
    const CompressionTable& tab = tables[ty];
    int begin = env.sector_begin[ty];
    for (int k = 0; k < env.sector_count[ty]; ++k) {
      int slot = begin + k;
      TableEvalInfo info = eval_table_value(tab, env.s_col[slot], ws.row.data());
      if (counters) {
        ++counters->rows_forward;
        if (info.extrapolated) ++counters->extrapolations;
      }
      const double* r4 = &env.rows[4 * static_cast<std::size_t>(slot)];
      for (int a = 0; a < 4; ++a) {
        double ra = r4[a];
        double* ta = &ws.t[static_cast<std::size_t>(a) * m];
        for (int p = 0; p < m; ++p) ta[p] += ra * ws.row[p];
      }
    }
  }
}

// Materialize feature values and input derivatives for every slot, padded
// slots included (their weight-zero input evaluates the table at zero).
void tabulate_all_slots(const DPModel& model, const std::vector<CompressionTable>& tables,
                        const EnvironmentMatrix& env, std::vector<double>& g,
                        std::vector<double>& g1) {
  const int m = model.feature_width();
  g.resize(static_cast<std::size_t>(env.n_slots) * m);
  g1.resize(g.size());
  for (int ty = 0; ty < model.n_types(); ++ty) {
    const CompressionTable& tab = tables[ty];
    int begin = env.sector_begin[ty];
    for (int k = 0; k < model.max_nbr[ty]; ++k) {
      std::size_t off = static_cast<std::size_t>(begin + k) * m;
      eval_table(tab, env.s_col[begin + k], &g[off], &g1[off]);
    }
  }
}

void contract_all_slots(const DPModel& model, const EnvironmentMatrix& env,
                        const std::vector<double>& g, std::vector<double>& t) {
  const int m = model.feature_width();
  t.assign(static_cast<std::size_t>(4) * m, 0.0);
  for (int slot = 0; slot < env.n_slots; ++slot) {
    const double* row = &env.rows[4 * static_cast<std::size_t>(slot)];
    const double* gs = &g[static_cast<std::size_t>(slot) * m];
    for (int a = 0; a < 4; ++a) {
      double ra = row[a];
      if (ra == 0.0) continue;
      double* ta = &t[static_cast<std::size_t>(a) * m];
      for (int p = 0; p < m; ++p) ta[p] += ra * gs[p];
    }
  }
}

} // namespace

void unfused_tabulated_descriptor(const AtomicConfig& cfg, const DPModel& model,
                                  const std::vector<CompressionTable>& tables,
                                  const std::vector<NeighborEntry>& entries, int center,
                                  std::vector<double>& d_out) {
  AtomWorkspace ws;
  build_environment_matrix(cfg, model, entries, center, ws.env);
  tabulate_all_slots(model, tables, ws.env, ws.g, ws.g1);
  contract_all_slots(model, ws.env, ws.g, ws.t);
  d_out.resize(static_cast<std::size_t>(model.m_lt) * model.feature_width());
  descriptor_from_t(model.feature_width(), model.m_lt, ws.t.data(), d_out.data());
}

double unfused_tabulated_atom_energy(const AtomicConfig& cfg, const DPModel& model,
                                     const std::vector<CompressionTable>& tables,
                                     const std::vector<NeighborEntry>& entries, int center,
                                     AtomWorkspace& ws, PairGradBuffer& pg) {
  const int m = model.feature_width();
  const int mlt = model.m_lt;

  build_environment_matrix(cfg, model, entries, center, ws.env);
  tabulate_all_slots(model, tables, ws.env, ws.g, ws.g1);
  contract_all_slots(model, ws.env, ws.g, ws.t);

  ws.d.resize(static_cast<std::size_t>(mlt) * m);
  descriptor_from_t(m, mlt, ws.t.data(), ws.d.data());
  double energy = fitting_forward(model.fitting[cfg.type[center]], ws.d.data(), ws.fit);

  ws.dd.resize(ws.d.size());
  fitting_backward(model.fitting[cfg.type[center]], ws.fit, ws.dd.data());
  ws.dt.resize(static_cast<std::size_t>(4) * m);
  dt_from_dd(m, mlt, ws.t.data(), ws.dd.data(), ws.dt.data());

  std::size_t base = pg.offset[center];
  int filled = 0;
  for (int ty = 0; ty < model.n_types(); ++ty) {
    int begin = ws.env.sector_begin[ty];
    for (int k = 0; k < ws.env.sector_count[ty]; ++k) {
      int slot = begin + k;
      const double* r4 = &ws.env.rows[4 * static_cast<std::size_t>(slot)];
      const double* gs = &ws.g[static_cast<std::size_t>(slot) * m];
      const double* g1s = &ws.g1[static_cast<std::size_t>(slot) * m];
      double drow[4];
      double ds = 0.0;
      for (int a = 0; a < 4; ++a) {
        const double* dta = &ws.dt[static_cast<std::size_t>(a) * m];
        double acc = 0.0;
        for (int p = 0; p < m; ++p) acc += dta[p] * gs[p];
        drow[a] = acc;
      }
      for (int p = 0; p < m; ++p) {
        double dg = 0.0;
        for (int a = 0; a < 4; ++a) dg += r4[a] * ws.dt[a * m + p];
        ds += dg * g1s[p];
      }
      drow[0] += ds;

      const double* dd = &ws.env.deriv[12 * static_cast<std::size_t>(slot)];
      std::size_t at = base + filled;
      for (int x = 0; x < 3; ++x) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) acc += drow[a] * dd[3 * a + x];
        pg.grad[3 * at + x] = acc;
        pg.dvec[3 * at + x] = ws.env.dvec[3 * static_cast<std::size_t>(slot) + x];
      }
      pg.atom[at] = ws.env.slot_atom[slot];
      ++filled;
    }
  }
  pg.count[center] = filled;
  return energy;
}

EvalResult compute_energy_forces_virial_tabulated_unfused(const AtomicConfig& cfg,
                                                          const DPModel& model,
                                                          const std::vector<CompressionTable>& tables,
                                                          const NeighborList& list) {
  validate_config(cfg, model.n_types());
  if (static_cast<int>(tables.size()) != model.n_types()) {
    throw InputError("need one table per neighbor type");
  }
  EvalResult out;
  out.per_atom_energy.assign(cfg.n_atoms, 0.0);
  out.forces.assign(3 * static_cast<std::size_t>(cfg.n_atoms), 0.0);

  PairGradBuffer pg;
  pg.init(list.nbr);

  AtomWorkspace ws;
  for (int i = 0; i < cfg.n_atoms; ++i) {
    out.per_atom_energy[i] = unfused_tabulated_atom_energy(cfg, model, tables, list.nbr[i], i, ws, pg);
  }
  for (int i = 0; i < cfg.n_atoms; ++i) out.energy += out.per_atom_energy[i];
  scatter_pair_grads(pg, out);
  return out;
}

void fused_descriptor(const AtomicConfig& cfg, const DPModel& model,
                      const std::vector<CompressionTable>& tables,
                      const std::vector<NeighborEntry>& entries, int center,
                      std::vector<double>& d_out, FusedCounters* counters) {
  FusedWorkspace ws;
  build_environment_matrix(cfg, model, entries, center, ws.env);
  fused_contract(model, tables, ws.env, ws, counters);
  d_out.resize(static_cast<std::size_t>(model.m_lt) * model.feature_width());
  descriptor_from_t(model.feature_width(), model.m_lt, ws.t.data(), d_out.data());
}

double fused_atom_energy(const AtomicConfig& cfg, const DPModel& model,
                         const std::vector<CompressionTable>& tables,
                         const std::vector<NeighborEntry>& entries, int center,
                         FusedWorkspace& ws, PairGradBuffer& pg, FusedCounters* counters) {
  const int m = model.feature_width();
  const int mlt = model.m_lt;

  build_environment_matrix(cfg, model, entries, center, ws.env);
  fused_contract(model, tables, ws.env, ws, counters);

  ws.d.resize(static_cast<std::size_t>(mlt) * m);
  descriptor_from_t(m, mlt, ws.t.data(), ws.d.data());
  double energy = fitting_forward(model.fitting[cfg.type[center]], ws.d.data(), ws.fit);

  ws.dd.resize(ws.d.size());
  fitting_backward(model.fitting[cfg.type[center]], ws.fit, ws.dd.data());
  ws.dt.resize(static_cast<std::size_t>(4) * m);
  dt_from_dd(m, mlt, ws.t.data(), ws.dd.data(), ws.dt.data());

  // Gradient pass. The feature rows were not kept, so each real slot's row
  // and its input derivative come from a second table evaluation.
  std::size_t base = pg.offset[center];
  int filled = 0;
  for (int ty = 0; ty < model.n_types(); ++ty) {
    const CompressionTable& tab = tables[ty];
    int begin = ws.env.sector_begin[ty];
    for (int k = 0; k < ws.env.sector_count[ty]; ++k) {
      int slot = begin + k;
      eval_table(tab, ws.env.s_col[slot], ws.row.data(), ws.row1.data());
      if (counters) ++counters->rows_backward;

      const double* r4 = &ws.env.rows[4 * static_cast<std::size_t>(slot)];
      double drow[4];
      double ds = 0.0;
      for (int a = 0; a < 4; ++a) {
        const double* dta = &ws.dt[static_cast<std::size_t>(a) * m];
        double acc = 0.0;
        for (int p = 0; p < m; ++p) acc += dta[p] * ws.row[p];
        drow[a] = acc;
      }
      for (int p = 0; p < m; ++p) {
        double dg = 0.0;
        for (int a = 0; a < 4; ++a) dg += r4[a] * ws.dt[a * m + p];
        ds += dg * ws.row1[p];
      }
      drow[0] += ds;

      const double* dd = &ws.env.deriv[12 * static_cast<std::size_t>(slot)];
      std::size_t at = base + filled;
      for (int x = 0; x < 3; ++x) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) acc += drow[a] * dd[3 * a + x];
        pg.grad[3 * at + x] = acc;
        pg.dvec[3 * at + x] = ws.env.dvec[3 * static_cast<std::size_t>(slot) + x];
      }
      pg.atom[at] = ws.env.slot_atom[slot];
      ++filled;
    }
  }
  pg.count[center] = filled;
  return energy;
}

EvalResult compute_energy_forces_virial_tabulated(const AtomicConfig& cfg, const DPModel& model,
                                                  const std::vector<CompressionTable>& tables,
                                                  const NeighborList& list, int n_workers,
                                                  FusedCounters* counters) {
  validate_config(cfg, model.n_types());
  if (static_cast<int>(tables.size()) != model.n_types()) {
    throw InputError("need one table per neighbor type");
  }
  if (n_workers < 1) throw InputError("worker count must be at least 1");

  EvalResult out;
  out.per_atom_energy.assign(cfg.n_atoms, 0.0);
  out.forces.assign(3 * static_cast<std::size_t>(cfg.n_atoms), 0.0);

  PairGradBuffer pg;
  pg.init(list.nbr);

  std::vector<FusedWorkspace> wss(n_workers);
  std::vector<FusedCounters> cts(n_workers);
  std::exception_ptr err;

#pragma omp parallel num_threads(n_workers)
  {
    int w = omp_get_thread_num();
#pragma omp for schedule(static)
    for (int i = 0; i < cfg.n_atoms; ++i) {
      try {
        out.per_atom_energy[i] = fused_atom_energy(cfg, model, tables, list.nbr[i], i, wss[w],
                                                   pg, counters ? &cts[w] : nullptr);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);

  if (counters) {
    for (const auto& c : cts) *counters += c;
  }
  for (int i = 0; i < cfg.n_atoms; ++i) out.energy += out.per_atom_energy[i];
  scatter_pair_grads(pg, out);
  return out;
}

FlopReport flop_report(double n_atoms, double n_slots, double d1) {
  FlopReport r;
  r.original = n_atoms * (n_slots * d1 + 10.0 * n_slots * d1 * d1);
  r.tabulated = n_atoms * 56.0 * n_slots * d1;
  r.ratio = r.original / r.tabulated;
  r.savings_percent = 100.0 * (1.0 - r.tabulated / r.original);
  return r;
}

} // namespace dpmd
