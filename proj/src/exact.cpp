#include "dpmd/exact.hpp"

#include "dpmd/contract.hpp"

namespace dpmd {

void PairGradBuffer::init(const std::vector<std::vector<NeighborEntry>>& lists) {
  std::vector<std::size_t> cap(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) cap[i] = lists[i].size();
  init_counts(cap);
}

void PairGradBuffer::init_counts(const std::vector<std::size_t>& capacity) {
  offset.assign(capacity.size() + 1, 0);
  for (std::size_t i = 0; i < capacity.size(); ++i) offset[i + 1] = offset[i] + capacity[i];
  count.assign(capacity.size(), 0);
  atom.assign(offset.back(), -1);
  dvec.assign(offset.back() * 3, 0.0);
  grad.assign(offset.back() * 3, 0.0);
}

void scatter_pair_grads(const PairGradBuffer& pg, EvalResult& out) {
  const int n = static_cast<int>(pg.count.size());
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = pg.offset[i]; k < pg.offset[i] + pg.count[i]; ++k) {
      const double* g = &pg.grad[3 * k];
      const double* d = &pg.dvec[3 * k];
      int j = pg.atom[k];
      for (int x = 0; x < 3; ++x) {
        out.forces[3 * i + x] += g[x];
        out.forces[3 * j + x] -= g[x];
      }
      for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 3; ++y) out.virial[3 * x + y] += d[x] * g[y];
      }
    }
  }
}

namespace {

// Contraction and descriptor shared by energy and descriptor entry points.
// t = sum over slots of row (x) feature, d = t(left block)^T t.
void contract_descriptor(const DPModel& model, const EnvironmentMatrix& env,
                         const std::vector<double>& g, std::vector<double>& t,
                         std::vector<double>& d) {
  const int m = model.feature_width();
  const int mlt = model.m_lt;
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
  d.resize(static_cast<std::size_t>(mlt) * m);
  descriptor_from_t(m, mlt, t.data(), d.data());
}

void embed_all_sectors(const AtomicConfig&, const DPModel& model, const EnvironmentMatrix& env,
                       std::vector<double>& g, unsigned long long* mults) {
  const int m = model.feature_width();
  g.resize(static_cast<std::size_t>(env.n_slots) * m);
  for (int t = 0; t < model.n_types(); ++t) {
    int begin = env.sector_begin[t];
    embedding_forward(model.embedding[t], &env.s_col[begin], model.max_nbr[t],
                      &g[static_cast<std::size_t>(begin) * m], mults);
  }
}

} // namespace

double exact_atom_energy(const AtomicConfig& cfg, const DPModel& model,
                         const std::vector<NeighborEntry>& entries, int center,
                         AtomWorkspace& ws, PairGradBuffer& pg, ExactCounters* counters) {
  const int m = model.feature_width();
  const int mlt = model.m_lt;

  build_environment_matrix(cfg, model, entries, center, ws.env);
  embed_all_sectors(cfg, model, ws.env, ws.g, counters ? &counters->embed_mults : nullptr);

  // Input gradients of the features, needed only where the weight is nonzero.
  ws.g1.resize(ws.g.size());
  for (int t = 0; t < model.n_types(); ++t) {
    int begin = ws.env.sector_begin[t];
    for (int k = 0; k < ws.env.sector_count[t]; ++k) {
      std::size_t off = static_cast<std::size_t>(begin + k) * m;
      embedding_value_grad(model.embedding[t], ws.env.s_col[begin + k], &ws.g[off], &ws.g1[off]);
    }
  }

  contract_descriptor(model, ws.env, ws.g, ws.t, ws.d);
  double energy = fitting_forward(model.fitting[cfg.type[center]], ws.d.data(), ws.fit);

  ws.dd.resize(ws.d.size());
  fitting_backward(model.fitting[cfg.type[center]], ws.fit, ws.dd.data());

  ws.dt.resize(static_cast<std::size_t>(4) * m);
  dt_from_dd(m, mlt, ws.t.data(), ws.dd.data(), ws.dt.data());

  // Per real slot: gradient wrt the feature vector, wrt the environment row,
  // and through the feature's scalar input, then into the displacement.
  std::size_t base = pg.offset[center];
  int filled = 0;
  for (int t = 0; t < model.n_types(); ++t) {
    int begin = ws.env.sector_begin[t];
    for (int k = 0; k < ws.env.sector_count[t]; ++k) {
      int slot = begin + k;
      const double* row = &ws.env.rows[4 * static_cast<std::size_t>(slot)];
      const double* gs = &ws.g[static_cast<std::size_t>(slot) * m];
      const double* g1s = &ws.g1[static_cast<std::size_t>(slot) * m];
      double drow[4] = {0.0, 0.0, 0.0, 0.0};
      double ds = 0.0;
      for (int a = 0; a < 4; ++a) {
        const double* dta = &ws.dt[static_cast<std::size_t>(a) * m];
        double acc = 0.0;
        for (int p = 0; p < m; ++p) acc += dta[p] * gs[p];
        drow[a] = acc;
      }
      for (int p = 0; p < m; ++p) {
        double dg = 0.0;
        for (int a = 0; a < 4; ++a) dg += row[a] * ws.dt[a * m + p];
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

void exact_descriptor(const AtomicConfig& cfg, const DPModel& model,
                      const std::vector<NeighborEntry>& entries, int center,
                      std::vector<double>& d_out) {
  AtomWorkspace ws;
  build_environment_matrix(cfg, model, entries, center, ws.env);
  embed_all_sectors(cfg, model, ws.env, ws.g, nullptr);
  contract_descriptor(model, ws.env, ws.g, ws.t, d_out);
}

EvalResult compute_energy_forces_virial(const AtomicConfig& cfg, const DPModel& model,
                                        const NeighborList& list,
                                        ExactCounters* counters) {
  validate_config(cfg, model.n_types());
  EvalResult out;
  out.per_atom_energy.assign(cfg.n_atoms, 0.0);
  out.forces.assign(3 * static_cast<std::size_t>(cfg.n_atoms), 0.0);

  PairGradBuffer pg;
  pg.init(list.nbr);

  AtomWorkspace ws;
  for (int i = 0; i < cfg.n_atoms; ++i) {
    out.per_atom_energy[i] = exact_atom_energy(cfg, model, list.nbr[i], i, ws, pg, counters);
  }
  for (int i = 0; i < cfg.n_atoms; ++i) out.energy += out.per_atom_energy[i];
  scatter_pair_grads(pg, out);
  return out;
}

} // namespace dpmd
