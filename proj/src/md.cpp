#include "dpmd/md.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <omp.h>

#include "dpmd/neighbor.hpp"
#include "dpmd/rng.hpp"
#include "dpmd/units.hpp"

namespace dpmd {

std::vector<double> init_velocities(const AtomicConfig& cfg, const DPModel& model, double t_init,
                                    std::uint64_t seed) {
  validate_config(cfg, model.n_types());
  if (cfg.n_atoms < 2) {
    throw InputError("velocity initialization needs at least two atoms");
  }
  if (t_init < 0.0) throw InputError("temperature must be non-negative");

  const int n = cfg.n_atoms;
  std::vector<double> vel(3 * static_cast<std::size_t>(n), 0.0);
  if (t_init == 0.0) return vel;

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    double mass = model.masses[cfg.type[i]];
    double sigma = std::sqrt(K_B * t_init / (mass * MVV_TO_EV));
    for (int x = 0; x < 3; ++x) vel[3 * i + x] = sigma * rng.gaussian();
  }

  double p[3] = {0.0, 0.0, 0.0};
  double mtot = 0.0;
  for (int i = 0; i < n; ++i) {
    double mass = model.masses[cfg.type[i]];
    mtot += mass;
    for (int x = 0; x < 3; ++x) p[x] += mass * vel[3 * i + x];
  }
  for (int i = 0; i < n; ++i) {
    for (int x = 0; x < 3; ++x) vel[3 * i + x] -= p[x] / mtot;
  }

  double ke = 0.0;
  for (int i = 0; i < n; ++i) {
    double mass = model.masses[cfg.type[i]];
    double v2 = vel[3 * i] * vel[3 * i] + vel[3 * i + 1] * vel[3 * i + 1] +
                vel[3 * i + 2] * vel[3 * i + 2];
    ke += 0.5 * mass * v2 * MVV_TO_EV;
  }
  double t_cur = 2.0 * ke / (3.0 * n * K_B);
  double scale = std::sqrt(t_init / t_cur);
  for (double& v : vel) v *= scale;
  return vel;
}

namespace {

// Rebuilt state between neighbor list refreshes: the slab partition, each
// worker's per-center lists, the positions the lists were built from, and
// the pair gradient buffer sized to the current list capacities.
struct WorkerState {
  Partition part;
  std::vector<std::vector<std::vector<NeighborEntry>>> lists;
  std::vector<double> ref_pos;
  PairGradBuffer pg;
  std::vector<FusedWorkspace> ws;
};

void rebuild(WorkerState& st, const AtomicConfig& cfg, double cutoff, int n_workers) {
  st.part = partition_domain(cfg, n_workers, cutoff);
  const int nw = static_cast<int>(st.part.workers.size());
  st.lists.resize(nw);
  st.ws.resize(nw);

  std::exception_ptr err;
#pragma omp parallel num_threads(nw)
  {
    int w = omp_get_thread_num();
    try {
      const WorkerDomain& wd = st.part.workers[w];
      std::vector<int> candidates;
      candidates.reserve(wd.owned.size() + wd.ghosts.size());
      std::merge(wd.owned.begin(), wd.owned.end(), wd.ghosts.begin(), wd.ghosts.end(),
                 std::back_inserter(candidates));
      build_neighbor_lists_subset(cfg, cutoff, wd.owned, candidates, st.lists[w]);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  st.ref_pos = cfg.pos;
  std::vector<std::size_t> cap(cfg.n_atoms, 0);
  for (int w = 0; w < nw; ++w) {
    for (std::size_t k = 0; k < st.part.workers[w].owned.size(); ++k) {
      cap[st.part.workers[w].owned[k]] = st.lists[w][k].size();
    }
  }
  st.pg.init_counts(cap);
}

EvalResult evaluate(WorkerState& st, const AtomicConfig& cfg, const DPModel& model,
                    const std::vector<CompressionTable>& tables, FusedCounters& counters) {
  EvalResult out;
  out.per_atom_energy.assign(cfg.n_atoms, 0.0);
  out.forces.assign(3 * static_cast<std::size_t>(cfg.n_atoms), 0.0);

  const int nw = static_cast<int>(st.part.workers.size());
  std::vector<FusedCounters> cts(nw);
  std::exception_ptr err;
#pragma omp parallel num_threads(nw)
  {
    int w = omp_get_thread_num();
    const WorkerDomain& wd = st.part.workers[w];
    for (std::size_t k = 0; k < wd.owned.size(); ++k) {
      try {
        int i = wd.owned[k];
        out.per_atom_energy[i] =
            fused_atom_energy(cfg, model, tables, st.lists[w][k], i, st.ws[w], st.pg, &cts[w]);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);

  for (const auto& c : cts) counters += c;
  for (int i = 0; i < cfg.n_atoms; ++i) out.energy += out.per_atom_energy[i];
  scatter_pair_grads(st.pg, out);
  return out;
}

double max_drift(const std::vector<double>& ref, const std::vector<double>& pos) {
  double best2 = 0.0;
  for (std::size_t i = 0; i < pos.size(); i += 3) {
    double d2 = 0.0;
    for (int x = 0; x < 3; ++x) {
      double d = pos[i + x] - ref[i + x];
      d2 += d * d;
    }
    if (d2 > best2) best2 = d2;
  }
  return std::sqrt(best2);
}

} // namespace

MDResult run_md(AtomicConfig& cfg, std::vector<double>& vel, const DPModel& model,
                const std::vector<CompressionTable>& tables, const MDConfig& mc,
                const ThermoCallback& on_thermo) {
  validate_config(cfg, model.n_types());
  if (static_cast<int>(tables.size()) != model.n_types()) {
    throw InputError("need one table per neighbor type");
  }
  if (vel.size() != cfg.pos.size()) throw InputError("velocity array size mismatch");
  if (!(mc.dt > 0.0)) throw InputError("time step must be positive");
  if (mc.n_steps < 0) throw InputError("step count must be non-negative");
  if (mc.n_workers < 1) throw InputError("worker count must be at least 1");
  if (mc.rebuild_every < 1 || mc.thermo_every < 1) {
    throw InputError("rebuild and thermo intervals must be at least 1");
  }
  if (!(mc.buffer >= 0.0)) throw InputError("buffer must be non-negative");

  const int n = cfg.n_atoms;
  const double cutoff = model.r_cut + mc.buffer;
  std::vector<double> mass(n), acc_fac(n);
  for (int i = 0; i < n; ++i) {
    mass[i] = model.masses[cfg.type[i]];
    acc_fac[i] = EVA_PER_MASS_TO_ACC / mass[i];
  }

  MDResult res;
  WorkerState st;
  rebuild(st, cfg, cutoff, mc.n_workers);
  EvalResult ev = evaluate(st, cfg, model, tables, res.counters);
  ++res.force_evals;

  auto kinetic = [&]() {
    double ke = 0.0;
    for (int i = 0; i < n; ++i) {
      double v2 = vel[3 * i] * vel[3 * i] + vel[3 * i + 1] * vel[3 * i + 1] +
                  vel[3 * i + 2] * vel[3 * i + 2];
      ke += 0.5 * mass[i] * v2 * MVV_TO_EV;
    }
    return ke;
  };
  auto record = [&](long step) {
    ThermoRecord tr;
    tr.step = step;
    tr.ke = kinetic();
    tr.pe = ev.energy;
    tr.temperature = 2.0 * tr.ke / (3.0 * n * K_B);
    double tr_virial = ev.virial[0] + ev.virial[4] + ev.virial[8];
    tr.pressure = (2.0 * tr.ke + tr_virial) / (3.0 * cfg.cell.volume()) * EVA3_TO_BAR;
    res.thermo.push_back(tr);
    if (on_thermo) on_thermo(cfg, vel, tr);
  };

  record(0);
  const double half = 0.5 * mc.dt;
  for (long s = 1; s <= mc.n_steps; ++s) {
    for (int i = 0; i < n; ++i) {
      for (int x = 0; x < 3; ++x) vel[3 * i + x] += half * ev.forces[3 * i + x] * acc_fac[i];
    }
    for (int i = 0; i < 3 * n; ++i) cfg.pos[i] += mc.dt * vel[i];

    if (s % mc.rebuild_every == 0) rebuild(st, cfg, cutoff, mc.n_workers);
    double drift = max_drift(st.ref_pos, cfg.pos);
    ++res.staleness_checks;
    if (drift > res.max_drift_seen) res.max_drift_seen = drift;
    if (drift > 0.5 * mc.buffer) {
      throw NumericalError("neighbor list stale: an atom moved " + std::to_string(drift) +
                           " since the last rebuild, more than half the buffer");
    }

    ev = evaluate(st, cfg, model, tables, res.counters);
    ++res.force_evals;
    for (int i = 0; i < n; ++i) {
      for (int x = 0; x < 3; ++x) vel[3 * i + x] += half * ev.forces[3 * i + x] * acc_fac[i];
    }
    if (s % mc.thermo_every == 0) record(s);
  }

  res.final_ke = kinetic();
  res.final_pe = ev.energy;
  res.final_total = res.final_ke + res.final_pe;
  return res;
}

} // namespace dpmd
