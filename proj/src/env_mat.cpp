#include "dpmd/env_mat.hpp"

#include <cmath>
#include <cstring>

#include "dpmd/switch_fn.hpp"

namespace dpmd {

void build_environment_matrix(const AtomicConfig& cfg, const DPModel& model,
                              const std::vector<NeighborEntry>& entries, int center,
                              EnvironmentMatrix& env) {
  const int nt = model.n_types();
  const int n_slots = model.total_slots();

  env.n_slots = n_slots;
  env.rows.assign(static_cast<std::size_t>(n_slots) * 4, 0.0);
  env.s_col.assign(n_slots, 0.0);
  env.dvec.assign(static_cast<std::size_t>(n_slots) * 3, 0.0);
  env.deriv.assign(static_cast<std::size_t>(n_slots) * 12, 0.0);
  env.slot_atom.assign(n_slots, -1);
  env.slot_shift.assign(n_slots, {0, 0, 0});
  env.sector_begin.assign(nt, 0);
  env.sector_count.assign(nt, 0);
  for (int t = 1; t < nt; ++t) env.sector_begin[t] = env.sector_begin[t - 1] + model.max_nbr[t - 1];
  env.n_real = 0;

  const double* ri = &cfg.pos[3 * center];
  for (const NeighborEntry& e : entries) {
    auto d = displacement(ri, &cfg.pos[3 * e.j], e.shift.data(), cfg.cell);
    double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if (r2 >= model.r_cut * model.r_cut) continue;
    if (r2 < 1e-12) throw NumericalError("overlapping atoms in neighbor environment");
    double r = std::sqrt(r2);

    int t = cfg.type[e.j];
    if (env.sector_count[t] >= model.max_nbr[t]) {
      throw NumericalError("neighbor slot capacity exceeded for type " + model.species[t]);
    }
    int slot = env.sector_begin[t] + env.sector_count[t];
    ++env.sector_count[t];
    ++env.n_real;

    double w = switch_weight(r, model.r_smooth, model.r_cut);
    double wd = switch_weight_deriv(r, model.r_smooth, model.r_cut);
    double inv_r = 1.0 / r;
    double s = w * inv_r;
    double sd = wd * inv_r - w * inv_r * inv_r; // ds/dr

    double u[3] = {d[0] * inv_r, d[1] * inv_r, d[2] * inv_r};
    double* row = &env.rows[4 * static_cast<std::size_t>(slot)];
    row[0] = s;
    row[1] = s * u[0];
    row[2] = s * u[1];
    row[3] = s * u[2];
    env.s_col[slot] = s;
    env.dvec[3 * static_cast<std::size_t>(slot) + 0] = d[0];
    env.dvec[3 * static_cast<std::size_t>(slot) + 1] = d[1];
    env.dvec[3 * static_cast<std::size_t>(slot) + 2] = d[2];
    env.slot_atom[slot] = e.j;
    env.slot_shift[slot] = e.shift;

    // d(row)/d(displacement): row0 = s(r), row_{1+y} = s(r) d_y / r.
    double* dd = &env.deriv[12 * static_cast<std::size_t>(slot)];
    for (int x = 0; x < 3; ++x) dd[x] = sd * u[x];
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 3; ++x) {
        double v = sd * u[x] * u[y] - s * inv_r * u[x] * u[y];
        if (x == y) v += s * inv_r;
        dd[3 * (1 + y) + x] = v;
      }
    }
  }
}

} // namespace dpmd
