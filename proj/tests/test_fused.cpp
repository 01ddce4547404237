#include <doctest.h>

#include <cmath>

#include "dpmd/error.hpp"
#include "dpmd/fused.hpp"
#include "dpmd/neighbor.hpp"
#include "dpmd/table.hpp"
#include "helpers.hpp"

using namespace dpmd;

namespace {

std::size_t real_pairs(const NeighborList& list) {
  std::size_t n = 0;
  for (const auto& v : list.nbr) n += v.size();
  return n;
}

} // namespace

TEST_CASE("fused and unfused tabulated paths agree to near machine precision") {
  // A coarse table keeps the tabulation error large, so this isolates the
  // fusion rewrite itself: same table, different evaluation order.
  auto model = testutil::make_test_model(2, 6, 8, 20, 2, {18, 18}, 6.0, 5.0, 401);
  auto tabs = build_tables(model, 0.05);

  for (int trial = 0; trial < 20; ++trial) {
    auto cfg = testutil::make_random_config(10, 2, 9.0, 1.8, 500 + trial);
    auto list = build_neighbor_list(cfg, model.r_cut);

    auto fused = compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 1);
    auto plain = compute_energy_forces_virial_tabulated_unfused(cfg, model, tabs, list);

    CHECK(testutil::rel_err(fused.energy, plain.energy) < 1e-12);
    for (int i = 0; i < cfg.n_atoms; ++i) {
      CHECK(testutil::rel_err(fused.per_atom_energy[i], plain.per_atom_energy[i]) < 1e-12);
    }
    for (std::size_t k = 0; k < fused.forces.size(); ++k) {
      CHECK(testutil::rel_err(fused.forces[k], plain.forces[k], 1e-10) < 1e-12);
    }
    for (int k = 0; k < 9; ++k) {
      CHECK(testutil::rel_err(fused.virial[k], plain.virial[k], 1e-10) < 1e-12);
    }

    std::vector<double> df, du;
    for (int i = 0; i < cfg.n_atoms; ++i) {
      fused_descriptor(cfg, model, tabs, list.nbr[i], i, df);
      unfused_tabulated_descriptor(cfg, model, tabs, list.nbr[i], i, du);
      REQUIRE(df.size() == du.size());
      for (std::size_t k = 0; k < df.size(); ++k) {
        CHECK(testutil::rel_err(df[k], du[k], 1e-10) < 1e-12);
      }
    }
  }
}

TEST_CASE("fused path with a fine table tracks the exact path") {
  auto model = testutil::make_test_model(1, 6, 8, 20, 2, {20}, 6.0, 5.0, 403);
  auto tabs = build_tables(model, 0.001);
  auto cfg = testutil::make_random_config(12, 1, 9.0, 1.8, 71);
  auto list = build_neighbor_list(cfg, model.r_cut);

  auto exact = compute_energy_forces_virial(cfg, model, list);
  auto fused = compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 1);

  CHECK(testutil::rel_err(exact.energy, fused.energy) < 1e-9);
  for (std::size_t k = 0; k < exact.forces.size(); ++k) {
    CHECK(testutil::rel_err(exact.forces[k], fused.forces[k], 1e-6) < 1e-7);
  }
  for (int k = 0; k < 9; ++k) {
    CHECK(testutil::rel_err(exact.virial[k], fused.virial[k], 1e-6) < 1e-7);
  }
}

TEST_CASE("slot padding never reaches the fused arithmetic") {
  auto tight = testutil::make_test_model(1, 6, 8, 16, 2, {8}, 6.0, 5.0, 407);
  auto cfg = testutil::make_random_config(10, 1, 10.0, 2.0, 73);
  auto list = build_neighbor_list(cfg, tight.r_cut);
  std::size_t need = 0;
  for (const auto& v : list.nbr) need = std::max(need, v.size());
  tight.max_nbr = {static_cast<int>(need)};
  auto padded = tight;
  padded.max_nbr = {static_cast<int>(need) + 40};

  auto tabs = build_tables(tight, 0.01);
  FusedCounters ct, cp;
  auto rt = compute_energy_forces_virial_tabulated(cfg, tight, tabs, list, 1, &ct);
  auto rp = compute_energy_forces_virial_tabulated(cfg, padded, tabs, list, 1, &cp);

  CHECK(rt.energy == rp.energy);
  for (int i = 0; i < cfg.n_atoms; ++i) {
    CHECK(rt.per_atom_energy[i] == rp.per_atom_energy[i]);
  }
  for (std::size_t k = 0; k < rt.forces.size(); ++k) CHECK(rt.forces[k] == rp.forces[k]);
  for (int k = 0; k < 9; ++k) CHECK(rt.virial[k] == rp.virial[k]);

  // Work tracks real neighbors, not the padded capacity.
  CHECK(ct.rows_forward == cp.rows_forward);
  CHECK(ct.rows_backward == cp.rows_backward);
  CHECK(cp.rows_forward == real_pairs(list));
  unsigned long long padded_bound =
      static_cast<unsigned long long>(cfg.n_atoms) * padded.total_slots();
  CHECK(cp.rows_forward < padded_bound);
}

TEST_CASE("fused gradient pass re-reads the table instead of caching rows") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {16}, 6.0, 5.0, 409);
  auto tabs = build_tables(model, 0.01);
  auto cfg = testutil::make_random_config(8, 1, 9.0, 2.0, 77);
  auto list = build_neighbor_list(cfg, model.r_cut);

  FusedCounters c;
  compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 1, &c);
  CHECK(c.rows_forward == real_pairs(list));
  CHECK(c.rows_backward == real_pairs(list));
  CHECK(c.extrapolations == 0);
}

TEST_CASE("fused workspace stays small no matter the slot capacity") {
  // one row buffer plus feature-width accumulators, nothing sized slots x M
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {2048}, 6.0, 5.0, 419);
  auto tabs = build_tables(model, 0.05);
  auto cfg = testutil::make_random_config(8, 1, 9.0, 2.0, 79);
  auto list = build_neighbor_list(cfg, model.r_cut);

  const std::size_t m = model.feature_width();
  FusedWorkspace ws;
  PairGradBuffer pg;
  pg.init(list.nbr);
  fused_atom_energy(cfg, model, tabs, list.nbr[0], 0, ws, pg, nullptr);
  CHECK(ws.row.size() == m);
  CHECK(ws.row1.size() == m);
  CHECK(ws.t.size() == 4 * m);
  CHECK(ws.dt.size() == 4 * m);
  CHECK(ws.d.size() == static_cast<std::size_t>(model.descriptor_size()));
  CHECK(ws.dd.size() == static_cast<std::size_t>(model.descriptor_size()));
}

TEST_CASE("closer approaches than the tabulated domain are counted as extrapolations") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {8}, 6.0, 5.0, 411);
  auto tabs = build_tables(model, 0.01);

  AtomicConfig cfg;
  cfg.cell = Cell({20, 0, 0, 0, 20, 0, 0, 0, 20}, {false, false, false});
  cfg.type_names = {"A"};
  cfg.n_atoms = 2;
  cfg.pos = {10.0, 10.0, 10.0, 10.45, 10.0, 10.0}; // r = 0.45 < 0.5
  cfg.type = {0, 0};
  auto list = build_neighbor_list(cfg, model.r_cut);

  FusedCounters c;
  auto res = compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 1, &c);
  CHECK(c.extrapolations > 0);
  CHECK(std::isfinite(res.energy));
}

TEST_CASE("fused evaluation is bitwise independent of the worker count") {
  auto model = testutil::make_test_model(2, 6, 8, 16, 2, {14, 14}, 6.0, 5.0, 413);
  auto tabs = build_tables(model, 0.01);
  auto cfg = testutil::make_random_config(17, 2, 10.0, 1.9, 79);
  auto list = build_neighbor_list(cfg, model.r_cut);

  auto r1 = compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 1);
  for (int w : {2, 3, 8}) {
    auto rw = compute_energy_forces_virial_tabulated(cfg, model, tabs, list, w);
    CHECK(r1.energy == rw.energy);
    for (int i = 0; i < cfg.n_atoms; ++i) {
      CHECK(r1.per_atom_energy[i] == rw.per_atom_energy[i]);
    }
    for (std::size_t k = 0; k < r1.forces.size(); ++k) CHECK(r1.forces[k] == rw.forces[k]);
    for (int k = 0; k < 9; ++k) CHECK(r1.virial[k] == rw.virial[k]);
  }
}

TEST_CASE("capacity overflow inside a worker surfaces as the original error") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {2}, 6.0, 5.0, 417);
  auto cfg = testutil::make_random_config(10, 1, 8.0, 1.8, 83);
  auto tabs = build_tables(model, 0.01);
  auto list = build_neighbor_list(cfg, model.r_cut);
  std::size_t most = 0;
  for (const auto& v : list.nbr) most = std::max(most, v.size());
  REQUIRE(most > 2);
  CHECK_THROWS_AS(compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 3),
                  NumericalError);
}

TEST_CASE("multiplication model matches a hand count and the claimed savings") {
  // Layer walk for one slot: d1 mults into the first layer, then the two
  // widening layers cost 2*d1*d1 and 8*d1*d1, so 10*d1*d1 + d1 per slot
  // against 14 polynomial steps for 4*d1 features: 56*d1.
  FlopReport small = flop_report(2, 3, 4);
  CHECK(small.original == 2.0 * (3.0 * 4.0 + 10.0 * 3.0 * 16.0));
  CHECK(small.tabulated == 2.0 * 56.0 * 3.0 * 4.0);

  FlopReport r = flop_report(1, 1, 32);
  CHECK(r.ratio == doctest::Approx(321.0 / 56.0).epsilon(1e-12));
  CHECK(std::fabs(r.savings_percent - 82.55) <= 0.1);
  CHECK(r.savings_percent == doctest::Approx(100.0 * (1.0 - 56.0 / 321.0)).epsilon(1e-12));
}

TEST_CASE("exact path multiplication counter obeys the per-slot formula") {
  auto model = testutil::make_test_model(1, 5, 6, 12, 2, {9}, 6.0, 5.0, 419);
  auto cfg = testutil::make_random_config(6, 1, 9.0, 2.0, 89);
  auto list = build_neighbor_list(cfg, model.r_cut);
  ExactCounters c;
  compute_energy_forces_virial(cfg, model, list, &c);
  unsigned long long d1 = 5;
  unsigned long long slots = static_cast<unsigned long long>(cfg.n_atoms) * model.total_slots();
  CHECK(c.embed_mults == slots * (d1 + 10 * d1 * d1));
}
