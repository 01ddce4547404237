#include <doctest.h>

#include <cmath>
#include <set>

#include "dpmd/domain.hpp"
#include "dpmd/error.hpp"
#include "dpmd/fused.hpp"
#include "dpmd/md.hpp"
#include "dpmd/neighbor.hpp"
#include "dpmd/table.hpp"
#include "dpmd/units.hpp"
#include "helpers.hpp"

using namespace dpmd;

namespace {

double kinetic_energy(const AtomicConfig& cfg, const DPModel& model,
                      const std::vector<double>& vel) {
  double ke = 0.0;
  for (int i = 0; i < cfg.n_atoms; ++i) {
    double m = model.masses[cfg.type[i]];
    double v2 = vel[3 * i] * vel[3 * i] + vel[3 * i + 1] * vel[3 * i + 1] +
                vel[3 * i + 2] * vel[3 * i + 2];
    ke += 0.5 * m * v2 * MVV_TO_EV;
  }
  return ke;
}

std::array<double, 3> momentum(const AtomicConfig& cfg, const DPModel& model,
                               const std::vector<double>& vel) {
  std::array<double, 3> p{0.0, 0.0, 0.0};
  for (int i = 0; i < cfg.n_atoms; ++i) {
    double m = model.masses[cfg.type[i]];
    for (int x = 0; x < 3; ++x) p[x] += m * vel[3 * i + x];
  }
  return p;
}

} // namespace

TEST_CASE("slab partition covers every atom exactly once with balanced loads") {
  auto cfg = testutil::make_random_config(17, 2, 9.0, 1.5, 901);
  for (int w : {1, 2, 3, 5, 17}) {
    auto part = partition_domain(cfg, w, 6.0);
    REQUIRE(static_cast<int>(part.workers.size()) == w);

    std::set<int> seen;
    std::size_t smallest = cfg.n_atoms, largest = 0;
    for (const auto& wd : part.workers) {
      REQUIRE(!wd.owned.empty());
      smallest = std::min(smallest, wd.owned.size());
      largest = std::max(largest, wd.owned.size());
      for (std::size_t k = 0; k < wd.owned.size(); ++k) {
        if (k > 0) CHECK(wd.owned[k - 1] < wd.owned[k]);
        CHECK(seen.insert(wd.owned[k]).second);
      }
      for (std::size_t k = 1; k < wd.ghosts.size(); ++k) {
        CHECK(wd.ghosts[k - 1] < wd.ghosts[k]);
      }
      for (int gid : wd.ghosts) CHECK(std::find(wd.owned.begin(), wd.owned.end(), gid) == wd.owned.end());
    }
    CHECK(static_cast<int>(seen.size()) == cfg.n_atoms);
    CHECK(largest - smallest <= 1);
  }
}

TEST_CASE("a single worker owns everything and needs no ghosts") {
  auto cfg = testutil::make_random_config(12, 1, 8.0, 1.5, 907);
  auto part = partition_domain(cfg, 1, 5.0);
  REQUIRE(part.workers.size() == 1);
  CHECK(part.workers[0].owned.size() == static_cast<std::size_t>(cfg.n_atoms));
  CHECK(part.workers[0].ghosts.empty());
}

TEST_CASE("worker counts beyond the atom count are degraded") {
  auto cfg = testutil::make_random_config(5, 1, 8.0, 1.8, 911);
  auto part = partition_domain(cfg, 9, 4.0);
  CHECK(part.workers.size() == 5);
  for (const auto& wd : part.workers) CHECK(wd.owned.size() == 1);
}

TEST_CASE("ghost regions contain every atom the owned lists can reference") {
  // Brute-force audit: per worker, lists built from owned plus ghosts only
  // must equal the lists built from all atoms, entry for entry.
  const double cutoff = 4.5;
  for (std::uint64_t seed : {921ull, 922ull, 923ull}) {
    auto cfg = testutil::make_random_config(24, 2, 10.0, 1.4, seed);
    auto global = build_neighbor_list(cfg, cutoff);
    for (int w : {2, 3, 6}) {
      auto part = partition_domain(cfg, w, cutoff);
      for (const auto& wd : part.workers) {
        std::vector<int> candidates;
        std::merge(wd.owned.begin(), wd.owned.end(), wd.ghosts.begin(), wd.ghosts.end(),
                   std::back_inserter(candidates));
        std::vector<std::vector<NeighborEntry>> lists;
        build_neighbor_lists_subset(cfg, cutoff, wd.owned, candidates, lists);
        REQUIRE(lists.size() == wd.owned.size());
        for (std::size_t k = 0; k < wd.owned.size(); ++k) {
          const auto& ref = global.nbr[wd.owned[k]];
          REQUIRE(lists[k].size() == ref.size());
          for (std::size_t e = 0; e < ref.size(); ++e) {
            CHECK(lists[k][e].j == ref[e].j);
            CHECK(lists[k][e].shift == ref[e].shift);
          }
        }
      }
    }
  }
}

TEST_CASE("velocity initialization hits the target temperature exactly") {
  auto model = testutil::make_test_model(2, 4, 6, 12, 2, {8, 8}, 6.0, 5.0, 931);
  auto cfg = testutil::make_random_config(20, 2, 10.0, 1.5, 93);

  auto vel = init_velocities(cfg, model, 350.0, 42);
  double ke = kinetic_energy(cfg, model, vel);
  double t_cur = 2.0 * ke / (3.0 * cfg.n_atoms * K_B);
  CHECK(testutil::rel_err(t_cur, 350.0) < 1e-12);

  auto p = momentum(cfg, model, vel);
  double vscale = 0.0;
  for (int i = 0; i < cfg.n_atoms; ++i) {
    vscale += model.masses[cfg.type[i]] * std::fabs(vel[3 * i]);
  }
  for (int x = 0; x < 3; ++x) CHECK(std::fabs(p[x]) <= 1e-12 * std::max(1.0, vscale));

  auto vel2 = init_velocities(cfg, model, 350.0, 42);
  CHECK(vel == vel2);
  auto vel3 = init_velocities(cfg, model, 350.0, 43);
  CHECK(vel != vel3);

  auto zero = init_velocities(cfg, model, 0.0, 42);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("velocity initialization rejects degenerate systems") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {8}, 6.0, 5.0, 937);
  AtomicConfig cfg;
  cfg.cell = Cell({20, 0, 0, 0, 20, 0, 0, 0, 20}, {true, true, true});
  cfg.type_names = {"A"};
  cfg.n_atoms = 1;
  cfg.pos = {1.0, 2.0, 3.0};
  cfg.type = {0};
  CHECK_THROWS_AS(init_velocities(cfg, model, 300.0, 1), InputError);
}

TEST_CASE("free flight leaves velocities untouched and advances positions linearly") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {8}, 6.0, 5.0, 941);
  auto tabs = build_tables(model, 0.05);

  AtomicConfig cfg;
  cfg.cell = Cell({100, 0, 0, 0, 100, 0, 0, 0, 100}, {false, false, false});
  cfg.type_names = {"A"};
  cfg.n_atoms = 2;
  cfg.pos = {20.0, 50.0, 50.0, 80.0, 50.0, 50.0}; // far beyond the cutoff
  cfg.type = {0, 0};

  auto vel = init_velocities(cfg, model, 400.0, 5);
  auto vel0 = vel;
  auto pos0 = cfg.pos;
  double ke0 = kinetic_energy(cfg, model, vel);

  MDConfig mc;
  mc.n_steps = 40;
  mc.dt = 0.5;
  mc.thermo_every = 10;
  auto res = run_md(cfg, vel, model, tabs, mc);

  CHECK(vel == vel0);
  for (std::size_t k = 0; k < cfg.pos.size(); ++k) {
    CHECK(cfg.pos[k] == doctest::Approx(pos0[k] + 40 * 0.5 * vel0[k]).epsilon(1e-12));
  }
  CHECK(res.final_ke == ke0);
  CHECK(res.force_evals == 41);
  REQUIRE(res.thermo.size() == 5);
  for (std::size_t r = 0; r < res.thermo.size(); ++r) {
    CHECK(res.thermo[r].step == static_cast<long>(10 * r));
    CHECK(res.thermo[r].pe == res.thermo[0].pe);
  }
}

TEST_CASE("a 99-step run performs exactly 100 evaluations and records every 50 steps") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {16}, 5.0, 4.0, 947);
  auto tabs = build_tables(model, 0.01);
  auto cfg = testutil::make_random_config(8, 1, 9.0, 2.2, 97);
  auto vel = init_velocities(cfg, model, 50.0, 7);

  MDConfig mc;
  mc.n_steps = 99;
  mc.thermo_every = 50;

  long callbacks = 0;
  auto res = run_md(cfg, vel, model, tabs, mc,
                    [&](const AtomicConfig&, const std::vector<double>&, const ThermoRecord&) {
                      ++callbacks;
                    });
  CHECK(res.force_evals == 100);
  REQUIRE(res.thermo.size() == 2);
  CHECK(res.thermo[0].step == 0);
  CHECK(res.thermo[1].step == 50);
  CHECK(callbacks == 2);
  CHECK(res.staleness_checks == 99);

  // Zero steps still evaluates once for the starting thermo state.
  auto cfg2 = testutil::make_random_config(8, 1, 9.0, 2.2, 98);
  auto vel2 = init_velocities(cfg2, model, 50.0, 7);
  mc.n_steps = 0;
  auto res2 = run_md(cfg2, vel2, model, tabs, mc);
  CHECK(res2.force_evals == 1);
  CHECK(res2.thermo.size() == 1);
}

TEST_CASE("stale neighbor lists abort the run instead of silently degrading") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {8}, 6.0, 5.0, 953);
  auto tabs = build_tables(model, 0.05);

  AtomicConfig cfg;
  cfg.cell = Cell({100, 0, 0, 0, 100, 0, 0, 0, 100}, {false, false, false});
  cfg.type_names = {"A"};
  cfg.n_atoms = 2;
  cfg.pos = {20.0, 50.0, 50.0, 80.0, 50.0, 50.0};
  cfg.type = {0, 0};
  auto vel = init_velocities(cfg, model, 2000.0, 11);

  MDConfig mc;
  mc.n_steps = 50;
  mc.dt = 1.0;
  mc.buffer = 0.01;
  mc.rebuild_every = 1000;
  CHECK_THROWS_AS(run_md(cfg, vel, model, tabs, mc), NumericalError);

  // The same system survives when every step rebuilds.
  auto cfg2 = cfg;
  cfg2.pos = {20.0, 50.0, 50.0, 80.0, 50.0, 50.0};
  auto vel2 = init_velocities(cfg2, model, 2000.0, 11);
  mc.rebuild_every = 1;
  auto res = run_md(cfg2, vel2, model, tabs, mc);
  CHECK(res.force_evals == 51);
}

TEST_CASE("md trajectories are bitwise independent of the worker count") {
  auto model = testutil::make_test_model(2, 5, 6, 14, 2, {12, 12}, 5.5, 4.5, 959);
  auto tabs = build_tables(model, 0.01);
  auto base_cfg = testutil::make_random_config(16, 2, 10.0, 2.0, 101);

  MDConfig mc;
  mc.n_steps = 30;
  mc.dt = 1.0;
  mc.rebuild_every = 10;
  mc.thermo_every = 10;

  AtomicConfig ref_cfg;
  std::vector<double> ref_vel;
  MDResult ref;
  for (int w : {1, 2, 8}) {
    AtomicConfig cfg = base_cfg;
    auto vel = init_velocities(cfg, model, 250.0, 13);
    mc.n_workers = w;
    auto res = run_md(cfg, vel, model, tabs, mc);
    if (w == 1) {
      ref_cfg = cfg;
      ref_vel = vel;
      ref = res;
      continue;
    }
    CHECK(res.final_total == ref.final_total);
    CHECK(res.final_ke == ref.final_ke);
    CHECK(res.final_pe == ref.final_pe);
    CHECK(cfg.pos == ref_cfg.pos);
    CHECK(vel == ref_vel);
    REQUIRE(res.thermo.size() == ref.thermo.size());
    for (std::size_t r = 0; r < res.thermo.size(); ++r) {
      CHECK(res.thermo[r].pe == ref.thermo[r].pe);
      CHECK(res.thermo[r].ke == ref.thermo[r].ke);
      CHECK(res.thermo[r].pressure == ref.thermo[r].pressure);
    }
  }
}

TEST_CASE("the first recorded potential energy equals a direct global evaluation") {
  auto model = testutil::make_test_model(2, 5, 6, 14, 2, {12, 12}, 5.5, 4.5, 963);
  auto tabs = build_tables(model, 0.01);

  for (int w : {1, 3}) {
    auto cfg = testutil::make_random_config(14, 2, 10.0, 2.0, 103);
    auto list = build_neighbor_list(cfg, model.r_cut + 2.0);
    auto direct = compute_energy_forces_virial_tabulated(cfg, model, tabs, list, 1);

    auto vel = init_velocities(cfg, model, 200.0, 17);
    MDConfig mc;
    mc.n_steps = 0;
    mc.n_workers = w;
    mc.buffer = 2.0;
    auto res = run_md(cfg, vel, model, tabs, mc);
    CHECK(res.thermo[0].pe == direct.energy);
  }
}

TEST_CASE("short microcanonical runs conserve energy and momentum") {
  auto model = testutil::make_test_model(1, 5, 6, 14, 2, {14}, 5.5, 4.5, 967);
  auto tabs = build_tables(model, 0.002);
  auto cfg = testutil::make_random_config(12, 1, 9.5, 2.1, 107);
  auto vel = init_velocities(cfg, model, 150.0, 19);

  double ke0 = kinetic_energy(cfg, model, vel);
  MDConfig mc;
  mc.n_steps = 100;
  mc.dt = 0.5;
  mc.rebuild_every = 20;
  auto res = run_md(cfg, vel, model, tabs, mc);

  double e0 = res.thermo.front().ke + res.thermo.front().pe;
  CHECK(std::fabs(res.final_total - e0) <= 1e-4 * std::max(1.0, ke0));

  auto p = momentum(cfg, model, vel);
  for (int x = 0; x < 3; ++x) CHECK(std::fabs(p[x]) <= 1e-9);
}

TEST_CASE("md run rejects inconsistent setup") {
  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {8}, 6.0, 5.0, 971);
  auto tabs = build_tables(model, 0.05);
  auto cfg = testutil::make_random_config(6, 1, 9.0, 2.2, 109);
  auto vel = init_velocities(cfg, model, 100.0, 23);

  MDConfig mc;
  mc.n_steps = 5;
  {
    auto bad = vel;
    bad.pop_back();
    auto c = cfg;
    CHECK_THROWS_AS(run_md(c, bad, model, tabs, mc), InputError);
  }
  {
    MDConfig b = mc;
    b.dt = 0.0;
    auto c = cfg;
    auto v = vel;
    CHECK_THROWS_AS(run_md(c, v, model, tabs, b), InputError);
  }
  {
    MDConfig b = mc;
    b.thermo_every = 0;
    auto c = cfg;
    auto v = vel;
    CHECK_THROWS_AS(run_md(c, v, model, tabs, b), InputError);
  }
  {
    std::vector<CompressionTable> none;
    auto c = cfg;
    auto v = vel;
    CHECK_THROWS_AS(run_md(c, v, model, none, mc), InputError);
  }
}
