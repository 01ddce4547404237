// Command line front end: model/config generation, table compression,
// accuracy validation, MD runs and benchmarks.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpmd/error.hpp"
#include "dpmd/exact.hpp"
#include "dpmd/fused.hpp"
#include "dpmd/md.hpp"
#include "dpmd/model_io.hpp"
#include "dpmd/neighbor.hpp"
#include "dpmd/rmse.hpp"
#include "dpmd/rng.hpp"
#include "dpmd/table.hpp"
#include "dpmd/table_io.hpp"
#include "dpmd/tanh_table.hpp"
#include "dpmd/xyz_io.hpp"

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct GlobalOpts {
  std::uint64_t seed = 2024;
  int workers = 1;
  std::string format = "extxyz";
};

std::string describe_model(const dpmd::ModelFile& mf) {
  std::string s = "preset " + mf.preset + ", species";
  for (const auto& sp : mf.model.species) s += " " + sp;
  char buf[160];
  std::snprintf(buf, sizeof buf, ", d1 %d, features %d, slots %d, cutoff %.3f A, seed %" PRIu64,
                mf.model.d1(), mf.model.feature_width(), mf.model.total_slots(), mf.model.r_cut,
                static_cast<std::uint64_t>(mf.seed));
  return s + buf;
}

dpmd::AtomicConfig load_config(const std::string& path, const dpmd::DPModel& model) {
  dpmd::AtomicConfig cfg = dpmd::read_xyz(path);
  dpmd::assign_types(cfg, model.species);
  dpmd::validate_config(cfg, model.n_types());
  return cfg;
}

void check_tables(const dpmd::DPModel& model, const std::vector<dpmd::CompressionTable>& tabs) {
  if (static_cast<int>(tabs.size()) != model.n_types()) {
    throw dpmd::InputError("table file holds " + std::to_string(tabs.size()) +
                           " tables but the model has " + std::to_string(model.n_types()) +
                           " neighbor types");
  }
  if (tabs[0].m != model.feature_width()) {
    throw dpmd::InputError("table feature width " + std::to_string(tabs[0].m) +
                           " does not match the model's " + std::to_string(model.feature_width()));
  }
}

int cmd_gen_model(const GlobalOpts& g, const std::string& preset, const std::string& out) {
  const dpmd::Preset& p = dpmd::get_preset(preset);
  dpmd::DPModel model = dpmd::gen_model(p, g.seed);
  dpmd::write_model(out, model, p.name, g.seed);
  dpmd::ModelFile mf{model, p.name, g.seed};
  std::printf("wrote %s: %s\n", out.c_str(), describe_model(mf).c_str());
  return 0;
}

int cmd_gen_config(const GlobalOpts& g, const std::string& preset, const std::string& out, int nx,
                   int ny, int nz, double jitter) {
  const dpmd::Preset& p = dpmd::get_preset(preset);
  if (nx < 1 || ny < 1 || nz < 1) throw dpmd::InputError("cell counts must be positive");
  if (jitter < 0.0) throw dpmd::InputError("jitter must be non-negative");
  dpmd::AtomicConfig cfg = dpmd::gen_config(p, nx, ny, nz, jitter, g.seed);
  char jb[64];
  std::snprintf(jb, sizeof jb, "%.17g", jitter);
  dpmd::write_xyz(out, cfg, {{"preset", p.name},
                             {"config_seed", std::to_string(g.seed)},
                             {"jitter", jb}});
  std::printf("wrote %s: %d atoms, %dx%dx%d fcc cells, a = %.4f A, jitter %g A, seed %" PRIu64 "\n",
              out.c_str(), cfg.n_atoms, nx, ny, nz, p.lattice_a, jitter,
              static_cast<std::uint64_t>(g.seed));
  return 0;
}

int cmd_compress(const std::string& model_path, double interval, const std::string& out) {
  if (interval <= 0.0) throw dpmd::InputError("interval must be positive");
  dpmd::ModelFile mf = dpmd::read_model(model_path);
  double t0 = now_s();
  std::vector<dpmd::CompressionTable> tabs = dpmd::build_tables(mf.model, interval);
  double t1 = now_s();
  dpmd::write_tables(out, tabs);
  std::size_t bytes = 0;
  for (const auto& t : tabs) bytes += t.coeffs.size() * sizeof(double);
  std::printf("model: %s\n", describe_model(mf).c_str());
  std::printf("tabulated %zu nets on [%.17g, %.17g], interval %.17g, %zu intervals each\n",
              tabs.size(), tabs[0].x0, tabs[0].x_end(), tabs[0].h,
              static_cast<std::size_t>(tabs[0].n));
  std::printf("node values and first two derivatives verified against the nets\n");
  std::printf("wrote %s: %.2f MB of coefficients in %.2f s\n", out.c_str(),
              static_cast<double>(bytes) / (1024.0 * 1024.0), t1 - t0);
  return 0;
}

int cmd_validate(const GlobalOpts& g, const std::string& model_path,
                 std::vector<double> intervals, int n_configs, int nx, int ny, int nz,
                 double jitter, const std::string& preset_override) {
  dpmd::ModelFile mf = dpmd::read_model(model_path);
  const dpmd::Preset& p = dpmd::get_preset(preset_override.empty() ? mf.preset : preset_override);

  if (intervals.empty()) throw dpmd::InputError("need at least one interval");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i] <= 0.0) throw dpmd::InputError("intervals must be positive");
    if (i > 0 && intervals[i] >= intervals[i - 1]) {
      throw dpmd::InputError("intervals must be strictly descending");
    }
  }
  if (n_configs < 1) throw dpmd::InputError("config count must be positive");

  std::vector<dpmd::AtomicConfig> configs;
  configs.reserve(n_configs);
  for (int i = 0; i < n_configs; ++i) {
    configs.push_back(dpmd::gen_config(p, nx, ny, nz, jitter, dpmd::mix_seed(g.seed, i)));
  }
  std::printf("model: %s\n", describe_model(mf).c_str());
  std::printf("validation set: %d configs of %d atoms (%dx%dx%d fcc, jitter %g A, seed %" PRIu64
              "), %d workers\n",
              n_configs, configs[0].n_atoms, nx, ny, nz, jitter,
              static_cast<std::uint64_t>(g.seed), g.workers);

  double t0 = now_s();
  std::vector<dpmd::SweepRow> rows = dpmd::rmse_sweep(mf.model, intervals, configs, g.workers);
  double t1 = now_s();

  std::printf("%12s  %22s  %22s\n", "interval", "rmse_e (eV/atom)", "rmse_f (eV/A)");
  for (const auto& r : rows) {
    std::printf("%12g  %22.6e  %22.6e\n", r.h, r.rmse_e, r.rmse_f);
  }
  if (rows.size() >= 2) {
    std::printf("log-log slope of rmse_e vs interval: %.3f\n", dpmd::loglog_slope(rows));
  }
  std::printf("sweep took %.1f s\n", t1 - t0);
  return 0;
}

int cmd_run(const GlobalOpts& g, const std::string& model_path, const std::string& table_path,
            const std::string& config_path, long steps, double dt, double temp, double buffer,
            int rebuild_every, int thermo_every, const std::string& thermo_path,
            const std::string& traj_path) {
  dpmd::ModelFile mf = dpmd::read_model(model_path);
  std::vector<dpmd::CompressionTable> tabs = dpmd::read_tables(table_path);
  check_tables(mf.model, tabs);
  dpmd::AtomicConfig cfg = load_config(config_path, mf.model);

  if (steps < 0) throw dpmd::InputError("step count must be non-negative");
  if (temp < 0.0) throw dpmd::InputError("temperature must be non-negative");

  std::vector<double> vel = dpmd::init_velocities(cfg, mf.model, temp, g.seed);

  dpmd::MDConfig mc;
  mc.n_steps = steps;
  mc.dt = dt;
  mc.n_workers = g.workers;
  mc.buffer = buffer;
  mc.rebuild_every = rebuild_every;
  mc.thermo_every = thermo_every;

  std::printf("model: %s\n", describe_model(mf).c_str());
  std::printf("config: %s (%d atoms); md_seed %" PRIu64 ", workers %d, dt %g fs, T0 %g K\n",
              config_path.c_str(), cfg.n_atoms, static_cast<std::uint64_t>(g.seed), g.workers, dt,
              temp);

  std::ofstream traj;
  if (!traj_path.empty()) {
    traj.open(traj_path);
    if (!traj) throw dpmd::InputError("cannot open trajectory file " + traj_path);
  }

  std::vector<std::string> provenance = {
      "model file: " + model_path + " (preset " + mf.preset + ", model_seed " +
          std::to_string(mf.seed) + ")",
      "table file: " + table_path,
      "config file: " + config_path,
      "md_seed: " + std::to_string(g.seed),
      "workers: " + std::to_string(g.workers),
  };

  std::printf("%10s %16s %18s %12s %14s\n", "step", "ke (eV)", "pe (eV)", "T (K)", "P (bar)");
  auto on_thermo = [&](const dpmd::AtomicConfig& c, const std::vector<double>&,
                       const dpmd::ThermoRecord& r) {
    std::printf("%10ld %16.8f %18.8f %12.3f %14.3f\n", r.step, r.ke, r.pe, r.temperature,
                r.pressure);
    if (traj.is_open()) {
      char tb[64];
      std::snprintf(tb, sizeof tb, "%.17g", r.step * dt);
      dpmd::write_xyz_frame(traj, c, {{"step", std::to_string(r.step)},
                                      {"time_fs", tb},
                                      {"md_seed", std::to_string(g.seed)},
                                      {"workers", std::to_string(g.workers)}});
    }
  };

  double t0 = now_s();
  dpmd::MDResult res = dpmd::run_md(cfg, vel, mf.model, tabs, mc, on_thermo);
  double t1 = now_s();

  if (!thermo_path.empty()) dpmd::write_thermo_csv(thermo_path, res.thermo, provenance);

  std::printf("energy/force evaluations: %llu\n", res.force_evals);
  std::printf("staleness checks: %llu, violations: 0, max drift since rebuild %.4f A\n",
              res.staleness_checks, res.max_drift_seen);
  double e0 = res.thermo.front().ke + res.thermo.front().pe;
  std::printf("total energy: initial %.10f eV, final %.10f eV, drift %.3e eV\n", e0,
              res.final_total, res.final_total - e0);
  if (steps > 0) {
    std::printf("time to solution: %.3e s/step/atom (%.2f s total)\n",
                (t1 - t0) / static_cast<double>(steps) / cfg.n_atoms, t1 - t0);
  }
  if (res.counters.extrapolations > 0) {
    std::fprintf(stderr,
                 "warning: %llu table evaluations fell beyond the tabulated domain and used "
                 "polynomial extrapolation\n",
                 res.counters.extrapolations);
  }
  return 0;
}

int cmd_bench(const GlobalOpts& g, const std::string& model_path, const std::string& table_path,
              const std::string& config_path, int exact_evals, int fused_evals, int md_steps) {
  dpmd::ModelFile mf = dpmd::read_model(model_path);
  const dpmd::DPModel& model = mf.model;
  std::vector<dpmd::CompressionTable> tabs = dpmd::read_tables(table_path);
  check_tables(model, tabs);

  dpmd::AtomicConfig cfg;
  if (config_path.empty()) {
    const dpmd::Preset& p = dpmd::get_preset(mf.preset);
    cfg = dpmd::gen_config(p, 3, 3, 3, 0.1, g.seed);
    std::printf("config: generated %d-atom 3x3x3 %s block, seed %" PRIu64 "\n", cfg.n_atoms,
                p.name.c_str(), static_cast<std::uint64_t>(g.seed));
  } else {
    cfg = load_config(config_path, model);
    std::printf("config: %s (%d atoms)\n", config_path.c_str(), cfg.n_atoms);
  }
  std::printf("model: %s\n", describe_model(mf).c_str());

  double t0 = now_s();
  dpmd::NeighborList list = dpmd::build_neighbor_list(cfg, model.r_cut);
  double t1 = now_s();
  std::size_t pairs = 0;
  for (const auto& v : list.nbr) pairs += v.size();
  std::printf("neighbor list: %.3f ms, %zu pairs\n", (t1 - t0) * 1e3, pairs);

  dpmd::EvalResult ref;
  if (exact_evals > 0) {
    t0 = now_s();
    for (int i = 0; i < exact_evals; ++i) ref = dpmd::compute_energy_forces_virial(cfg, model, list);
    t1 = now_s();
    double per = (t1 - t0) / exact_evals;
    std::printf("exact path:      %10.4f s/eval, %.3e s/step/atom\n", per, per / cfg.n_atoms);
  }

  dpmd::FusedCounters counters;
  dpmd::EvalResult fus;
  t0 = now_s();
  for (int i = 0; i < fused_evals; ++i) {
    fus = dpmd::compute_energy_forces_virial_tabulated(cfg, model, tabs, list, g.workers,
                                                       i == 0 ? &counters : nullptr);
  }
  t1 = now_s();
  double fused_per = (t1 - t0) / fused_evals;
  std::printf("fused table path:%10.4f s/eval, %.3e s/step/atom (%d workers)\n", fused_per,
              fused_per / cfg.n_atoms, g.workers);
  if (exact_evals > 0) {
    std::printf("energy agreement: |dE| = %.3e eV\n", std::fabs(ref.energy - fus.energy));
  }

  unsigned long long bound =
      static_cast<unsigned long long>(cfg.n_atoms) * model.total_slots();
  std::printf("table rows per eval: %llu forward + %llu backward, padded-slot bound %llu\n",
              counters.rows_forward, counters.rows_backward, bound);

  dpmd::FlopReport fr = dpmd::flop_report(cfg.n_atoms, model.total_slots(), model.d1());
  std::printf("embedding multiplies per eval: %.4g original, %.4g tabulated, ratio %.2fx, "
              "savings %.2f%%\n",
              fr.original, fr.tabulated, fr.ratio, fr.savings_percent);

  if (md_steps > 0) {
    std::vector<double> vel = dpmd::init_velocities(cfg, model, 330.0, g.seed);
    dpmd::MDConfig mc;
    mc.n_steps = md_steps;
    mc.n_workers = g.workers;
    mc.thermo_every = md_steps;
    t0 = now_s();
    dpmd::run_md(cfg, vel, model, tabs, mc);
    t1 = now_s();
    std::printf("md loop: %.3e s/step/atom over %d steps\n",
                (t1 - t0) / md_steps / cfg.n_atoms, md_steps);
  }

  {
    dpmd::TanhTable tt;
    const int n = 2000000;
    double sum1 = 0.0, sum2 = 0.0;
    std::vector<double> xs(n);
    dpmd::Rng rng(g.seed);
    for (int i = 0; i < n; ++i) xs[i] = (rng.uniform() - 0.5) * 18.0;
    t0 = now_s();
    for (int i = 0; i < n; ++i) sum1 += tt(xs[i]);
    t1 = now_s();
    double table_ns = (t1 - t0) / n * 1e9;
    t0 = now_s();
    for (int i = 0; i < n; ++i) sum2 += std::tanh(xs[i]);
    t1 = now_s();
    double libm_ns = (t1 - t0) / n * 1e9;
    std::printf("tanh: table %.1f ns/eval, libm %.1f ns/eval, %.1fx (drift check %.1e)\n",
                table_ns, libm_ns, libm_ns / table_ns, std::fabs(sum1 - sum2));
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  CLI::App app{"molecular dynamics with a table-compressed neural network potential"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "random seed for the active subcommand")
      ->capture_default_str();
  app.add_option("--workers", g.workers, "worker thread count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--format", g.format, "trajectory/config format")
      ->check(CLI::IsMember({"extxyz", "xyz"}))
      ->capture_default_str();

  std::string preset, out, model_path, table_path, config_path, thermo_path, traj_path;
  std::string preset_override;
  int nx = 3, ny = 3, nz = 3;
  double jitter = 0.1;
  double interval = 0.01;
  std::vector<double> intervals = {0.1, 0.01, 0.001};
  int n_configs = 100;
  long steps = 0;
  double dt = 1.0, temp = 330.0, buffer = 2.0;
  int rebuild_every = 50, thermo_every = 50;
  int exact_evals = 2, fused_evals = 10, md_steps = 20;

  CLI::App* gm = app.add_subcommand("gen-model", "draw a random model from a preset");
  gm->add_option("--preset", preset, "preset name")->required();
  gm->add_option("--out", out, "output model file")->required();

  CLI::App* gc = app.add_subcommand("gen-config", "generate a jittered fcc configuration");
  gc->add_option("--preset", preset, "preset name")->required();
  gc->add_option("--out", out, "output xyz file")->required();
  gc->add_option("--nx", nx, "cells along x")->capture_default_str();
  gc->add_option("--ny", ny, "cells along y")->capture_default_str();
  gc->add_option("--nz", nz, "cells along z")->capture_default_str();
  gc->add_option("--jitter", jitter, "uniform jitter amplitude (A)")->capture_default_str();

  CLI::App* cp = app.add_subcommand("compress", "tabulate a model's embedding nets");
  cp->add_option("--model", model_path, "model file")->required();
  cp->add_option("--interval", interval, "node spacing of the table")->required();
  cp->add_option("--out", out, "output table file")->required();

  CLI::App* va = app.add_subcommand("validate", "table accuracy sweep against the exact path");
  va->add_option("--model", model_path, "model file")->required();
  va->add_option("--intervals", intervals, "comma separated node spacings, descending")
      ->delimiter(',')
      ->capture_default_str();
  va->add_option("--nconfigs", n_configs, "configurations in the sweep")->capture_default_str();
  va->add_option("--nx", nx, "cells along x")->capture_default_str();
  va->add_option("--ny", ny, "cells along y")->capture_default_str();
  va->add_option("--nz", nz, "cells along z")->capture_default_str();
  va->add_option("--jitter", jitter, "uniform jitter amplitude (A)")->capture_default_str();
  va->add_option("--preset", preset_override, "override the preset recorded in the model file");

  CLI::App* rn = app.add_subcommand("run", "velocity Verlet MD on the fused table path");
  rn->add_option("--model", model_path, "model file")->required();
  rn->add_option("--table", table_path, "table file")->required();
  rn->add_option("--config", config_path, "initial configuration (extxyz)")->required();
  rn->add_option("--steps", steps, "number of MD steps")->required();
  rn->add_option("--dt", dt, "time step (fs)")->capture_default_str();
  rn->add_option("--temp", temp, "initial temperature (K)")->capture_default_str();
  rn->add_option("--buffer", buffer, "neighbor list buffer (A)")->capture_default_str();
  rn->add_option("--rebuild-every", rebuild_every, "list rebuild period (steps)")
      ->capture_default_str();
  rn->add_option("--thermo-every", thermo_every, "thermo output period (steps)")
      ->capture_default_str();
  rn->add_option("--thermo", thermo_path, "write thermo table to this csv file");
  rn->add_option("--traj", traj_path, "write trajectory frames to this extxyz file");

  CLI::App* be = app.add_subcommand("bench", "compare exact and fused evaluation speed");
  be->add_option("--model", model_path, "model file")->required();
  be->add_option("--table", table_path, "table file")->required();
  be->add_option("--config", config_path, "configuration (default: generated 3x3x3 block)");
  be->add_option("--exact-evals", exact_evals, "timed exact evaluations")->capture_default_str();
  be->add_option("--fused-evals", fused_evals, "timed fused evaluations")->capture_default_str();
  be->add_option("--md-steps", md_steps, "timed MD steps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gm->parsed()) return cmd_gen_model(g, preset, out);
    if (gc->parsed()) return cmd_gen_config(g, preset, out, nx, ny, nz, jitter);
    if (cp->parsed()) return cmd_compress(model_path, interval, out);
    if (va->parsed()) {
      return cmd_validate(g, model_path, intervals, n_configs, nx, ny, nz, jitter,
                          preset_override);
    }
    if (rn->parsed()) {
      return cmd_run(g, model_path, table_path, config_path, steps, dt, temp, buffer,
                     rebuild_every, thermo_every, thermo_path, traj_path);
    }
    if (be->parsed()) {
      return cmd_bench(g, model_path, table_path, config_path, exact_evals, fused_evals,
                       md_steps);
    }
  } catch (const dpmd::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const dpmd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
