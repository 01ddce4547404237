#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dpmd/geom.hpp"
#include "dpmd/model.hpp"
#include "dpmd/rng.hpp"

namespace testutil {

inline double rel_err(double a, double b, double floor_ = 1e-12) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor_});
}

// Random model of arbitrary shape, weight scales matching the generator:
// weights N(0, 1/fan_in), biases N(0, 1), first fitting layer shrunk by
// fit_scale so unnormalized descriptors do not saturate the tanh units.
inline dpmd::DPModel make_test_model(int n_types, int d1, int m_lt, int fit_width, int n_hidden,
                                     std::vector<int> max_nbr, double r_cut, double r_smooth,
                                     std::uint64_t seed, double fit_scale = 0.2) {
  dpmd::DPModel m;
  m.r_cut = r_cut;
  m.r_smooth = r_smooth;
  m.m_lt = m_lt;
  m.max_nbr = std::move(max_nbr);
  for (int t = 0; t < n_types; ++t) {
    m.species.push_back(std::string(1, static_cast<char>('A' + t)));
    m.masses.push_back(10.0 + t);
  }
  dpmd::Rng rng(seed);
  auto fill = [&](std::vector<double>& v, std::size_t n, double sigma) {
    v.resize(n);
    for (auto& x : v) x = sigma * rng.gaussian();
  };
  for (int t = 0; t < n_types; ++t) {
    dpmd::EmbeddingNet e;
    e.d1 = d1;
    fill(e.w0, d1, 1.0);
    fill(e.b0, d1, 1.0);
    fill(e.w1, static_cast<std::size_t>(d1) * 2 * d1, 1.0 / std::sqrt(double(d1)));
    fill(e.b1, 2 * d1, 1.0);
    fill(e.w2, static_cast<std::size_t>(2 * d1) * 4 * d1, 1.0 / std::sqrt(double(2 * d1)));
    fill(e.b2, 4 * d1, 1.0);
    m.embedding.push_back(std::move(e));
  }
  const int din = m_lt * 4 * d1;
  for (int t = 0; t < n_types; ++t) {
    dpmd::FittingNet f;
    f.input_width = din;
    f.width = fit_width;
    int cur = din;
    for (int k = 0; k < n_hidden; ++k) {
      dpmd::DenseLayer l;
      l.in = cur;
      l.out = fit_width;
      double sigma = 1.0 / std::sqrt(double(cur));
      if (k == 0) sigma *= fit_scale;
      fill(l.w, static_cast<std::size_t>(l.in) * l.out, sigma);
      fill(l.b, l.out, 0.1);
      cur = l.out;
      f.hidden.push_back(std::move(l));
    }
    fill(f.w_out, cur, 1.0 / std::sqrt(double(cur)));
    f.b_out = 0.0;
    m.fitting.push_back(std::move(f));
  }
  m.validate();
  return m;
}

// Random periodic configuration with a minimum separation kept by rejection.
inline dpmd::AtomicConfig make_random_config(int n, int n_types, double box, double min_sep,
                                             std::uint64_t seed) {
  dpmd::AtomicConfig cfg;
  cfg.cell = dpmd::Cell({box, 0, 0, 0, box, 0, 0, 0, box}, {true, true, true});
  for (int t = 0; t < n_types; ++t) cfg.type_names.push_back(std::string(1, 'A' + t));
  dpmd::Rng rng(seed);
  while (cfg.n_atoms < n) {
    double p[3] = {box * rng.uniform(), box * rng.uniform(), box * rng.uniform()};
    bool ok = true;
    for (int i = 0; i < cfg.n_atoms && ok; ++i) {
      double d2 = 0.0;
      for (int x = 0; x < 3; ++x) {
        double d = p[x] - cfg.pos[3 * i + x];
        d -= box * std::round(d / box);
        d2 += d * d;
      }
      if (d2 < min_sep * min_sep) ok = false;
    }
    if (!ok) continue;
    cfg.pos.insert(cfg.pos.end(), {p[0], p[1], p[2]});
    cfg.type.push_back(static_cast<int>(rng.raw() % n_types));
    ++cfg.n_atoms;
  }
  return cfg;
}

} // namespace testutil
