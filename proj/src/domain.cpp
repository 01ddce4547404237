#include "dpmd/domain.hpp"

#include <algorithm>
#include <cmath>

namespace dpmd {

namespace {

// Circular distance from x to the closed interval [lo, hi] on the unit wrap.
double circ_dist(double x, double lo, double hi, bool periodic) {
  if (x >= lo && x <= hi) return 0.0;
  double d1 = (x < lo) ? lo - x : x - hi;
  if (!periodic) return d1;
  double d2 = (x < lo) ? x + 1.0 - hi : lo + 1.0 - x;
  return std::min(d1, d2);
}

} // namespace

Partition partition_domain(const AtomicConfig& cfg, int n_workers, double margin) {
  if (n_workers < 1) throw InputError("worker count must be at least 1");
  const int n = cfg.n_atoms;
  if (n_workers > n) n_workers = n;

  Partition part;
  double best = -1.0;
  for (int k = 0; k < 3; ++k) {
    double sp = cfg.cell.plane_spacing(k);
    if (sp > best) {
      best = sp;
      part.axis = k;
    }
  }
  const int ax = part.axis;
  const bool per = cfg.cell.periodic[ax];
  const double margin_frac = margin / cfg.cell.plane_spacing(ax);

  std::vector<double> fw(n);
  for (int i = 0; i < n; ++i) {
    double f[3];
    cfg.cell.frac(&cfg.pos[3 * i], f);
    fw[i] = per ? f[ax] - std::floor(f[ax]) : f[ax];
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fw[a] != fw[b]) return fw[a] < fw[b];
    return a < b;
  });

  part.workers.resize(n_workers);
  int base = n / n_workers;
  int extra = n % n_workers;
  int at = 0;
  for (int w = 0; w < n_workers; ++w) {
    int cnt = base + (w < extra ? 1 : 0);
    WorkerDomain& wd = part.workers[w];
    wd.owned.assign(order.begin() + at, order.begin() + at + cnt);
    at += cnt;
    std::sort(wd.owned.begin(), wd.owned.end());
    wd.lo = fw[wd.owned[0]];
    wd.hi = wd.lo;
    for (int id : wd.owned) {
      wd.lo = std::min(wd.lo, fw[id]);
      wd.hi = std::max(wd.hi, fw[id]);
    }
  }

  std::vector<char> is_owned(n, 0);
  for (int w = 0; w < n_workers; ++w) {
    WorkerDomain& wd = part.workers[w];
    for (int id : wd.owned) is_owned[id] = 1;
    for (int j = 0; j < n; ++j) {
      if (!is_owned[j] && circ_dist(fw[j], wd.lo, wd.hi, per) <= margin_frac) {
        wd.ghosts.push_back(j);
      }
    }
    for (int id : wd.owned) is_owned[id] = 0;
  }
  return part;
}

} // namespace dpmd
