#include "dpmd/neighbor.hpp"

#include <algorithm>
#include <cmath>

namespace dpmd {

namespace {

void sort_canonical(std::vector<NeighborEntry>& v) {
  std::sort(v.begin(), v.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
    if (a.j != b.j) return a.j < b.j;
    if (a.shift[0] != b.shift[0]) return a.shift[0] < b.shift[0];
    if (a.shift[1] != b.shift[1]) return a.shift[1] < b.shift[1];
    return a.shift[2] < b.shift[2];
  });
}

// Enumerate every image shift s for which atom j can lie within the cutoff
// of atom i, and hand each in-range image to the callback. The bound per
// axis comes from the plane spacing: a fractional offset of more than
// cutoff/spacing along one axis already exceeds the cutoff.
template <class F>
void scan_images(const AtomicConfig& cfg, double cutoff, int i, int j, const double* frac,
                 const double* margin, F&& accept) {
  const double cut2 = cutoff * cutoff;
  int lo[3], hi[3];
  for (int k = 0; k < 3; ++k) {
    if (cfg.cell.periodic[k]) {
      double diff = frac[3 * j + k] - frac[3 * i + k];
      lo[k] = static_cast<int>(std::ceil(-diff - margin[k] - 1e-12));
      hi[k] = static_cast<int>(std::floor(-diff + margin[k] + 1e-12));
    } else {
      lo[k] = hi[k] = 0;
    }
  }
  int s[3];
  for (s[0] = lo[0]; s[0] <= hi[0]; ++s[0]) {
    for (s[1] = lo[1]; s[1] <= hi[1]; ++s[1]) {
      for (s[2] = lo[2]; s[2] <= hi[2]; ++s[2]) {
        if (i == j && s[0] == 0 && s[1] == 0 && s[2] == 0) continue;
        auto d = displacement(&cfg.pos[3 * i], &cfg.pos[3 * j], s, cfg.cell);
        double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if (r2 <= cut2) accept(s);
      }
    }
  }
}

void compute_fracs(const AtomicConfig& cfg, std::vector<double>& frac) {
  frac.resize(3 * cfg.n_atoms);
  for (int i = 0; i < cfg.n_atoms; ++i) {
    cfg.cell.frac(&cfg.pos[3 * i], &frac[3 * i]);
  }
}

void compute_margins(const AtomicConfig& cfg, double cutoff, double* margin) {
  for (int k = 0; k < 3; ++k) margin[k] = cutoff / cfg.cell.plane_spacing(k);
}

} // namespace

NeighborList build_neighbor_list_brute(const AtomicConfig& cfg, double cutoff) {
  NeighborList list;
  list.cutoff = cutoff;
  list.ref_pos = cfg.pos;
  list.nbr.assign(cfg.n_atoms, {});

  std::vector<double> frac;
  compute_fracs(cfg, frac);
  double margin[3];
  compute_margins(cfg, cutoff, margin);

  for (int i = 0; i < cfg.n_atoms; ++i) {
    for (int j = i; j < cfg.n_atoms; ++j) {
      scan_images(cfg, cutoff, i, j, frac.data(), margin, [&](const int* s) {
        list.nbr[i].push_back({j, {s[0], s[1], s[2]}});
        if (j != i) list.nbr[j].push_back({i, {-s[0], -s[1], -s[2]}});
      });
    }
  }
  for (auto& v : list.nbr) sort_canonical(v);
  return list;
}

namespace {

NeighborList build_neighbor_list_cells(const AtomicConfig& cfg, double cutoff, const int* nb) {
  NeighborList list;
  list.cutoff = cutoff;
  list.ref_pos = cfg.pos;
  list.nbr.assign(cfg.n_atoms, {});

  const int n = cfg.n_atoms;
  std::vector<double> frac;
  compute_fracs(cfg, frac);

  // Wrap every atom into the primary cell and bin it. The wrap count is kept
  // so the reported shifts refer to the raw input positions.
  std::vector<int> wrap(3 * n), bin(n);
  const int nbins = nb[0] * nb[1] * nb[2];
  std::vector<int> head(nbins, -1), next(n, -1);
  for (int i = 0; i < n; ++i) {
    int b[3];
    for (int k = 0; k < 3; ++k) {
      double f = frac[3 * i + k];
      double fl = std::floor(f);
      wrap[3 * i + k] = -static_cast<int>(fl);
      double fw = f - fl;
      int bk = static_cast<int>(fw * nb[k]);
      if (bk >= nb[k]) bk = nb[k] - 1;
      if (bk < 0) bk = 0;
      b[k] = bk;
    }
    bin[i] = (b[0] * nb[1] + b[1]) * nb[2] + b[2];
    next[i] = head[bin[i]];
    head[bin[i]] = i;
  }

  const double cut2 = cutoff * cutoff;
  for (int i = 0; i < n; ++i) {
    int bi[3] = {bin[i] / (nb[1] * nb[2]), (bin[i] / nb[2]) % nb[1], bin[i] % nb[2]};
    for (int d0 = -1; d0 <= 1; ++d0) {
      for (int d1 = -1; d1 <= 1; ++d1) {
        for (int d2 = -1; d2 <= 1; ++d2) {
          int db[3] = {d0, d1, d2};
          int bq[3], wq[3];
          for (int k = 0; k < 3; ++k) {
            int t = bi[k] + db[k];
            wq[k] = 0;
            if (t < 0) {
              t += nb[k];
              wq[k] = -1;
            } else if (t >= nb[k]) {
              t -= nb[k];
              wq[k] = 1;
            }
            bq[k] = t;
          }
          int cell_q = (bq[0] * nb[1] + bq[1]) * nb[2] + bq[2];
          for (int q = head[cell_q]; q >= 0; q = next[q]) {
            if (q <= i) continue;
            int s[3];
            for (int k = 0; k < 3; ++k) s[k] = wrap[3 * q + k] + wq[k] - wrap[3 * i + k];
            auto d = displacement(&cfg.pos[3 * i], &cfg.pos[3 * q], s, cfg.cell);
            double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if (r2 <= cut2) {
              list.nbr[i].push_back({q, {s[0], s[1], s[2]}});
              list.nbr[q].push_back({i, {-s[0], -s[1], -s[2]}});
            }
          }
        }
      }
    }
  }
  for (auto& v : list.nbr) sort_canonical(v);
  return list;
}

} // namespace

NeighborList build_neighbor_list(const AtomicConfig& cfg, double cutoff) {
  if (cutoff <= 0.0) throw InputError("neighbor cutoff must be positive");
  bool cells_ok = cfg.n_atoms > 0;
  int nb[3];
  for (int k = 0; k < 3; ++k) {
    if (!cfg.cell.periodic[k]) {
      cells_ok = false;
      break;
    }
    nb[k] = static_cast<int>(std::floor(cfg.cell.plane_spacing(k) / cutoff));
    if (nb[k] < 3) {
      cells_ok = false;
      break;
    }
  }
  if (cells_ok) return build_neighbor_list_cells(cfg, cutoff, nb);
  return build_neighbor_list_brute(cfg, cutoff);
}

double max_displacement_since(const NeighborList& list, const AtomicConfig& cfg) {
  double best2 = 0.0;
  for (int i = 0; i < cfg.n_atoms; ++i) {
    double d2 = 0.0;
    for (int x = 0; x < 3; ++x) {
      double d = cfg.pos[3 * i + x] - list.ref_pos[3 * i + x];
      d2 += d * d;
    }
    if (d2 > best2) best2 = d2;
  }
  return std::sqrt(best2);
}

void build_neighbor_lists_subset(const AtomicConfig& cfg, double cutoff,
                                 const std::vector<int>& centers,
                                 const std::vector<int>& candidates,
                                 std::vector<std::vector<NeighborEntry>>& out) {
  std::vector<double> frac;
  compute_fracs(cfg, frac);
  double margin[3];
  compute_margins(cfg, cutoff, margin);

  out.assign(centers.size(), {});
  for (std::size_t c = 0; c < centers.size(); ++c) {
    int i = centers[c];
    for (int j : candidates) {
      scan_images(cfg, cutoff, i, j, frac.data(), margin, [&](const int* s) {
        out[c].push_back({j, {s[0], s[1], s[2]}});
      });
    }
    sort_canonical(out[c]);
  }
}

} // namespace dpmd
