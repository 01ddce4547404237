#include "dpmd/geom.hpp"

#include <cmath>

namespace dpmd {

void Cell::refresh() {
  const double* a = h.data();
  const double* b = h.data() + 3;
  const double* c = h.data() + 6;
  double bxc[3] = {b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2],
                   b[0] * c[1] - b[1] * c[0]};
  vol = a[0] * bxc[0] + a[1] * bxc[1] + a[2] * bxc[2];
  if (!(std::fabs(vol) > 1e-12)) {
    throw InputError("cell is singular or has near-zero volume");
  }
  double cxa[3] = {c[1] * a[2] - c[2] * a[1], c[2] * a[0] - c[0] * a[2],
                   c[0] * a[1] - c[1] * a[0]};
  double axb[3] = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                   a[0] * b[1] - a[1] * b[0]};
  // hinv columns are the reciprocal vectors, so that h * hinv = I with
  // rows-as-vectors convention: hinv[x][k] = recip_k[x] / vol.
  for (int x = 0; x < 3; ++x) {
    hinv[3 * x + 0] = bxc[x] / vol;
    hinv[3 * x + 1] = cxa[x] / vol;
    hinv[3 * x + 2] = axb[x] / vol;
  }
  if (vol < 0.0) vol = -vol;
}

double Cell::plane_spacing(int k) const {
  const double* u = h.data() + 3 * ((k + 1) % 3);
  const double* v = h.data() + 3 * ((k + 2) % 3);
  double cr[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                  u[0] * v[1] - u[1] * v[0]};
  double area = std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
  return vol / area;
}

void validate_config(const AtomicConfig& cfg, int n_types) {
  if (cfg.n_atoms <= 0) throw InputError("configuration has no atoms");
  if (static_cast<int>(cfg.pos.size()) != 3 * cfg.n_atoms) {
    throw InputError("position array size does not match atom count");
  }
  if (static_cast<int>(cfg.type.size()) != cfg.n_atoms) {
    throw InputError("type array size does not match atom count");
  }
  for (int i = 0; i < cfg.n_atoms; ++i) {
    if (cfg.type[i] < 0 || cfg.type[i] >= n_types) {
      throw InputError("atom type id out of range");
    }
  }
  for (double p : cfg.pos) {
    if (!std::isfinite(p)) throw InputError("non-finite atom position");
  }
}

} // namespace dpmd
