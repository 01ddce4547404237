#include "dpmd/table.hpp"

#include <cmath>

#include "dpmd/error.hpp"
#include "dpmd/switch_fn.hpp"

namespace dpmd {

namespace {

inline double node_x(const CompressionTable& tab, long th) {
  return tab.x0 + static_cast<double>(th) * tab.h;
}

// Interval index and local coordinate for input x. floor() can land one off
// at interval boundaries, so nudge until node(th) <= x < node(th+1) holds in
// the exact arithmetic used to build the nodes. Inputs past the end clamp to
// the last interval with u > h, inputs below x0 are rejected.
inline std::size_t locate(const CompressionTable& tab, double x, double& u, bool& extrap) {
  if (!(x >= tab.x0)) throw InputError("table input below domain start");
  long th = static_cast<long>(std::floor((x - tab.x0) / tab.h));
  while (node_x(tab, th + 1) <= x) ++th;
  while (th > 0 && node_x(tab, th) > x) --th;
  extrap = false;
  if (th >= static_cast<long>(tab.n)) {
    th = static_cast<long>(tab.n) - 1;
    extrap = x > tab.x_end();
  }
  u = x - node_x(tab, th);
  return static_cast<std::size_t>(th);
}

} // namespace

TableEvalInfo eval_table(const CompressionTable& tab, double x, double* row, double* row1) {
  TableEvalInfo info;
  double u;
  std::size_t th = locate(tab, x, u, info.extrapolated);
  const double* iv = tab.interval(th);
  const int bsz = tab.block;
  const int nb = tab.n_blocks();
  for (int b = 0; b < nb; ++b) {
    const double* c = iv + static_cast<std::size_t>(b) * 6 * bsz;
    const int lo = b * bsz;
    const int cnt = std::min(bsz, tab.m - lo);
    for (int f = 0; f < cnt; ++f) {
      double a0 = c[f], a1 = c[bsz + f], a2 = c[2 * bsz + f];
      double a3 = c[3 * bsz + f], a4 = c[4 * bsz + f], a5 = c[5 * bsz + f];
      row[lo + f] = ((((a5 * u + a4) * u + a3) * u + a2) * u + a1) * u + a0;
      row1[lo + f] = (((5.0 * a5 * u + 4.0 * a4) * u + 3.0 * a3) * u + 2.0 * a2) * u + a1;
    }
  }
  return info;
}

TableEvalInfo eval_table_value(const CompressionTable& tab, double x, double* row) {
  TableEvalInfo info;
  double u;
  std::size_t th = locate(tab, x, u, info.extrapolated);
  const double* iv = tab.interval(th);
  const int bsz = tab.block;
  const int nb = tab.n_blocks();
  for (int b = 0; b < nb; ++b) {
    const double* c = iv + static_cast<std::size_t>(b) * 6 * bsz;
    const int lo = b * bsz;
    const int cnt = std::min(bsz, tab.m - lo);
    for (int f = 0; f < cnt; ++f) {
      double a0 = c[f], a1 = c[bsz + f], a2 = c[2 * bsz + f];
      double a3 = c[3 * bsz + f], a4 = c[4 * bsz + f], a5 = c[5 * bsz + f];
      row[lo + f] = ((((a5 * u + a4) * u + a3) * u + a2) * u + a1) * u + a0;
    }
  }
  return info;
}

CompressionTable build_table(const EmbeddingNet& net, double x0, double x_end, double h) {
  if (!(h > 0.0)) throw InputError("table step must be positive");
  if (!(x_end > x0)) throw InputError("table domain is empty");

  CompressionTable tab;
  tab.x0 = x0;
  tab.h = h;
  tab.m = net.output_width();
  tab.n = static_cast<std::size_t>(std::ceil((x_end - x0) / h - 1e-9));
  if (tab.n == 0) tab.n = 1;
  tab.coeffs.assign(tab.n * tab.interval_stride(), 0.0);

  const int m = tab.m;
  const long n_nodes = static_cast<long>(tab.n) + 1;
  std::vector<double> val(n_nodes * static_cast<std::size_t>(m));
  std::vector<double> d1(val.size()), d2(val.size());

#pragma omp parallel for schedule(static)
  for (long k = 0; k < n_nodes; ++k) {
    std::size_t off = static_cast<std::size_t>(k) * m;
    embedding_derivatives(net, node_x(tab, k), &val[off], &d1[off], &d2[off]);
  }

  const int bsz = tab.block;
#pragma omp parallel for schedule(static)
  for (long th = 0; th < static_cast<long>(tab.n); ++th) {
    double hl = node_x(tab, th + 1) - node_x(tab, th);
    const double* f0 = &val[static_cast<std::size_t>(th) * m];
    const double* f10 = &d1[static_cast<std::size_t>(th) * m];
    const double* f20 = &d2[static_cast<std::size_t>(th) * m];
    const double* fr = f0 + m;
    const double* f1r = f10 + m;
    const double* f2r = f20 + m;
    double* iv = tab.interval(static_cast<std::size_t>(th));
    for (int p = 0; p < m; ++p) {
      double a0 = f0[p];
      double a1 = f10[p];
      double a2 = 0.5 * f20[p];
      double dv = fr[p] - (a0 + a1 * hl + a2 * hl * hl);
      double dg = f1r[p] - (a1 + 2.0 * a2 * hl);
      double dc = f2r[p] - 2.0 * a2;
      double h2 = hl * hl;
      double h3 = h2 * hl;
      double a3 = (10.0 * dv - 4.0 * hl * dg + 0.5 * h2 * dc) / h3;
      double a4 = (-15.0 * dv + 7.0 * hl * dg - h2 * dc) / (h3 * hl);
      double a5 = (6.0 * dv - 3.0 * hl * dg + 0.5 * h2 * dc) / (h3 * h2);
      double* c = iv + static_cast<std::size_t>(p / bsz) * 6 * bsz;
      int f = p % bsz;
      c[f] = a0;
      c[bsz + f] = a1;
      c[2 * bsz + f] = a2;
      c[3 * bsz + f] = a3;
      c[4 * bsz + f] = a4;
      c[5 * bsz + f] = a5;
    }
  }

  // Every node of the finished table must reproduce the net before anyone
  // uses it. This also exercises the blocked layout end to end.
  std::vector<double> row(m);
  for (long k = 0; k < n_nodes; ++k) {
    eval_table_value(tab, node_x(tab, k), row.data());
    const double* f = &val[static_cast<std::size_t>(k) * m];
    for (int p = 0; p < m; ++p) {
      double err = std::fabs(row[p] - f[p]);
      double scale = std::max(1.0, std::fabs(f[p]));
      if (!(err <= 1e-10 * scale)) {
        throw NumericalError("table verification failed at a node");
      }
    }
  }
  return tab;
}

double table_domain_end(const DPModel& model, double r_min) {
  return switch_weight(r_min, model.r_smooth, model.r_cut) / r_min;
}

std::vector<CompressionTable> build_tables(const DPModel& model, double h) {
  double x_end = table_domain_end(model);
  if (!(x_end > 0.0)) throw InputError("table domain end is not positive");
  std::vector<CompressionTable> tabs;
  tabs.reserve(model.embedding.size());
  for (const auto& net : model.embedding) tabs.push_back(build_table(net, 0.0, x_end, h));
  return tabs;
}

} // namespace dpmd
