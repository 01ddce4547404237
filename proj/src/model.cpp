#include "dpmd/model.hpp"

#include <cmath>

namespace dpmd {

void DPModel::validate() const {
  int nt = n_types();
  if (nt <= 0) throw InputError("model has no species");
  if (static_cast<int>(masses.size()) != nt) throw InputError("model masses size mismatch");
  if (static_cast<int>(max_nbr.size()) != nt) throw InputError("model max_nbr size mismatch");
  if (static_cast<int>(embedding.size()) != nt) throw InputError("model embedding count mismatch");
  if (static_cast<int>(fitting.size()) != nt) throw InputError("model fitting count mismatch");
  if (!(r_cut > 0.0) || !(r_smooth >= 0.0) || !(r_smooth < r_cut)) {
    throw InputError("model cutoffs must satisfy 0 <= r_smooth < r_cut");
  }
  for (int c : max_nbr) {
    if (c <= 0) throw InputError("model max_nbr entries must be positive");
  }
  int d = embedding[0].d1;
  if (d <= 0) throw InputError("embedding width must be positive");
  for (const auto& e : embedding) {
    if (e.d1 != d) throw InputError("all embedding nets must share d1");
    if (static_cast<int>(e.w0.size()) != d || static_cast<int>(e.b0.size()) != d ||
        static_cast<int>(e.w1.size()) != d * 2 * d || static_cast<int>(e.b1.size()) != 2 * d ||
        static_cast<int>(e.w2.size()) != 2 * d * 4 * d || static_cast<int>(e.b2.size()) != 4 * d) {
      throw InputError("embedding net parameter shapes are inconsistent");
    }
  }
  if (m_lt <= 0 || m_lt > 4 * d) throw InputError("m_lt must lie in [1, 4*d1]");
  int din = m_lt * 4 * d;
  for (const auto& f : fitting) {
    if (f.input_width != din) throw InputError("fitting input width does not match descriptor");
    if (f.hidden.empty()) throw InputError("fitting net needs at least one hidden layer");
    int cur = din;
    for (const auto& l : f.hidden) {
      if (l.in != cur || l.out <= 0) throw InputError("fitting layer widths are inconsistent");
      if (static_cast<int>(l.w.size()) != l.in * l.out ||
          static_cast<int>(l.b.size()) != l.out) {
        throw InputError("fitting layer parameter shapes are inconsistent");
      }
      cur = l.out;
    }
    if (static_cast<int>(f.w_out.size()) != cur) {
      throw InputError("fitting output weights do not match last hidden width");
    }
  }
}

void embedding_forward(const EmbeddingNet& net, const double* s, int n, double* g,
                       unsigned long long* mults) {
  const int d1 = net.d1;
  const int d2 = 2 * d1;
  const int d4 = 4 * d1;
  std::vector<double> a0(d1), a1(d2);
  for (int i = 0; i < n; ++i) {
    double x = s[i];
    for (int u = 0; u < d1; ++u) a0[u] = std::tanh(x * net.w0[u] + net.b0[u]);
    for (int v = 0; v < d2; ++v) {
      double z = net.b1[v];
      for (int u = 0; u < d1; ++u) z += a0[u] * net.w1[u * d2 + v];
      a1[v] = a0[v % d1] + std::tanh(z);
    }
    double* out = g + static_cast<std::size_t>(i) * d4;
    for (int v = 0; v < d4; ++v) {
      double z = net.b2[v];
      for (int u = 0; u < d2; ++u) z += a1[u] * net.w2[u * d4 + v];
      out[v] = a1[v % d2] + std::tanh(z);
    }
  }
  if (mults) {
    *mults += static_cast<unsigned long long>(n) *
              (static_cast<unsigned long long>(d1) + 10ull * d1 * d1);
  }
}

void embedding_value_grad(const EmbeddingNet& net, double s, double* g, double* g1) {
  const int d1 = net.d1;
  const int d2 = 2 * d1;
  const int d4 = 4 * d1;
  std::vector<double> a0(d1), a0g(d1), a1(d2), a1g(d2);
  for (int u = 0; u < d1; ++u) {
    double t = std::tanh(s * net.w0[u] + net.b0[u]);
    a0[u] = t;
    a0g[u] = (1.0 - t * t) * net.w0[u];
  }
  for (int v = 0; v < d2; ++v) {
    double z = net.b1[v], zg = 0.0;
    for (int u = 0; u < d1; ++u) {
      z += a0[u] * net.w1[u * d2 + v];
      zg += a0g[u] * net.w1[u * d2 + v];
    }
    double t = std::tanh(z);
    a1[v] = a0[v % d1] + t;
    a1g[v] = a0g[v % d1] + (1.0 - t * t) * zg;
  }
  for (int v = 0; v < d4; ++v) {
    double z = net.b2[v], zg = 0.0;
    for (int u = 0; u < d2; ++u) {
      z += a1[u] * net.w2[u * d4 + v];
      zg += a1g[u] * net.w2[u * d4 + v];
    }
    double t = std::tanh(z);
    g[v] = a1[v % d2] + t;
    g1[v] = a1g[v % d2] + (1.0 - t * t) * zg;
  }
}

void embedding_derivatives(const EmbeddingNet& net, double s, double* g, double* g1, double* g2) {
  const int d1 = net.d1;
  const int d2 = 2 * d1;
  const int d4 = 4 * d1;
  std::vector<double> a(d2), ag(d2), agg(d2), b(d2), bg(d2), bgg(d2);
  for (int u = 0; u < d1; ++u) {
    double t = std::tanh(s * net.w0[u] + net.b0[u]);
    double dt = 1.0 - t * t;
    a[u] = t;
    ag[u] = dt * net.w0[u];
    agg[u] = -2.0 * t * dt * net.w0[u] * net.w0[u];
  }
  for (int v = 0; v < d2; ++v) {
    double z = net.b1[v], zg = 0.0, zgg = 0.0;
    for (int u = 0; u < d1; ++u) {
      double w = net.w1[u * d2 + v];
      z += a[u] * w;
      zg += ag[u] * w;
      zgg += agg[u] * w;
    }
    double t = std::tanh(z);
    double dt = 1.0 - t * t;
    b[v] = a[v % d1] + t;
    bg[v] = ag[v % d1] + dt * zg;
    bgg[v] = agg[v % d1] + dt * zgg - 2.0 * t * dt * zg * zg;
  }
  for (int v = 0; v < d4; ++v) {
    double z = net.b2[v], zg = 0.0, zgg = 0.0;
    for (int u = 0; u < d2; ++u) {
      double w = net.w2[u * d4 + v];
      z += b[u] * w;
      zg += bg[u] * w;
      zgg += bgg[u] * w;
    }
    double t = std::tanh(z);
    double dt = 1.0 - t * t;
    g[v] = b[v % d2] + t;
    g1[v] = bg[v % d2] + dt * zg;
    g2[v] = bgg[v % d2] + dt * zgg - 2.0 * t * dt * zg * zg;
  }
}

double fitting_forward(const FittingNet& net, const double* d, FittingWorkspace& ws) {
  const int nl = static_cast<int>(net.hidden.size());
  ws.t.resize(nl);
  int maxw = net.input_width;
  for (const auto& l : net.hidden) maxw = std::max(maxw, l.out);
  ws.buf_a.resize(maxw);
  ws.buf_b.resize(maxw);

  const double* cur = d;
  double* nxt = ws.buf_a.data();
  double* other = ws.buf_b.data();
  for (int k = 0; k < nl; ++k) {
    const DenseLayer& l = net.hidden[k];
    ws.t[k].resize(l.out);
    bool shortcut = (l.in == l.out);
    for (int v = 0; v < l.out; ++v) {
      double z = l.b[v];
      for (int u = 0; u < l.in; ++u) z += cur[u] * l.w[u * l.out + v];
      double t = std::tanh(z);
      ws.t[k][v] = t;
      nxt[v] = (shortcut ? cur[v] : 0.0) + t;
    }
    cur = nxt;
    std::swap(nxt, other);
  }
  double e = net.b_out;
  const int last = net.hidden.back().out;
  for (int u = 0; u < last; ++u) e += cur[u] * net.w_out[u];
  return e;
}

void fitting_backward(const FittingNet& net, const FittingWorkspace& ws, double* d_grad) {
  const int nl = static_cast<int>(net.hidden.size());
  int maxw = net.input_width;
  for (const auto& l : net.hidden) maxw = std::max(maxw, l.out);
  std::vector<double> dy(net.w_out.begin(), net.w_out.end());
  std::vector<double> dz(maxw), dx(maxw);
  for (int k = nl - 1; k >= 0; --k) {
    const DenseLayer& l = net.hidden[k];
    bool shortcut = (l.in == l.out);
    for (int v = 0; v < l.out; ++v) {
      double t = ws.t[k][v];
      dz[v] = dy[v] * (1.0 - t * t);
    }
    for (int u = 0; u < l.in; ++u) {
      double acc = shortcut ? dy[u] : 0.0;
      for (int v = 0; v < l.out; ++v) acc += l.w[u * l.out + v] * dz[v];
      dx[u] = acc;
    }
    dy.assign(dx.begin(), dx.begin() + l.in);
  }
  for (int u = 0; u < net.input_width; ++u) d_grad[u] = dy[u];
}

} // namespace dpmd
