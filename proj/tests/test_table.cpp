#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dpmd/error.hpp"
#include "dpmd/model.hpp"
#include "dpmd/rng.hpp"
#include "dpmd/table.hpp"
#include "dpmd/table_io.hpp"
#include "dpmd/tanh_table.hpp"
#include "helpers.hpp"

using namespace dpmd;

namespace {

// Largest relative deviation between the table and the net over probe points.
double table_error(const CompressionTable& tab, const EmbeddingNet& net,
                   const std::vector<double>& probes) {
  const int m = net.output_width();
  std::vector<double> row(m), ref(m);
  double worst = 0.0;
  for (double x : probes) {
    eval_table_value(tab, x, row.data());
    embedding_forward(net, &x, 1, ref.data());
    for (int p = 0; p < m; ++p) {
      worst = std::max(worst, std::fabs(row[p] - ref[p]) / std::max(1.0, std::fabs(ref[p])));
    }
  }
  return worst;
}

} // namespace

TEST_CASE("table reproduces the net bitwise at every node") {
  auto model = testutil::make_test_model(1, 5, 8, 12, 2, {8}, 6.0, 5.0, 301);
  const auto& net = model.embedding[0];
  const double h = 0.05;
  auto tab = build_table(net, 0.0, 1.7, h);
  CHECK(tab.m == 20);
  CHECK(tab.n == 34);

  const int m = tab.m;
  std::vector<double> row(m), row1(m), ref(m), ref1(m);
  for (std::size_t k = 0; k <= tab.n; ++k) {
    double x = tab.x0 + static_cast<double>(k) * tab.h;
    auto info = eval_table(tab, x, row.data(), row1.data());
    CHECK(!info.extrapolated);
    embedding_value_grad(net, x, ref.data(), ref1.data());
    for (int p = 0; p < m; ++p) {
      // Left-interval nodes store value and slope as a0, a1 directly; the
      // final node is the right end of the last interval and lands on the
      // Horner sum instead, which the build already verified to 1e-10.
      if (k < tab.n) {
        CHECK(row[p] == ref[p]);
        CHECK(row1[p] == ref1[p]);
      } else {
        CHECK(testutil::rel_err(row[p], ref[p]) < 1e-10);
        CHECK(testutil::rel_err(row1[p], ref1[p]) < 1e-8);
      }
    }
  }
}

TEST_CASE("table is C2 across interior nodes") {
  auto model = testutil::make_test_model(1, 4, 8, 12, 2, {8}, 6.0, 5.0, 303);
  const auto& net = model.embedding[0];
  auto tab = build_table(net, 0.0, 1.0, 0.125);
  const int m = tab.m;
  std::vector<double> rl(m), rl1(m), rr(m), rr1(m);
  for (std::size_t k = 1; k < tab.n; ++k) {
    double x = tab.x0 + static_cast<double>(k) * tab.h;
    double xl = std::nextafter(x, -1.0);
    eval_table(tab, xl, rl.data(), rl1.data());
    eval_table(tab, x, rr.data(), rr1.data());
    for (int p = 0; p < m; ++p) {
      CHECK(testutil::rel_err(rl[p], rr[p], 1e-9) < 1e-9);
      CHECK(testutil::rel_err(rl1[p], rr1[p], 1e-6) < 1e-6);
    }
  }
}

TEST_CASE("table derivative matches a finite difference of the value") {
  auto model = testutil::make_test_model(1, 6, 8, 12, 2, {8}, 6.0, 5.0, 307);
  const auto& net = model.embedding[0];
  auto tab = build_table(net, 0.0, 1.5, 0.01);
  const int m = tab.m;
  std::vector<double> row(m), row1(m), lo(m), hi(m);
  Rng rng(11);
  const double eps = 1e-6;
  for (int trial = 0; trial < 40; ++trial) {
    double x = 0.01 + 1.45 * rng.uniform();
    eval_table(tab, x, row.data(), row1.data());
    eval_table_value(tab, x - eps, lo.data());
    eval_table_value(tab, x + eps, hi.data());
    for (int p = 0; p < m; ++p) {
      double fd = (hi[p] - lo[p]) / (2.0 * eps);
      CHECK(testutil::rel_err(row1[p], fd, 1e-6) < 1e-4);
    }
  }
}

TEST_CASE("table error falls at sixth order in the step") {
  auto model = testutil::make_test_model(1, 6, 8, 12, 2, {8}, 6.0, 5.0, 311);
  const auto& net = model.embedding[0];
  std::vector<double> probes;
  Rng rng(13);
  for (int i = 0; i < 200; ++i) probes.push_back(1.9 * rng.uniform());

  double e1 = table_error(build_table(net, 0.0, 2.0, 0.2), net, probes);
  double e2 = table_error(build_table(net, 0.0, 2.0, 0.02), net, probes);
  double slope = std::log10(e1 / e2);
  CHECK(e2 < e1);
  CHECK(slope >= 5.5);
  // One more decade pushes into roundoff, but must never get worse.
  double e3 = table_error(build_table(net, 0.0, 2.0, 0.002), net, probes);
  CHECK(e3 < e2);
}

TEST_CASE("inputs outside the domain are rejected or flagged") {
  auto model = testutil::make_test_model(1, 4, 8, 12, 2, {8}, 6.0, 5.0, 313);
  const auto& net = model.embedding[0];
  auto tab = build_table(net, 0.0, 1.0, 0.1);
  const int m = tab.m;
  std::vector<double> row(m), row1(m);

  CHECK_THROWS_AS(eval_table(tab, -1e-12, row.data(), row1.data()), InputError);
  CHECK_THROWS_AS(eval_table_value(tab, -0.5, row.data()), InputError);

  CHECK(!eval_table(tab, 1.0, row.data(), row1.data()).extrapolated);
  CHECK(eval_table(tab, 1.0 + 1e-9, row.data(), row1.data()).extrapolated);
  CHECK(eval_table(tab, 1.4, row.data(), row1.data()).extrapolated);

  // Extrapolation continues the last interval's polynomial smoothly.
  std::vector<double> end_row(m);
  eval_table_value(tab, 1.0, end_row.data());
  eval_table_value(tab, 1.0 + 1e-8, row.data());
  for (int p = 0; p < m; ++p) CHECK(testutil::rel_err(row[p], end_row[p], 1e-9) < 1e-6);
}

TEST_CASE("ragged final interval still ends at the requested domain edge") {
  auto model = testutil::make_test_model(1, 4, 8, 12, 2, {8}, 6.0, 5.0, 317);
  const auto& net = model.embedding[0];
  // 0.377 / 0.01 leaves a short last interval.
  auto tab = build_table(net, 0.0, 0.377, 0.01);
  CHECK(tab.n == 38);
  CHECK(tab.x_end() == doctest::Approx(0.38));
  std::vector<double> row(tab.m), ref(tab.m);
  eval_table_value(tab, 0.37, row.data());
  double x = 0.37;
  embedding_forward(net, &x, 1, ref.data());
  for (int p = 0; p < tab.m; ++p) CHECK(testutil::rel_err(row[p], ref[p]) < 1e-9);
}

TEST_CASE("per-model table set covers the taper up to half-angstrom approaches") {
  auto model = testutil::make_test_model(2, 4, 6, 12, 2, {6, 6}, 6.0, 5.0, 331);
  CHECK(table_domain_end(model) == doctest::Approx(2.0));
  auto tabs = build_tables(model, 0.05);
  REQUIRE(tabs.size() == 2);
  for (const auto& t : tabs) {
    CHECK(t.x0 == 0.0);
    CHECK(t.x_end() >= 2.0);
    CHECK(t.m == model.feature_width());
  }
}

TEST_CASE("table files round trip bitwise") {
  auto model = testutil::make_test_model(2, 5, 8, 12, 2, {6, 6}, 6.0, 5.0, 337);
  auto tabs = build_tables(model, 0.05);
  const char* path = "tables_roundtrip.dptb";
  write_tables(path, tabs);

  auto back = read_tables(path);
  REQUIRE(back.size() == tabs.size());
  for (std::size_t i = 0; i < tabs.size(); ++i) {
    CHECK(back[i].x0 == tabs[i].x0);
    CHECK(back[i].h == tabs[i].h);
    CHECK(back[i].n == tabs[i].n);
    CHECK(back[i].m == tabs[i].m);
    CHECK(back[i].block == tabs[i].block);
    REQUIRE(back[i].coeffs.size() == tabs[i].coeffs.size());
    for (std::size_t k = 0; k < tabs[i].coeffs.size(); ++k) {
      CHECK(back[i].coeffs[k] == tabs[i].coeffs[k]);
    }
  }

  // Second write of the same tables produces identical bytes.
  const char* path2 = "tables_roundtrip_2.dptb";
  write_tables(path2, back);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  CHECK(b1.substr(0, 4) == "DPTB");
  std::remove(path);
  std::remove(path2);
}

TEST_CASE("malformed table files are rejected") {
  const char* path = "tables_bad.dptb";
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE garbage";
  }
  CHECK_THROWS_AS(read_tables(path), InputError);

  auto model = testutil::make_test_model(1, 4, 6, 12, 2, {6}, 6.0, 5.0, 341);
  auto tabs = build_tables(model, 0.1);
  write_tables(path, tabs);
  // Truncate the payload.
  std::ifstream is(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  is.close();
  {
    std::ofstream os(path, std::ios::binary);
    os.write(bytes.data(), static_cast<long>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(read_tables(path), InputError);
  std::remove(path);
}

TEST_CASE("tanh lookup is odd, saturating and accurate") {
  TanhTable t;

  CHECK(t(0.0) == 0.0);
  CHECK(std::signbit(t(-0.0)));
  // the bound is a node, so the boundary value is exact and only inputs
  // strictly beyond it saturate to 1
  CHECK(t(8.0) == std::tanh(8.0));
  CHECK(t(-8.0) == -std::tanh(8.0));
  CHECK(t(std::nextafter(8.0, 9.0)) == 1.0);
  CHECK(t(123.0) == 1.0);
  CHECK(t(-1e308) == -1.0);

  // dense uniform scan including both endpoints
  double worst_scan = 0.0;
  const int n = 200000;
  for (int k = 0; k <= n; ++k) {
    double x = -8.0 + 16.0 * k / n;
    worst_scan = std::max(worst_scan, std::fabs(t(x) - std::tanh(x)));
  }
  CHECK(worst_scan <= 1.2e-7);

  Rng rng(17);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double x = 16.0 * (rng.uniform() - 0.5);
    double a = t(x);
    CHECK(t(-x) == -a);
    worst = std::max(worst, std::fabs(a - std::tanh(x)));
  }
  CHECK(worst <= 1.2e-7);
}
