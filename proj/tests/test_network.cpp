#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "fbc/instances.hpp"
#include "fbc/network_sr.hpp"
#include "fbc/simplex.hpp"

using namespace fbc;

namespace {

// |S|-ary uniform source, two index pipes, per-stage Hamming distortion
SRInstance hamming_sr(int nS, int M1, int M2, double D1, double D2) {
  SRInstance sr;
  sr.source.mass.assign(nS, 1.0 / nS);
  sr.M1 = M1;
  sr.M2 = M2;
  sr.nSh1 = sr.nSh2 = nS;
  sr.d1.assign((size_t)nS * nS, 1.0);
  for (int s = 0; s < nS; ++s) sr.d1[(size_t)s * nS + s] = 0.0;
  sr.d2 = sr.d1;
  sr.D1 = D1;
  sr.D2 = D2;
  return sr;
}

std::vector<double> log2_inverse_mass(const Distribution<double>& p) {
  std::vector<double> j(p.size());
  for (int s = 0; s < p.size(); ++s) j[s] = -std::log2(p(s));
  return j;
}

// kind-insensitive normal form of a row: eq flag, rhs, sorted sparse entries
using NormRow = std::tuple<bool, double, std::vector<std::pair<int, double>>>;

template <class T>
std::vector<NormRow> normalized_rows(const StandardFormLP<T>& lp) {
  std::vector<NormRow> out;
  for (auto& r : lp.rows) {
    std::vector<std::pair<int, double>> a;
    for (auto& [j, c] : r.a) a.push_back({j, to_double(c)});
    std::sort(a.begin(), a.end());
    out.push_back({row_is_eq(r.kind), to_double(r.rhs), std::move(a)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("network validation and the single-node relaxation") {
  NetworkInstance net;
  net.wire_sizes = {2, 2};
  net.nodes = {{"A", {0}, 1}};
  net.topo = {0};
  auto lp = build_lpn<double>(net, {});
  CHECK(lp.ncols == 4);
  int stoch = 0, nn = 0;
  for (auto& r : lp.rows) {
    if (r.kind == RowKind::Stochastic) ++stoch;
    if (r.kind == RowKind::NonNeg) ++nn;
  }
  CHECK(stoch == 2);
  CHECK(nn == 4);
  CHECK(lp.rows.size() == 6);

  // feedback: two nodes feeding each other
  NetworkInstance bad;
  bad.wire_sizes = {2, 2};
  bad.nodes = {{"A", {1}, 0}, {"B", {0}, 1}};
  bad.topo = {0, 1};
  CHECK_THROWS(build_lpn<double>(bad, {}));

  LiftSelection absent;
  absent.eq = {{0, {5}}};
  CHECK_THROWS(build_lpn<double>(net, absent));
  LiftSelection self;
  self.eq = {{0, {0}}};
  CHECK_THROWS(build_lpn<double>(net, self));
}

TEST_CASE("two-node chain with the full lift reproduces the point-to-point rows") {
  auto inst = channel_coding_instance(bsc_kernel(0.2), 2);
  auto ref = build_lp(inst);

  NetworkInstance net;
  net.wire_sizes = {2, 2, 2, 2};  // s, x, y, shat
  net.nodes = {{"E", {0}, 1}, {"D", {2}, 3}};
  net.topo = {0, 1};
  LiftSelection sel;
  sel.eq = {{0, {1}}, {1, {0}}};
  sel.ineq = {{{}, {0, 1}}};
  LpnLayout lay;
  auto lp = build_lpn<double>(net, sel, &lay);

  // column layout coincides: Q_E block, Q_D block, then the pair product
  REQUIRE(lp.ncols == ref.ncols);
  CHECK(lay.families.size() == 3);
  CHECK(normalized_rows(lp) == normalized_rows(ref));
}

TEST_CASE("refinement relaxation: catalog golden counts on the all-binary instance") {
  auto sr = hamming_sr(2, 2, 2, 0.0, 0.0);
  LpnLayout lay;
  auto lp = build_lpsr<double>(sr, &lay);
  CHECK(lp.ncols == 364);
  CHECK(lay.families.size() == 11);
  std::vector<long> sizes;
  for (auto& f : lay.families) sizes.push_back(f.count);
  CHECK(sizes == std::vector<long>{4, 4, 4, 8, 128, 64, 64, 32, 8, 32, 16});
  int stoch = 0, lift = 0, nn = 0;
  for (auto& r : lp.rows) {
    if (r.kind == RowKind::Stochastic) ++stoch;
    if (r.kind == RowKind::LiftEq) ++lift;
    if (r.kind == RowKind::NonNeg) ++nn;
  }
  CHECK(stoch == 10);
  CHECK(lift == 300);
  CHECK(nn == 364);
  CHECK(lp.rows.size() == 674);
}

TEST_CASE("vanishing loss gives a zero optimum") {
  auto sr = hamming_sr(2, 2, 2, 1.0, 1.0);  // levels at the maximum distortion
  auto sol = solve(build_lpsr<double>(sr));
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(to_double(sol.value) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sr_oracle(sr) == 0.0);
}

TEST_CASE("oracle on the lossless-first-stage toy") {
  // one-bit first pipe, empty second: decoder 2 still reads the first pipe,
  // so a lossless first stage serves both decoders
  auto sr = hamming_sr(2, 2, 1, 0.0, 0.0);
  CHECK(sr_oracle(sr) == doctest::Approx(0.0));
  auto wide = hamming_sr(3, 2, 2, 0.0, 0.0);
  CHECK(sr_oracle(wide) > 0.0);  // three symbols through two indices must err
}

TEST_CASE("relaxation is sandwiched by codes and certificates on the tiny instance") {
  auto sr = hamming_sr(2, 1, 2, 0.0, 0.0);
  CHECK(sr_oracle(sr) == doctest::Approx(0.5));

  LpnLayout lay;
  auto lp = build_lpsr<double>(sr, &lay);
  auto sol = solve(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  double opt = to_double(sol.value);
  CHECK(opt <= 0.5 + 1e-9);
  CHECK(opt >= 0.49);

  // every deterministic quadruple lifts to a feasible point at least as costly
  std::mt19937 rng(23);
  auto rnd = [&](int len, int radix) {
    std::vector<int> v(len);
    for (auto& x : v) x = (int)(rng() % radix);
    return v;
  };
  for (int t = 0; t < 1000; ++t) {
    auto f1 = rnd(sr.nS(), sr.M1);
    auto f2 = rnd(sr.nS(), sr.M2);
    auto g1 = rnd(sr.M1, sr.nSh1);
    auto g2 = rnd(sr.M1 * sr.M2, sr.nSh2);
    auto pt = embed_sr_code(sr, lay, f1, f2, g1, g2);
    CHECK(max_row_residual(lp, pt) <= 1e-12);
    double cost = 0;
    for (int j = 0; j < lp.ncols; ++j) cost += to_double(lp.c[j]) * pt[j];
    CHECK(cost == doctest::Approx(expected_sr_loss(sr, f1, f2, g1, g2)).epsilon(1e-12));
    CHECK(cost >= opt - 1e-9);
  }
}

TEST_CASE("dual feasibility: zero point, closed-form point, perturbation witness") {
  auto sr = hamming_sr(2, 1, 2, 0.0, 0.0);
  auto zero = sr_zero_dual(sr);
  CHECK(check_dpsr(sr, zero).feasible);
  CHECK(sr_objective(zero) == 0.0);

  auto j1 = log2_inverse_mass(sr.source), j2 = j1;
  for (double g1 : {-1.0, 0.5, 1.0, 2.0})
    for (double g2 : {0.0, 1.0, 6.0}) {
      auto F = sr_certificate(sr, j1, j2, g1, g2);
      auto rep = check_dpsr(sr, F, 1e-10);
      CHECK(rep.feasible);
      CHECK(sr_objective(F) ==
            doctest::Approx(sr_display_value(sr, j1, j2, g1, g2)).epsilon(1e-12));
    }

  // a four-letter nested instance with both pipes active
  auto big = hamming_sr(4, 2, 2, 0.0, 0.0);
  auto jb = log2_inverse_mass(big.source);
  for (double g1 : {0.5, 1.0, 3.0}) {
    auto F = sr_certificate(big, jb, jb, g1, 1.5);
    CHECK(check_dpsr(big, F, 1e-10).feasible);
  }

  auto F = sr_certificate(sr, j1, j2, 1.0, 4.0);
  F.eta2[0] += 1.0;
  auto rep = check_dpsr(sr, F, 1e-10);
  CHECK(!rep.feasible);
  CHECK(rep.worst_constraint == 2);
}

TEST_CASE("two-threshold converse: grid supremum and dual consistency") {
  auto sr = hamming_sr(2, 1, 2, 0.0, 0.0);
  auto j = log2_inverse_mass(sr.source);
  auto on = zhou_improved_bound(sr, j, j, true);
  auto off = zhou_improved_bound(sr, j, j, false);
  CHECK(on.value >= off.value - 1e-15);
  CHECK(on.value <= 0.5 + 1e-12);  // never exceeds the code optimum
  CHECK(on.value >= 0.499);

  // pointwise: the correction term never hurts
  for (double g1 : {-2.0, 0.0, 1.0, 3.0})
    for (double g2 : {-1.0, 0.5, 2.0})
      CHECK(sr_display_value(sr, j, j, g1, g2, true) >=
            sr_display_value(sr, j, j, g1, g2, false));

  // the reported supremum is exactly the certificate objective at its argmax
  auto F = sr_certificate(sr, j, j, on.witness[0].second, on.witness[1].second);
  CHECK(check_dpsr(sr, F, 1e-10).feasible);
  CHECK(sr_objective(F) == doctest::Approx(on.value).epsilon(1e-12));

  // weak duality against the solved relaxation
  auto sol = solve(build_lpsr<double>(sr));
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(on.value <= to_double(sol.value) + 1e-8);
}

TEST_CASE("degenerate second stage collapses to the single-stage display") {
  int k = 3, nS = 1 << k;
  SRInstance sr;
  sr.source.mass.assign(nS, 1.0 / nS);
  sr.M1 = 4;
  sr.M2 = 2;
  sr.nSh1 = nS;
  sr.nSh2 = 1;
  sr.d1.resize((size_t)nS * nS);
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < nS; ++sh)
      sr.d1[(size_t)s * nS + sh] = hamming(s, sh, k, 2) / double(k);
  sr.D1 = 0.0;
  sr.d2.assign(nS, 0.0);
  sr.D2 = 1.0;
  auto j1 = log2_inverse_mass(sr.source);
  std::vector<double> j2(nS, 0.0);

  double big = 30.0;
  for (double g1 : {-1.0, 0.0, 1.0, 2.0}) {
    double two = sr_display_value(sr, j1, j2, g1, big, false) + std::exp2(-big);
    double mass = 0;  // single-stage tail P[j1 >= log2 M1 + g1]
    for (int s = 0; s < nS; ++s)
      if (j1[s] >= std::log2((double)sr.M1) + g1) mass += sr.source(s);
    CHECK(two == doctest::Approx(mass - std::exp2(-g1)).epsilon(1e-12));
    CHECK(sr_display_value(sr, j1, j2, g1, big, true) >=
          sr_display_value(sr, j1, j2, g1, big, false));
  }
}

TEST_CASE("stage-wise tilted inputs and the marginal consistency screen") {
  Distribution<double> src;
  src.mass = {0.5, 0.25, 0.125, 0.125};
  std::vector<double> d(16, 1.0);
  for (int s = 0; s < 4; ++s) d[(size_t)s * 4 + s] = 0.0;
  for (double D : {0.1, 0.25}) {
    auto rd = rate_distortion(src, d, 4, D);
    auto tt = tilted(src, d, 4, D, rd);
    CHECK(tilted_inequality_max(src, d, 4, tt) <= 1 + 1e-8);
  }

  SRInstance nested = hamming_sr(2, 2, 2, 0.1, 0.1);
  CHECK(sr_marginals_consistent(nested));
  SRInstance coarser = hamming_sr(2, 2, 2, 0.1, 0.3);  // finer stage, looser level
  CHECK(!sr_marginals_consistent(coarser));
}
