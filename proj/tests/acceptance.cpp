// SPDX-License-Identifier: MIT
// End-to-end acceptance gates.  Each criterion prints exactly one
// "PASS criterion N" / "FAIL criterion N" line; the exit code is the number
// of failures.  Tolerances are pinned here on purpose.

#include <cstdio>
#include <functional>
#include <numeric>
#include <random>

#include "fbc/bounds.hpp"
#include "fbc/instances.hpp"
#include "fbc/network_sr.hpp"
#include "fbc/oracle.hpp"

using namespace fbc;

namespace {

bool expect(bool ok, const char* what) {
  if (!ok) std::printf("  violated: %s\n", what);
  return ok;
}

ProblemInstance<double> bsc_cc(int n, double eps, int M) {
  return channel_coding_instance(memoryless_product(bsc_kernel(eps), n), M);
}

// random instance, every alphabet of size 2 or 3, dense loss in [0,1]
ProblemInstance<double> random_instance(std::mt19937& rng) {
  std::uniform_int_distribution<int> A(2, 3);
  std::uniform_real_distribution<double> U(0.05, 1.0), L(0.0, 1.0);
  ProblemInstance<double> inst;
  inst.S.size = A(rng);
  inst.X.size = A(rng);
  inst.Y.size = A(rng);
  inst.Shat.size = A(rng);
  inst.source.mass.resize(inst.S.size);
  double z = 0;
  for (auto& m : inst.source.mass) z += (m = U(rng));
  for (auto& m : inst.source.mass) m /= z;
  inst.channel.in = inst.X.size;
  inst.channel.out = inst.Y.size;
  inst.channel.p.resize((size_t)inst.X.size * inst.Y.size);
  for (int x = 0; x < inst.X.size; ++x) {
    double r = 0;
    for (int y = 0; y < inst.Y.size; ++y)
      r += (inst.channel.p[(size_t)x * inst.Y.size + y] = U(rng));
    for (int y = 0; y < inst.Y.size; ++y) inst.channel.p[(size_t)x * inst.Y.size + y] /= r;
  }
  inst.loss.factored = false;
  inst.loss.table.resize(inst.tuples());
  for (auto& v : inst.loss.table) v = L(rng);
  return inst;
}

// --------------------------------------------------------------------------
// 1. Matched pairs are exactly tight: OPT(LP) = eps in rational arithmetic,
//    with the closed form, the concave certificate, and the code oracle all
//    agreeing exactly.
bool criterion1() {
  bool ok = true;
  for (int q : {2, 3})
    for (int n : {1, 2, 3})
      for (long num : {1L, 2L}) {
        mpq_class eps(num, 10);
        eps.canonicalize();
        auto inst = matched_instance<mpq_class>(q, n, eps);
        size_t qn = inst.S.size;
        DeterministicCode uncoded;
        uncoded.f.resize(qn);
        uncoded.g.resize(qn);
        std::iota(uncoded.f.begin(), uncoded.f.end(), 0);
        std::iota(uncoded.g.begin(), uncoded.g.end(), 0);
        // primal witness: the uncoded lift costs exactly eps
        ok &= expect(expected_loss(inst, uncoded) == eps, "uncoded loss = eps");
        // dual witness: concave certificate is exactly feasible at eps
        auto dp = matched_concave_canonical(inst, q, n, eps);
        ok &= expect(objective(dp) == eps, "certificate objective = eps");
        ok &= expect(check(inst, dp, 0.0).feasible, "certificate exactly feasible");
        mpq_class closed;
        qary_matched_bound(n, q, eps, &closed);
        ok &= expect(closed == eps, "closed form = eps");
        if (inst.tuples() <= 6561) {
          auto lp = build_lp(inst);
          embed_deterministic(inst, uncoded, &lp);  // throws if any row violated
          if (n == 1) {
            auto sol = solve(lp);
            ok &= expect(sol.status == LPStatus::Optimal && sol.value == eps,
                         "rational simplex OPT(LP) = eps");
          }
        }
      }
  for (int n : {1, 2})
    for (long num : {1L, 2L}) {
      mpq_class eps(num, 10);
      eps.canonicalize();
      auto inst = matched_instance<mpq_class>(2, n, eps);
      ok &= expect(opt_sc(inst).value == eps, "oracle opt_sc = eps");
    }
  return ok;
}

// --------------------------------------------------------------------------
// 2. Weak-duality sandwich on 200 random instances: extracted dual objective
//    <= OPT(LP) <= exact-lift optimum <= oracle value, and OPT(LP') <= OPT(LP).
bool criterion2() {
  const double tol = 1e-8;
  bool ok = true;
  std::mt19937 rng(2024);
  for (int t = 0; t < 200 && ok; ++t) {
    auto inst = random_instance(rng);
    auto lp = build_lp(inst);
    auto sol = solve(lp);
    auto solp = solve(build_lp_prime(inst));
    ok &= expect(sol.status == LPStatus::Optimal && solp.status == LPStatus::Optimal,
                 "relaxations solve to optimality");
    if (!ok) break;
    auto dp = extract_dual_point(inst, lp, sol);
    auto orc = opt_sc(inst);
    // best value of the LP objective over points where the lift holds with
    // equality (attained at a deterministic code)
    auto pt = embed_deterministic(inst, orc.argmin, &lp);
    double lift = 0;
    for (int j = 0; j < lp.ncols; ++j) lift += to_double(lp.c[j]) * to_double(pt.v[j]);
    ok &= expect(objective(dp) <= sol.value + tol, "dual objective <= OPT(LP)");
    ok &= expect(sol.value <= lift + tol, "OPT(LP) <= equality-lift optimum");
    ok &= expect(lift <= orc.value + tol, "equality-lift optimum <= oracle");
    ok &= expect(solp.value <= sol.value + tol, "OPT(LP') <= OPT(LP)");
  }
  return ok;
}

// --------------------------------------------------------------------------
// 3. Every certificate constructor is feasible with residual <= 1e-10.
bool criterion3() {
  const double tol = 1e-10;
  bool ok = true;
  for (int n : {1, 2, 3})
    for (int M : {1, 2, 4}) {
      auto inst = bsc_cc(n, 0.11, M);
      ok &= expect(check(inst, bsc_naive(n, 0.11, M), tol).feasible, "bsc naive");
    }
  {
    auto inst = bsc_cc(3, 0.2, 2);
    for (double delta : {0.03, 0.07, 0.11, 0.15, 0.19})
      ok &= expect(check(inst, bsc_strong(3, 0.2, delta, 2), tol).feasible,
                   "bsc strong, delta grid");
  }
  {
    auto inst = bms_bsc_instance<double>(2, 2, 0.25, 0.11, 0.1);  // 256 tuples
    auto rd = rate_distortion(inst.source, inst.loss.dist, inst.Shat.size, 0.1);
    auto tt = tilted(inst.source, inst.loss.dist, inst.Shat.size, 0.1, rd);
    auto dec = trivial_decomposition(inst.channel);
    for (int i = 0; i < 10; ++i) {
      double g = -2.0 + i * 0.8;
      ok &= expect(check(inst, kv_improved_general(inst, g, dec, tt), tol).feasible,
                   "kv improved, T=1");
      ok &= expect(check(inst, further_improved(inst, g, dec, tt), tol).feasible,
                   "further improved");
    }
  }
  {
    mpq_class eps(1, 10);
    auto inst = matched_instance<mpq_class>(2, 2, eps);
    ok &= expect(check(inst, matched_concave_canonical(inst, 2, 2, eps), 0.0).feasible,
                 "matched concave (exact)");
  }
  return ok;
}

// --------------------------------------------------------------------------
// 4. Above capacity the strong bound climbs to 1 while the naive bound is
//    negative.
bool criterion4() {
  double eps = 0.11, R = 0.6;  // capacity = 1 - H2(0.11) ~ 0.5
  bool ok = true;
  double prev = NEG_INF;
  for (long n : {100L, 1000L, 10000L}) {
    double v = bsc_strong_bound(n, eps, R * n).value;
    ok &= expect(v >= prev, "strong bound nondecreasing in n");
    prev = v;
  }
  ok &= expect(prev >= 0.99, "strong bound >= 0.99 at n = 10^4");
  ok &= expect(bsc_naive_bound(10000, eps, R * 10000).value < 0,
               "naive bound negative at n = 10^4");
  return ok;
}

// --------------------------------------------------------------------------
// 5. Improvement orderings across the bound families.
bool criterion5() {
  bool ok = true;
  // binary uniform source over the BSC, eps = d = 0.11
  for (long n = 4; n <= 64; n += 4) {
    BmsBscJscc ev(n, n, 0.5, 0.11, 0.11);
    for (double g = -2.0; g <= 6.0; g += 0.5)
      ok &= expect(ev.value(JsccFamily::KV, g) <=
                       ev.value(JsccFamily::Improved, g) + 1e-12,
                   "improved >= kv pointwise");
    if (n <= 24) {
      auto hyp = bms_bsc_jscc_bound(n, n, 0.5, 0.11, 0.11, JsccFamily::Hypothesis);
      auto imp = bms_bsc_jscc_bound(n, n, 0.5, 0.11, 0.11, JsccFamily::Improved);
      ok &= expect(hyp.value >= imp.value - 1e-9,
                   "hypothesis >= improved at small blocklengths");
    }
  }
  // channel coding for the BSC, eps = 0.23
  for (double R : {0.24, 0.18}) {
    double gap10 = 0, gap200 = 0;
    for (long n = 10; n <= 200; n += 10) {
      double w = wolfowitz_bsc_bound(n, 0.23, R * n, false).value;
      double i = wolfowitz_bsc_bound(n, 0.23, R * n, true).value;
      ok &= expect(i >= w - 1e-12, "improved >= base pointwise");
      if (n == 10) gap10 = i - w;
      if (n == 200) gap200 = i - w;
    }
    if (R < 1 - entropy2(0.23))
      ok &= expect(gap200 < gap10, "gap shrinks below capacity");
  }
  // lossy source coding, p = 0.22, d = 0.11
  for (long k = 20; k <= 100; k += 20) {
    double base = bms_sc_bound(k, 0.22, 0.35 * k, 0.11, ScFamily::Base).value;
    double imp = bms_sc_bound(k, 0.22, 0.35 * k, 0.11, ScFamily::Improved).value;
    double hyp = bms_sc_bound(k, 0.22, 0.35 * k, 0.11, ScFamily::Hypothesis).value;
    ok &= expect(imp >= base - 1e-12, "sc improved >= base");
    ok &= expect(hyp >= imp - 1e-9, "sc hypothesis >= improved");
  }
  return ok;
}

// --------------------------------------------------------------------------
// 6. Tilted-information identities.
bool criterion6() {
  bool ok = true;
  for (int k = 1; k <= 6; ++k)
    for (double p : {0.25, 0.5})
      for (double D : {0.05, 0.11}) {
        auto inst = bms_bsc_instance<double>(k, 1, p, 0.1, D);
        int nSh = inst.Shat.size;
        auto rd = rate_distortion(inst.source, inst.loss.dist, nSh, D);
        ok &= expect(std::fabs(rd.rate_bits - k * bms_rate_bits(p, D)) <= 1e-4,
                     "closed-form rate = iterative rate");
        auto tt = tilted(inst.source, inst.loss.dist, nSh, D, rd);
        double ej = 0;
        for (size_t s = 0; s < tt.j_bits.size(); ++s) {
          double cf = bms_tilted_bits(k, p, D, __builtin_popcountll(s));
          ok &= expect(std::fabs(tt.j_bits[s] - cf) <= 1e-4,
                       "closed-form tilted value per symbol");
          ej += to_double(inst.source.mass[s]) * tt.j_bits[s];
        }
        ok &= expect(std::fabs(ej - rd.rate_bits) <= 1e-4, "mean tilted = rate");
        ok &= expect(tilted_inequality_max(inst.source, inst.loss.dist, nSh, tt) <=
                         1 + 1e-8,
                     "tilted inequality");
      }
  return ok;
}

// --------------------------------------------------------------------------
// 7. Entropy tail sandwich against exact big-integer ball sizes.
bool criterion7() {
  bool ok = true;
  for (int q : {2, 3, 4})
    for (int n = 2; n <= 60; ++n)
      for (int j = 1; j < n; ++j) {
        double a = double(j) / n;
        if (!(q > 1.0 / (1 - a))) continue;
        double lball = log2_from_ln(ln_mpz(qary_ball_exact(n, j, q)));
        double lH = n * entropy_q(q, a) * std::log2((double)q);
        ok &= expect(lball <= lH + 1e-9, "ball <= q^{nH}");
        if (n * a >= 1 && n * (1 - a) >= 1)
          ok &= expect(lball >= lH + std::log2(l_factor(n, a)) - 1e-9,
                       "ball >= q^{nH} l(n,a)");
        if (!ok) return false;
      }
  return ok;
}

// --------------------------------------------------------------------------
// 8. Reduced relaxation dominates the improved channel bound, full dominates
//    reduced.
bool criterion8() {
  const double tol = 1e-8;
  bool ok = true;
  struct Case {
    ProblemInstance<double> inst;
    double log2M;
  };
  std::vector<Case> cases;
  cases.push_back({channel_coding_instance(bsc_kernel(0.1), 2), 1.0});
  cases.push_back(
      {channel_coding_instance(memoryless_product(bsc_kernel(0.2), 2), 4), 2.0});
  for (auto& c : cases) {
    auto sol = solve(build_lp(c.inst));
    auto solp = solve(build_lp_prime(c.inst));
    ok &= expect(sol.status == LPStatus::Optimal && solp.status == LPStatus::Optimal,
                 "solves");
    std::vector<double> unif(c.inst.Y.size, 1.0 / c.inst.Y.size);
    auto imp = wolfowitz_bound(c.inst.channel, c.log2M, unif, true);
    ok &= expect(solp.value >= imp.value - tol, "OPT(LP') >= improved channel bound");
    ok &= expect(sol.value >= solp.value - tol, "OPT(LP) >= OPT(LP')");
  }
  return ok;
}

// --------------------------------------------------------------------------
// 9. Two-stage refinement chain on the tiny instance.
bool criterion9() {
  bool ok = true;
  SRInstance sr;
  sr.source.mass = {0.5, 0.5};
  sr.M1 = 1;
  sr.M2 = 2;
  sr.nSh1 = sr.nSh2 = 2;
  sr.d1 = sr.d2 = {0.0, 1.0, 1.0, 0.0};  // Hamming
  sr.D1 = sr.D2 = 0.0;

  auto sol = solve(build_lpsr<double>(sr));
  ok &= expect(sol.status == LPStatus::Optimal, "LPSR solves");
  double oracle = sr_oracle(sr);
  ok &= expect(sol.value <= oracle + 1e-8, "OPT(LPSR) <= oracle");

  std::vector<double> j1 = {1.0, 1.0}, j2 = {1.0, 1.0};  // D = 0: j = -log2 P_S
  auto on = zhou_improved_bound(sr, j1, j2, true);
  auto off = zhou_improved_bound(sr, j1, j2, false);
  ok &= expect(on.value >= off.value - 1e-12, "correction-on sup >= off");
  for (double g1 = -4.0; g1 <= 13.0; g1 += 0.4)
    for (double g2 = -4.0; g2 <= 13.0; g2 += 0.4)
      ok &= expect(sr_display_value(sr, j1, j2, g1, g2, true) >=
                       sr_display_value(sr, j1, j2, g1, g2, false) - 1e-12,
                   "correction never hurts pointwise");
  double g1 = 0, g2 = 0;
  for (auto& [k, v] : on.witness) {
    if (k == "gamma1") g1 = v;
    if (k == "gamma2") g2 = v;
  }
  auto cert = sr_certificate(sr, j1, j2, g1, g2);
  auto rep = check_dpsr(sr, cert, 1e-10);
  ok &= expect(rep.feasible && rep.worst() <= 1e-10, "certificate residual <= 1e-10");
  ok &= expect(std::fabs(sr_objective(cert) - on.value) <= 1e-12,
               "bound = certificate objective at the argmax");
  return ok;
}

// --------------------------------------------------------------------------
// 10. Strict positivity of the relaxation value when the loss separates
//     points: S = Shat, positive source and kernel, d(s,sh) = 0 iff s = sh.
bool criterion10() {
  bool ok = true;
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> A(2, 3);
  std::uniform_int_distribution<int> C(5, 100);  // rational numerators /100
  for (int t = 0; t < 50 && ok; ++t) {
    ProblemInstance<mpq_class> inst;
    int nS = A(rng), nX = A(rng), nY = A(rng);
    inst.S.size = inst.Shat.size = nS;
    inst.X.size = nX;
    inst.Y.size = nY;
    inst.source.mass.resize(nS);
    mpq_class z = 0;
    for (auto& m : inst.source.mass) z += (m = mpq_class(C(rng), 100));
    for (auto& m : inst.source.mass) m /= z;
    inst.channel.in = nX;
    inst.channel.out = nY;
    inst.channel.p.resize((size_t)nX * nY);
    for (int x = 0; x < nX; ++x) {
      mpq_class r = 0;
      for (int y = 0; y < nY; ++y) r += (inst.channel.p[(size_t)x * nY + y] = mpq_class(C(rng), 100));
      for (int y = 0; y < nY; ++y) inst.channel.p[(size_t)x * nY + y] /= r;
    }
    inst.loss.factored = true;
    inst.loss.has_level = false;
    inst.loss.dist.assign((size_t)nS * nS, 0);
    for (int s = 0; s < nS; ++s)
      for (int sh = 0; sh < nS; ++sh)
        if (s != sh) inst.loss.dist[(size_t)s * nS + sh] = mpq_class(C(rng), 100);
    auto sol = solve(build_lp(inst));
    ok &= expect(sol.status == LPStatus::Optimal, "solves");
    ok &= expect(sol.value > 0, "OPT(LP) strictly positive (exact)");
  }
  return ok;
}

}  // namespace

int main() {
  std::function<bool()> crit[] = {criterion1, criterion2, criterion3, criterion4,
                                  criterion5, criterion6, criterion7, criterion8,
                                  criterion9, criterion10};
  int failures = 0;
  for (int i = 0; i < 10; ++i) {
    bool ok = false;
    try {
      ok = crit[i]();
    } catch (const std::exception& e) {
      std::printf("  exception: %s\n", e.what());
    }
    std::printf("%s criterion %d\n", ok ? "PASS" : "FAIL", i + 1);
    if (!ok) ++failures;
  }
  return failures;
}
