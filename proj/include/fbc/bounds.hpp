// SPDX-License-Identifier: MIT
#pragma once
// Closed-form converse evaluators with log-domain binomial arithmetic and
// parameter sweeps (sup over gamma, delta, integer thresholds).

#include <functional>
#include <string>
#include <utility>

#include "fbc/binomial.hpp"
#include "fbc/dual.hpp"

namespace fbc {

struct BoundResult {
  double value = NEG_INF;
  std::vector<std::pair<std::string, double>> witness;
  std::string family;
};

namespace detail {

// log2 prefix sums over a in [0,n]: mass[i] = log2 sum_{a<=i} C(n,a)p^a(1-p)^{n-a},
// cnt[i] = log2 sum_{a<=i} C(n,a).
struct Log2Prefix {
  std::vector<double> mass, cnt;
  double mass_at(long i) const {
    if (i < 0) return NEG_INF;
    return mass[std::min<size_t>(i, mass.size() - 1)];
  }
  double cnt_at(long i) const {
    if (i < 0) return NEG_INF;
    return cnt[std::min<size_t>(i, cnt.size() - 1)];
  }
};

inline Log2Prefix log2_prefixes(long n, double p) {
  Log2Prefix pre;
  pre.mass.resize(n + 1);
  pre.cnt.resize(n + 1);
  double lp = p > 0 ? std::log(p) : NEG_INF;
  double lq = p < 1 ? std::log1p(-p) : NEG_INF;
  LogSumExp m, c;
  for (long k = 0; k <= n; ++k) {
    double lc = lchoose(n, k);
    m.add(lc + (k == 0 && p <= 0 ? 0.0 : k * lp) +
          (k == n && p >= 1 ? 0.0 : (n - k) * lq));
    c.add(lc);
    pre.mass[k] = log2_from_ln(m.value());
    pre.cnt[k] = log2_from_ln(c.value());
  }
  return pre;
}

// Sup of f over a uniform gamma grid (geometric in 2^-gamma) plus one local
// refinement pass around the coarse argmax.
inline std::pair<double, double> sup_scan(const std::function<double(double)>& f,
                                          double lo, double hi, int points = 512) {
  if (!(hi > lo)) std::swap(lo, hi);
  double best = NEG_INF, arg = lo;
  auto pass = [&](double a, double b, int m) {
    for (int i = 0; i <= m; ++i) {
      double g = a + (b - a) * i / m;
      double v = f(g);
      if (v > best) {
        best = v;
        arg = g;
      }
    }
  };
  pass(lo, hi, points - 1);
  double step = (hi - lo) / (points - 1);
  pass(std::max(lo, arg - step), std::min(hi, arg + step), 128);
  return {best, arg};
}

inline long floor_idx(double x) { return (long)std::floor(x + 1e-12); }
inline long ceil_idx(double x) { return (long)std::ceil(x - 1e-12); }

}  // namespace detail

// ---------------------------------------------------------------------------
// BSC channel coding, closed forms in (n, eps, log2 M).

inline BoundResult bsc_naive_bound(long n, double eps, double log2M) {
  BoundResult r;
  r.family = "bsc-naive";
  r.value = 1 - std::exp2(n + n * std::log2(1 - eps) - log2M);
  return r;
}

// Three-term strong-converse expression, sup over delta in (0, eps); the
// positive tail term is multiplied by the Stirling factor l(n, eps-delta)
// (it lower-bounds the binomial sum, so it must shrink that term).  When
// n(eps-delta) < 1 the factor's domain is empty and the exact one-term sum
// (= A) is used instead.
inline BoundResult bsc_strong_bound(long n, double eps, double log2M) {
  if (!(eps > 0 && eps < 0.5)) throw std::domain_error("bsc_strong_bound: eps");
  double L = std::log2((1 - eps) / eps);
  double q = 1.0 / (1 - eps);
  auto value = [&](double delta) {
    double a = eps - delta;  // alpha
    double t2;
    if (n * a >= 1.0)
      t2 = std::exp2(-n * (entropy2(eps) - entropy2(a) - delta * L)) * l_factor(n, a);
    else
      t2 = std::exp2(-n * (a * L - std::log2(1 - eps)));  // A itself
    double t3 = std::exp2(n * (1 - entropy2(eps) + delta * L) - log2M);
    double t4 = std::exp2((n - n * entropy_q(q, a)) * std::log2(1 - eps));
    return 1 + t2 - t3 - t4;
  };
  double dhi = eps * (1 - 1e-9);
  auto [v, d] = detail::sup_scan(value, eps * 1e-9, dhi, 400);
  // golden-section polish around the scan argmax
  double lo = std::max(eps * 1e-9, d - eps / 400), hi = std::min(dhi, d + eps / 400);
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = value(x1);
    }
  }
  double dstar = f1 > f2 ? x1 : x2;
  double vstar = std::max(f1, f2);
  BoundResult r;
  r.family = "bsc-strong";
  if (vstar >= v) {
    r.value = vstar;
    r.witness = {{"delta", dstar}};
  } else {
    r.value = v;
    r.witness = {{"delta", d}};
  }
  return r;
}

// i(x;y) with uniform reference output is n + d log2(eps) + (n-d) log2(1-eps),
// a function of the Hamming distance d only, so inf_x drops by symmetry.
inline BoundResult wolfowitz_bsc_bound(long n, double eps, double log2M,
                                       bool improved = false) {
  auto pre = detail::log2_prefixes(n, eps);
  double L = std::log2((1 - eps) / eps);
  auto value = [&](double g) {
    // i <= log2M - g  <=>  d >= tau (equality included)
    double tau = (n + n * std::log2(1 - eps) - log2M + g) / L;
    long dstar = (long)std::ceil(tau - 1e-12);
    double ptail = dstar <= 0 ? 1.0
                              : 1.0 - std::exp2(std::min(0.0, pre.mass_at(dstar - 1)));
    double v = ptail - std::exp2(-g);
    if (improved && dstar >= 1)
      v += std::exp2(log2M - g - n + pre.cnt_at(std::min<long>(dstar - 1, n)));
    return v;
  };
  auto [v, g] = detail::sup_scan(value, 1e-9, log2M + 5.0);
  BoundResult r;
  r.family = improved ? "bsc-channel-improved" : "bsc-wolfowitz";
  r.value = v;
  r.witness = {{"gamma", g}};
  return r;
}

// ---------------------------------------------------------------------------
// Generic small-alphabet evaluators (explicit channels, arbitrary reference).

inline BoundResult wolfowitz_bound(const ChannelKernel<double>& ch, double log2M,
                                   const std::vector<double>& pbar, bool improved,
                                   double glo = 1e-9, double ghi = -1) {
  if (ghi < 0) ghi = log2M + 5.0;
  auto value = [&](double g) {
    double worst = POS_INF;
    for (int x = 0; x < ch.in; ++x) {
      double acc = 0;
      for (int y = 0; y < ch.out; ++y) {
        double i = std::log2(ch(x, y)) - std::log2(pbar[y]);
        if (i <= log2M - g)
          acc += ch(x, y);
        else if (improved)
          acc += std::exp2(log2M - g) * pbar[y];
      }
      worst = std::min(worst, acc);
    }
    return worst - std::exp2(-g);
  };
  auto [v, g] = detail::sup_scan(value, glo, ghi);
  BoundResult r;
  r.family = improved ? "channel-improved" : "wolfowitz";
  r.value = v;
  r.witness = {{"gamma", g}};
  return r;
}

// Display value at one gamma for the tilted-information converses; equals
// objective(kv_improved_general(...)) at the same parameters.
inline double tilted_display_value(const ProblemInstance<double>& inst,
                                   const TypeDecomposition& dec, const TiltedTable& tilt,
                                   double gamma_bits, bool original_kv = false,
                                   bool further = false) {
  const int nS = inst.S.size, nX = inst.X.size, nY = inst.Y.size, nSh = inst.Shat.size;
  const int T = dec.T;
  double total = 0;
  for (int s = 0; s < nS; ++s) {
    double js = tilt.j_bits[s];
    double worst = POS_INF;
    for (int x = 0; x < nX; ++x) {
      double acc = 0;
      for (int t = 0; t < T; ++t) {
        double pv = dec.p_v_given_x[(size_t)x * T + t];
        for (int y = 0; y < nY; ++y) {
          double pyxv = dec.p_y_given_xv[((size_t)x * T + t) * nY + y];
          double pb = dec.p_ybar_given_v[(size_t)t * nY + y];
          // i <= js - gamma  <=>  pyxv <= pb * 2^(js-gamma)
          if (pyxv <= pb * std::exp2(js - gamma_bits))
            acc += pv * pyxv;
          else if (!original_kv)
            acc += pv * pb * std::exp2(js - gamma_bits);
        }
      }
      worst = std::min(worst, acc);
    }
    total += inst.source(s) * worst;
  }
  if (!further) {
    total -= T * std::exp2(-gamma_bits);
  } else {
    double sup = 0;
    for (int sh = 0; sh < nSh; ++sh) {
      double acc = 0;
      for (int s = 0; s < nS; ++s)
        if (inst.loss.dist[(size_t)s * nSh + sh] <= inst.loss.level)
          acc += inst.source(s) * std::exp2(tilt.j_bits[s] - gamma_bits);
      sup = std::max(sup, acc);
    }
    total -= T * sup;
  }
  return total;
}

inline BoundResult kv_improved_general_bound(const ProblemInstance<double>& inst,
                                             const TypeDecomposition& dec,
                                             const TiltedTable& tilt, double glo,
                                             double ghi, bool original_kv = false,
                                             bool further = false) {
  auto [v, g] = detail::sup_scan(
      [&](double g) { return tilted_display_value(inst, dec, tilt, g, original_kv, further); },
      glo, ghi);
  BoundResult r;
  r.family = further ? "further-improved" : (original_kv ? "kv" : "kv-improved");
  r.value = v;
  r.witness = {{"gamma", g}};
  return r;
}

inline BoundResult kv_improved_t1_bound(const ProblemInstance<double>& inst,
                                        const TiltedTable& tilt, double glo, double ghi,
                                        bool original_kv = false) {
  return kv_improved_general_bound(inst, trivial_decomposition(inst.channel), tilt, glo,
                                   ghi, original_kv);
}

inline BoundResult further_improved_bound(const ProblemInstance<double>& inst,
                                          const TypeDecomposition& dec,
                                          const TiltedTable& tilt, double glo,
                                          double ghi) {
  return kv_improved_general_bound(inst, dec, tilt, glo, ghi, false, true);
}

// ---------------------------------------------------------------------------
// Lossy source coding (identity channel on {1..M}).

inline BoundResult lossy_sc_bound(const Distribution<double>& src,
                                  const std::vector<double>& dist, int nSh,
                                  const TiltedTable& tilt, double log2M,
                                  bool improved, double glo, double ghi) {
  int nS = src.size();
  auto value = [&](double g) {
    double v = 0;
    for (int s = 0; s < nS; ++s) {
      if (tilt.j_bits[s] >= g + log2M)
        v += src(s);
      else
        v += src(s) * std::exp2(tilt.j_bits[s] - g - log2M);
    }
    if (!improved) return v - std::exp2(-g);
    // improved tail: exp(-gamma) sup_sh sum_s P_S exp(j_S) 1{d(s,sh) <= level};
    // at most exp(-gamma) by the key tilted inequality
    double sup = 0;
    for (int sh = 0; sh < nSh; ++sh) {
      double acc = 0;
      for (int s = 0; s < nS; ++s)
        if (dist[(size_t)s * nSh + sh] <= tilt.level)
          acc += src(s) * std::exp2(tilt.j_bits[s]);
      sup = std::max(sup, acc);
    }
    return v - sup * std::exp2(-g);
  };
  auto [v, g] = detail::sup_scan(value, glo, ghi);
  BoundResult r;
  r.family = improved ? "lossy-sc-improved" : "lossy-sc";
  r.value = v;
  r.witness = {{"gamma", g}};
  return r;
}

inline BoundResult ppv_via_lp_prime(const ProblemInstance<double>& inst) {
  auto lp = build_lp_prime(inst);
  auto sol = solve(lp);
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("ppv_via_lp_prime: solver failure");
  BoundResult r;
  r.family = "ppv-lp-prime";
  r.value = to_double(sol.value);
  return r;
}

// ---------------------------------------------------------------------------
// BMS(p)^k over BSC(eps)^n with excess level d, log-domain specializations.

enum class JsccFamily { KV, Improved, Tighter, Hypothesis };
enum class ScFamily { Base, Improved, Hypothesis };

// Precomputed evaluator; value(family, gamma) is O(k) with O(1) prefix lookups.
class BmsBscJscc {
 public:
  BmsBscJscc(long k, long n, double p, double eps, double d)
      : k_(k), n_(n), p_(p), eps_(eps) {
    if (!(d >= 0 && d < p && p <= 0.5))
      throw std::domain_error("bms_bsc_jscc: need d < p <= 1/2");
    if (!(eps > 0 && eps < 0.5)) throw std::domain_error("bms_bsc_jscc: eps");
    Le_ = std::log2((1 - eps) / eps);
    Lp_ = p < 0.5 ? std::log2((1 - p) / p) : 0.0;
    C_ = 1 - entropy2(eps);
    kR_ = k * (entropy2(p) - entropy2(d));
    pre_n_ = detail::log2_prefixes(n, eps);
    cntd_ = log2_choose_mass(k, 0, detail::floor_idx(k * d));
    tail_tighter_ = -k * entropy2(d) + cntd_;
    mass_b_.resize(k + 1);
    for (long b = 0; b <= k; ++b)
      mass_b_[b] = std::exp(lchoose(k, b) + b * std::log(p) + (k - b) * std::log1p(-p));
  }

  double kR() const { return kR_; }
  double span() const { return kR_ + n_ * C_; }

  double value(JsccFamily family, double g) const {
    double acc = 0;
    for (long b = 0; b <= k_; ++b) {
      double th = (g - kR_ + n_ * C_ - (b - k_ * p_) * Lp_) / Le_;
      // exact event count: P[d >= n*eps+th] drops mass up to ceil(.)-1, and
      // the strict-inequality count runs over d < n*eps+th — both indices are
      // ceil(n*eps+th-1); flooring would overstate the bound off the integer
      // substitution points
      long idx = detail::ceil_idx(n_ * eps_ + th - 1);
      double bracket =
          1 - (idx < 0 ? 0.0 : std::exp2(std::min(0.0, pre_n_.mass_at(idx))));
      if (family != JsccFamily::KV && idx >= 0) {
        double e = n_ * eps_ + th;  // real exponent, log-domain power
        bracket += std::exp2(e * std::log2(eps_) + (n_ - e) * std::log2(1 - eps_) +
                             pre_n_.cnt_at(idx));
      }
      acc += mass_b_[b] * bracket;
    }
    double tail = family == JsccFamily::Tighter ? std::exp2(tail_tighter_ - g)
                                                : std::exp2(-g);
    return acc - tail;
  }

  // sup over integer r of the substituted form (requires p = 1/2)
  std::pair<double, long> hypothesis() const {
    if (p_ != 0.5) throw std::domain_error("hypothesis family needs p = 1/2");
    double best = NEG_INF;
    long barg = 0;
    for (long r = 0; r <= n_; ++r) {
      double lg = (r + 1) * std::log2(eps_) + (n_ - r - 1) * std::log2(1 - eps_);
      double v = 1 - std::exp2(pre_n_.mass_at(r)) + std::exp2(lg + pre_n_.cnt_at(r)) -
                 std::exp2(lg + (n_ - k_) + cntd_);
      if (v > best) {
        best = v;
        barg = r;
      }
    }
    return {best, barg};
  }

 private:
  long k_, n_;
  double p_, eps_, Le_, Lp_, C_, kR_, cntd_, tail_tighter_;
  detail::Log2Prefix pre_n_;
  std::vector<double> mass_b_;
};

inline BoundResult bms_bsc_jscc_bound(long k, long n, double p, double eps, double d,
                                      JsccFamily family) {
  BmsBscJscc ev(k, n, p, eps, d);
  BoundResult r;
  if (family == JsccFamily::Hypothesis) {
    auto [v, rr] = ev.hypothesis();
    r.family = "bms-bsc-hypothesis";
    r.value = v;
    r.witness = {{"r", (double)rr}};
    return r;
  }
  auto [v, g] = detail::sup_scan([&](double g) { return ev.value(family, g); }, -5.0,
                                 ev.span() + 5.0);
  r.family = family == JsccFamily::KV ? "bms-bsc-kv"
             : family == JsccFamily::Improved ? "bms-bsc-improved"
                                              : "bms-bsc-tighter";
  r.value = v;
  r.witness = {{"gamma", g}};
  return r;
}

// Source coding for the BMS; uses the identity P_S(s) 2^{j_S(s,d)} = 2^{-kH(d)}.
inline BoundResult bms_sc_bound(long k, double p, double log2M, double d,
                                ScFamily family) {
  if (!(d >= 0 && d < p && p <= 0.5)) throw std::domain_error("bms_sc: need d < p");
  double kR = k * (entropy2(p) - entropy2(d));
  double kHd = k * entropy2(d);
  auto pre = detail::log2_prefixes(k, p);
  double cntd = log2_choose_mass(k, 0, detail::floor_idx(k * d));
  BoundResult r;
  if (family == ScFamily::Hypothesis) {
    double best = NEG_INF;
    long barg = 0;
    for (long t = 0; t <= k; ++t) {
      double lg = (t + 1) * std::log2(p) + (k - t - 1) * std::log2(1 - p);
      double v = 1 - std::exp2(pre.mass_at(t)) + std::exp2(lg + pre.cnt_at(t)) -
                 std::exp2(lg + log2M + cntd);
      if (v > best) {
        best = v;
        barg = t;
      }
    }
    r.family = "bms-sc-hypothesis";
    r.value = best;
    r.witness = {{"t", (double)barg}};
    return r;
  }
  std::vector<double> j(k + 1), lmass(k + 1);
  for (long w = 0; w <= k; ++w) {
    j[w] = bms_tilted_bits((int)k, p, d, (int)w);
    lmass[w] = lchoose(k, w) + w * std::log(p) + (k - w) * std::log1p(-p);
  }
  auto value = [&](double g) {
    double v = 0;
    LogSumExp below;  // log sum of C(k,w) over w with j(w) < log2M + g
    for (long w = 0; w <= k; ++w) {
      if (j[w] >= g + log2M)
        v += std::exp(lmass[w]);
      else
        below.add(lchoose(k, w));
    }
    if (family == ScFamily::Improved)
      v += std::exp2(-kHd - g - log2M + log2_from_ln(below.value()));
    return v - std::exp2(-g);
  };
  auto [v, g] = detail::sup_scan(value, -5.0, kR + 5.0);
  r.family = family == ScFamily::Base ? "bms-sc-kv" : "bms-sc-improved";
  r.value = v;
  r.witness = {{"gamma", g}};
  return r;
}

// ---------------------------------------------------------------------------
// Matched pair: literal evaluation of the distance-profile sum
// sum_k (k/n) Nbar_k Pbar(k/n), which telescopes to eps.
template <class T>
BoundResult qary_matched_bound(int n, int q, const T& eps, T* exact_out = nullptr) {
  if (!(to_double(eps) > 0 && to_double(eps) < 1.0 - 1.0 / q))
    throw std::domain_error("qary_matched_bound: eps range");
  T total = scalar_traits<T>::zero();
  T ratio = eps / (q - 1);
  for (int k = 0; k <= n; ++k) {
    // Nbar_k = C(n,k)(q-1)^k, Pbar(k/n) = (eps/(q-1))^k (1-eps)^{n-k}
    T term = scalar_traits<T>::ratio(k, n);
    mpz_class c = choose_exact(n, k);
    if constexpr (scalar_traits<T>::exact) {
      term *= mpq_class(c);
    } else {
      term *= std::exp(ln_mpz(c));
    }
    for (int i = 0; i < k; ++i) term *= (q - 1) * ratio;
    for (int i = k; i < n; ++i) term *= (scalar_traits<T>::one() - eps);
    total += term;
  }
  if (exact_out) *exact_out = total;
  BoundResult r;
  r.family = "qary-matched";
  r.value = to_double(total);
  return r;
}

}  // namespace fbc
