// SPDX-License-Identifier: MIT
#pragma once
// Dual multiplier families for the relaxation, the feasibility checker for
// constraints D1-D3, and the named certificate constructors.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fbc/simplex.hpp"
#include "fbc/tilted.hpp"

namespace fbc {

template <class T>
struct DualPoint {
  int nS = 0, nX = 0, nY = 0, nSh = 0;
  std::vector<T> ga;  // gamma^a, per s
  std::vector<T> gb;  // gamma^b, per y
  std::vector<T> la;  // lambda^a, index ((s*nSh + sh)*nY + y)
  std::vector<T> lb;  // lambda^b, index ((x*nS + s)*nY + y)
  std::vector<T> mu;  // empty means identically zero; else (s,x,y,sh) s-major

  const T& la_at(int s, int sh, int y) const {
    return la[((size_t)s * nSh + sh) * nY + y];
  }
  const T& lb_at(int x, int s, int y) const {
    return lb[((size_t)x * nS + s) * nY + y];
  }
  T mu_at(int s, int x, int y, int sh) const {
    if (mu.empty()) return scalar_traits<T>::zero();
    return mu[(((size_t)s * nX + x) * nY + y) * nSh + sh];
  }
};

struct FeasibilityReport {
  double d1 = 0, d2 = 0, d3 = 0, mu_neg = 0;  // worst residual per family
  bool feasible = false;
  std::array<int, 4> witness{-1, -1, -1, -1};
  const char* worst_family = "";
  double worst() const { return std::max(std::max(d1, d2), std::max(d3, mu_neg)); }
};

template <class T>
FeasibilityReport check(const ProblemInstance<T>& inst, const DualPoint<T>& dp,
                        double tol = 1e-10) {
  const int nS = inst.S.size, nX = inst.X.size, nY = inst.Y.size, nSh = inst.Shat.size;
  if (dp.nS != nS || dp.nX != nX || dp.nY != nY || dp.nSh != nSh)
    throw std::invalid_argument("check: dimension mismatch");
  FeasibilityReport rep;
  auto note = [&](double res, double& slot, const char* fam, int a, int b, int c,
                  int d) {
    if (res > slot) {
      slot = res;
      if (res >= rep.worst()) {
        rep.witness = {a, b, c, d};
        rep.worst_family = fam;
      }
    }
  };
  // D1: ga(s) - sum_y lb(x,s,y) - sum_{sh,y} mu <= 0
  for (int x = 0; x < nX; ++x)
    for (int s = 0; s < nS; ++s) {
      T lhs = dp.ga[s];
      for (int y = 0; y < nY; ++y) lhs -= dp.lb_at(x, s, y);
      if (!dp.mu.empty())
        for (int sh = 0; sh < nSh; ++sh)
          for (int y = 0; y < nY; ++y) lhs -= dp.mu_at(s, x, y, sh);
      note(std::max(0.0, to_double(lhs)), rep.d1, "D1", x, s, -1, -1);
    }
  // D2: gb(y) - sum_s la(s,sh,y) - sum_{x,s} mu <= 0
  for (int sh = 0; sh < nSh; ++sh)
    for (int y = 0; y < nY; ++y) {
      T lhs = dp.gb[y];
      for (int s = 0; s < nS; ++s) lhs -= dp.la_at(s, sh, y);
      if (!dp.mu.empty())
        for (int x = 0; x < nX; ++x)
          for (int s = 0; s < nS; ++s) lhs -= dp.mu_at(s, x, y, sh);
      note(std::max(0.0, to_double(lhs)), rep.d2, "D2", sh, y, -1, -1);
    }
  // D3: la + lb + mu <= kappa * P_S * P_{Y|X}
  for (int s = 0; s < nS; ++s)
    for (int x = 0; x < nX; ++x)
      for (int y = 0; y < nY; ++y) {
        T base = dp.lb_at(x, s, y);
        T psp = inst.source(s) * inst.channel(x, y);
        for (int sh = 0; sh < nSh; ++sh) {
          T lhs = base + dp.la_at(s, sh, y) + dp.mu_at(s, x, y, sh) -
                  inst.kappa(s, x, y, sh) * psp;
          note(std::max(0.0, to_double(lhs)), rep.d3, "D3", s, x, y, sh);
        }
      }
  for (size_t i = 0; i < dp.mu.size(); ++i)
    if (dp.mu[i] < scalar_traits<T>::zero())
      note(-to_double(dp.mu[i]), rep.mu_neg, "mu>=0", (int)i, -1, -1, -1);
  rep.feasible = rep.worst() <= tol;
  return rep;
}

template <class T>
T objective(const DualPoint<T>& dp) {
  T v = scalar_traits<T>::zero();
  for (auto& g : dp.ga) v += g;
  for (auto& g : dp.gb) v += g;
  for (auto& m : dp.mu) v -= m;
  return v;
}

// Maps optimal row multipliers onto the five families by the row catalog.
template <class T>
DualPoint<T> extract_dual_point(const ProblemInstance<T>& inst,
                                const StandardFormLP<T>& lp, const LPSolution<T>& sol) {
  if (lp.tag != LPTag::LP) throw std::invalid_argument("extract_dual_point: need LP tag");
  if (sol.status != LPStatus::Optimal)
    throw std::invalid_argument("extract_dual_point: need optimal solution");
  DualPoint<T> dp;
  dp.nS = inst.S.size;
  dp.nX = inst.X.size;
  dp.nY = inst.Y.size;
  dp.nSh = inst.Shat.size;
  dp.ga.assign(dp.nS, scalar_traits<T>::zero());
  dp.gb.assign(dp.nY, scalar_traits<T>::zero());
  dp.la.assign((size_t)dp.nS * dp.nSh * dp.nY, scalar_traits<T>::zero());
  dp.lb.assign((size_t)dp.nX * dp.nS * dp.nY, scalar_traits<T>::zero());
  dp.mu.assign(inst.tuples(), scalar_traits<T>::zero());
  for (size_t i = 0; i < lp.rows.size(); ++i) {
    const auto& r = lp.rows[i];
    const T& y = sol.dual[i];
    switch (r.kind) {
      case RowKind::EncoderSum: dp.ga[r.idx[0]] = y; break;
      case RowKind::DecoderSum: dp.gb[r.idx[0]] = y; break;
      case RowKind::MarginalX:
        dp.la[((size_t)r.idx[0] * dp.nSh + r.idx[1]) * dp.nY + r.idx[2]] = y;
        break;
      case RowKind::MarginalShat:
        dp.lb[((size_t)r.idx[0] * dp.nS + r.idx[1]) * dp.nY + r.idx[2]] = y;
        break;
      case RowKind::McCormick:
        dp.mu[(((size_t)r.idx[0] * dp.nX + r.idx[1]) * dp.nY + r.idx[2]) * dp.nSh +
              r.idx[3]] = -y;
        break;
      default: break;
    }
  }
  // clamp float-mode sign noise on mu
  if constexpr (!scalar_traits<T>::exact) {
    for (auto& m : dp.mu)
      if (m < 0 && m > -1e-11) m = 0;
  }
  return dp;
}

// ---------------------------------------------------------------------------
// Certificates for M equiprobable messages over n uses of a BSC(eps).

inline DualPoint<double> bsc_naive(int n, double eps, long M) {
  if (!(eps >= 0 && eps < 0.5) || n < 1 || M < 1)
    throw std::domain_error("bsc_naive parameter domain");
  DualPoint<double> dp;
  dp.nS = dp.nSh = (int)M;
  dp.nX = dp.nY = 1 << n;
  dp.ga.assign(dp.nS, 1.0 / M);
  dp.gb.assign(dp.nY, -std::pow(1 - eps, n) / M);
  dp.la.assign((size_t)dp.nS * dp.nSh * dp.nY, 0.0);
  dp.lb.resize((size_t)dp.nX * dp.nS * dp.nY);
  for (int s = 0; s < dp.nS; ++s)
    for (int y = 0; y < dp.nY; ++y)
      dp.la[((size_t)s * dp.nSh + s) * dp.nY + y] = -std::pow(1 - eps, n) / M;
  for (int x = 0; x < dp.nX; ++x)
    for (int y = 0; y < dp.nY; ++y) {
      int d = popcount_diff(x, y);
      double v = std::pow(eps, d) * std::pow(1 - eps, n - d) / M;
      for (int s = 0; s < dp.nS; ++s) dp.lb[((size_t)x * dp.nS + s) * dp.nY + y] = v;
    }
  return dp;
}

// Two-regime certificate behind the strong converse; the threshold is
// r = n(eps - delta) and A = (eps/(1-eps))^r (1-eps)^n is shared between
// lambda^a and the lambda^b plateau so their D3 rows cancel exactly.
inline DualPoint<double> bsc_strong(int n, double eps, double delta, long M) {
  if (!(delta > 0 && delta < eps && eps < 0.5))
    throw std::domain_error("bsc_strong: need 0 < delta < eps < 1/2");
  DualPoint<double> dp;
  dp.nS = dp.nSh = (int)M;
  dp.nX = dp.nY = 1 << n;
  double r = n * (eps - delta);
  double A = std::pow(eps / (1 - eps), r) * std::pow(1 - eps, n);
  dp.la.assign((size_t)dp.nS * dp.nSh * dp.nY, 0.0);
  for (int s = 0; s < dp.nS; ++s)
    for (int y = 0; y < dp.nY; ++y) dp.la[((size_t)s * dp.nSh + s) * dp.nY + y] = -A / M;
  dp.lb.resize((size_t)dp.nX * dp.nS * dp.nY);
  for (int x = 0; x < dp.nX; ++x)
    for (int y = 0; y < dp.nY; ++y) {
      int d = popcount_diff(x, y);
      double v = d > r ? std::pow(eps / (1 - eps), d) * std::pow(1 - eps, n) / M : A / M;
      for (int s = 0; s < dp.nS; ++s) dp.lb[((size_t)x * dp.nS + s) * dp.nY + y] = v;
    }
  dp.gb.assign(dp.nY, -A / M);
  // ga(s) = min_x sum_y lb(x,s,y); rows are permutations of each other, so
  // summing the x = 0 row keeps D1 exactly tight.
  double row = 0;
  for (int y = 0; y < dp.nY; ++y) row += dp.lb[(size_t)0 * dp.nS * dp.nY + y];
  dp.ga.assign(dp.nS, row);
  return dp;
}

// ---------------------------------------------------------------------------
// Certificates driven by tilted information.

struct TypeDecomposition {
  int T = 1;
  std::vector<double> p_v_given_x;    // (x,t), x-major
  std::vector<double> p_y_given_xv;   // ((x*T + t)*nY + y)
  std::vector<double> p_ybar_given_v; // (t,y), t-major
};

inline TypeDecomposition trivial_decomposition(const ChannelKernel<double>& ch) {
  TypeDecomposition d;
  d.T = 1;
  d.p_v_given_x.assign(ch.in, 1.0);
  d.p_y_given_xv = ch.p;
  d.p_ybar_given_v.assign(ch.out, 1.0 / ch.out);
  return d;
}

namespace detail {
inline void require_decomposition(const ProblemInstance<double>& inst,
                                  const TypeDecomposition& dec) {
  const int nX = inst.X.size, nY = inst.Y.size, T = dec.T;
  for (int x = 0; x < nX; ++x)
    for (int y = 0; y < nY; ++y) {
      double acc = 0;
      for (int t = 0; t < T; ++t)
        acc += dec.p_y_given_xv[((size_t)x * T + t) * nY + y] *
               dec.p_v_given_x[(size_t)x * T + t];
      if (std::fabs(acc - inst.channel(x, y)) > 1e-9)
        throw std::invalid_argument("type decomposition does not reproduce the channel");
    }
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < nY; ++y)
      if (dec.p_ybar_given_v[(size_t)t * nY + y] == 0)
        for (int x = 0; x < nX; ++x)
          if (dec.p_y_given_xv[((size_t)x * T + t) * nY + y] != 0)
            throw std::invalid_argument("absolute continuity violated");
}
}  // namespace detail

// gamma_bits is the threshold in bits (the reference auxiliary output law is
// folded into the decomposition).  With original_kv = true the second branch
// of lambda^b is dropped, reproducing the older certificate.
inline DualPoint<double> kv_improved_general(const ProblemInstance<double>& inst,
                                             double gamma_bits,
                                             const TypeDecomposition& dec,
                                             const TiltedTable& tilt,
                                             bool original_kv = false,
                                             bool further = false) {
  if (!inst.loss.factored || !inst.loss.has_level)
    throw std::invalid_argument("kv_improved_general: need excess-distortion loss");
  detail::require_decomposition(inst, dec);
  const int nS = inst.S.size, nX = inst.X.size, nY = inst.Y.size, nSh = inst.Shat.size;
  const int T = dec.T;
  DualPoint<double> dp;
  dp.nS = nS;
  dp.nX = nX;
  dp.nY = nY;
  dp.nSh = nSh;
  std::vector<double> ej(nS);
  for (int s = 0; s < nS; ++s) ej[s] = std::exp2(tilt.j_bits[s] - gamma_bits);
  // The tilted table may violate its key inequality by solver tolerance;
  // rescale so sum_s P_S ej 1{d<=level} <= 2^-gamma holds strictly (the
  // certificate stays valid, the objective moves by O(solver tol)).
  {
    double worst = 0;
    for (int sh = 0; sh < nSh; ++sh) {
      double acc = 0;
      for (int s = 0; s < nS; ++s)
        if (inst.loss.dist[(size_t)s * nSh + sh] <= inst.loss.level)
          acc += inst.source(s) * ej[s];
      worst = std::max(worst, acc);
    }
    double cap = std::exp2(-gamma_bits);
    if (worst > cap) {
      double scale = cap / worst * (1 - 8 * std::numeric_limits<double>::epsilon());
      for (auto& e : ej) e *= scale;
    }
  }
  std::vector<double> ybar_sum(nY, 0.0);  // sum_t P_{Ybar|V}(y|t)
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < nY; ++y) ybar_sum[y] += dec.p_ybar_given_v[(size_t)t * nY + y];

  dp.lb.resize((size_t)nX * nS * nY);
  for (int x = 0; x < nX; ++x)
    for (int s = 0; s < nS; ++s)
      for (int y = 0; y < nY; ++y) {
        double acc = 0;
        for (int t = 0; t < T; ++t) {
          double pyxv = dec.p_y_given_xv[((size_t)x * T + t) * nY + y];
          double cap = dec.p_ybar_given_v[(size_t)t * nY + y] * ej[s];
          double term = original_kv ? (pyxv <= cap ? pyxv : 0.0) : std::min(pyxv, cap);
          acc += dec.p_v_given_x[(size_t)x * T + t] * term;
        }
        dp.lb[((size_t)x * nS + s) * nY + y] = inst.source(s) * acc;
      }
  dp.la.resize((size_t)nS * nSh * nY);
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < nSh; ++sh) {
      bool within = inst.loss.dist[(size_t)s * nSh + sh] <= inst.loss.level;
      for (int y = 0; y < nY; ++y)
        dp.la[((size_t)s * nSh + sh) * nY + y] =
            within ? -inst.source(s) * ej[s] * ybar_sum[y] : 0.0;
    }
  dp.ga.resize(nS);
  for (int s = 0; s < nS; ++s) {
    double best = POS_INF;
    for (int x = 0; x < nX; ++x) {
      double acc = 0;
      for (int y = 0; y < nY; ++y) acc += dp.lb[((size_t)x * nS + s) * nY + y];
      best = std::min(best, acc);
    }
    dp.ga[s] = best;
  }
  dp.gb.resize(nY);
  if (!further) {
    for (int y = 0; y < nY; ++y) dp.gb[y] = -std::exp2(-gamma_bits) * ybar_sum[y];
  } else {
    for (int y = 0; y < nY; ++y) {
      double best = POS_INF;
      for (int sh = 0; sh < nSh; ++sh) {
        double acc = 0;
        for (int s = 0; s < nS; ++s) acc += dp.la[((size_t)s * nSh + sh) * nY + y];
        best = std::min(best, acc);
      }
      dp.gb[y] = best;
    }
  }
  return dp;
}

inline DualPoint<double> further_improved(const ProblemInstance<double>& inst,
                                          double gamma_bits, const TypeDecomposition& dec,
                                          const TiltedTable& tilt) {
  return kv_improved_general(inst, gamma_bits, dec, tilt, false, true);
}

// ---------------------------------------------------------------------------
// Concave distortion-weighting certificate (tightness for matched pairs).

template <class T>
struct PLConcave {
  std::vector<T> nodes;  // increasing grid in [0,1]
  std::vector<T> vals;   // g at nodes
  std::vector<T> sg;     // supergradient at nodes, nonincreasing, >= 0
};

template <class T>
void require_concave_family(const PLConcave<T>& g) {
  size_t K = g.nodes.size();
  if (g.vals.size() != K || g.sg.size() != K || K == 0)
    throw std::invalid_argument("concave family: size mismatch");
  for (size_t i = 0; i + 1 < K; ++i) {
    if (!(g.nodes[i] < g.nodes[i + 1]))
      throw std::invalid_argument("concave family: nodes not increasing");
    if (g.sg[i + 1] > g.sg[i])
      throw std::invalid_argument("concave family: supergradient not nonincreasing");
  }
  for (size_t i = 0; i < K; ++i)
    if (g.sg[i] < scalar_traits<T>::zero())
      throw std::invalid_argument("concave family: negative supergradient");
  for (size_t i = 0; i < K; ++i)
    for (size_t j = 0; j < K; ++j) {
      double gap = to_double(g.vals[j] - g.vals[i] - (g.nodes[j] - g.nodes[i]) * g.sg[i]);
      if (gap > (scalar_traits<T>::exact ? 0.0 : 1e-13))
        throw std::invalid_argument("concave family: supergradient inequality fails");
    }
}

// gs: one concave function per source type t; delta: s -> t; dnode(s,sh) and
// dbarnode(x,y) give grid-node indices of d and dbar.  The derivative
// condition sg(m) <= min_{s in type} P_S(s) * min_{(x,y) at m} P_{Y|X}(y|x)
// is certified on the grid before construction.
template <class T>
DualPoint<T> matched_concave(const ProblemInstance<T>& inst,
                             const std::vector<PLConcave<T>>& gs,
                             const std::vector<int>& delta,
                             const std::vector<int>& dnode,
                             const std::vector<int>& dbarnode) {
  if (!inst.loss.factored || inst.loss.has_level)
    throw std::invalid_argument("matched_concave: need expected-distortion loss");
  const int nS = inst.S.size, nX = inst.X.size, nY = inst.Y.size, nSh = inst.Shat.size;
  for (auto& g : gs) require_concave_family(g);
  // derivative condition, per type and node
  for (size_t t = 0; t < gs.size(); ++t) {
    std::vector<std::optional<T>> pbar(gs[t].nodes.size());
    for (int x = 0; x < nX; ++x)
      for (int y = 0; y < nY; ++y) {
        int m = dbarnode[(size_t)x * nY + y];
        if (!pbar[m] || inst.channel(x, y) < *pbar[m]) pbar[m] = inst.channel(x, y);
      }
    std::optional<T> ps;
    for (int s = 0; s < nS; ++s)
      if (delta[s] == (int)t && (!ps || inst.source(s) < *ps)) ps = inst.source(s);
    if (!ps) continue;
    for (size_t m = 0; m < gs[t].nodes.size(); ++m)
      if (pbar[m]) {
        // equality is the canonical case; leave ulp headroom in float mode
        double slack = to_double(gs[t].sg[m] - *ps * *pbar[m]);
        if (slack > (scalar_traits<T>::exact ? 0.0 : 1e-12))
          throw std::invalid_argument("matched_concave: derivative condition fails");
      }
  }
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < nSh; ++sh)
      if (inst.loss.dist[(size_t)s * nSh + sh] !=
          gs[delta[s]].nodes[dnode[(size_t)s * nSh + sh]])
        throw std::invalid_argument("matched_concave: dnode grid mismatch");
  DualPoint<T> dp;
  dp.nS = nS;
  dp.nX = nX;
  dp.nY = nY;
  dp.nSh = nSh;
  dp.la.resize((size_t)nS * nSh * nY);
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < nSh; ++sh) {
      const T& v = gs[delta[s]].vals[dnode[(size_t)s * nSh + sh]];
      for (int y = 0; y < nY; ++y) dp.la[((size_t)s * nSh + sh) * nY + y] = v;
    }
  dp.lb.resize((size_t)nX * nS * nY);
  for (int x = 0; x < nX; ++x)
    for (int y = 0; y < nY; ++y) {
      int m = dbarnode[(size_t)x * nY + y];
      for (int s = 0; s < nS; ++s) {
        const auto& g = gs[delta[s]];
        dp.lb[((size_t)x * nS + s) * nY + y] = -g.vals[m] + g.nodes[m] * g.sg[m];
      }
    }
  dp.ga.resize(nS);
  for (int s = 0; s < nS; ++s) {
    std::optional<T> best;
    for (int x = 0; x < nX; ++x) {
      T acc = scalar_traits<T>::zero();
      for (int y = 0; y < nY; ++y) acc += dp.lb[((size_t)x * nS + s) * nY + y];
      if (!best || acc < *best) best = acc;
    }
    dp.ga[s] = *best;
  }
  dp.gb.resize(nY);
  for (int y = 0; y < nY; ++y) {
    std::optional<T> best;
    for (int sh = 0; sh < nSh; ++sh) {
      T acc = scalar_traits<T>::zero();
      for (int s = 0; s < nS; ++s) acc += dp.la[((size_t)s * nSh + sh) * nY + y];
      if (!best || acc < *best) best = acc;
    }
    dp.gb[y] = *best;
  }
  return dp;
}

// The canonical piecewise-linear family for the uniform q-ary source over the
// n-fold q-ary symmetric channel: node supergradients sigma_k =
// Pbar(k/n)/|S| with Pbar(m) = ((eps/(q-1))^m (1-eps)^(1-m))^n; the dual
// objective then telescopes to exactly eps.
template <class T>
DualPoint<T> matched_concave_canonical(const ProblemInstance<T>& inst, int q, int n,
                                       const T& eps) {
  const int nS = inst.S.size;
  PLConcave<T> g;
  g.nodes.resize(n + 1);
  g.vals.resize(n + 1);
  g.sg.resize(n + 1);
  T ratio = eps / ((q - 1) * (scalar_traits<T>::one() - eps));
  // sigma_k = (eps/(q-1))^k (1-eps)^(n-k) / nS
  T sigma = scalar_traits<T>::one();
  for (int i = 0; i < n; ++i) sigma *= (scalar_traits<T>::one() - eps);
  sigma /= nS;
  T acc = scalar_traits<T>::zero();
  for (int k = 0; k <= n; ++k) {
    g.nodes[k] = scalar_traits<T>::ratio(k, n);
    g.sg[k] = sigma;
    g.vals[k] = acc;
    sigma *= ratio;
    acc += sigma / n;  // next segment slope is sigma_{k+1}
  }
  std::vector<int> delta(nS, 0);
  std::vector<int> dnode((size_t)nS * inst.Shat.size);
  std::vector<int> dbarnode((size_t)inst.X.size * inst.Y.size);
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < inst.Shat.size; ++sh)
      dnode[(size_t)s * inst.Shat.size + sh] = hamming(s, sh, n, q);
  for (int x = 0; x < inst.X.size; ++x)
    for (int y = 0; y < inst.Y.size; ++y)
      dbarnode[(size_t)x * inst.Y.size + y] = hamming(x, y, n, q);
  return matched_concave(inst, {g}, delta, dnode, dbarnode);
}

}  // namespace fbc
