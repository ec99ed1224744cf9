#pragma once
// Rate-distortion function via alternating minimization with an outer
// bisection on the Lagrange slope, and the distortion-tilted information.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fbc/binomial.hpp"
#include "fbc/core.hpp"

namespace fbc {

struct RateDistortionSolution {
  double rate_bits = 0;        // R_S(D)
  double lambda_star = 0;      // -R'(D) in nats per unit distortion; +inf at D=0
  std::vector<double> p_shat;  // optimal unconditional reproduction law
  std::vector<double> kernel;  // P_{Shat*|S}, s-major
  double achieved = 0;         // E[d] at the returned kernel
  int iterations = 0;
  bool converged = false;
  bool zero_distortion = false;
};

struct TiltedTable {
  std::vector<double> j_bits;  // per source symbol
  double level = 0;
  double lambda_star = 0;  // nats
};

namespace detail {

// Inner alternating minimization at fixed slope (nats); returns E[d].
inline double ba_fixed_slope(const std::vector<double>& ps, const std::vector<double>& d,
                             int nS, int nSh, double lambda, std::vector<double>& q,
                             std::vector<double>& k, int iters = 2000,
                             double tol = 1e-13) {
  k.assign((size_t)nS * nSh, 0.0);
  for (int it = 0; it < iters; ++it) {
    double delta = 0;
    std::vector<double> qn(nSh, 0.0);
    for (int s = 0; s < nS; ++s) {
      double z = 0;
      for (int sh = 0; sh < nSh; ++sh)
        z += q[sh] * std::exp(-lambda * d[(size_t)s * nSh + sh]);
      for (int sh = 0; sh < nSh; ++sh) {
        double v = q[sh] * std::exp(-lambda * d[(size_t)s * nSh + sh]) / z;
        k[(size_t)s * nSh + sh] = v;
        qn[sh] += ps[s] * v;
      }
    }
    for (int sh = 0; sh < nSh; ++sh) {
      delta = std::max(delta, std::fabs(qn[sh] - q[sh]));
      q[sh] = qn[sh];
    }
    if (delta < tol) break;
  }
  double e = 0;
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < nSh; ++sh)
      e += ps[s] * k[(size_t)s * nSh + sh] * d[(size_t)s * nSh + sh];
  return e;
}

inline double mutual_information_bits(const std::vector<double>& ps,
                                      const std::vector<double>& q,
                                      const std::vector<double>& k, int nS, int nSh) {
  double I = 0;
  for (int s = 0; s < nS; ++s)
    for (int sh = 0; sh < nSh; ++sh) {
      double v = k[(size_t)s * nSh + sh];
      if (v > 0 && q[sh] > 0) I += ps[s] * v * std::log2(v / q[sh]);
    }
  return I;
}

}  // namespace detail

inline RateDistortionSolution rate_distortion(const Distribution<double>& source,
                                              const std::vector<double>& d, int nSh,
                                              double D, double tol = 1e-9,
                                              int max_iters = 200) {
  int nS = source.size();
  if ((int)d.size() != nS * nSh) throw std::invalid_argument("distortion table size");
  RateDistortionSolution out;
  if (D == 0.0) {
    out.zero_distortion = true;
    out.lambda_star = POS_INF;
    out.converged = true;
    out.p_shat.assign(nSh, 0.0);
    out.kernel.assign((size_t)nS * nSh, 0.0);
    double R = 0;
    for (int s = 0; s < nS; ++s) {
      // zero-distortion reproduction: the (first) shat with d(s,shat)=0
      int arg = -1;
      for (int sh = 0; sh < nSh; ++sh)
        if (d[(size_t)s * nSh + sh] == 0.0) {
          arg = sh;
          break;
        }
      if (arg < 0) throw std::domain_error("rate_distortion: D=0 unreachable");
      out.kernel[(size_t)s * nSh + arg] = 1.0;
      out.p_shat[arg] += source(s);
      if (source(s) > 0) R -= source(s) * std::log2(source(s));
    }
    out.rate_bits = R;
    out.achieved = 0;
    return out;
  }
  double dmin = 0, dmax_at_zero_rate = POS_INF;
  for (int s = 0; s < nS; ++s) {
    double m = POS_INF;
    for (int sh = 0; sh < nSh; ++sh) m = std::min(m, d[(size_t)s * nSh + sh]);
    dmin += source(s) * m;
  }
  // E[d] under the best rate-0 law (single shat)
  for (int sh = 0; sh < nSh; ++sh) {
    double e = 0;
    for (int s = 0; s < nS; ++s) e += source(s) * d[(size_t)s * nSh + sh];
    dmax_at_zero_rate = std::min(dmax_at_zero_rate, e);
  }
  if (!(D > dmin) || !(D < dmax_at_zero_rate))
    throw std::domain_error("rate_distortion: D outside (D_min, D_{R=0})");

  std::vector<double> q(nSh, 1.0 / nSh), k;
  double lo = 1e-9, hi = 1.0;
  while (detail::ba_fixed_slope(source.mass, d, nS, nSh, hi, q, k) > D && hi < 1e9)
    hi *= 2;
  int it = 0;
  double mid = hi, e = 0;
  for (; it < max_iters; ++it) {
    mid = 0.5 * (lo + hi);
    q.assign(nSh, 1.0 / nSh);
    e = detail::ba_fixed_slope(source.mass, d, nS, nSh, mid, q, k);
    if (std::fabs(e - D) <= tol) break;
    if (e > D)
      lo = mid;
    else
      hi = mid;
  }
  out.lambda_star = mid;
  out.p_shat = q;
  out.kernel = k;
  out.achieved = e;
  out.iterations = it;
  out.converged = std::fabs(e - D) <= std::max(tol, 1e-7);
  if (!out.converged) throw std::runtime_error("rate_distortion: no convergence");
  out.rate_bits = detail::mutual_information_bits(source.mass, q, k, nS, nSh);
  return out;
}

// j_S(s, D) = -log E[exp(lambda* D - lambda* d(s, Shat*))], reported in bits.
// Verifies the tilted inequality E[exp(j + lambda* D - lambda* d(S,sh))] <= 1.
inline TiltedTable tilted(const Distribution<double>& source, const std::vector<double>& d,
                          int nSh, double D, const RateDistortionSolution& rd,
                          double tol = 1e-6) {
  int nS = source.size();
  TiltedTable t;
  t.level = D;
  t.lambda_star = rd.lambda_star;
  t.j_bits.resize(nS);
  if (rd.zero_distortion) {
    for (int s = 0; s < nS; ++s) t.j_bits[s] = -std::log2(source(s));
    // exact identity: sum_s P_S exp(i_S) 1{d=0} counts one s per shat
    return t;
  }
  for (int s = 0; s < nS; ++s) {
    LogSumExp acc;
    for (int sh = 0; sh < nSh; ++sh) {
      if (rd.p_shat[sh] <= 0) continue;
      acc.add(std::log(rd.p_shat[sh]) +
              rd.lambda_star * (D - d[(size_t)s * nSh + sh]));
    }
    t.j_bits[s] = -log2_from_ln(acc.value());
  }
  for (int sh = 0; sh < nSh; ++sh) {
    LogSumExp acc;
    for (int s = 0; s < nS; ++s)
      acc.add(std::log(source(s)) + ln_from_log2(t.j_bits[s]) +
              rd.lambda_star * (D - d[(size_t)s * nSh + sh]));
    if (acc.value() > std::log1p(tol))
      throw std::runtime_error("tilted: key inequality violated (bad rd input?)");
  }
  return t;
}

// max over sh of E[exp(j_S(S,D) + lambda* D - lambda* d(S,sh))]
inline double tilted_inequality_max(const Distribution<double>& source,
                                    const std::vector<double>& d, int nSh,
                                    const TiltedTable& t) {
  int nS = source.size();
  double worst = 0;
  for (int sh = 0; sh < nSh; ++sh) {
    LogSumExp acc;
    for (int s = 0; s < nS; ++s) {
      double lam = t.lambda_star == POS_INF ? 0.0 : t.lambda_star;
      double shift = t.lambda_star == POS_INF
                         ? (d[(size_t)s * nSh + sh] <= t.level ? 0.0 : NEG_INF)
                         : lam * (t.level - d[(size_t)s * nSh + sh]);
      acc.add(std::log(source(s)) + ln_from_log2(t.j_bits[s]) + shift);
    }
    worst = std::max(worst, std::exp(acc.value()));
  }
  return worst;
}

// Closed forms for the binary memoryless source with normalized Hamming
// distortion: R = H(p) - H(D) bits/letter; j depends on the weight only.
inline double bms_rate_bits(double p, double D) { return entropy2(p) - entropy2(D); }

inline double bms_tilted_bits(int k, double p, double D, int weight) {
  return k * entropy2(p) - k * entropy2(D) +
         (weight - k * p) * std::log2((1 - p) / p);
}

}  // namespace fbc
