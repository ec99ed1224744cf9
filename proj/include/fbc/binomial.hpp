#pragma once
// Binomial / entropy toolbox: log-domain C(n,k), q-ary entropy, the Stirling
// correction factor l(n,a), and exact big-integer tails.

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fbc/scalar.hpp"

namespace fbc {

inline double lchoose(long n, long k) {
  if (k < 0 || k > n) return NEG_INF;
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) -
         std::lgamma(double(n - k) + 1);
}

inline double log2choose(long n, long k) { return log2_from_ln(lchoose(n, k)); }

inline mpz_class choose_exact(unsigned long n, unsigned long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// H_q(x) = x log_q(q-1) - x log_q x - (1-x) log_q(1-x); H2 = binary case.
inline double entropy_q(double q, double x) {
  if (x < 0 || x > 1 || q <= 1) throw std::domain_error("entropy_q domain");
  double lq = std::log(q);
  double h = 0;
  if (x > 0) h += -x * std::log(x) + x * std::log(q - 1);
  if (x < 1) h += -(1 - x) * std::log(1 - x);
  return h / lq;
}

inline double entropy2(double x) {
  if (x <= 0 || x >= 1) return 0.0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

// l(n,a) = exp(l1(n) - l2(na) - l2(n(1-a))) / sqrt(2 pi a n (1-a)),
// l1(x)=1/(12x+1), l2(x)=1/(12x).  Both na and n(1-a) must stay off the
// 1/(12x) pole, hence the >= 1 guards.
inline double l_factor(long n, double a) {
  double na = n * a, nb = n * (1 - a);
  if (!(na >= 1.0) || !(nb >= 1.0)) throw std::domain_error("l_factor: na or n(1-a) < 1");
  double l1 = 1.0 / (12.0 * n + 1.0);
  double l2a = 1.0 / (12.0 * na);
  double l2b = 1.0 / (12.0 * nb);
  return std::exp(l1 - l2a - l2b) / std::sqrt(2.0 * M_PI * a * n * (1 - a));
}

// log2 of sum_{k=lo}^{hi} C(n,k) p^k (1-p)^(n-k); stable for n ~ 1e4.
inline double log2_binom_mass(long n, double p, long lo, long hi) {
  lo = std::max(lo, 0L);
  hi = std::min(hi, n);
  if (lo > hi) return NEG_INF;
  if (p <= 0) return lo == 0 ? 0.0 : NEG_INF;
  if (p >= 1) return hi == n ? 0.0 : NEG_INF;
  double lp = std::log(p), lq = std::log1p(-p);
  LogSumExp s;
  for (long k = lo; k <= hi; ++k) s.add(lchoose(n, k) + k * lp + (n - k) * lq);
  return log2_from_ln(s.value());
}

inline double binom_cdf(long n, double p, long kmax) {
  if (kmax < 0) return 0.0;
  double l = log2_binom_mass(n, p, 0, kmax);
  return l == NEG_INF ? 0.0 : std::exp2(std::min(l, 0.0));
}

// log2 of sum_{k=lo}^{hi} C(n,k) (weights only, no p).
inline double log2_choose_mass(long n, long lo, long hi) {
  lo = std::max(lo, 0L);
  hi = std::min(hi, n);
  if (lo > hi) return NEG_INF;
  LogSumExp s;
  for (long k = lo; k <= hi; ++k) s.add(lchoose(n, k));
  return log2_from_ln(s.value());
}

// Exact sum_{i=0}^{m} C(n,i) (q-1)^i.
inline mpz_class qary_ball_exact(unsigned long n, unsigned long m, unsigned long q) {
  mpz_class total = 0, pw = 1;
  for (unsigned long i = 0; i <= m && i <= n; ++i) {
    total += choose_exact(n, i) * pw;
    pw *= (q - 1);
  }
  return total;
}

inline double ln_mpz(const mpz_class& z) {
  if (z <= 0) return NEG_INF;
  signed long e;
  double d = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(d) + double(e) * M_LN2;
}

}  // namespace fbc
