#pragma once
// Canonical instance families used across tests and the CLI.

#include "fbc/core.hpp"

namespace fbc {

// Uniform q^n-ary source over the n-fold q-ary symmetric channel with
// normalized Hamming distortion (expected-distortion form).  Uncoded
// transmission is optimal here at every blocklength.
template <class T>
ProblemInstance<T> matched_instance(int q, int n, const T& eps) {
  ProblemInstance<T> inst;
  size_t qn = 1;
  for (int i = 0; i < n; ++i) qn *= (size_t)q;
  inst.S.size = inst.X.size = inst.Y.size = inst.Shat.size = (int)qn;
  inst.source.mass.assign(qn, scalar_traits<T>::ratio(1, (long)qn));
  inst.channel = memoryless_product(qsc_kernel(q, eps), n);
  inst.loss.factored = true;
  inst.loss.has_level = false;
  inst.loss.dist.resize(qn * qn);
  for (size_t s = 0; s < qn; ++s)
    for (size_t sh = 0; sh < qn; ++sh)
      inst.loss.dist[s * qn + sh] =
          scalar_traits<T>::ratio(hamming(s, sh, n, q), n);
  return inst;
}

// M equiprobable messages through an arbitrary channel; error loss.
template <class T>
ProblemInstance<T> channel_coding_instance(const ChannelKernel<T>& ch, int M) {
  ProblemInstance<T> inst;
  inst.S.size = inst.Shat.size = M;
  inst.X.size = ch.in;
  inst.Y.size = ch.out;
  inst.source.mass.assign(M, scalar_traits<T>::ratio(1, M));
  inst.channel = ch;
  inst.loss.factored = true;
  inst.loss.has_level = true;
  inst.loss.level = scalar_traits<T>::zero();
  inst.loss.dist.resize((size_t)M * M);
  for (int s = 0; s < M; ++s)
    for (int sh = 0; sh < M; ++sh)
      inst.loss.dist[(size_t)s * M + sh] =
          s == sh ? scalar_traits<T>::zero() : scalar_traits<T>::one();
  return inst;
}

// Binary memoryless source (k letters, bias p) over BSC(eps)^n with
// normalized Hamming distortion and excess level D.
template <class T>
ProblemInstance<T> bms_bsc_instance(int k, int n, const T& p, const T& eps,
                                    const T& level) {
  ProblemInstance<T> inst;
  size_t K = (size_t)1 << k, N = (size_t)1 << n;
  inst.S.size = inst.Shat.size = (int)K;
  inst.X.size = inst.Y.size = (int)N;
  inst.source.mass.resize(K);
  for (size_t s = 0; s < K; ++s) {
    T m = scalar_traits<T>::one();
    for (int i = 0; i < k; ++i)
      m *= ((s >> i) & 1) ? p : (scalar_traits<T>::one() - p);
    inst.source.mass[s] = m;
  }
  inst.channel = memoryless_product(bsc_kernel(eps), n);
  inst.loss.factored = true;
  inst.loss.has_level = true;
  inst.loss.level = level;
  inst.loss.dist.resize(K * K);
  for (size_t s = 0; s < K; ++s)
    for (size_t sh = 0; sh < K; ++sh)
      inst.loss.dist[s * K + sh] = scalar_traits<T>::ratio(popcount_diff(s, sh), k);
  return inst;
}

}  // namespace fbc
