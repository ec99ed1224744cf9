// SPDX-License-Identifier: MIT
#pragma once
// Domain types for sources, channels, losses and deterministic codes.

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbc/scalar.hpp"

namespace fbc {

struct Alphabet {
  int size = 0;
  std::vector<std::string> labels;  // optional; empty or one per symbol
  bool ok() const {
    if (size < 1) return false;
    if (!labels.empty()) {
      if ((int)labels.size() != size) return false;
      for (size_t i = 0; i < labels.size(); ++i)
        for (size_t j = i + 1; j < labels.size(); ++j)
          if (labels[i] == labels[j]) return false;
    }
    return true;
  }
};

template <class T>
struct Distribution {
  std::vector<T> mass;
  int size() const { return (int)mass.size(); }
  const T& operator()(int i) const { return mass[i]; }
};

template <class T>
struct ChannelKernel {
  int in = 0, out = 0;
  std::vector<T> p;  // row-major, in*out entries
  const T& operator()(int x, int y) const { return p[(size_t)x * out + y]; }
  T& at(int x, int y) { return p[(size_t)x * out + y]; }
};

// Either a dense kappa(s,x,y,shat) table, or a factored distortion d(s,shat)
// with an optional excess level D (then kappa = 1{d > D}); without a level the
// loss is the distortion itself (expected-distortion form).
template <class T>
struct LossFunction {
  bool factored = false;
  std::vector<T> table;  // dense: s-major (s,x,y,shat)
  std::vector<T> dist;   // factored: s-major (s,shat)
  bool has_level = false;
  T level = scalar_traits<T>::zero();
};

template <class T>
struct ProblemInstance {
  Alphabet S, X, Y, Shat;
  Distribution<T> source;
  ChannelKernel<T> channel;
  LossFunction<T> loss;

  T kappa(int s, int x, int y, int sh) const {
    if (!loss.factored) {
      size_t i = (((size_t)s * X.size + x) * Y.size + y) * Shat.size + sh;
      return loss.table[i];
    }
    const T& d = loss.dist[(size_t)s * Shat.size + sh];
    if (!loss.has_level) return d;
    return d > loss.level ? scalar_traits<T>::one() : scalar_traits<T>::zero();
  }
  size_t tuples() const {
    return (size_t)S.size * X.size * Y.size * Shat.size;
  }
};

struct DeterministicCode {
  std::vector<int> f;  // S -> X
  std::vector<int> g;  // Y -> Shat
};

struct ValidationReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

namespace detail {
template <class T>
bool sums_to_one(const std::vector<T>& v, double tol) {
  T s = scalar_traits<T>::zero();
  for (auto& x : v) s += x;
  if constexpr (scalar_traits<T>::exact) return s == 1;
  else return std::fabs(to_double(s) - 1.0) <= tol;
}
template <class T>
bool entry_ok(const T& x) {
  if constexpr (scalar_traits<T>::exact) return true;
  else return std::isfinite(to_double(x));
}
}  // namespace detail

template <class T>
ValidationReport validate_instance(const ProblemInstance<T>& inst, double tol = 1e-12) {
  ValidationReport r;
  auto fail = [&](const std::string& m) { r.failures.push_back(m); };
  for (auto* a : {&inst.S, &inst.X, &inst.Y, &inst.Shat})
    if (!a->ok()) fail("bad alphabet");
  if ((int)inst.source.mass.size() != inst.S.size) fail("source size mismatch");
  for (auto& m : inst.source.mass) {
    if (!detail::entry_ok(m)) fail("non-finite source mass");
    if (m < scalar_traits<T>::zero()) fail("negative source mass");
  }
  if (!inst.source.mass.empty() && !detail::sums_to_one(inst.source.mass, tol)) {
    T s = scalar_traits<T>::zero();
    for (auto& x : inst.source.mass) s += x;
    std::ostringstream os;
    os << "mass sums to " << to_double(s);
    fail(os.str());
  }
  if (inst.channel.in != inst.X.size || inst.channel.out != inst.Y.size ||
      (int)inst.channel.p.size() != inst.X.size * inst.Y.size) {
    fail("channel dimension mismatch");
  } else {
    for (int x = 0; x < inst.X.size; ++x) {
      std::vector<T> row(inst.channel.p.begin() + (size_t)x * inst.Y.size,
                         inst.channel.p.begin() + (size_t)(x + 1) * inst.Y.size);
      for (auto& m : row) {
        if (!detail::entry_ok(m)) fail("non-finite channel entry");
        if (m < scalar_traits<T>::zero()) fail("negative channel entry");
      }
      if (!detail::sums_to_one(row, tol)) fail("channel row does not sum to 1");
    }
  }
  if (!inst.loss.factored) {
    if (inst.loss.table.size() != inst.tuples()) fail("loss table size mismatch");
    for (auto& v : inst.loss.table)
      if (!detail::entry_ok(v)) fail("non-finite loss");
  } else {
    if ((int)inst.loss.dist.size() != inst.S.size * inst.Shat.size)
      fail("distortion table size mismatch");
    for (auto& v : inst.loss.dist) {
      if (!detail::entry_ok(v)) fail("non-finite loss");
      if (v < scalar_traits<T>::zero()) fail("negative distortion");
    }
    if (inst.loss.has_level && inst.loss.level < scalar_traits<T>::zero())
      fail("negative distortion level");
  }
  return r;
}

template <class T>
T expected_loss(const ProblemInstance<T>& inst, const DeterministicCode& code) {
  if ((int)code.f.size() != inst.S.size || (int)code.g.size() != inst.Y.size)
    throw std::invalid_argument("code dimension mismatch");
  T total = scalar_traits<T>::zero();
  for (int s = 0; s < inst.S.size; ++s) {
    int x = code.f[s];
    if (x < 0 || x >= inst.X.size) throw std::invalid_argument("encoder out of range");
    for (int y = 0; y < inst.Y.size; ++y) {
      int sh = code.g[y];
      if (sh < 0 || sh >= inst.Shat.size) throw std::invalid_argument("decoder out of range");
      total += inst.kappa(s, x, y, sh) * inst.source(s) * inst.channel(x, y);
    }
  }
  return total;
}

template <class T>
ChannelKernel<T> memoryless_product(const ChannelKernel<T>& base, int n,
                                    size_t cap = (size_t)1 << 24) {
  if (n < 1) throw std::invalid_argument("blocklength must be >= 1");
  size_t in = 1, out = 1;
  for (int i = 0; i < n; ++i) {
    in *= (size_t)base.in;
    out *= (size_t)base.out;
    if (in * out > cap) throw std::length_error("memoryless_product: cap exceeded");
  }
  ChannelKernel<T> k;
  k.in = (int)in;
  k.out = (int)out;
  k.p.resize(in * out);
  for (size_t x = 0; x < in; ++x) {
    for (size_t y = 0; y < out; ++y) {
      T v = scalar_traits<T>::one();
      size_t xr = x, yr = y;
      for (int i = 0; i < n; ++i) {
        v *= base((int)(xr % base.in), (int)(yr % base.out));
        xr /= base.in;
        yr /= base.out;
      }
      k.p[x * out + y] = v;
    }
  }
  return k;
}

template <class T>
ChannelKernel<T> bsc_kernel(const T& eps) {
  ChannelKernel<T> k;
  k.in = k.out = 2;
  k.p = {scalar_traits<T>::one() - eps, eps, eps, scalar_traits<T>::one() - eps};
  return k;
}

// q-ary symmetric channel: stays with prob 1-eps, else uniform over others.
template <class T>
ChannelKernel<T> qsc_kernel(int q, const T& eps) {
  ChannelKernel<T> k;
  k.in = k.out = q;
  k.p.assign((size_t)q * q, eps / (q - 1));
  for (int i = 0; i < q; ++i) k.at(i, i) = scalar_traits<T>::one() - eps;
  return k;
}

inline int hamming(size_t a, size_t b, int n, int q) {
  int d = 0;
  for (int i = 0; i < n; ++i) {
    if (a % q != b % q) ++d;
    a /= q;
    b /= q;
  }
  return d;
}

inline int popcount_diff(size_t a, size_t b) { return __builtin_popcountll(a ^ b); }

}  // namespace fbc
