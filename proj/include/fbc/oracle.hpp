#pragma once
// Ground truth on tiny instances: exhaustive minimization over deterministic
// codes and an extreme-point census of the relaxation polytope.

#include <optional>
#include <thread>

#include "fbc/simplex.hpp"

namespace fbc {

template <class T>
struct OracleResult {
  T value = scalar_traits<T>::zero();
  DeterministicCode argmin;
};

// Exact minimum of expected_loss over all deterministic codes.  The decoder
// optimization separates per output symbol, so enumeration is only over
// encoders; ties resolve to the lexicographically smallest (f, g).
template <class T>
OracleResult<T> opt_sc(const ProblemInstance<T>& inst, double cap = 1e6) {
  double codes = std::pow((double)inst.X.size, inst.S.size) *
                 std::pow((double)inst.Shat.size, inst.Y.size);
  if (codes > cap) throw std::length_error("opt_sc: code count exceeds cap");
  size_t nf = 1;
  for (int s = 0; s < inst.S.size; ++s) nf *= (size_t)inst.X.size;
  std::optional<OracleResult<T>> best;
  std::vector<int> f(inst.S.size, 0);
  for (size_t fi = 0; fi < nf; ++fi) {
    size_t t = fi;
    for (int s = 0; s < inst.S.size; ++s) {
      f[inst.S.size - 1 - s] = (int)(t % inst.X.size);  // lexicographic in f
      t /= inst.X.size;
    }
    T total = scalar_traits<T>::zero();
    std::vector<int> g(inst.Y.size, 0);
    for (int y = 0; y < inst.Y.size; ++y) {
      std::optional<T> besty;
      int arg = 0;
      for (int sh = 0; sh < inst.Shat.size; ++sh) {
        T c = scalar_traits<T>::zero();
        for (int s = 0; s < inst.S.size; ++s)
          c += inst.kappa(s, f[s], y, sh) * inst.source(s) * inst.channel(f[s], y);
        if (!besty || c < *besty) {
          besty = c;
          arg = sh;
        }
      }
      total += *besty;
      g[y] = arg;
    }
    if (!best || total < best->value) best = OracleResult<T>{total, {f, g}};
  }
  return *best;
}

template <class T>
struct SandwichResult {
  T opt_sc, opt_lp, opt_lp_prime;
};

template <class T>
SandwichResult<T> sandwich(const ProblemInstance<T>& inst, double tol = 1e-8) {
  auto lp = build_lp(inst);
  auto lpp = build_lp_prime(inst);
  auto sol = solve(lp);
  auto solp = solve(lpp);
  if (sol.status != LPStatus::Optimal || solp.status != LPStatus::Optimal)
    throw std::runtime_error("sandwich: relaxation solve failed");
  auto orc = opt_sc(inst);
  double a = to_double(solp.value), b = to_double(sol.value), c = to_double(orc.value);
  if (a > b + tol || b > c + tol)
    throw std::logic_error("sandwich: ordering violated (implementation bug)");
  return {orc.value, sol.value, solp.value};
}

// Rank of the active-row submatrix at a lifted point (Gaussian elimination).
template <class T>
int active_rank(const StandardFormLP<T>& lp, const std::vector<T>& v, double tol = 1e-9) {
  std::vector<std::vector<double>> rows;
  for (auto& r : lp.rows) {
    T lhs = scalar_traits<T>::zero();
    for (auto& [j, c] : r.a) lhs += c * v[j];
    bool active = row_is_eq(r.kind) ? std::fabs(to_double(lhs - r.rhs)) <= tol
                                    : std::fabs(to_double(lhs - r.rhs)) <= tol;
    if (!active) continue;
    std::vector<double> dense(lp.ncols, 0.0);
    for (auto& [j, c] : r.a) dense[j] += to_double(c);
    rows.push_back(std::move(dense));
  }
  int rank = 0;
  for (int col = 0; col < lp.ncols && rank < (int)rows.size(); ++col) {
    int piv = -1;
    double best = tol;
    for (int i = rank; i < (int)rows.size(); ++i)
      if (std::fabs(rows[i][col]) > best) {
        best = std::fabs(rows[i][col]);
        piv = i;
      }
    if (piv < 0) continue;
    std::swap(rows[rank], rows[piv]);
    for (int i = rank + 1; i < (int)rows.size(); ++i) {
      double f = rows[i][col] / rows[rank][col];
      if (f == 0) continue;
      for (int j = col; j < lp.ncols; ++j) rows[i][j] -= f * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

struct VertexCensus {
  int codes = 0;
  int feasible = 0;
  int vertices = 0;
};

template <class T>
VertexCensus vertex_census(const ProblemInstance<T>& inst, double cap = 1e6) {
  double codes = std::pow((double)inst.X.size, inst.S.size) *
                 std::pow((double)inst.Shat.size, inst.Y.size);
  if (codes > cap) throw std::length_error("vertex_census: cap exceeded");
  auto lp = build_lp(inst);
  VertexCensus out;
  size_t nf = 1, ng = 1;
  for (int s = 0; s < inst.S.size; ++s) nf *= (size_t)inst.X.size;
  for (int y = 0; y < inst.Y.size; ++y) ng *= (size_t)inst.Shat.size;
  for (size_t fi = 0; fi < nf; ++fi)
    for (size_t gi = 0; gi < ng; ++gi) {
      DeterministicCode code;
      code.f.resize(inst.S.size);
      code.g.resize(inst.Y.size);
      size_t t = fi;
      for (int s = 0; s < inst.S.size; ++s) {
        code.f[s] = (int)(t % inst.X.size);
        t /= inst.X.size;
      }
      t = gi;
      for (int y = 0; y < inst.Y.size; ++y) {
        code.g[y] = (int)(t % inst.Shat.size);
        t /= inst.Shat.size;
      }
      ++out.codes;
      auto pt = embed_deterministic(inst, code);
      if (max_row_residual(lp, pt.v) <= 1e-10) ++out.feasible;
      if (active_rank(lp, pt.v) == lp.ncols) ++out.vertices;
    }
  return out;
}

}  // namespace fbc
