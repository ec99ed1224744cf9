#pragma once
// Two-phase primal simplex on a dense tableau, usable with double or exact
// rational arithmetic.  Duals are read off the artificial columns, which stay
// in the tableau (cost-blocked) through phase 2.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "fbc/lp.hpp"

namespace fbc {

enum class LPStatus { Optimal, Infeasible, Unbounded, IterLimit };

template <class T>
struct LPSolution {
  LPStatus status = LPStatus::IterLimit;
  T value = scalar_traits<T>::zero();
  std::vector<T> primal;            // lp.ncols entries
  std::vector<T> dual;              // one entry per lp row (0 on skipped rows)
  long iterations = 0;
  double gap = 0;                   // |primal value - dual value|, 0 exact
};

template <class T>
class SimplexWorkspace {
 public:
  // Explicit NonNeg rows are skipped: every tableau variable is >= 0 already.
  SimplexWorkspace(const StandardFormLP<T>& lp, double tol, long iter_cap)
      : lp_(lp), tol_(scalar_traits<T>::exact ? 0.0 : tol), cap_(iter_cap) {
    for (size_t i = 0; i < lp.rows.size(); ++i)
      if (lp.rows[i].kind != RowKind::NonNeg) used_rows_.push_back((int)i);
    m_ = (int)used_rows_.size();
    nslack_ = 0;
    for (int ri : used_rows_)
      if (!row_is_eq(lp.rows[ri].kind)) ++nslack_;
    nstruct_ = lp.ncols + nslack_;
    ncols_ = nstruct_ + m_;
    tab_.assign((size_t)m_ * ncols_, zero());
    b_.assign(m_, zero());
    sign_.assign(m_, 1);
    basis_.resize(m_);
    int sl = 0;
    for (int i = 0; i < m_; ++i) {
      const Row<T>& r = lp_.rows[used_rows_[i]];
      for (auto& [j, c] : r.a) at(i, j) += c;
      if (!row_is_eq(r.kind)) at(i, lp_.ncols + sl++) = one();
      b_[i] = r.rhs;
      if (b_[i] < zero()) {
        sign_[i] = -1;
        b_[i] = -b_[i];
        for (int j = 0; j < nstruct_; ++j) at(i, j) = -at(i, j);
      }
      at(i, nstruct_ + i) = one();
      basis_[i] = nstruct_ + i;
    }
  }

  LPSolution<T> solve() {
    LPSolution<T> out;
    // phase 1: minimize the artificial sum
    cost_.assign(ncols_, zero());
    for (int i = 0; i < m_; ++i) cost_[nstruct_ + i] = one();
    reduce_costs();
    if (!iterate(/*allow_artificial=*/true)) {
      out.status = LPStatus::IterLimit;
      out.iterations = iters_;
      return out;
    }
    if (to_double(obj_) > (scalar_traits<T>::exact ? 0.0 : 1e-7)) {
      out.status = LPStatus::Infeasible;
      out.iterations = iters_;
      return out;
    }
    // Drive any basic artificial out (or verify its row is redundant) so it
    // cannot re-grow during phase 2.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < nstruct_) continue;
      int pick = -1;
      double mag = 0;
      for (int j = 0; j < nstruct_; ++j) {
        double a = std::fabs(to_double(at(i, j)));
        if (a > mag && at(i, j) != zero()) {
          mag = a;
          pick = j;
        }
      }
      if (pick >= 0 && (scalar_traits<T>::exact || mag > 1e-9)) pivot(i, pick);
    }
    // phase 2
    cost_.assign(ncols_, zero());
    for (int j = 0; j < lp_.ncols; ++j) cost_[j] = lp_.c[j];
    reduce_costs();
    if (!iterate(/*allow_artificial=*/false)) {
      out.status = unbounded_ ? LPStatus::Unbounded : LPStatus::IterLimit;
      out.iterations = iters_;
      return out;
    }
    out.status = LPStatus::Optimal;
    out.iterations = iters_;
    out.primal.assign(lp_.ncols, zero());
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < lp_.ncols) out.primal[basis_[i]] = b_[i];
    out.value = zero();
    for (int j = 0; j < lp_.ncols; ++j) out.value += lp_.c[j] * out.primal[j];
    out.dual.assign(lp_.rows.size(), zero());
    T dual_obj = zero();
    for (int i = 0; i < m_; ++i) {
      T y = -red_[nstruct_ + i];
      if (sign_[i] < 0) y = -y;
      out.dual[used_rows_[i]] = y;
      dual_obj += y * lp_.rows[used_rows_[i]].rhs;
    }
    out.gap = std::fabs(to_double(out.value - dual_obj));
    return out;
  }

 private:
  T zero() const { return scalar_traits<T>::zero(); }
  T one() const { return scalar_traits<T>::one(); }
  T& at(int i, int j) { return tab_[(size_t)i * ncols_ + j]; }

  void reduce_costs() {
    red_ = cost_;
    obj_ = zero();
    for (int i = 0; i < m_; ++i) {
      const T& cb = cost_[basis_[i]];
      if (cb == zero()) continue;
      obj_ += cb * b_[i];
      for (int j = 0; j < ncols_; ++j) red_[j] -= cb * at(i, j);
    }
  }

  bool negative(const T& v) const {
    if constexpr (scalar_traits<T>::exact) return v < 0;
    else return to_double(v) < -tol_;
  }
  bool positive(const T& v) const {
    if constexpr (scalar_traits<T>::exact) return v > 0;
    else return to_double(v) > tol_;
  }

  int pick_entering(bool bland, bool allow_artificial) {
    int limit = allow_artificial ? ncols_ : nstruct_;
    int best = -1;
    for (int j = 0; j < limit; ++j) {
      if (negative(red_[j])) {
        if (bland) return j;
        if (best < 0 || red_[j] < red_[best]) best = j;
      }
    }
    return best;
  }

  int pick_leaving(int enter) {
    int leave = -1;
    for (int i = 0; i < m_; ++i) {
      if (!positive(at(i, enter))) continue;
      if (leave < 0) {
        leave = i;
        continue;
      }
      T lhs = b_[i] * at(leave, enter);
      T rhs = b_[leave] * at(i, enter);
      if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[leave])) leave = i;
    }
    return leave;
  }

  void pivot(int leave, int enter) {
    T piv = at(leave, enter);
    for (int j = 0; j < ncols_; ++j) at(leave, j) /= piv;
    b_[leave] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == leave) continue;
      T f = at(i, enter);
      if (f == zero()) continue;
      for (int j = 0; j < ncols_; ++j) at(i, j) -= f * at(leave, j);
      b_[i] -= f * b_[leave];
      if constexpr (!scalar_traits<T>::exact) {
        if (b_[i] < zero() && to_double(-b_[i]) < 1e-11) b_[i] = zero();
      }
    }
    T f = red_[enter];
    if (f != zero()) {
      for (int j = 0; j < ncols_; ++j) red_[j] -= f * at(leave, j);
      obj_ += f * b_[leave];
    }
    basis_[leave] = enter;
  }

  bool iterate(bool allow_artificial) {
    bool bland = scalar_traits<T>::exact;
    int stall = 0;
    double last_obj = to_double(obj_);
    while (true) {
      if (iters_++ > cap_) return false;
      int enter = pick_entering(bland, allow_artificial);
      if (enter < 0) return true;  // optimal
      int leave = pick_leaving(enter);
      if (leave < 0) {
        unbounded_ = true;
        return false;
      }
      pivot(leave, enter);
      if (!bland) {
        double o = to_double(obj_);
        if (o >= last_obj - 1e-14) {
          if (++stall > 64) bland = true;  // anti-cycling fallback
        } else {
          stall = 0;
        }
        last_obj = o;
      }
    }
  }

  const StandardFormLP<T>& lp_;
  double tol_;
  long cap_;
  std::vector<int> used_rows_;
  int m_ = 0, nslack_ = 0, nstruct_ = 0, ncols_ = 0;
  std::vector<T> tab_, b_, cost_, red_;
  std::vector<int> basis_, sign_;
  T obj_ = scalar_traits<T>::zero();
  long iters_ = 0;
  bool unbounded_ = false;
};

template <class T>
LPSolution<T> solve(const StandardFormLP<T>& lp, double tol = 1e-9,
                    long iter_cap = 400000) {
  SimplexWorkspace<T> ws(lp, tol, iter_cap);
  auto sol = ws.solve();
  if (sol.status == LPStatus::Optimal && !scalar_traits<T>::exact && sol.gap > 1e-6)
    throw std::runtime_error("simplex: duality gap check failed");
  return sol;
}

}  // namespace fbc
