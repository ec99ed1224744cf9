// SPDX-License-Identifier: MIT
#pragma once
// Mechanical construction of the lifted linear relaxation of the joint
// source-channel coding problem, plus code embedding into the lifted space.

#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbc/core.hpp"

namespace fbc {

enum class RowKind {
  EncoderSum,    // sum_x Q_{X|S}(x|s) = 1
  DecoderSum,    // sum_sh Q_{Sh|Y}(sh|y) = 1
  MarginalX,     // sum_x W(s,x,y,sh) - Q_{Sh|Y}(sh|y) = 0
  MarginalShat,  // sum_sh W(s,x,y,sh) - Q_{X|S}(x|s) = 0
  McCormick,     // Q_{X|S} + Q_{Sh|Y} - W <= 1
  NonNeg,        // -v <= 0
  Stochastic,    // network: sum_{x_i} Q_{X_i|Y_i} = 1
  LiftEq,        // network: sum_{x_i} U_{J+i} = U_J
  LiftIneq,      // network: expanded product inequality, <= form
};

inline bool row_is_eq(RowKind k) {
  return k != RowKind::McCormick && k != RowKind::NonNeg && k != RowKind::LiftIneq;
}

template <class T>
struct Row {
  RowKind kind;
  std::array<int, 8> idx{};  // family-specific witness indices
  std::vector<std::pair<int, T>> a;
  T rhs = scalar_traits<T>::zero();
};

enum class LPTag { LP, LP_PRIME, LPSR, LPN };

template <class T>
struct StandardFormLP {
  LPTag tag = LPTag::LP;
  int ncols = 0;
  std::vector<std::string> names;
  std::vector<Row<T>> rows;
  std::vector<T> c;
};

template <class T>
struct LiftedPoint {
  std::vector<T> v;
};

struct VarCatalog {
  int nS, nX, nY, nSh;
  int qxs(int s, int x) const { return s * nX + x; }
  int qsy(int y, int sh) const { return nS * nX + y * nSh + sh; }
  int w(int s, int x, int y, int sh) const {
    return nS * nX + nY * nSh + ((s * nX + x) * nY + y) * nSh + sh;
  }
  int ncols() const { return nS * nX + nY * nSh + nS * nX * nY * nSh; }
};

inline VarCatalog catalog_of(int nS, int nX, int nY, int nSh) {
  return VarCatalog{nS, nX, nY, nSh};
}

namespace detail {
inline std::string idx2(const char* base, const char* i1, int v1, const char* i2, int v2) {
  std::ostringstream os;
  os << base << "(" << i1 << v1 << "," << i2 << v2 << ")";
  return os.str();
}
}  // namespace detail

template <class T>
std::vector<std::string> lp_variable_names(const VarCatalog& cat) {
  std::vector<std::string> names((size_t)cat.ncols());
  for (int s = 0; s < cat.nS; ++s)
    for (int x = 0; x < cat.nX; ++x)
      names[cat.qxs(s, x)] = detail::idx2("Qxs", "s", s, "x", x);
  for (int y = 0; y < cat.nY; ++y)
    for (int sh = 0; sh < cat.nSh; ++sh)
      names[cat.qsy(y, sh)] = detail::idx2("Qsy", "y", y, "sh", sh);
  for (int s = 0; s < cat.nS; ++s)
    for (int x = 0; x < cat.nX; ++x)
      for (int y = 0; y < cat.nY; ++y)
        for (int sh = 0; sh < cat.nSh; ++sh) {
          std::ostringstream os;
          os << "W(s" << s << ",x" << x << ",y" << y << ",sh" << sh << ")";
          names[cat.w(s, x, y, sh)] = os.str();
        }
  return names;
}

template <class T>
StandardFormLP<T> build_lp_impl(const ProblemInstance<T>& inst, bool mccormick,
                                size_t cap) {
  if (inst.tuples() > cap) throw std::length_error("build_lp: dimension cap exceeded");
  VarCatalog cat = catalog_of(inst.S.size, inst.X.size, inst.Y.size, inst.Shat.size);
  StandardFormLP<T> lp;
  lp.tag = mccormick ? LPTag::LP : LPTag::LP_PRIME;
  lp.ncols = cat.ncols();
  lp.names = lp_variable_names<T>(cat);
  lp.c.assign(lp.ncols, scalar_traits<T>::zero());
  const T one = scalar_traits<T>::one();

  for (int s = 0; s < cat.nS; ++s)
    for (int x = 0; x < cat.nX; ++x)
      for (int y = 0; y < cat.nY; ++y)
        for (int sh = 0; sh < cat.nSh; ++sh)
          lp.c[cat.w(s, x, y, sh)] =
              inst.kappa(s, x, y, sh) * inst.source(s) * inst.channel(x, y);

  for (int s = 0; s < cat.nS; ++s) {
    Row<T> r{RowKind::EncoderSum, {s}, {}, one};
    for (int x = 0; x < cat.nX; ++x) r.a.push_back({cat.qxs(s, x), one});
    lp.rows.push_back(std::move(r));
  }
  for (int y = 0; y < cat.nY; ++y) {
    Row<T> r{RowKind::DecoderSum, {y}, {}, one};
    for (int sh = 0; sh < cat.nSh; ++sh) r.a.push_back({cat.qsy(y, sh), one});
    lp.rows.push_back(std::move(r));
  }
  for (int s = 0; s < cat.nS; ++s)
    for (int sh = 0; sh < cat.nSh; ++sh)
      for (int y = 0; y < cat.nY; ++y) {
        Row<T> r{RowKind::MarginalX, {s, sh, y}, {}, scalar_traits<T>::zero()};
        for (int x = 0; x < cat.nX; ++x) r.a.push_back({cat.w(s, x, y, sh), one});
        r.a.push_back({cat.qsy(y, sh), -one});
        lp.rows.push_back(std::move(r));
      }
  for (int x = 0; x < cat.nX; ++x)
    for (int s = 0; s < cat.nS; ++s)
      for (int y = 0; y < cat.nY; ++y) {
        Row<T> r{RowKind::MarginalShat, {x, s, y}, {}, scalar_traits<T>::zero()};
        for (int sh = 0; sh < cat.nSh; ++sh) r.a.push_back({cat.w(s, x, y, sh), one});
        r.a.push_back({cat.qxs(s, x), -one});
        lp.rows.push_back(std::move(r));
      }
  if (mccormick)
    for (int s = 0; s < cat.nS; ++s)
      for (int x = 0; x < cat.nX; ++x)
        for (int y = 0; y < cat.nY; ++y)
          for (int sh = 0; sh < cat.nSh; ++sh) {
            Row<T> r{RowKind::McCormick, {s, x, y, sh}, {}, one};
            r.a.push_back({cat.qxs(s, x), one});
            r.a.push_back({cat.qsy(y, sh), one});
            r.a.push_back({cat.w(s, x, y, sh), -one});
            lp.rows.push_back(std::move(r));
          }
  for (int j = 0; j < lp.ncols; ++j) {
    Row<T> r{RowKind::NonNeg, {j}, {{j, -one}}, scalar_traits<T>::zero()};
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

template <class T>
StandardFormLP<T> build_lp(const ProblemInstance<T>& inst, size_t cap = (size_t)1 << 16) {
  return build_lp_impl(inst, true, cap);
}

template <class T>
StandardFormLP<T> build_lp_prime(const ProblemInstance<T>& inst,
                                 size_t cap = (size_t)1 << 16) {
  return build_lp_impl(inst, false, cap);
}

template <class T>
double max_row_residual(const StandardFormLP<T>& lp, const std::vector<T>& v) {
  double worst = 0;
  for (auto& r : lp.rows) {
    T lhs = scalar_traits<T>::zero();
    for (auto& [j, c] : r.a) lhs += c * v[j];
    double res = row_is_eq(r.kind) ? std::fabs(to_double(lhs - r.rhs))
                                   : std::max(0.0, to_double(lhs - r.rhs));
    worst = std::max(worst, res);
  }
  return worst;
}

// Product lift W = Q_{X|S} Q_{Sh|Y}; kernels are row-stochastic (s- resp.
// y-major).  If lp is given, feasibility of the lifted point is asserted.
template <class T>
LiftedPoint<T> embed_code(const ProblemInstance<T>& inst, const std::vector<T>& Qxs,
                          const std::vector<T>& Qsy,
                          const StandardFormLP<T>* lp = nullptr, double tol = 1e-12) {
  VarCatalog cat = catalog_of(inst.S.size, inst.X.size, inst.Y.size, inst.Shat.size);
  if ((int)Qxs.size() != cat.nS * cat.nX || (int)Qsy.size() != cat.nY * cat.nSh)
    throw std::invalid_argument("embed_code: kernel dimension mismatch");
  auto stochastic = [&](const std::vector<T>& k, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
      T s = scalar_traits<T>::zero();
      for (int j = 0; j < cols; ++j) {
        if (k[(size_t)i * cols + j] < scalar_traits<T>::zero()) return false;
        s += k[(size_t)i * cols + j];
      }
      if constexpr (scalar_traits<T>::exact) {
        if (s != 1) return false;
      } else if (std::fabs(to_double(s) - 1.0) > 1e-9) {
        return false;
      }
    }
    return true;
  };
  if (!stochastic(Qxs, cat.nS, cat.nX) || !stochastic(Qsy, cat.nY, cat.nSh))
    throw std::invalid_argument("embed_code: kernels not row-stochastic");
  LiftedPoint<T> pt;
  pt.v.assign(cat.ncols(), scalar_traits<T>::zero());
  for (int s = 0; s < cat.nS; ++s)
    for (int x = 0; x < cat.nX; ++x) pt.v[cat.qxs(s, x)] = Qxs[(size_t)s * cat.nX + x];
  for (int y = 0; y < cat.nY; ++y)
    for (int sh = 0; sh < cat.nSh; ++sh)
      pt.v[cat.qsy(y, sh)] = Qsy[(size_t)y * cat.nSh + sh];
  for (int s = 0; s < cat.nS; ++s)
    for (int x = 0; x < cat.nX; ++x)
      for (int y = 0; y < cat.nY; ++y)
        for (int sh = 0; sh < cat.nSh; ++sh)
          pt.v[cat.w(s, x, y, sh)] =
              Qxs[(size_t)s * cat.nX + x] * Qsy[(size_t)y * cat.nSh + sh];
  if (lp && max_row_residual(*lp, pt.v) > tol)
    throw std::logic_error("embed_code: lifted point violates a relaxation row");
  return pt;
}

template <class T>
LiftedPoint<T> embed_deterministic(const ProblemInstance<T>& inst,
                                   const DeterministicCode& code,
                                   const StandardFormLP<T>* lp = nullptr) {
  std::vector<T> Qxs((size_t)inst.S.size * inst.X.size, scalar_traits<T>::zero());
  std::vector<T> Qsy((size_t)inst.Y.size * inst.Shat.size, scalar_traits<T>::zero());
  for (int s = 0; s < inst.S.size; ++s)
    Qxs[(size_t)s * inst.X.size + code.f[s]] = scalar_traits<T>::one();
  for (int y = 0; y < inst.Y.size; ++y)
    Qsy[(size_t)y * inst.Shat.size + code.g[y]] = scalar_traits<T>::one();
  return embed_code(inst, Qxs, Qsy, lp);
}

// The four envelope inequalities for w ~ x1*x2 with l <= x <= u.
template <class T>
bool mccormick_check(const T& w, const T& x1, const T& x2, const T& l1, const T& u1,
                     const T& l2, const T& u2, double tol = 0) {
  auto le = [&](const T& a, const T& b) {
    if constexpr (scalar_traits<T>::exact) return a <= b;
    else return to_double(a) <= to_double(b) + tol;
  };
  return le(l2 * x1 + l1 * x2 - l1 * l2, w) && le(u2 * x1 + u1 * x2 - u1 * u2, w) &&
         le(w, u2 * x1 + l1 * x2 - l1 * u2) && le(w, l2 * x1 + u1 * x2 - u1 * l2);
}

inline const char* row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::EncoderSum: return "encoder-sum";
    case RowKind::DecoderSum: return "decoder-sum";
    case RowKind::MarginalX: return "marginal-x";
    case RowKind::MarginalShat: return "marginal-shat";
    case RowKind::McCormick: return "mccormick";
    case RowKind::NonNeg: return "nonneg";
    case RowKind::Stochastic: return "stochastic";
    case RowKind::LiftEq: return "lift-eq";
    case RowKind::LiftIneq: return "lift-ineq";
  }
  return "?";
}

// Human-readable fixed-layout listing; byte-stable for identical input.
template <class T>
std::string lp_to_text(const StandardFormLP<T>& lp) {
  std::ostringstream os;
  os << "columns " << lp.ncols << " rows " << lp.rows.size() << "\n";
  os << "minimize";
  for (int j = 0; j < lp.ncols; ++j) {
    if (lp.c[j] == scalar_traits<T>::zero()) continue;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", to_double(lp.c[j]));
    os << " + " << buf << " " << lp.names[j];
  }
  os << "\n";
  for (auto& r : lp.rows) {
    os << row_kind_name(r.kind) << ":";
    for (auto& [j, c] : r.a) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", to_double(c));
      os << " + " << buf << " " << lp.names[j];
    }
    char rhs[32];
    std::snprintf(rhs, sizeof rhs, "%.12g", to_double(r.rhs));
    os << (row_is_eq(r.kind) ? " = " : " <= ") << rhs << "\n";
  }
  return os.str();
}

}  // namespace fbc
