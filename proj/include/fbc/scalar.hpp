#pragma once
// Numeric kernels shared by everything: dual backends (double / exact rational)
// plus a compensated log-sum-exp accumulator for huge*tiny products.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbc {

inline constexpr double NEG_INF = -std::numeric_limits<double>::infinity();
inline constexpr double POS_INF = std::numeric_limits<double>::infinity();

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double ratio(long num, long den) { return double(num) / double(den); }
  static double to_double(double v) { return v; }
  static double abs(double v) { return std::fabs(v); }
};

template <>
struct scalar_traits<mpq_class> {
  static constexpr bool exact = true;
  static mpq_class zero() { return mpq_class(0); }
  static mpq_class one() { return mpq_class(1); }
  static mpq_class ratio(long num, long den) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
  }
  static double to_double(const mpq_class& v) { return v.get_d(); }
  static mpq_class abs(const mpq_class& v) { return ::abs(v); }
};

inline double to_double(double v) { return v; }
inline double to_double(const mpq_class& v) { return v.get_d(); }
template <class U, class V>
double to_double(const __gmp_expr<U, V>& e) {
  return mpq_class(e).get_d();
}

// Parses "3/40", "0.125", "1e-3", "7".  Rational mode keeps decimal strings
// exact (0.1 -> 1/10); bare doubles are not accepted there to avoid silently
// importing binary rounding.
inline mpq_class parse_rational(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!isspace((unsigned char)c)) t += c;
  if (t.empty()) throw std::invalid_argument("empty scalar");
  auto slash = t.find('/');
  if (slash != std::string::npos) {
    mpq_class q(t);  // gmp accepts "p/q"
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    q.canonicalize();
    return q;
  }
  auto epos = t.find_first_of("eE");
  long expo = 0;
  if (epos != std::string::npos) {
    expo = std::stol(t.substr(epos + 1));
    t = t.substr(0, epos);
  }
  auto dot = t.find('.');
  std::string digits = t;
  long frac = 0;
  if (dot != std::string::npos) {
    digits = t.substr(0, dot) + t.substr(dot + 1);
    frac = long(t.size() - dot - 1);
  }
  if (digits.empty() || digits == "-" || digits == "+")
    throw std::invalid_argument("bad scalar: " + s);
  mpq_class q(mpz_class(digits, 10), 1);
  long shift = expo - frac;
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, (unsigned long)std::labs(shift));
  if (shift >= 0)
    q *= p10;
  else
    q /= p10;
  q.canonicalize();
  return q;
}

template <class T>
T parse_scalar(const std::string& s);

template <>
inline double parse_scalar<double>(const std::string& s) {
  return std::stod(s);
}
template <>
inline mpq_class parse_scalar<mpq_class>(const std::string& s) {
  return parse_rational(s);
}

// Streaming log-sum-exp: value() = log(sum_i exp(x_i)), natural log.
struct LogSumExp {
  double peak = NEG_INF;
  double acc = 0.0;  // sum of exp(x - peak)
  void add(double x) {
    if (x == NEG_INF) return;
    if (x <= peak) {
      acc += std::exp(x - peak);
    } else {
      acc = acc * std::exp(peak - x) + 1.0;
      peak = x;
    }
  }
  double value() const { return peak == NEG_INF ? NEG_INF : peak + std::log(acc); }
};

inline double log2_from_ln(double ln) { return ln / M_LN2; }
inline double ln_from_log2(double l2) { return l2 * M_LN2; }

}  // namespace fbc
