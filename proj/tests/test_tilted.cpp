#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbc/instances.hpp"
#include "fbc/tilted.hpp"

using namespace fbc;

namespace {

// k-letter binary memoryless source with normalized Hamming distortion
struct BmsSetup {
  Distribution<double> src;
  std::vector<double> d;
  int nSh;
};

BmsSetup bms(int k, double p) {
  BmsSetup b;
  size_t K = (size_t)1 << k;
  b.nSh = (int)K;
  b.src.mass.resize(K);
  for (size_t s = 0; s < K; ++s) {
    double m = 1;
    for (int i = 0; i < k; ++i) m *= ((s >> i) & 1) ? p : 1 - p;
    b.src.mass[s] = m;
  }
  b.d.resize(K * K);
  for (size_t s = 0; s < K; ++s)
    for (size_t sh = 0; sh < K; ++sh)
      b.d[s * K + sh] = double(popcount_diff(s, sh)) / k;
  return b;
}

}  // namespace

TEST_CASE("rate-distortion closed forms for the binary source") {
  auto b = bms(1, 0.5);
  auto rd = rate_distortion(b.src, b.d, b.nSh, 0.1);
  CHECK(rd.rate_bits == doctest::Approx(1 - entropy2(0.1)).epsilon(1e-4));

  auto b3 = bms(1, 0.3);
  auto rd3 = rate_distortion(b3.src, b3.d, b3.nSh, 0.1);
  CHECK(rd3.rate_bits == doctest::Approx(entropy2(0.3) - entropy2(0.1)).epsilon(1e-4));
  CHECK(rd3.lambda_star == doctest::Approx(std::log(9.0)).epsilon(1e-3));

  CHECK_THROWS(rate_distortion(b3.src, b3.d, b3.nSh, 0.5));  // beyond the R=0 point
}

TEST_CASE("zero-distortion bypass") {
  auto b = bms(1, 0.5);
  auto rd = rate_distortion(b.src, b.d, b.nSh, 0.0);
  CHECK(rd.zero_distortion);
  auto t = tilted(b.src, b.d, b.nSh, 0.0, rd);
  CHECK(t.j_bits[0] == doctest::Approx(1.0));
  CHECK(t.j_bits[1] == doctest::Approx(1.0));

  auto b2 = bms(2, 0.25);
  auto rd2 = rate_distortion(b2.src, b2.d, b2.nSh, 0.0);
  auto t2 = tilted(b2.src, b2.d, b2.nSh, 0.0, rd2);
  for (size_t s = 0; s < 4; ++s)
    CHECK(t2.j_bits[s] == doctest::Approx(-std::log2(b2.src.mass[s])));
  CHECK(tilted_inequality_max(b2.src, b2.d, b2.nSh, t2) <= 1 + 1e-8);
}

TEST_CASE("closed-form tilted information matches the iterative solver") {
  for (int k : {1, 2, 3, 4, 5, 6})
    for (double p : {0.25, 0.5})
      for (double D : {0.05, 0.11}) {
        auto b = bms(k, p);
        auto rd = rate_distortion(b.src, b.d, b.nSh, D);
        CHECK(rd.rate_bits == doctest::Approx(k * bms_rate_bits(p, D)).epsilon(2e-4));
        auto t = tilted(b.src, b.d, b.nSh, D, rd);
        for (size_t s = 0; s < ((size_t)1 << k); ++s) {
          int w = __builtin_popcountll(s);
          CHECK(t.j_bits[s] ==
                doctest::Approx(bms_tilted_bits(k, p, D, w)).epsilon(1e-4).scale(1.0));
        }
        CHECK(tilted_inequality_max(b.src, b.d, b.nSh, t) <= 1 + 1e-8);
        // E[j_S] = R_S(D)
        double mean = 0;
        for (size_t s = 0; s < ((size_t)1 << k); ++s) mean += b.src.mass[s] * t.j_bits[s];
        CHECK(mean == doctest::Approx(rd.rate_bits).epsilon(1e-4).scale(1.0));
      }
}

TEST_CASE("hand-derived tilted value") {
  // k=2, p=1/4, D=0.1, weight 0: 2(H(1/4)-H(0.1)) - 0.5 log2(3)
  double expect = 2 * (entropy2(0.25) - entropy2(0.1)) - 0.5 * std::log2(3.0);
  CHECK(bms_tilted_bits(2, 0.25, 0.1, 0) == doctest::Approx(expect));
  CHECK(expect == doctest::Approx(-0.1079).epsilon(2e-3));
  auto b = bms(2, 0.25);
  auto rd = rate_distortion(b.src, b.d, b.nSh, 0.1);
  auto t = tilted(b.src, b.d, b.nSh, 0.1, rd);
  CHECK(t.j_bits[0] == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("uniform source gives weight-independent tilted information") {
  auto b = bms(3, 0.5);
  auto rd = rate_distortion(b.src, b.d, b.nSh, 0.11);
  auto t = tilted(b.src, b.d, b.nSh, 0.11, rd);
  for (size_t s = 1; s < 8; ++s)
    CHECK(t.j_bits[s] == doctest::Approx(t.j_bits[0]).epsilon(1e-9));
}
