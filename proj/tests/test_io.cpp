#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbc/instances.hpp"
#include "fbc/io.hpp"

using namespace fbc;

TEST_CASE("instance round trip is the identity on exact rationals") {
  auto inst = matched_instance<mpq_class>(3, 2, mpq_class(1, 5));
  auto j = instance_to_json(inst);
  auto back = instance_from_json<mpq_class>(j);
  CHECK(back.S.size == inst.S.size);
  CHECK(back.source.mass == inst.source.mass);
  CHECK(back.channel.p == inst.channel.p);
  CHECK(back.loss.dist == inst.loss.dist);
  CHECK(instance_to_json(back) == j);  // second pass is byte-identical

  auto cc = channel_coding_instance(bsc_kernel(0.11), 4);
  auto jc = instance_to_json(cc);
  auto bc = instance_from_json<double>(jc);
  CHECK(bc.loss.has_level);
  DeterministicCode code{{0, 1, 0, 1}, {0, 1}};
  CHECK(expected_loss(bc, code) == doctest::Approx(expected_loss(cc, code)));
}

TEST_CASE("certificate round trip and dimension screening") {
  auto dp = bsc_naive(2, 0.1, 4);
  auto j = dual_to_json(dp);
  auto back = dual_from_json<double>(j);
  CHECK(back.ga == dp.ga);
  CHECK(back.la == dp.la);
  CHECK(objective(back) == objective(dp));

  j["alphabets"]["S"] = 7;  // arrays no longer match the declared sizes
  CHECK_THROWS_AS((void)dual_from_json<double>(j), std::invalid_argument);
}

TEST_CASE("csv parse and emit round trip") {
  std::string text = "family,n,value\na,1,0.5\na,2,0.25\nb,1,0.75\n";
  auto t = parse_csv(text);
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 3);
  CHECK(t.column("value") == 2);
  CHECK(t.column("absent") == -1);
  CHECK(csv_to_string(t) == text);
}

TEST_CASE("svg chart: deterministic bytes, one polyline per family") {
  auto t = parse_csv("family,n,value\na,1,0.5\na,2,0.25\nb,1,0.75\nb,2,0.5\n");
  auto svg = svg_line_chart(t);
  CHECK(svg == svg_line_chart(t));
  CHECK(svg.find("viewBox=\"0 0 960 540\"") != std::string::npos);
  size_t cnt = 0;
  for (size_t p = svg.find("<polyline"); p != std::string::npos;
       p = svg.find("<polyline", p + 1))
    ++cnt;
  CHECK(cnt == 2);

  auto lg = svg_line_chart(t, "n", "value", "family", true);
  CHECK(lg != svg);
  CHECK(lg.find("viewBox=\"0 0 960 540\"") != std::string::npos);

  CsvTable empty;
  empty.header = {"family", "n", "value"};
  CHECK_THROWS(svg_line_chart(empty));
  CHECK_THROWS(svg_line_chart(t, "missing", "value"));
}
