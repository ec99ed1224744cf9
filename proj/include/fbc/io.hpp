// SPDX-License-Identifier: MIT
#pragma once
// File formats: JSON instances and certificates (rationals as "p/q" strings so
// exact values survive a round trip), a small CSV table type, and a static SVG
// line chart emitted element by element.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbc/dual.hpp"
#include "fbc/lp.hpp"

namespace fbc {

using nlohmann::json;

template <class T>
json scalar_to_json(const T& v) {
  if constexpr (scalar_traits<T>::exact)
    return v.get_num().get_str() + "/" + v.get_den().get_str();
  else
    return to_double(v);
}

template <class T>
T scalar_from_json(const json& j) {
  if (j.is_string()) return parse_scalar<T>(j.get<std::string>());
  if constexpr (scalar_traits<T>::exact) {
    std::ostringstream os;
    os << j.get<double>();
    return parse_scalar<T>(os.str());
  } else {
    return j.get<double>();
  }
}

template <class T>
json vector_to_json(const std::vector<T>& v) {
  json a = json::array();
  for (auto& x : v) a.push_back(scalar_to_json(x));
  return a;
}

template <class T>
std::vector<T> vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("io: expected an array");
  std::vector<T> v;
  for (auto& x : j) v.push_back(scalar_from_json<T>(x));
  return v;
}

template <class T>
json instance_to_json(const ProblemInstance<T>& inst) {
  json j;
  j["alphabets"] = {{"S", inst.S.size},
                    {"X", inst.X.size},
                    {"Y", inst.Y.size},
                    {"Shat", inst.Shat.size}};
  j["source"] = vector_to_json(inst.source.mass);
  j["channel"] = vector_to_json(inst.channel.p);  // row-major, x-major
  if (inst.loss.factored) {
    j["loss"]["distortion"] = vector_to_json(inst.loss.dist);
    if (inst.loss.has_level) j["loss"]["level"] = scalar_to_json(inst.loss.level);
  } else {
    j["loss"]["table"] = vector_to_json(inst.loss.table);
  }
  return j;
}

template <class T>
ProblemInstance<T> instance_from_json(const json& j) {
  ProblemInstance<T> inst;
  const auto& a = j.at("alphabets");
  inst.S.size = a.at("S").get<int>();
  inst.X.size = a.at("X").get<int>();
  inst.Y.size = a.at("Y").get<int>();
  inst.Shat.size = a.at("Shat").get<int>();
  inst.source.mass = vector_from_json<T>(j.at("source"));
  inst.channel.in = inst.X.size;
  inst.channel.out = inst.Y.size;
  inst.channel.p = vector_from_json<T>(j.at("channel"));
  const auto& l = j.at("loss");
  if (l.contains("distortion")) {
    inst.loss.factored = true;
    inst.loss.dist = vector_from_json<T>(l.at("distortion"));
    if (l.contains("level")) {
      inst.loss.has_level = true;
      inst.loss.level = scalar_from_json<T>(l.at("level"));
    }
  } else {
    inst.loss.factored = false;
    inst.loss.table = vector_from_json<T>(l.at("table"));
  }
  validate_instance(inst);
  return inst;
}

template <class T>
json dual_to_json(const DualPoint<T>& dp) {
  json j;
  j["alphabets"] = {{"S", dp.nS}, {"X", dp.nX}, {"Y", dp.nY}, {"Shat", dp.nSh}};
  j["gamma_a"] = vector_to_json(dp.ga);
  j["gamma_b"] = vector_to_json(dp.gb);
  j["lambda_a"] = vector_to_json(dp.la);
  j["lambda_b"] = vector_to_json(dp.lb);
  if (!dp.mu.empty()) j["mu"] = vector_to_json(dp.mu);
  return j;
}

template <class T>
DualPoint<T> dual_from_json(const json& j) {
  DualPoint<T> dp;
  const auto& a = j.at("alphabets");
  dp.nS = a.at("S").get<int>();
  dp.nX = a.at("X").get<int>();
  dp.nY = a.at("Y").get<int>();
  dp.nSh = a.at("Shat").get<int>();
  dp.ga = vector_from_json<T>(j.at("gamma_a"));
  dp.gb = vector_from_json<T>(j.at("gamma_b"));
  dp.la = vector_from_json<T>(j.at("lambda_a"));
  dp.lb = vector_from_json<T>(j.at("lambda_b"));
  if (j.contains("mu")) dp.mu = vector_from_json<T>(j.at("mu"));
  size_t t = (size_t)dp.nS * dp.nX * dp.nY * dp.nSh;
  if ((int)dp.ga.size() != dp.nS || (int)dp.gb.size() != dp.nY ||
      dp.la.size() != (size_t)dp.nS * dp.nSh * dp.nY ||
      dp.lb.size() != (size_t)dp.nX * dp.nS * dp.nY ||
      (!dp.mu.empty() && dp.mu.size() != t))
    throw std::invalid_argument("certificate: multiplier dimensions do not match");
  return dp;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return (int)i;
    return -1;
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = cells;
      first = false;
    } else {
      t.rows.push_back(cells);
    }
  }
  return t;
}

inline std::string csv_to_string(const CsvTable& t) {
  std::ostringstream os;
  for (size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (auto& r : t.rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG line chart: fixed 960x540 canvas, one polyline per group, byte-stable
// for identical input.

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::string svg_line_chart(const CsvTable& t, const std::string& xcol = "n",
                                  const std::string& ycol = "value",
                                  const std::string& group = "family",
                                  bool log_y = false) {
  int xi = t.column(xcol), yi = t.column(ycol), gi = t.column(group);
  if (xi < 0 || yi < 0 || t.rows.empty())
    throw std::invalid_argument("chart: missing data or columns");
  struct Pt {
    double x, y;
  };
  std::map<std::string, std::vector<Pt>> series;
  double xmin = POS_INF, xmax = NEG_INF, ymin = POS_INF, ymax = NEG_INF;
  for (auto& r : t.rows) {
    double x = std::stod(r[xi]), y = std::stod(r[yi]);
    if (log_y) {
      if (y <= 0) continue;  // off the chart in log scale
      y = std::log10(y);
    }
    series[gi >= 0 ? r[gi] : "series"].push_back({x, y});
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (series.empty()) throw std::invalid_argument("chart: no plottable rows");
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double W = 960, H = 540, L = 70, R = 30, Tm = 30, B = 50;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - Tm - B); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\">\n";
  os << "<rect width=\"960\" height=\"540\" fill=\"white\"/>\n";
  os << "<line x1=\"" << detail::svg_num(L) << "\" y1=\"" << detail::svg_num(H - B)
     << "\" x2=\"" << detail::svg_num(W - R) << "\" y2=\"" << detail::svg_num(H - B)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << detail::svg_num(L) << "\" y1=\"" << detail::svg_num(Tm)
     << "\" x2=\"" << detail::svg_num(L) << "\" y2=\"" << detail::svg_num(H - B)
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = xmin + (xmax - xmin) * k / 4, yv = ymin + (ymax - ymin) * k / 4;
    os << "<text x=\"" << detail::svg_num(px(xv)) << "\" y=\"" << detail::svg_num(H - B + 20)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << detail::svg_num(xv)
       << "</text>\n";
    os << "<text x=\"" << detail::svg_num(L - 8) << "\" y=\"" << detail::svg_num(py(yv) + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">"
       << detail::svg_num(log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  int ci = 0;
  for (auto& [name, pts] : series) {
    const char* col = palette[ci % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << detail::svg_num(px(pts[i].x)) << ","
         << detail::svg_num(py(pts[i].y));
    os << "\"/>\n";
    os << "<text x=\"" << detail::svg_num(W - R - 150) << "\" y=\""
       << detail::svg_num(Tm + 18 + 18 * ci) << "\" font-size=\"13\" fill=\"" << col
       << "\">" << name << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fbc
