// SPDX-License-Identifier: MIT
// Command-line front end: bound sweeps to CSV, certificate verification,
// oracle sandwiches, LP export, and SVG chart emission.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "fbc/bounds.hpp"
#include "fbc/instances.hpp"
#include "fbc/io.hpp"
#include "fbc/oracle.hpp"

using namespace fbc;

namespace {

bool rational_mode() {
  const char* m = std::getenv("FBC_MODE");
  if (!m) return false;
  std::string s = m;
  if (s == "rational") return true;
  if (s.empty() || s == "float") return false;
  throw CLI::ValidationError("FBC_MODE must be float or rational");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// "a", "a:b" (step 1) or "a:b:c"
std::vector<long> parse_range(const std::string& text) {
  long a = 0, b = 0, c = 1;
  int k = std::sscanf(text.c_str(), "%ld:%ld:%ld", &a, &b, &c);
  if (k <= 0 || c <= 0) throw CLI::ValidationError("bad range: " + text);
  if (k == 1) b = a;
  std::vector<long> out;
  for (long n = a; n <= b; n += c) out.push_back(n);
  if (out.empty()) throw CLI::ValidationError("empty range: " + text);
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

// ordered worker pool: rows are computed in parallel, printed in input order
std::vector<std::string> pooled(int jobs, int n,
                                const std::function<std::string(int)>& f) {
  std::vector<std::string> out(n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> ts;
  for (int t = 0; t < std::min(jobs, n); ++t)
    ts.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) out[i] = f(i);
    });
  for (auto& t : ts) t.join();
  return out;
}

struct BoundArgs {
  std::string family, nrange = "1", out;
  double eps = 0.1, rate = 0.5, p = 0.5, d = 0.1;
  int q = 2, jobs = 1;
};

int cmd_bound(const BoundArgs& a) {
  auto ns = parse_range(a.nrange);
  std::function<std::string(int)> row;
  std::string header;
  auto chan = [&](bool strong, bool improved, bool naive) {
    header = "family,n,k,eps,rate,value,witness";
    row = [=, &a](int i) {
      long n = ns[i];
      BoundResult r;
      if (naive)
        r = bsc_naive_bound(n, a.eps, a.rate * n);
      else if (strong)
        r = bsc_strong_bound(n, a.eps, a.rate * n);
      else
        r = wolfowitz_bsc_bound(n, a.eps, a.rate * n, improved);
      double w = r.witness.empty() ? 0.0 : r.witness[0].second;
      return a.family + "," + std::to_string(n) + "," + fmt(a.rate * n) + "," +
             fmt(a.eps) + "," + fmt(a.rate) + "," + fmt(r.value) + "," + fmt(w);
    };
  };
  if (a.family == "bsc-naive") chan(false, false, true);
  else if (a.family == "bsc-strong") chan(true, false, false);
  else if (a.family == "bsc-wolfowitz") chan(false, false, false);
  else if (a.family == "bsc-improved") chan(false, true, false);
  else if (a.family == "qary-matched") {
    header = "family,n,k,q,eps,value,witness";
    row = [=, &a](int i) {
      long n = ns[i];
      auto r = qary_matched_bound<double>((int)n, a.q, a.eps);
      return a.family + "," + std::to_string(n) + "," + std::to_string(n) + "," +
             std::to_string(a.q) + "," + fmt(a.eps) + "," + fmt(r.value) + ",0";
    };
  } else if (a.family.rfind("bms-bsc-", 0) == 0) {
    JsccFamily f;
    std::string t = a.family.substr(8);
    if (t == "kv") f = JsccFamily::KV;
    else if (t == "improved") f = JsccFamily::Improved;
    else if (t == "tighter") f = JsccFamily::Tighter;
    else if (t == "hypothesis") f = JsccFamily::Hypothesis;
    else { std::cerr << "unknown family " << a.family << "\n"; return 2; }
    header = "family,n,k,p,eps,d,value,witness";
    row = [=, &a](int i) {
      long n = ns[i];
      auto r = bms_bsc_jscc_bound(n, n, a.p, a.eps, a.d, f);
      double w = r.witness.empty() ? 0.0 : r.witness[0].second;
      return a.family + "," + std::to_string(n) + "," + std::to_string(n) + "," +
             fmt(a.p) + "," + fmt(a.eps) + "," + fmt(a.d) + "," + fmt(r.value) + "," +
             fmt(w);
    };
  } else if (a.family.rfind("bms-sc-", 0) == 0) {
    ScFamily f;
    std::string t = a.family.substr(7);
    if (t == "base") f = ScFamily::Base;
    else if (t == "improved") f = ScFamily::Improved;
    else if (t == "hypothesis") f = ScFamily::Hypothesis;
    else { std::cerr << "unknown family " << a.family << "\n"; return 2; }
    header = "family,n,k,p,d,rate,value,witness";
    row = [=, &a](int i) {
      long k = ns[i];
      auto r = bms_sc_bound(k, a.p, a.rate * k, a.d, f);
      double w = r.witness.empty() ? 0.0 : r.witness[0].second;
      return a.family + "," + std::to_string(k) + "," + std::to_string(k) + "," +
             fmt(a.p) + "," + fmt(a.d) + "," + fmt(a.rate) + "," + fmt(r.value) + "," +
             fmt(w);
    };
  } else {
    std::cerr << "unknown family " << a.family
              << "\nusage: fbc bound --family <bsc-naive|bsc-strong|bsc-wolfowitz|"
                 "bsc-improved|qary-matched|bms-bsc-*|bms-sc-*> [params] --n a:b:c\n";
    return 2;
  }
  std::ostringstream os;
  os << header << "\n";
  for (auto& line : pooled(a.jobs, (int)ns.size(), row)) os << line << "\n";
  emit(os.str(), a.out);
  return 0;
}

struct VerifyArgs {
  std::string builtin, cert, dump;
  long n = 2;
  double eps = 0.1, delta = 0.05;
  int M = 4;
  double tol = 1e-10;
};

int cmd_verify(const VerifyArgs& a) {
  ProblemInstance<double> inst;
  DualPoint<double> dp;
  if (!a.builtin.empty()) {
    inst = channel_coding_instance(memoryless_product(bsc_kernel(a.eps), a.n), a.M);
    if (a.builtin == "bsc-naive")
      dp = bsc_naive(a.n, a.eps, a.M);
    else if (a.builtin == "bsc-strong")
      dp = bsc_strong(a.n, a.eps, a.delta, a.M);
    else {
      std::cerr << "unknown builtin " << a.builtin << " (bsc-naive|bsc-strong)\n";
      return 2;
    }
  } else if (!a.cert.empty()) {
    json j;
    try {
      j = read_json_file(a.cert);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    try {
      inst = instance_from_json<double>(j.at("instance"));
      dp = dual_from_json<double>(j.at("dual"));
      if (dp.nS != inst.S.size || dp.nX != inst.X.size || dp.nY != inst.Y.size ||
          dp.nSh != inst.Shat.size)
        throw std::invalid_argument("certificate does not match the instance shape");
    } catch (const std::exception& e) {
      std::cerr << "bad certificate file: " << e.what() << "\n";
      return 2;
    }
  } else {
    std::cerr << "verify needs --builtin or --cert\n";
    return 2;
  }
  if (!a.dump.empty()) {
    json j;
    j["instance"] = instance_to_json(inst);
    j["dual"] = dual_to_json(dp);
    write_text_file(a.dump, j.dump() + "\n");
  }
  auto rep = check(inst, dp, a.tol);
  if (rep.feasible) {
    std::printf("feasible, objective %g\n", objective(dp));
    return 0;
  }
  std::printf("infeasible, worst %s residual %g at (%d,%d,%d,%d)\n", rep.worst_family,
              rep.worst(), rep.witness[0], rep.witness[1], rep.witness[2],
              rep.witness[3]);
  return 1;
}

struct InstanceArgs {
  std::string file;
  bool matched = false, bsc_cc = false;
  int q = 2, M = 2;
  long n = 1;
  std::string eps = "1/10";
};

// accepts "1/10" and "0.1" alike, staying exact in rational mode
template <class T>
T parse_prob(const std::string& s) {
  mpq_class q = parse_scalar<mpq_class>(s);
  if constexpr (scalar_traits<T>::exact)
    return q;
  else
    return to_double(q);
}

template <class T>
ProblemInstance<T> load_instance(const InstanceArgs& a) {
  if (!a.file.empty()) return instance_from_json<T>(read_json_file(a.file));
  if (a.matched) return matched_instance<T>(a.q, (int)a.n, parse_prob<T>(a.eps));
  if (a.bsc_cc) {
    if constexpr (scalar_traits<T>::exact)
      throw std::runtime_error("bsc instances need float mode");
    else
      return channel_coding_instance(
          memoryless_product(bsc_kernel(parse_prob<double>(a.eps)), a.n), a.M);
  }
  throw CLI::ValidationError("need --instance, --matched, or --bsc-cc");
}

template <class T>
int run_sandwich(const InstanceArgs& a) {
  auto s = sandwich(load_instance<T>(a));
  std::printf("opt_sc %s\nopt_lp %s\nopt_lp_prime %s\n", fmt(to_double(s.opt_sc)).c_str(),
              fmt(to_double(s.opt_lp)).c_str(), fmt(to_double(s.opt_lp_prime)).c_str());
  return 0;
}

template <class T>
int run_lp(const InstanceArgs& a, const std::string& format, const std::string& out) {
  if (format != "lp-text") {
    std::cerr << "unknown format " << format << " (lp-text)\n";
    return 2;
  }
  emit(lp_to_text(build_lp(load_instance<T>(a))), out);
  return 0;
}

struct PlotArgs {
  std::string csv, out, x = "n", y = "value", group = "family";
  bool log_y = false;
};

int cmd_plot(const PlotArgs& a) {
  std::ifstream in(a.csv);
  if (!in) {
    std::cerr << "cannot open " << a.csv << "\n";
    return 1;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  auto t = parse_csv(ss.str());
  if (t.rows.empty()) {
    std::cerr << "empty csv: " << a.csv << "\n";
    return 2;
  }
  try {
    emit(svg_line_chart(t, a.x, a.y, a.group, a.log_y), a.out);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

void add_instance_flags(CLI::App* app, InstanceArgs& ia) {
  app->add_option("--instance", ia.file, "instance JSON file");
  app->add_flag("--matched", ia.matched, "uniform q-ary source over the matched channel");
  app->add_flag("--bsc-cc", ia.bsc_cc, "channel coding over the n-fold BSC");
  app->add_option("--q", ia.q);
  app->add_option("--n", ia.n);
  app->add_option("--M", ia.M);
  app->add_option("--eps", ia.eps, "crossover / flip probability (rational ok)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-blocklength converse toolkit"};
  app.require_subcommand(1);

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "sweep a converse bound family to CSV");
  bound->add_option("--family", ba.family)->required();
  bound->add_option("--n", ba.nrange, "blocklengths a:b:c");
  bound->add_option("--eps", ba.eps);
  bound->add_option("--rate", ba.rate);
  bound->add_option("--p", ba.p);
  bound->add_option("--d", ba.d);
  bound->add_option("--q", ba.q);
  bound->add_option("--jobs", ba.jobs);
  bound->add_option("-o,--out", ba.out);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "check a dual certificate");
  verify->add_option("--builtin", va.builtin, "bsc-naive or bsc-strong");
  verify->add_option("--cert", va.cert, "certificate JSON file");
  verify->add_option("--dump", va.dump, "write the checked certificate to a file");
  verify->add_option("--n", va.n);
  verify->add_option("--eps", va.eps);
  verify->add_option("--delta", va.delta);
  verify->add_option("--M", va.M);
  verify->add_option("--tol", va.tol);

  InstanceArgs sa;
  auto* sand = app.add_subcommand("sandwich", "oracle / relaxation value chain");
  add_instance_flags(sand, sa);

  InstanceArgs la;
  std::string lp_format = "lp-text", lp_out;
  auto* lpc = app.add_subcommand("lp", "export the relaxation");
  add_instance_flags(lpc, la);
  lpc->add_option("--format", lp_format);
  lpc->add_option("-o,--out", lp_out);

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot", "CSV sweep to a static SVG chart");
  plot->add_option("--csv", pa.csv)->required();
  plot->add_option("-o,--out", pa.out);
  plot->add_option("--x", pa.x);
  plot->add_option("--y", pa.y);
  plot->add_option("--group", pa.group);
  plot->add_flag("--log-y", pa.log_y);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    bool exact = rational_mode();
    if (*bound) return cmd_bound(ba);
    if (*verify) return cmd_verify(va);
    if (*sand) return exact ? run_sandwich<mpq_class>(sa) : run_sandwich<double>(sa);
    if (*lpc) return exact ? run_lp<mpq_class>(la, lp_format, lp_out)
                           : run_lp<double>(la, lp_format, lp_out);
    if (*plot) return cmd_plot(pa);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 2;
}
