// shear: command-line driver for the flow, indicator, evolution and witness modules.
//
//   shear <analyze|evolve|witness|toy|flow-build|viscous> --config FILE --out DIR [--plot]
//         [--grid-n N] [--grid-L L] [--tol-eigen E] [--tol-mult D]
//
// Exit codes: 0 success, 2 hypothesis failure, 3 numerical failure, 4 config error.
// Outputs are assembled in memory and written only when the command succeeds.

#include "shear/evolution.hpp"
#include "shear/flow.hpp"
#include "shear/indicators.hpp"
#include "shear/witness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace shear;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kHypothesis = 2, kNumerical = 3, kConfig = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// typed lookup with a default; wrong types are config errors
template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

void require_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (j.is_null()) return;
  if (!j.is_object()) throw ConfigError(std::string("section '") + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in '" + section + "'");
  }
}

json section(const json& cfg, const char* name) { return cfg.contains(name) ? cfg.at(name) : json::object(); }

// ----- outputs -----

struct Output {
  std::string name, body;
};

struct Run {
  std::string command, anchor;
  json cfg;
  double tol_eigen = 1e-6, tol_mult = 1e-4;
  bool plot = false;
  std::vector<Output> files;

  std::string header() const {
    std::ostringstream os;
    os << "# anchor: " << anchor << "\n";
    os << "# command: " << command << "\n";
    os << "# config_hash: " << std::hex << fnv1a(cfg.dump()) << std::dec << "\n";
    os << "# tol_eigen: " << num(tol_eigen) << " tol_mult: " << num(tol_mult) << "\n";
    return os.str();
  }

  void csv(const std::string& name, const std::vector<std::string>& cols, const std::vector<std::vector<double>>& rows,
           const std::string& note = "") {
    std::ostringstream os;
    os << header();
    if (!note.empty()) os << "# " << note << "\n";
    for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
      os << "\n";
    }
    files.push_back({name, os.str()});
  }

  void report(const std::string& name, json body) {
    json j;
    j["anchor"] = anchor;
    j["command"] = command;
    std::ostringstream h;
    h << std::hex << fnv1a(cfg.dump());
    j["config_hash"] = h.str();
    j["tolerances"] = {{"eigen", tol_eigen}, {"mult", tol_mult}};
    j["result"] = std::move(body);
    files.push_back({name, j.dump(2) + "\n"});
  }
};

// Line plot of one or more series against x; log10 of y when logy.
std::string svg_plot(const std::string& title, const std::vector<double>& x,
                     const std::vector<std::pair<std::string, std::vector<double>>>& series, bool logy) {
  const double W = 640, H = 400, m = 50;
  double x0 = x.front(), x1 = x.back(), y0 = HUGE_VAL, y1 = -HUGE_VAL;
  auto tr = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };
  for (const auto& s : series)
    for (double v : s.second) {
      if (!std::isfinite(tr(v))) continue;
      y0 = std::min(y0, tr(v));
      y1 = std::max(y1, tr(v));
    }
  if (!(y1 > y0)) y1 = y0 + 1;
  if (!(x1 > x0)) x1 = x0 + 1;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << m << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << m << "\" y=\"" << H - m + 16 << "\" font-size=\"11\">" << num(x0) << "</text>\n";
  os << "<text x=\"" << W - m - 40 << "\" y=\"" << H - m + 16 << "\" font-size=\"11\">" << num(x1) << "</text>\n";
  os << "<text x=\"4\" y=\"" << m + 4 << "\" font-size=\"11\">" << (logy ? "1e" : "") << num(y1) << "</text>\n";
  os << "<text x=\"4\" y=\"" << H - m << "\" font-size=\"11\">" << (logy ? "1e" : "") << num(y0) << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 4] << "\" points=\"";
    for (size_t i = 0; i < x.size(); ++i) {
      const double v = tr(series[k].second[i]);
      if (!std::isfinite(v)) continue;
      os << m + (x[i] - x0) / (x1 - x0) * (W - 2 * m) << "," << H - m - (v - y0) / (y1 - y0) * (H - 2 * m) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - m - 150 << "\" y=\"" << m + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << colors[k % 4]
       << "\">" << series[k].first << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ----- config pieces -----

ProfilePtr flow_from(const json& f) {
  require_keys(f, "flow", {"kind", "gamma0", "gamma1", "N", "inner_weight", "y", "b"});
  const std::string kind = get<std::string>(f, "kind", "neutral_family");
  if (kind == "couette") return make_couette();
  if (kind == "tabulated") {
    const auto y = get<std::vector<double>>(f, "y", {}), b = get<std::vector<double>>(f, "b", {});
    if (y.size() < 4 || y.size() != b.size()) throw ConfigError("tabulated flow needs matching 'y' and 'b' with >= 4 points");
    auto p = make_tabulated(y, b);
    const FlowReport r = validate(*p);
    if (!r.ok) throw ConfigError("tabulated flow rejected: " + r.error);
    return p;
  }
  if (kind == "neutral_family") {
    NeutralParams p;
    p.gamma0 = get(f, "gamma0", p.gamma0);
    p.gamma1 = get(f, "gamma1", p.gamma1);
    p.inner_weight = get(f, "inner_weight", p.inner_weight);
    if (!(p.gamma0 > 0) || !(p.gamma1 > 0)) throw ConfigError("gamma0 and gamma1 must be positive");
    // without N, tune it so that c = 0 is an embedded eigenvalue
    if (f.contains("N")) {
      p.N = get(f, "N", p.N);
      return make_neutral(p);
    }
    return build_neutral_flow(p).profile;
  }
  throw ConfigError("unknown flow kind '" + kind + "'");
}

Grid grid_from(const json& cfg, const Profile& b, int n_default) {
  const json g = section(cfg, "grid");
  require_keys(g, "grid", {"n", "L"});
  double L = get(g, "L", 0.0);
  if (L <= 0) L = std::min(30.0, validate(b).L);
  const int n = get(g, "n", n_default);
  if (n < 8) throw ConfigError("grid.n must be at least 8");
  return make_grid(n, L);
}

Source source_from(const json& s) {
  require_keys(s, "omega_in", {"kind", "amplitude", "center", "width", "M"});
  const std::string kind = get<std::string>(s, "kind", "gaussian");
  if (kind == "gaussian") {
    const double a = get(s, "amplitude", 1.0), c = get(s, "center", 0.3), w = get(s, "width", 0.5);
    if (!(w > 0)) throw ConfigError("omega_in.width must be positive");
    return [a, c, w](double y) { return cd(a * std::exp(-(y - c) * (y - c) / (w * w)), 0); };
  }
  if (kind == "witness") {
    const double Z = std::exp(get(s, "M", 2.0));
    return [Z](double y) { return cd(0.5 * chi_Z(y, Z), 0); };
  }
  throw ConfigError("unknown omega_in kind '" + kind + "'");
}

std::vector<double> times_from(const json& t) {
  require_keys(t, "times", {"t0", "t1", "count", "spacing"});
  const double t0 = get(t, "t0", 1.0), t1 = get(t, "t1", 100.0);
  const int count = get(t, "count", 21);
  const std::string sp = get<std::string>(t, "spacing", "log");
  if (!(t1 > t0) || t0 < 0 || count < 2) throw ConfigError("times need 0 <= t0 < t1 and count >= 2");
  if (sp == "log") {
    if (!(t0 > 0)) throw ConfigError("log spacing needs t0 > 0");
    return log_times(t0, t1, count);
  }
  if (sp != "linear") throw ConfigError("times.spacing must be 'log' or 'linear'");
  std::vector<double> v;
  for (int k = 0; k < count; ++k) v.push_back(t0 + (t1 - t0) * k / (count - 1));
  return v;
}

// simple embedded eigenvalue at 0, within the tolerances
bool simple_at_zero(const Profile& b, double tol_e, double tol_d) {
  for (const auto& e : scan_embedded(b, -0.5, 0.5, 41, tol_e, tol_d))
    if (std::abs(e.c) < 1e-6 && e.simple) return true;
  return false;
}

Field sample(const Grid& g, const Source& f) {
  Field w(g.n);
  for (int j = 0; j < g.n; ++j) w[j] = f(g.y[j]);
  return w;
}

// ----- commands -----

int cmd_analyze(Run& r) {
  r.anchor = "embedded eigenvalue criterion J1 = J2 = 0";
  const json a = section(r.cfg, "analyze");
  require_keys(a, "analyze", {"c_lo", "c_hi", "samples"});
  auto b = flow_from(section(r.cfg, "flow"));
  const double lo = get(a, "c_lo", -1.0), hi = get(a, "c_hi", 1.0);
  const int n = get(a, "samples", 161);
  if (!(hi > lo) || n < 3) throw ConfigError("analyze needs c_lo < c_hi and samples >= 3");
  std::vector<std::vector<double>> rows;
  std::vector<double> c, f, j1;
  for (int i = 0; i < n; ++i) {
    const double ci = lo + (hi - lo) * i / (n - 1);
    const J12 j = j1j2(*b, ci);
    rows.push_back({ci, j.j1, j.j2, j.j1 * j.j1 + j.j2 * j.j2, pi1(*b, ci)});
    c.push_back(ci);
    f.push_back(rows.back()[3]);
    j1.push_back(j.j1);
  }
  r.csv("indicators.csv", {"c", "J1", "J2", "J1^2+J2^2", "Pi1"}, rows);
  json ev = json::array();
  for (const auto& e : scan_embedded(*b, lo, hi, n, r.tol_eigen, r.tol_mult))
    ev.push_back({{"c", e.c}, {"J1", e.j1}, {"J2", e.j2}, {"dJ1", e.dj1}, {"dJ2", e.dj2},
                  {"multiplicity", e.simple ? "simple" : "multiple"}});
  r.report("eigenvalues.json", {{"flow", b->kind()}, {"c_range", {lo, hi}}, {"eigenvalues", ev}});
  if (r.plot)
    r.files.push_back({"indicators.svg", svg_plot("J1^2 + J2^2 (log10) and J1", c, {{"J1^2+J2^2", f}}, true) });
  return kOk;
}

int cmd_evolve(Run& r) {
  r.anchor = "linearized Euler evolution and stream function decomposition";
  const json e = section(r.cfg, "evolve");
  require_keys(e, "evolve", {"omega_in", "times", "nu", "method", "snapshots"});
  auto b = flow_from(section(r.cfg, "flow"));
  const Grid g = grid_from(r.cfg, *b, 2001);
  const Source src = source_from(section(e, "omega_in"));
  const std::vector<double> t = times_from(section(e, "times"));
  const double nu = get(e, "nu", 0.0);
  if (nu < 0) throw ConfigError("nu must be non-negative");
  const std::string ms = get<std::string>(e, "method", "rk4");
  if (ms != "rk4" && ms != "expm") throw ConfigError("method must be 'rk4' or 'expm'");
  if (ms == "expm" && g.n > 512) throw ConfigError("expm is limited to grid.n <= 512");
  const bool snaps = get(e, "snapshots", false);

  const LinearizedEuler op(*b, g, nu);
  const EvolutionTrace tr = evolve(op, sample(g, src), t, ms == "rk4" ? Method::rk4 : Method::expm);
  // Psi_1 = P Gamma(., 0) only for a simple embedded eigenvalue at 0
  cd P = 0;
  Eigen::VectorXd gamma0 = Eigen::VectorXd::Zero(g.n);
  const bool split = simple_at_zero(*b, r.tol_eigen, r.tol_mult);
  if (split) {
    P = projection_coefficient(*b, src);
    gamma0 = march_real(*b, 0.0, g.y).gamma;
  }
  std::vector<Field> psi;
  for (const Field& w : tr.omega) psi.push_back(helmholtz_inverse(g, w));
  const PsiDecomposition d = decompose_psi(g, psi, P, gamma0);
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < t.size(); ++k)
    rows.push_back({tr.t[k], tr.omega_l2[k], tr.omega_linf[k], tr.psi_l2[k], d.l2[k], d.h1[k]});
  r.csv("trace.csv", {"t", "omega_l2", "omega_linf", "psi_l2", "psi2_l2", "psi2_h1"}, rows,
        split ? "psi2 = psi - P Gamma(., 0), P = " + num(P.real()) + " + " + num(P.imag()) + "i"
              : "no simple embedded eigenvalue at 0: psi2 = psi");
  if (snaps) {
    std::vector<std::vector<double>> s;
    for (int j = 0; j < g.n; ++j) {
      std::vector<double> row = {g.y[j]};
      for (const Field& w : tr.omega) {
        row.push_back(w[j].real());
        row.push_back(w[j].imag());
      }
      s.push_back(row);
    }
    std::vector<std::string> cols = {"y"};
    for (double tk : t) {
      cols.push_back("re_omega(t=" + num(tk) + ")");
      cols.push_back("im_omega(t=" + num(tk) + ")");
    }
    r.csv("snapshots.csv", cols, s);
  }
  r.report("evolve.json", {{"flow", b->kind()}, {"grid", {{"n", g.n}, {"L", g.L}}}, {"nu", nu}, {"method", ms},
                           {"dt", tr.dt}, {"split", split}, {"P", {P.real(), P.imag()}}});
  if (r.plot) {
    std::vector<double> lt;
    for (double tk : t) lt.push_back(std::log10(tk > 0 ? tk : 1e-300));
    r.files.push_back({"trace.svg", svg_plot("norms (log10) against log10 t", lt,
                                             {{"omega L2", tr.omega_l2}, {"psi L2", tr.psi_l2}, {"psi2 L2", d.l2}},
                                             true)});
  }
  return kOk;
}

int cmd_witness(Run& r) {
  const json w = section(r.cfg, "witness");
  require_keys(w, "witness", {"mode", "M", "horizon", "dt_out", "nu", "kappa", "t_lo", "t_hi", "samples"});
  const std::string mode = get<std::string>(w, "mode", "growth");
  auto b = flow_from(section(r.cfg, "flow"));
  if (mode == "associated") {
    r.anchor = "linear growth from the associated function at a multiple embedded eigenvalue";
    const auto ev = scan_embedded(*b, -0.5, 0.5, 41, r.tol_eigen, r.tol_mult);
    bool multiple = false;
    for (const auto& e : ev) multiple = multiple || (std::abs(e.c) < 1e-4 && !e.simple);
    if (!multiple) throw HypothesisError("no multiple embedded eigenvalue at c = 0");
    const Grid g = grid_from(r.cfg, *b, 2001);
    Theorem2Options opt;
    opt.t_lo = get(w, "t_lo", opt.t_lo);
    opt.t_hi = get(w, "t_hi", opt.t_hi);
    opt.samples = get(w, "samples", opt.samples);
    const AssociatedSolution s = theorem2_solution(*b, g, opt);
    std::vector<std::vector<double>> rows;
    std::vector<double> tt, n2;
    for (int k = 0; k < opt.samples; ++k) {
      const double t = opt.t_lo + (opt.t_hi - opt.t_lo) * k / std::max(1, opt.samples - 1);
      const Field f = s.w(t);
      rows.push_back({t, l2_norm(g, f), linf_norm(f)});
      tt.push_back(t);
      n2.push_back(rows.back()[1]);
    }
    r.csv("associated.csv", {"t", "w_l2", "w_linf"}, rows);
    r.report("associated.json",
             {{"residual", s.residual}, {"slope_ref", s.slope_ref},
              {"fit_closed", {{"slope", s.fit_closed.slope}, {"r2", s.fit_closed.r2}}},
              {"fit_evolved", {{"slope", s.fit_evolved.slope}, {"r2", s.fit_evolved.r2}}},
              {"fit_evolved_linf", {{"slope", s.fit_evolved_linf.slope}, {"r2", s.fit_evolved_linf.r2}}},
              {"cross_check", s.cross_check}, {"jump_value", s.jump_value}, {"jump_deriv", s.jump_deriv}});
    if (r.plot) r.files.push_back({"associated.svg", svg_plot("|w(t)|_L2", tt, {{"L2", n2}}, false)});
    return kOk;
  }
  if (mode != "growth") throw ConfigError("witness.mode must be 'growth' or 'associated'");
  r.anchor = "transient growth from a simple embedded eigenvalue";
  const double M = get(w, "M", 2.0);
  if (!(M >= std::log(4.0))) throw ConfigError("witness.M must be at least ln 4");
  const double Z = std::exp(M);
  // default grid resolves the inner ramp with 8 cells
  const json gcfg = section(r.cfg, "grid");
  const double L = get(gcfg, "L", 8.0);
  const int n = get(gcfg, "n", int(std::ceil(2 * L * 8 * Z)) - 1);
  const Grid g = make_grid(n, L);
  if (1 / Z < 4 * g.h) throw ConfigError("grid too coarse for the witness ramp: need h <= 1/(4 e^M)");
  Theorem1Options opt;
  opt.horizon = get(w, "horizon", std::max(50.0, 4 * Z));
  opt.dt_out = get(w, "dt_out", 0.5);
  opt.nu = get(w, "nu", 0.0);
  const double kappa = get(w, "kappa", 0.58);
  const GrowthReport g1 = run_theorem1(*b, g, M, opt);
  const WitnessData d = theorem1_data(M, g);
  std::vector<std::vector<double>> rows;
  std::vector<double> a2, ai;
  for (size_t k = 0; k < g1.trace.t.size(); ++k) {
    rows.push_back({g1.trace.t[k], g1.trace.omega_l2[k] / d.l2, g1.trace.omega_linf[k] / d.linf, g1.trace.psi_l2[k]});
    a2.push_back(rows.back()[1]);
    ai.push_back(rows.back()[2]);
  }
  r.csv("growth.csv", {"t", "amp_l2", "amp_linf", "psi_l2"}, rows);
  r.report("growth.json", {{"hypothesis_ok", g1.hypothesis_ok}, {"note", g1.note}, {"M", M}, {"Z", Z},
                           {"grid", {{"n", g.n}, {"L", g.L}}}, {"nu", opt.nu}, {"horizon", opt.horizon},
                           {"amp_l2", g1.amp_l2}, {"t_star_l2", g1.t_star_l2}, {"amp_linf", g1.amp_linf},
                           {"t_star_linf", g1.t_star_linf}, {"kappa", kappa},
                           {"target", kappa * M}, {"met_l2", g1.amp_l2 >= kappa * M},
                           {"met_linf", g1.amp_linf >= kappa * M}, {"P", {g1.P.real(), g1.P.imag()}},
                           {"psi_l2_end", g1.psi_l2_end}, {"psi1_l2", g1.psi1_l2}});
  if (r.plot)
    r.files.push_back({"growth.svg", svg_plot("amplification", g1.trace.t, {{"L2", a2}, {"Linf", ai}}, false)});
  return g1.hypothesis_ok ? kOk : kHypothesis;
}

int cmd_toy(Run& r) {
  r.anchor = "two-mode toy model";
  const json t = section(r.cfg, "toy");
  require_keys(t, "toy", {"variant", "nu", "psi0", "phi0", "t_end", "samples"});
  const std::string vs = get<std::string>(t, "variant", "A1");
  if (vs != "A1" && vs != "A2") throw ConfigError("toy.variant must be 'A1' or 'A2'");
  const ToyVariant v = vs == "A1" ? ToyVariant::A1 : ToyVariant::A2;
  const double nu = get(t, "nu", 0.01);
  if (nu < 0) throw ConfigError("nu must be non-negative");
  const ToyState init{get(t, "psi0", 1.0), get(t, "phi0", 0.0)};
  const double T = get(t, "t_end", nu > 0 ? 3 / nu : 100.0);
  const int n = get(t, "samples", 301);
  if (!(T > 0) || n < 2) throw ConfigError("toy needs t_end > 0 and samples >= 2");
  std::vector<std::vector<double>> rows;
  std::vector<double> ts, ph;
  double peak = -HUGE_VAL, t_peak = 0;
  for (int k = 0; k < n; ++k) {
    const double tk = T * k / (n - 1);
    const ToyState c = toy_solve(v, nu, init, tk);
    const ToyState e = toy_numeric(v, nu, init, tk);
    rows.push_back({tk, c.psi, c.phi, e.phi});
    ts.push_back(tk);
    ph.push_back(c.phi);
    if (c.phi > peak) { peak = c.phi; t_peak = tk; }
  }
  r.csv("toy.csv", {"t", "psi", "phi", "phi_expm"}, rows);
  json rep = {{"variant", vs}, {"nu", nu}, {"peak_phi", peak}, {"t_peak", t_peak}};
  if (nu > 0) rep["phi_at_inverse_nu"] = toy_solve(v, nu, init, 1 / nu).phi;
  r.report("toy.json", rep);
  if (r.plot) r.files.push_back({"toy.svg", svg_plot("phi(t)", ts, {{"phi", ph}}, false)});
  return kOk;
}

int cmd_flow_build(Run& r) {
  r.anchor = "neutral flow construction by the Schrodinger ground state";
  const json f = section(r.cfg, "flow");
  require_keys(f, "flow", {"kind", "gamma0", "gamma1", "N", "inner_weight", "target", "y", "b"});
  if (get<std::string>(f, "kind", "neutral_family") != "neutral_family")
    throw ConfigError("flow-build needs flow.kind = 'neutral_family'");
  NeutralParams p;
  p.gamma0 = get(f, "gamma0", p.gamma0);
  p.gamma1 = get(f, "gamma1", p.gamma1);
  p.inner_weight = get(f, "inner_weight", p.inner_weight);
  if (!(p.gamma0 > 0) || !(p.gamma1 > 0)) throw ConfigError("gamma0 and gamma1 must be positive");
  const NeutralFlow nf = build_neutral_flow(p, get(f, "target", -1.0));
  const FlowReport v = validate(*nf.profile);
  const J12 j = j1j2(*nf.profile, 0.0);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= 400; ++i) {
    const double y = -v.L + 2 * v.L * i / 400;
    const auto D = nf.profile->derivs(y);
    rows.push_back({y, D[0], D[1], D[2]});
  }
  r.csv("profile.csv", {"y", "b", "b1", "b2"}, rows);
  r.report("flow.json", {{"gamma0", p.gamma0}, {"gamma1", p.gamma1}, {"inner_weight", p.inner_weight},
                         {"N", nf.params.N}, {"lambda", nf.lambda}, {"lambda_error", nf.lambda_error},
                         {"iterations", nf.iterations}, {"J1(0)", j.j1}, {"J2(0)", j.j2},
                         {"validate", {{"ok", v.ok}, {"c_m", v.c_m}, {"bpp_max", v.bpp_max}, {"L", v.L}}}});
  if (std::abs(nf.lambda - get(f, "target", -1.0)) > 1e-8) throw std::runtime_error("eigenvalue target not reached");
  return kOk;
}

int cmd_viscous(Run& r) {
  r.anchor = "vanishing-viscosity limit of the growth witness";
  const json v = section(r.cfg, "viscous");
  require_keys(v, "viscous", {"M", "nu", "T", "horizon", "kappa"});
  auto b = flow_from(section(r.cfg, "flow"));
  const double M = get(v, "M", 2.0);
  if (!(M >= std::log(4.0))) throw ConfigError("viscous.M must be at least ln 4");
  const auto nus = get<std::vector<double>>(v, "nu", {1e-2, 1e-3, 1e-4});
  for (double nu : nus)
    if (!(nu > 0)) throw ConfigError("viscous.nu entries must be positive");
  const json gcfg = section(r.cfg, "grid");
  const double L = get(gcfg, "L", 8.0);
  const Grid g = make_grid(get(gcfg, "n", int(std::ceil(2 * L * 8 * std::exp(M))) - 1), L);
  if (std::exp(-M) < 4 * g.h) throw ConfigError("grid too coarse for the witness ramp: need h <= 1/(4 e^M)");
  if (!simple_at_zero(*b, r.tol_eigen, r.tol_mult)) throw HypothesisError("no simple embedded eigenvalue at c = 0");
  const ViscousReport rep = run_viscous(*b, g, M, nus, get(v, "T", 5.0), get(v, "horizon", 50.0), get(v, "kappa", 0.58));
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < nus.size(); ++k)
    rows.push_back({nus[k], rep.amp_T[k], rep.amp_max[k], rep.delta[k], rep.field_gap[k]});
  r.csv("viscous.csv", {"nu", "amp_T", "amp_max", "delta", "field_gap"}, rows,
        "inviscid amp_T = " + num(rep.amp_T_inviscid) + ", amp_max = " + num(rep.amp_max_inviscid));
  r.report("viscous.json", {{"M", M}, {"T", rep.T}, {"kappa", rep.kappa}, {"amp_T_inviscid", rep.amp_T_inviscid},
                            {"order", rep.order.slope}, {"order_r2", rep.order.r2}, {"nu0", rep.nu0}});
  return kOk;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    json j = json::parse(text, nullptr, true, true);
    if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    // byte offset -> line:column
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') { ++line; col = 1; }
      else ++col;
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear shear-flow stability experiments"};
  app.require_subcommand(1);
  std::string config, out = ".";
  bool plot = false;
  int grid_n = 0;
  double grid_L = 0, tol_eigen = 0, tol_mult = 0;
  const char* names[] = {"analyze", "evolve", "witness", "toy", "flow-build", "viscous"};
  const char* help[] = {"scan J1^2 + J2^2 for embedded eigenvalues", "evolve an initial vorticity",
                        "growth witness or associated-function solution", "two-mode toy model",
                        "tune a neutral flow", "viscous sweep of the growth witness"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* s = app.add_subcommand(names[i], help[i]);
    s->add_option("--config", config, "JSON config file");
    s->add_option("--out", out, "output directory");
    s->add_flag("--plot", plot, "also write SVG plots");
    s->add_option("--grid-n", grid_n, "interior grid nodes");
    s->add_option("--grid-L", grid_L, "half-width of the domain");
    s->add_option("--tol-eigen", tol_eigen, "J1^2 + J2^2 acceptance for eigenvalues");
    s->add_option("--tol-mult", tol_mult, "|dJ1| + |dJ2| below which an eigenvalue is multiple");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  Run r;
  r.command = app.get_subcommands().front()->get_name();
  r.plot = plot;
  int code = kOk;
  try {
    r.cfg = load_config(config);
    require_keys(r.cfg, "config",
                 {"flow", "grid", "tolerances", "analyze", "evolve", "witness", "toy", "viscous", "seed"});
    const json tol = section(r.cfg, "tolerances");
    require_keys(tol, "tolerances", {"eigen", "mult"});
    if (grid_n > 0) r.cfg["grid"]["n"] = grid_n;
    if (grid_L > 0) r.cfg["grid"]["L"] = grid_L;
    if (tol_eigen > 0) r.cfg["tolerances"]["eigen"] = tol_eigen;
    if (tol_mult > 0) r.cfg["tolerances"]["mult"] = tol_mult;
    r.tol_eigen = get(section(r.cfg, "tolerances"), "eigen", r.tol_eigen);
    r.tol_mult = get(section(r.cfg, "tolerances"), "mult", r.tol_mult);
    if (r.command == "analyze") code = cmd_analyze(r);
    else if (r.command == "evolve") code = cmd_evolve(r);
    else if (r.command == "witness") code = cmd_witness(r);
    else if (r.command == "toy") code = cmd_toy(r);
    else if (r.command == "flow-build") code = cmd_flow_build(r);
    else code = cmd_viscous(r);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis not met: " << e.what() << "\n";
    return kHypothesis;
  } catch (const std::domain_error& e) {
    std::cerr << "hypothesis not met: " << e.what() << "\n";
    return kHypothesis;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "cannot create " << out << ": " << ec.message() << "\n";
    return kConfig;
  }
  r.files.push_back({"config.json", r.cfg.dump(2) + "\n"});
  for (const Output& f : r.files) {
    std::ofstream os(fs::path(out) / f.name, std::ios::binary);
    os << f.body;
  }
  for (const Output& f : r.files) std::cout << (fs::path(out) / f.name).string() << "\n";
  return code;
}
