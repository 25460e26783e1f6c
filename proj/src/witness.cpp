#include "shear/witness.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shear {

namespace {

double ramp(double u) {
  if (u <= 0) return 0;
  if (u >= 1) return 1;
  return u - std::sin(2 * M_PI * u) / (2 * M_PI);
}

Field sample(const Grid& g, const Source& f) {
  Field out(g.n);
  for (int j = 0; j < g.n; ++j) out[j] = f(g.y[j]);
  return out;
}

std::vector<double> uniform_times(double t1, double dt) {
  std::vector<double> t;
  const int n = std::max(1, int(std::round(t1 / dt)));
  for (int k = 0; k <= n; ++k) t.push_back(t1 * k / n);
  return t;
}

} // namespace

double chi_Z(double y, double Z) {
  if (y <= 1 / Z || y >= 1) return 0;
  if (y < 2 / Z) return ramp((y - 1 / Z) * Z);
  if (y <= 0.5) return 1;
  return 1 - ramp(2 * (y - 0.5));
}

WitnessData theorem1_data(double M, const Grid& g) {
  // the plateau [2/Z, 1/2] is empty below ln 4
  if (!(M >= std::log(4.0))) throw std::invalid_argument("M must be at least ln 4");
  WitnessData d;
  d.M = M;
  d.Z = std::exp(M);
  if (1 / d.Z < 4 * g.h) throw std::invalid_argument("grid too coarse for the witness ramp: need h <= 1/(4Z)");
  const double Z = d.Z;
  d.source = [Z](double y) { return cd(0.5 * chi_Z(y, Z), 0); };
  d.omega_in = sample(g, d.source);
  d.l2 = l2_norm(g, d.omega_in);
  d.linf = linf_norm(d.omega_in);
  return d;
}

GrowthReport run_theorem1(const Profile& b, const Grid& g, double M, const Theorem1Options& opt) {
  GrowthReport r;
  r.M = M;
  r.nu = opt.nu;
  r.horizon = opt.horizon;
  if (opt.check_hypothesis) {
    const auto ev = scan_embedded(b, -0.5, 0.5, 41);
    const bool found = std::any_of(ev.begin(), ev.end(), [](const EmbeddedEigenvalue& e) {
      return std::abs(e.c) < 1e-6 && e.simple;
    });
    if (!found) {
      r.hypothesis_ok = false;
      r.note = "no simple embedded eigenvalue at c = 0";
    }
  }
  const WitnessData d = theorem1_data(M, g);
  const LinearizedEuler op(b, g, opt.nu);
  r.trace = evolve(op, d.omega_in, uniform_times(opt.horizon, opt.dt_out), Method::rk4, 0, false);
  for (size_t k = 0; k < r.trace.t.size(); ++k) {
    const double a2 = r.trace.omega_l2[k] / d.l2, ai = r.trace.omega_linf[k] / d.linf;
    if (a2 > r.amp_l2) { r.amp_l2 = a2; r.t_star_l2 = r.trace.t[k]; }
    if (ai > r.amp_linf) { r.amp_linf = ai; r.t_star_linf = r.trace.t[k]; }
  }
  r.psi_l2_end = r.trace.psi_l2.back();
  if (opt.projection && r.hypothesis_ok) {
    r.P = projection_coefficient(b, d.source);
    const CriticalLayer c0 = march_real(b, 0.0, g.y);
    r.psi1_l2 = std::abs(r.P) * l2_norm(g, c0.gamma);
  }
  return r;
}

AssociatedSolution theorem2_solution(const Profile& b, const Grid& g, const Theorem2Options& opt) {
  AssociatedSolution s;
  s.grid = g;
  // the stencil at the end nodes uses the true values at +-L, not zero
  Eigen::VectorXd ye(g.n + 2);
  ye << -g.L, g.y, g.L;
  const CriticalLayer c0 = march_real(b, 0.0, ye);
  const GammaCDerivative dc = gamma_c_derivative(b, 0.0, ye, opt.h_c);
  s.gamma = c0.gamma.segment(1, g.n);
  s.dc_gamma = dc.dc_gamma.segment(1, g.n);
  s.jump_value = dc.jump_value;
  s.jump_deriv = dc.jump_deriv;
  auto stencil = [&](const Eigen::VectorXd& f) {
    const double ih2 = 1 / (g.h * g.h);
    Field out(g.n);
    for (int j = 0; j < g.n; ++j) out[j] = (f[j] + f[j + 2] - 2 * f[j + 1]) * ih2 - f[j + 1];
    return out;
  };
  s.omega_star = stencil(c0.gamma);
  s.eta = stencil(dc.dc_gamma);
  s.slope_ref = l2_norm(g, s.omega_star);

  const LinearizedEuler op(b, g);
  std::vector<double> ts(opt.samples), n2(opt.samples);
  for (int k = 0; k < opt.samples; ++k) {
    ts[k] = opt.t_lo + (opt.t_hi - opt.t_lo) * k / std::max(1, opt.samples - 1);
    const Field w = s.w(ts[k]);
    // d_t w = omega_star
    const Field res = s.omega_star + cd(0, 1) * op.rayleigh(w);
    s.residual = std::max(s.residual, l2_norm(g, res) / l2_norm(g, w));
    n2[k] = l2_norm(g, w);
  }
  s.fit_closed = fit_line(ts, n2);

  if (opt.evolve_check) {
    std::vector<double> out = {s.t_cross};
    for (double t : ts)
      if (t > s.t_cross) out.push_back(t);
    const EvolutionTrace tr = evolve(op, s.w(0), out);
    s.cross_check = l2_norm(g, Field(tr.omega[0] - s.w(s.t_cross))) / l2_norm(g, s.w(s.t_cross));
    std::vector<double> tt, l2, li;
    for (size_t k = 0; k < tr.t.size(); ++k) {
      if (tr.t[k] < opt.t_lo) continue;
      tt.push_back(tr.t[k]);
      l2.push_back(tr.omega_l2[k]);
      li.push_back(tr.omega_linf[k]);
    }
    s.fit_evolved = fit_line(tt, l2);
    s.fit_evolved_linf = fit_line(tt, li);
  }
  return s;
}

ToyState toy_solve(ToyVariant v, double nu, ToyState init, double t) {
  const double a = init.psi, c = init.phi;
  ToyState s;
  if (v == ToyVariant::A2) {
    s.psi = a * std::exp(-nu * t);
    s.phi = (c + a * t) * std::exp(-nu * t);
    return s;
  }
  s.psi = a * std::exp(-2 * nu * t);
  // (e^{-nu t} - e^{-2 nu t})/nu, continuous at nu = 0 with value t
  const double x = nu * t;
  const double g = std::abs(x) < 1e-8 ? t * (1 - 1.5 * x) : -std::exp(-nu * t) * std::expm1(-x) / nu;
  s.phi = c * std::exp(-nu * t) + a * g;
  return s;
}

ToyState toy_numeric(ToyVariant v, double nu, ToyState init, double t, Method m, double dt) {
  Eigen::Matrix2d A;
  A << (v == ToyVariant::A1 ? -2 * nu : -nu), 0, 1, -nu;
  Eigen::Vector2d u(init.psi, init.phi);
  if (m == Method::expm) {
    u = (A * t).exp() * u;
  } else {
    const int n = std::max(1, int(std::ceil(t / dt)));
    const double h = t / n;
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d k1 = A * u, k2 = A * (u + 0.5 * h * k1), k3 = A * (u + 0.5 * h * k2),
                            k4 = A * (u + h * k3);
      u += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return {u[0], u[1]};
}

ViscousReport run_viscous(const Profile& b, const Grid& g, double M, const std::vector<double>& nus, double T,
                          double horizon, double kappa) {
  ViscousReport r;
  r.M = M;
  r.T = T;
  r.kappa = kappa;
  r.nu = nus;
  const WitnessData d = theorem1_data(M, g);
  const std::vector<double> times = uniform_times(horizon, 0.5);
  auto run = [&](double nu, double& aT, double& amax, Field& wT) {
    const LinearizedEuler op(b, g, nu);
    wT = evolve(op, d.omega_in, {T}).omega[0];
    aT = l2_norm(g, wT) / d.l2;
    const EvolutionTrace tr = evolve(op, d.omega_in, times, Method::rk4, 0, false);
    amax = *std::max_element(tr.omega_l2.begin(), tr.omega_l2.end()) / d.l2;
  };
  Field w0T, wT;
  run(0, r.amp_T_inviscid, r.amp_max_inviscid, w0T);
  std::vector<double> lx, ly;
  for (double nu : nus) {
    double aT, am;
    run(nu, aT, am, wT);
    r.amp_T.push_back(aT);
    r.amp_max.push_back(am);
    r.delta.push_back(std::abs(aT - r.amp_T_inviscid));
    r.field_gap.push_back(l2_norm(g, Field(wT - w0T)) / d.l2);
    lx.push_back(std::log(nu));
    ly.push_back(std::log(std::max(1e-300, r.delta.back())));
    if (am >= 0.5 * M * kappa) r.nu0 = std::max(r.nu0, nu);
  }
  r.order = fit_line(lx, ly);
  return r;
}

} // namespace shear
