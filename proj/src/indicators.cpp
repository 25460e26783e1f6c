#include "shear/indicators.hpp"

#include <algorithm>
#include <cmath>

namespace shear {

namespace {

const Eigen::VectorXd kNoNodes;

using V2 = Eigen::Matrix<cd, 2, 1>;

// Decaying Rayleigh solution shot inward from y0 (b affine there, so e^{-|y|}
// is exact) to y1; returns (psi, psi').
V2 shoot_decaying(const Profile& b, cd c, double y0, double y1, const MarchOptions& opt) {
  auto rhs = [&](double yy, const V2& u, V2& du) {
    const auto D = b.derivs(yy);
    du[0] = u[1];
    du[1] = u[0] + D[2] / (D[0] - c) * u[0];
  };
  V2 u;
  u << 1.0, y0 > y1 ? -1.0 : 1.0;
  Dopri5<V2> ode(opt.rtol, opt.atol);
  ode.hmax = 0.05;
  ode.set_step_size(1e-3);
  double yy = y0;
  ode.advance(rhs, yy, u, y1);
  return u;
}

} // namespace

double pi1(const Profile& b, double cr, double tol) {
  const LocalExpansion L(b, cr);
  const double b1 = L.d[1];
  auto f = [&](double x) {
    const auto D = b.derivs(L.yc + x);
    const double B = D[0] - cr;
    return (b1 - D[1]) / (B * B);
  };
  // f(y_c + s) + f(y_c - s): the kappa/s parts cancel exactly in the Taylor form
  auto pair = [&](double s) {
    if (s < 1e-3) return L.f_reg(s) + L.f_reg(-s);
    return f(s) + f(-s);
  };
  const double S = std::max(20.0, b.flat_beyond() + std::abs(L.yc) + 5);
  double v = integrate(pair, 0, 1e-3, tol) + integrate(pair, 1e-3, 1, tol);
  for (double a = 1; a < S; a += 1) v += integrate(pair, a, std::min(a + 1, S), tol);
  // affine tails: int_S^inf (b1 - b')/(b - c)^2 = (b1 - b')/(b' |b - c|)
  for (int sigma : {-1, 1}) {
    const auto D = b.derivs(L.yc + sigma * S);
    v += (b1 - D[1]) / (D[1] * std::abs(D[0] - cr));
  }
  return v;
}

double pi2(const Profile& b, double cr, const MarchOptions& opt) {
  return march_real(b, cr, kNoNodes, nullptr, opt).pi2;
}

J12 j1j2(const Profile& b, double cr, const MarchOptions& opt) {
  const CriticalLayer cl = march_real(b, cr, kNoNodes, nullptr, opt);
  return {cl.j1, cl.j2};
}

J12 dj1j2(const Profile& b, double cr, double h, const MarchOptions& opt) {
  auto d = [&](double hh) {
    const J12 p = j1j2(b, cr + hh, opt), m = j1j2(b, cr - hh, opt);
    return J12{(p.j1 - m.j1) / (2 * hh), (p.j2 - m.j2) / (2 * hh)};
  };
  const J12 a = d(h), c = d(0.5 * h);
  return {richardson(a.j1, c.j1), richardson(a.j2, c.j2)};
}

Wronskian wronskian(const Profile& b, cd c, const MarchOptions& opt) {
  const double yc = invert(b, c.real());
  Eigen::VectorXd probes(5);
  probes << yc - 2, yc - 0.5, yc + 0.3, yc + 1, yc + 2.5;
  const VarphiPM v = varphi_pm(b, c, probes, nullptr, opt);
  const double far = std::max(opt.far, b.flat_beyond() + std::abs(yc) + 5);
  Eigen::VectorXcd det(probes.size());
  for (Eigen::Index i = 0; i < probes.size(); ++i) {
    // W = Wr(psi-, psi+) / (Wr(phi, psi-) Wr(phi, psi+)) with Wr(f, g) = f g' - f' g
    const V2 m = shoot_decaying(b, c, yc - far, probes[i], opt);
    const V2 p = shoot_decaying(b, c, yc + far, probes[i], opt);
    const cd wmp = m[0] * p[1] - m[1] * p[0];
    const cd wm = v.phi[i] * m[1] - v.dphi[i] * m[0];
    const cd wp = v.phi[i] * p[1] - v.dphi[i] * p[0];
    det[i] = wmp / (wm * wp);
  }
  Wronskian w;
  w.by_quadrature = v.W;
  w.by_determinant = det.mean();
  for (Eigen::Index i = 0; i < det.size(); ++i)
    w.det_spread = std::max(w.det_spread, std::abs(det[i] - w.by_determinant));
  return w;
}

WOverC w_over_c(const Profile& b, double cstar, const MarchOptions& opt) {
  WOverC r;
  r.s = {4e-3, 2e-3, 1e-3, 5e-4};
  for (double s : r.s) {
    const Wronskian w = wronskian(b, cd(cstar, s), opt);
    const cd den(0, s);
    r.ratio_quad.push_back(w.by_quadrature / den);
    r.ratio_det.push_back(w.by_determinant / den);
  }
  // W(is)/(is) = a + b s + c s^2 + ...: Neville extrapolation to s = 0
  auto neville = [&](const std::vector<cd>& v) {
    std::vector<cd> p = v;
    const size_t n = p.size();
    for (size_t k = 1; k < n; ++k)
      for (size_t i = 0; i + k < n; ++i)
        p[i] = (r.s[i + k] * p[i] - r.s[i] * p[i + 1]) / (r.s[i + k] - r.s[i]);
    return p[0];
  };
  r.extrapolated = neville(r.ratio_quad);
  r.extrapolated_det = neville(r.ratio_det);
  const J12 d = dj1j2(b, cstar, 1e-3, opt);
  r.from_indicators = cd(d.j1, -d.j2);
  r.rel_gap = std::abs(r.extrapolated - r.extrapolated_det) / std::max(1e-300, std::abs(r.extrapolated));
  r.routes_disagree = r.rel_gap > 1e-3;
  return r;
}

J34 j3j4(const Profile& b, const Source& g, double cr, const MarchOptions& opt) {
  const CriticalLayer cl = march_real(b, cr, kNoNodes, &g, opt);
  return {cl.j3, cl.j4};
}

std::vector<EmbeddedEigenvalue> scan_embedded(const Profile& b, double c_lo, double c_hi, int n, double tol_e,
                                              double tol_d, const MarchOptions& opt) {
  std::vector<double> c(n), F(n);
  for (int i = 0; i < n; ++i) {
    c[i] = c_lo + (c_hi - c_lo) * i / (n - 1);
    const J12 j = j1j2(b, c[i], opt);
    F[i] = j.j1 * j.j1 + j.j2 * j.j2;
  }
  std::vector<EmbeddedEigenvalue> out;
  auto Fof = [&](double x) {
    const J12 j = j1j2(b, x, opt);
    return j.j1 * j.j1 + j.j2 * j.j2;
  };
  for (int i = 0; i < n; ++i) {
    const bool lmin = (i == 0 || F[i] <= F[i - 1]) && (i == n - 1 || F[i] <= F[i + 1]);
    if (!lmin) continue;
    // golden-section on the bracketing cells
    double a = c[std::max(0, i - 1)], d = c[std::min(n - 1, i + 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    double x1 = d - g * (d - a), x2 = a + g * (d - a);
    double f1 = Fof(x1), f2 = Fof(x2);
    for (int it = 0; it < 60 && d - a > 1e-12; ++it) {
      if (f1 < f2) { d = x2; x2 = x1; f2 = f1; x1 = d - g * (d - a); f1 = Fof(x1); }
      else { a = x1; x1 = x2; f1 = f2; x2 = a + g * (d - a); f2 = Fof(x2); }
    }
    double xm = f1 < f2 ? x1 : x2;
    if (F[i] < std::min(f1, f2)) xm = c[i];
    const J12 j = j1j2(b, xm, opt);
    if (j.j1 * j.j1 + j.j2 * j.j2 > tol_e) continue;
    EmbeddedEigenvalue e;
    e.c = xm;
    e.j1 = j.j1;
    e.j2 = j.j2;
    const J12 dj = dj1j2(b, xm, 1e-3, opt);
    e.dj1 = dj.j1;
    e.dj2 = dj.j2;
    e.simple = std::abs(dj.j1) + std::abs(dj.j2) >= tol_d;
    out.push_back(e);
  }
  return out;
}

cd projection_coefficient(const Profile& b, const Source& g, double cstar, const MarchOptions& opt) {
  const J34 j = j3j4(b, g, cstar, opt);
  const J12 d = dj1j2(b, cstar, 1e-3, opt);
  return (j.j3 + cd(0, 1) * j.j4) / cd(d.j1, -d.j2);
}

} // namespace shear
