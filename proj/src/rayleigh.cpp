#include "shear/rayleigh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace shear {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAtCritical = 1e-10;  // nodes closer than this take the limit values

using V6 = Eigen::Matrix<cd, 6, 1>;
using V5 = Eigen::Matrix<cd, 5, 1>;
using V4 = Eigen::Matrix<cd, 4, 1>;

// Nodes on one side of y_c ordered by distance s = |y - y_c|.
struct SideNodes {
  std::vector<Eigen::Index> idx;
  std::vector<double> s;
};

SideNodes side_nodes(const Eigen::VectorXd& y, double yc, int sigma) {
  SideNodes out;
  std::vector<Eigen::Index> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index i : order) {
    const double s = sigma * (y[i] - yc);
    if (s > 0) {
      out.idx.push_back(i);
      out.s.push_back(s);
    }
  }
  std::vector<size_t> p(out.idx.size());
  std::iota(p.begin(), p.end(), 0);
  std::sort(p.begin(), p.end(), [&](size_t a, size_t b) { return out.s[a] < out.s[b]; });
  SideNodes sorted;
  for (size_t k : p) {
    sorted.idx.push_back(out.idx[k]);
    sorted.s.push_back(out.s[k]);
  }
  return sorted;
}

double start_offset(const SideNodes& n, double s0) {
  for (double s : n.s)
    if (s > kAtCritical) return std::min(s0, 0.5 * s);
  return s0;
}

} // namespace

LocalExpansion::LocalExpansion(const Profile& b, double c) {
  cr = c;
  yc = invert(b, c);
  const auto D = b.derivs(yc);
  for (int k = 0; k < 6; ++k) d[k] = D[k];
  double fact = 1;
  for (int j = 0; j < 5; ++j) {
    fact *= (j + 1);
    e[j] = d[j + 1] / fact;
  }
  kappa = -d[2] / (d[1] * d[1]);
  // phi_1 series: (k+2)(k+3) a_{k+2} = a_k - sum_j l_j (k+1-j) a_{k+1-j}, l = 2e'/e
  double q[3];
  q[0] = e[1] / e[0];
  q[1] = (2 * e[2] - e[1] * q[0]) / e[0];
  q[2] = (3 * e[3] - e[1] * q[1] - e[2] * q[0]) / e[0];
  double l[3] = {2 * q[0], 2 * q[1], 2 * q[2]};
  a[0] = 1;
  a[1] = 0;
  for (int k = 0; k <= 2; ++k) {
    double s = a[k];
    for (int j = 0; j <= k; ++j) s -= l[j] * (k + 1 - j) * a[k + 1 - j];
    a[k + 2] = s / ((k + 2) * (k + 3));
  }
}

double LocalExpansion::f_reg(double x) const {
  // n(x) = (b1 - b')/x, dd(x) = e(x)^2
  const double n1 = -d[3] / 2, n2 = -d[4] / 6, n3 = -d[5] / 24;
  const double dd1 = 2 * e[0] * e[1], dd2 = e[1] * e[1] + 2 * e[0] * e[2], dd3 = 2 * e[0] * e[3] + 2 * e[1] * e[2];
  const double num = (n1 - kappa * dd1) + x * ((n2 - kappa * dd2) + x * (n3 - kappa * dd3));
  const double ee = ex(x);
  return num / (ee * ee);
}

double LocalExpansion::Bf(double x) const {
  const double n = -(d[2] + x * (d[3] / 2 + x * (d[4] / 6 + x * d[5] / 24)));
  return n / ex(x);
}

CriticalLayer march_real(const Profile& b, double cr, const Eigen::VectorXd& y, const Source* g,
                         const MarchOptions& opt) {
  const LocalExpansion L(b, cr);
  CriticalLayer out;
  out.cr = cr;
  out.yc = L.yc;
  out.b1 = L.d[1];
  out.b2 = L.d[2];
  out.b3 = L.d[3];
  out.kappa = L.kappa;
  out.y = y;
  out.has_source = g != nullptr;
  const Eigen::Index n = y.size();
  out.phi1.resize(n);
  out.dphi1.resize(n);
  out.gamma.resize(n);
  out.dgamma.resize(n);
  const double b1 = L.d[1], kappa = L.kappa;
  const cd gc = g ? (*g)(L.yc) : cd(0);
  const double inv_b1sq = 1 / (b1 * b1);

  auto rhs = [&](double yy, const V6& u, V6& du) {
    const double x = yy - L.yc;
    const auto D = b.derivs(yy);
    const bool nf = std::abs(x) < opt.near;
    const double B = nf ? L.B(x) : D[0] - cr;
    const double psi = u[0].real(), p = u[1].real();
    const double phi1 = 1 + psi;
    du[0] = p;
    du[1] = phi1 - 2 * D[1] / B * p;
    du[2] = nf ? L.f_reg(x) : (b1 - D[1]) / (B * B) - (std::abs(x) < 1 ? kappa / x : 0.0);
    du[3] = -psi * (2 + psi) / (phi1 * phi1 * B * B);
    if (g) {
      const cd gv = (*g)(yy);
      du[4] = gv * phi1;
      if (nf) {
        const double ee = L.ex(x);
        du[5] = (u[4] / x / (ee * ee * phi1 * phi1) - gc * inv_b1sq) / x;
      } else {
        du[5] = u[4] / (B * B * phi1 * phi1) - (std::abs(x) < 1 ? gc * inv_b1sq / x : cd(0));
      }
    } else {
      du[4] = du[5] = 0;
    }
  };

  struct SideResult {
    double T1 = 0, Q2 = 0;
    cd T3 = 0;
    V6 first;
    double s_first = 0;
  };

  // Gamma and dGamma/dy at distance s on side sigma from the y-oriented state u
  auto eval = [&](int sigma, double s, const V6& u, const SideResult& S, double& G, double& dG) {
    const double x = sigma * s;
    const auto D = b.derivs(L.yc + x);
    const bool nf = std::abs(x) < opt.near;
    const double B = nf ? L.B(x) : D[0] - cr;
    const double psi = u[0].real(), p = u[1].real(), phi1 = 1 + psi;
    const double r1 = sigma * u[2].real(), q2 = sigma * u[3].real();
    const double lg = s < 1 ? std::log(s) : 0.0;
    const double P1 = -sigma * (S.T1 - r1 - sigma * kappa * lg);
    const double P2 = -sigma * (S.Q2 - q2);
    const double phi = B * phi1, dphi = D[1] * phi1 + B * p;
    const double Bf = nf ? L.Bf(x) : (b1 - D[1]) / B;
    G = phi / b1 * P1 - phi1 / b1 + phi * P2;
    dG = dphi / b1 * P1 + phi1 * Bf / b1 - p / b1 + dphi * P2 - psi * (2 + psi) / (phi1 * B);
  };

  auto march_side = [&](int sigma, SideResult& R, std::vector<V6>& states, const SideNodes& nodes) {
    const double s0 = start_offset(nodes, opt.s0);
    const double x0 = sigma * s0;
    const double far = std::max(opt.far, nodes.s.empty() ? 0.0 : nodes.s.back() + 1);
    V6 u;
    const double psi0 = x0 * x0 * (L.a[2] + x0 * (L.a[3] + x0 * L.a[4]));
    u << psi0, x0 * (2 * L.a[2] + x0 * (3 * L.a[3] + x0 * 4 * L.a[4])), 0, 0, 0, 0;
    V6 du;
    rhs(L.yc + x0, u, du);
    u[2] = du[2] * x0;
    u[3] = du[3] * x0;
    if (g) {
      u[4] = (*g)(L.yc + 0.5 * x0) * x0;
      rhs(L.yc + x0, u, du);
      u[5] = du[5] * x0;
    }
    R.first = u;
    R.s_first = s0;
    Dopri5<V6> ode(opt.rtol, opt.atol);
    ode.hmax = 0.05;
    ode.set_step_size(0.5 * s0);
    double yy = L.yc + x0;
    states.assign(nodes.s.size(), V6::Zero());
    size_t k = 0;
    while (k < nodes.s.size() && nodes.s[k] <= kAtCritical) ++k;
    bool passed_one = s0 >= 1;
    for (; k <= nodes.s.size(); ++k) {
      const double target = k < nodes.s.size() ? std::max(nodes.s[k], s0) : far;
      if (!passed_one && target > 1) {
        ode.advance(rhs, yy, u, L.yc + sigma * 1.0);
        passed_one = true;
      }
      ode.advance(rhs, yy, u, L.yc + sigma * target);
      if (k < nodes.s.size()) states[k] = u;
    }
    // tails beyond the march: b affine, phi_1 exponential
    const auto D = b.derivs(yy);
    const double B = D[0] - cr, phi1 = 1 + u[0].real(), rate = sigma * u[1].real() / phi1;
    const double aB = std::abs(B);
    R.T1 = sigma * u[2].real() + (b1 - D[1]) / (D[1] * aB);
    R.Q2 = sigma * u[3].real() - 1 / (D[1] * aB) + 1 / (phi1 * phi1 * B * B) / (2 * rate);
    R.T3 = double(sigma) * u[5] + u[4] / (B * B * phi1 * phi1) / (2 * rate);
  };

  SideResult left, right;
  const SideNodes nl = side_nodes(y, L.yc, -1), nr = side_nodes(y, L.yc, +1);
  std::vector<V6> sl, sr;
  march_side(-1, left, sl, nl);
  march_side(+1, right, sr, nr);

  out.T1m = left.T1;
  out.T1p = right.T1;
  out.Q2m = left.Q2;
  out.Q2p = right.Q2;
  out.pi1 = left.T1 + right.T1;
  out.pi2 = left.Q2 + right.Q2;
  out.j1 = out.pi1 / b1 + out.pi2;
  out.j2 = kPi * L.d[2] / (b1 * b1 * b1);
  out.T3m = left.T3;
  out.T3p = right.T3;
  out.j3 = left.T3 + right.T3;
  out.j4 = kPi * gc * inv_b1sq;

  // critical-point limits (kappa != 0 makes the derivative limits diverge)
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(y[i] - L.yc) <= kAtCritical) {
      out.phi1[i] = 1;
      out.dphi1[i] = 0;
      out.gamma[i] = -1 / b1;
      out.dgamma[i] = kappa == 0 ? 0.5 * (left.T1 + b1 * left.Q2 - right.T1 - b1 * right.Q2)
                                 : std::numeric_limits<double>::quiet_NaN();
    }
  }
  auto fill = [&](int sigma, const SideNodes& nodes, const std::vector<V6>& st, const SideResult& R) {
    for (size_t k = 0; k < nodes.s.size(); ++k) {
      if (nodes.s[k] <= kAtCritical) continue;
      const Eigen::Index i = nodes.idx[k];
      out.phi1[i] = 1 + st[k][0].real();
      out.dphi1[i] = st[k][1].real();
      eval(sigma, nodes.s[k], st[k], R, out.gamma[i], out.dgamma[i]);
    }
  };
  fill(-1, nl, sl, left);
  fill(+1, nr, sr, right);
  eval(-1, left.s_first, left.first, left, out.gamma_left, out.dgamma_left);
  eval(+1, right.s_first, right.first, right, out.gamma_right, out.dgamma_right);
  return out;
}

Phi1Result solve_phi1(const Profile& b, double cr, const Eigen::VectorXd& y, const MarchOptions& opt) {
  const CriticalLayer cl = march_real(b, cr, y, nullptr, opt);
  return {cl.yc, cl.phi1, cl.dphi1};
}

Phi2Result solve_phi2(const Profile& b, cd c, const Eigen::VectorXd& y, const MarchOptions& opt) {
  const double cr = c.real(), ci = c.imag();
  const LocalExpansion L(b, cr);
  Phi2Result out;
  out.yc = L.yc;
  const Eigen::Index n = y.size();
  out.phi1 = Eigen::VectorXd::Ones(n);
  out.phi2 = Eigen::VectorXcd::Ones(n);
  out.dphi2 = Eigen::VectorXcd::Zero(n);
  auto rhs = [&](double yy, const V4& u, V4& du) {
    const double x = yy - L.yc;
    const auto D = b.derivs(yy);
    const double Br = std::abs(x) < opt.near ? L.B(x) : D[0] - cr;
    const cd Bc(Br, -ci);
    const double psi = u[0].real(), p = u[1].real(), phi1 = 1 + psi;
    du[0] = p;
    du[1] = phi1 - 2 * D[1] / Br * p;
    du[2] = u[3];
    du[3] = -(2.0 * D[1] / Bc + 2 * p / phi1) * u[3] -
            cd(0, 2 * ci) * D[1] * (p / Br) / (Bc * phi1) * u[2];
  };
  for (int sigma : {-1, +1}) {
    const SideNodes nodes = side_nodes(y, L.yc, sigma);
    double s0 = start_offset(nodes, opt.s0);
    if (ci != 0) s0 = std::min(s0, 1e-2 * std::abs(ci));
    const double x0 = sigma * s0;
    V4 u;
    u << x0 * x0 * (L.a[2] + x0 * (L.a[3] + x0 * L.a[4])),
        x0 * (2 * L.a[2] + x0 * (3 * L.a[3] + x0 * 4 * L.a[4])), 1.0 + (ci != 0 ? x0 * x0 / 3 : 0.0),
        ci != 0 ? 2 * x0 / 3 : 0.0;
    Dopri5<V4> ode(opt.rtol, opt.atol);
    ode.hmax = 0.05;
    ode.set_step_size(0.5 * s0);
    double yy = L.yc + x0;
    for (size_t k = 0; k < nodes.s.size(); ++k) {
      if (nodes.s[k] <= kAtCritical) continue;
      ode.advance(rhs, yy, u, L.yc + sigma * std::max(nodes.s[k], s0));
      const Eigen::Index i = nodes.idx[k];
      out.phi1[i] = 1 + u[0].real();
      out.phi2[i] = u[2];
      out.dphi2[i] = u[3];
    }
  }
  return out;
}

VarphiPM varphi_pm(const Profile& b, cd c, const Eigen::VectorXd& y, const Source* omega, const MarchOptions& opt) {
  const double cr = c.real(), ci = c.imag();
  if (ci == 0) throw std::invalid_argument("varphi_pm: Im c must be nonzero (use march_real for real c)");
  const LocalExpansion L(b, cr);
  const double b1 = L.d[1];
  VarphiPM out;
  out.c = c;
  out.yc = L.yc;
  out.y = y;
  out.has_source = omega != nullptr;
  const Eigen::Index n = y.size();

  auto Bof = [&](double yy, const Profile::Derivs& D) {
    const double x = yy - L.yc;
    return cd(std::abs(x) < opt.near ? L.B(x) : D[0] - cr, -ci);
  };
  auto rhs = [&](double yy, const V5& u, V5& du) {
    const auto D = b.derivs(yy);
    const cd B = Bof(yy, D);
    const cd phi = u[0];
    du[0] = u[1];
    du[1] = phi + D[2] / B * phi;
    du[2] = 1.0 / (phi * phi) - D[1] / (b1 * B * B);
    if (omega) {
      du[3] = (*omega)(yy) * phi / B;
      du[4] = u[3] / (phi * phi);
    } else {
      du[3] = du[4] = 0;
    }
  };

  struct Side {
    std::vector<V5> st;
    V5 end;
    double y_end = 0;
    cd tail = 0, tailK = 0, B_end = 0;
  } side[2];
  V5 u0;
  u0 << cd(0, -ci), b1, 0, 0, 0;
  std::vector<SideNodes> nodes(2);
  for (int k = 0; k < 2; ++k) {
    const int sigma = k == 0 ? -1 : 1;
    nodes[k] = side_nodes(y, L.yc, sigma);
    const double far = std::max(opt.far, nodes[k].s.empty() ? 0.0 : nodes[k].s.back() + 1);
    Dopri5<V5> ode(opt.rtol, opt.atol);
    ode.hmax = 0.05;
    ode.set_step_size(std::min(1e-3, 0.05 * std::abs(ci)));
    V5 u = u0;
    double yy = L.yc;
    side[k].st.resize(nodes[k].s.size());
    for (size_t j = 0; j < nodes[k].s.size(); ++j) {
      ode.advance(rhs, yy, u, L.yc + sigma * nodes[k].s[j]);
      side[k].st[j] = u;
    }
    ode.advance(rhs, yy, u, L.yc + sigma * far);
    const auto D = b.derivs(yy);
    const cd rate = double(sigma) * u[1] / u[0];
    side[k].end = u;
    side[k].y_end = yy;
    side[k].B_end = Bof(yy, D);
    side[k].tail = 1.0 / (u[0] * u[0]) / (2.0 * rate);
    side[k].tailK = u[3] / (u[0] * u[0]) / (2.0 * rate);
  }
  // A(y) = int_{-inf}^y 1/phi^2, Lc(y) = int_{-inf}^y K/phi^2
  const cd A0 = side[0].tail - side[0].end[2] + 1.0 / (b1 * side[0].B_end);
  const cd L0 = side[0].tailK - side[0].end[4];
  out.W = A0 + side[1].end[2] - 1.0 / (b1 * side[1].B_end) + side[1].tail;
  out.Jstar = L0 + side[1].end[4] + side[1].tailK;
  out.mu = out.Jstar / out.W;

  out.phi.resize(n); out.dphi.resize(n);
  out.phim.resize(n); out.phip.resize(n); out.dphim.resize(n); out.dphip.resize(n);
  if (omega) {
    out.Phi.resize(n); out.Phi_il.resize(n); out.Phi_ir.resize(n); out.Phi_hl.resize(n); out.Phi_hr.resize(n);
  }
  const cd I(0, 1);
  auto put = [&](Eigen::Index i, double yy, const V5& u) {
    const auto D = b.derivs(yy);
    const cd B = Bof(yy, D);
    const cd A = A0 + u[2] - 1.0 / (b1 * B);
    const cd phi = u[0], dphi = u[1];
    out.phi[i] = phi;
    out.dphi[i] = dphi;
    out.phim[i] = phi * A;
    out.phip[i] = -phi * (out.W - A);
    out.dphim[i] = dphi * A + 1.0 / phi;
    out.dphip[i] = -dphi * (out.W - A) + 1.0 / phi;
    if (omega) {
      const cd Lc = L0 + u[4];
      out.Phi_il[i] = I * phi * Lc;
      out.Phi_ir[i] = -I * phi * (out.Jstar - Lc);
      out.Phi_hl[i] = I * out.phim[i];
      out.Phi_hr[i] = I * out.phip[i];
      out.Phi[i] = out.Phi_il[i] - out.mu * out.Phi_hl[i];
    }
  };
  for (int k = 0; k < 2; ++k)
    for (size_t j = 0; j < nodes[k].s.size(); ++j) put(nodes[k].idx[j], y[nodes[k].idx[j]], side[k].st[j]);
  for (Eigen::Index i = 0; i < n; ++i)
    if (y[i] == L.yc) put(i, y[i], u0);
  return out;
}

Eigen::VectorXcd wronskian_det(const VarphiPM& v) {
  return v.phim.cwiseProduct(v.dphip) - v.phip.cwiseProduct(v.dphim);
}

GammaField glue_gamma(const Profile& b, double cr, const Eigen::VectorXd& y, const MarchOptions& opt) {
  const CriticalLayer cl = march_real(b, cr, y, nullptr, opt);
  GammaField g;
  g.cr = cr;
  g.yc = cl.yc;
  g.gamma = cl.gamma;
  g.dgamma = cl.dgamma;
  g.jump_value = cl.gamma_right - cl.gamma_left;
  g.jump_deriv = cl.dgamma_right - cl.dgamma_left;
  return g;
}

GammaCDerivative gamma_c_derivative(const Profile& b, double cr, const Eigen::VectorXd& y, double h,
                                    const MarchOptions& opt) {
  const CriticalLayer c0 = march_real(b, cr, y, nullptr, opt);
  const double delta = 1e-7;
  const Eigen::Index n = y.size();
  Eigen::VectorXd ya(n + 2);
  ya << y, c0.yc - delta, c0.yc + delta;
  auto diff = [&](double hh, Eigen::VectorXd& dg, Eigen::VectorXd& ddg) {
    const CriticalLayer p = march_real(b, cr + hh, ya, nullptr, opt);
    const CriticalLayer m = march_real(b, cr - hh, ya, nullptr, opt);
    dg = (p.gamma - m.gamma) / (2 * hh);
    ddg = (p.dgamma - m.dgamma) / (2 * hh);
  };
  Eigen::VectorXd d1, dd1, d2, dd2;
  diff(h, d1, dd1);
  diff(0.5 * h, d2, dd2);
  const Eigen::VectorXd dg = (4 * d2 - d1) / 3, ddg = (4 * dd2 - dd1) / 3;
  GammaCDerivative out;
  out.cr = cr;
  out.yc = c0.yc;
  out.dc_gamma = dg.head(n);
  out.dc_dgamma = ddg.head(n);
  out.left_limit = dg[n];
  out.right_limit = dg[n + 1];
  out.jump_value = dg[n + 1] - dg[n];
  out.jump_deriv = ddg[n + 1] - ddg[n];
  out.left_oracle = -c0.T1m / c0.b1 - c0.Q2m;
  out.right_oracle = c0.T1p / c0.b1 + c0.Q2p;
  return out;
}

VarphiPM solve_inhomogeneous(const Profile& b, const Source& omega, cd c, const Eigen::VectorXd& y,
                             const MarchOptions& opt) {
  return varphi_pm(b, c, y, &omega, opt);
}

} // namespace shear
