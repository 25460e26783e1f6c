#include "shear/evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shear {

Grid make_grid(int n, double L) {
  if (n < 3 || !(L > 0)) throw std::invalid_argument("grid needs n >= 3 and L > 0");
  Grid g;
  g.n = n;
  g.L = L;
  g.h = 2 * L / (n + 1);
  g.y.resize(n);
  for (int j = 0; j < n; ++j) g.y[j] = -L + (j + 1) * g.h;
  return g;
}

LinearizedEuler::LinearizedEuler(const Profile& b, const Grid& g, double nu)
    : g_(g), nu_(nu), b_(g.n), bpp_(g.n),
      helm_(g.n, 1 / (g.h * g.h), -2 / (g.h * g.h) - 1, 1 / (g.h * g.h)) {
  if (nu < 0) throw std::invalid_argument("viscosity must be >= 0");
  for (int j = 0; j < g.n; ++j) {
    const auto D = b.derivs(g.y[j]);
    b_[j] = D[0];
    bpp_[j] = D[2];
  }
}

Field LinearizedEuler::rayleigh(const Field& w) const {
  Field psi = w;
  helm_.solve_in_place(psi);
  return b_.cwiseProduct(w) - bpp_.cwiseProduct(psi);
}

void LinearizedEuler::apply(const Field& w, Field& out) const {
  out = cd(0, -1) * rayleigh(w);
  if (nu_ > 0) out += nu_ * helmholtz(g_, w);
}

OperatorMatrix LinearizedEuler::dense() const {
  const int n = g_.n;
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    auto col = Hinv.col(k);
    helm_.solve_in_place(col);
  }
  Eigen::MatrixXd R = (-bpp_).asDiagonal() * Hinv;
  R.diagonal() += b_;
  OperatorMatrix A = cd(0, -1) * R.cast<cd>();
  if (nu_ > 0) {
    const double ih2 = 1 / (g_.h * g_.h);
    for (int j = 0; j < n; ++j) {
      A(j, j) += nu_ * (-2 * ih2 - 1);
      if (j > 0) A(j, j - 1) += nu_ * ih2;
      if (j + 1 < n) A(j, j + 1) += nu_ * ih2;
    }
  }
  return A;
}

double LinearizedEuler::advective_bound() const {
  return b_.cwiseAbs().maxCoeff() + bpp_.cwiseAbs().maxCoeff();
}

double LinearizedEuler::viscous_bound() const { return nu_ * (4 / (g_.h * g_.h) + 1); }

OperatorMatrix build_operator(const Profile& b, const Grid& g, double nu) {
  return LinearizedEuler(b, g, nu).dense();
}

namespace {

void record(const Grid& g, EvolutionTrace& tr, double t, const Field& w, bool keep) {
  const Field psi = helmholtz_inverse(g, w);
  tr.t.push_back(t);
  tr.omega_l2.push_back(l2_norm(g, w));
  tr.omega_linf.push_back(linf_norm(w));
  tr.psi_l2.push_back(l2_norm(g, psi));
  tr.psi_linf.push_back(linf_norm(psi));
  tr.psi_h1.push_back(h1_norm(g, psi));
  if (keep) tr.omega.push_back(w);
}

} // namespace

EvolutionTrace evolve(const LinearizedEuler& op, const Field& w0, const std::vector<double>& times, Method m,
                      double dt, bool keep_snapshots) {
  const Grid& g = op.grid();
  if (w0.size() != g.n) throw std::invalid_argument("field size does not match grid");
  for (size_t k = 0; k < times.size(); ++k)
    if (times[k] < 0 || (k > 0 && times[k] <= times[k - 1]))
      throw std::invalid_argument("output times must be increasing and non-negative");
  EvolutionTrace tr;
  tr.dt = dt > 0 ? dt : std::min({0.05, 0.1 / op.advective_bound(), 2 / op.spectral_bound()});
  const double growth = 2 * op.bpp().cwiseAbs().maxCoeff();
  const double n0 = l2_norm(g, w0);
  auto check = [&](double t, const Field& w) {
    if (!(l2_norm(g, w) <= (1 + 1e-6) * std::exp(growth * t) * n0 + 1e-300))
      throw std::runtime_error("evolution unstable: norm exceeds the energy bound");
  };

  if (m == Method::expm) {
    if (g.n > 512) throw std::invalid_argument("expm evolution is limited to n <= 512");
    const OperatorMatrix A = op.dense();
    for (double t : times) {
      const Field w = t == 0 ? w0 : Field((A * t).exp() * w0);
      check(t, w);
      record(g, tr, t, w, keep_snapshots);
    }
    return tr;
  }

  Field w = w0, k1, k2, k3, k4;
  double t = 0;
  for (double tout : times) {
    const int steps = int(std::ceil((tout - t) / tr.dt - 1e-9));
    const double h = steps > 0 ? (tout - t) / steps : 0;
    for (int s = 0; s < steps; ++s) {
      op.apply(w, k1);
      op.apply(w + 0.5 * h * k1, k2);
      op.apply(w + 0.5 * h * k2, k3);
      op.apply(w + h * k3, k4);
      w += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    t = tout;
    check(t, w);
    record(g, tr, t, w, keep_snapshots);
  }
  return tr;
}

std::vector<double> log_times(double t0, double t1, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = t0 * std::pow(t1 / t0, n > 1 ? double(k) / (n - 1) : 0.0);
  return t;
}

double chi(double c) {
  const double a = std::abs(c);
  if (a <= 1) return 1;
  if (a >= 2) return 0;
  auto f = [](double x) { return x > 0 ? std::exp(-1 / x) : 0.0; };
  return f(2 - a) / (f(2 - a) + f(a - 1));
}

cd psi_chi(double t, double tol) {
  // chi is even, so only the odd part of e^{-ict}/c survives on the real line
  auto s = [&](double c) { return chi(c) * std::sin(c * t) / c; };
  double line = integrate(s, 0.5, 1, tol);
  for (double a = 1; a < 2; a += 0.125) line += integrate(s, a, a + 0.125, tol);
  // c = e^{i theta}/2, theta from -pi to 0; dc/c = i dtheta
  auto arc = [&](double th) { return std::exp(cd(0, -1) * 0.5 * std::exp(cd(0, th)) * t); };
  cd circ = 0;
  const int pieces = 8 + int(t);
  for (int k = 0; k < pieces; ++k)
    circ += integrate<cd>(arc, -M_PI + M_PI * k / pieces, -M_PI + M_PI * (k + 1) / pieces, tol);
  return cd(0, -2 * line) + cd(0, 1) * circ;
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.resize(m);
  w.resize(m);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(m, z), pm = std::legendre(m - 1, z);
      dp = m * (z * p - pm) / (z * z - 1);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double p = std::legendre(m, z), pm = std::legendre(m - 1, z);
    dp = m * (z * p - pm) / (z * z - 1);
    x[i] = z;
    w[i] = 2 / ((1 - z * z) * dp * dp);
  }
}

} // namespace

Representation psi_representation(const Profile& b, const Grid& g, const Source& omega_in,
                                  const std::vector<double>& times, RepresentationOptions opt) {
  Representation rep;
  rep.t = times;
  const CriticalLayer c0 = march_real(b, 0.0, g.y, &omega_in, opt.march);
  const J12 d = dj1j2(b, 0.0, 1e-3, opt.march);
  rep.dj1 = d.j1;
  rep.dj2 = d.j2;
  const double D = d.j1 * d.j1 + d.j2 * d.j2;
  if (D < 1e-16) throw std::domain_error("eigenvalue at 0 is not simple: use the associated-function path");
  rep.j3 = c0.j3;
  rep.j4 = c0.j4;
  rep.A = (d.j1 * c0.j4 + d.j2 * c0.j3) / D;
  rep.B = (d.j1 * c0.j3 - d.j2 * c0.j4) / D;
  rep.P = rep.B + cd(0, 1) * rep.A;
  rep.gamma0 = c0.gamma;

  if (opt.c_lo == 0 && opt.c_hi == 0) {
    // F vanishes once y_c leaves supp b'' and supp omega_in
    const double bmax = std::max(1e-300, g.y.unaryExpr([&](double y) { return std::abs(b.d2(y)); }).maxCoeff());
    double wmax = 1e-300;
    for (int j = 0; j < g.n; ++j) wmax = std::max(wmax, std::abs(omega_in(g.y[j])));
    double ylo = 0, yhi = 0;
    for (int j = 0; j < g.n; ++j) {
      const double y = g.y[j];
      if (std::abs(b.d2(y)) > 1e-15 * bmax || std::abs(omega_in(y)) > 1e-15 * wmax) {
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
      }
    }
    opt.c_lo = std::min(b(ylo), -2.0);
    opt.c_hi = std::max(b(yhi), 2.0);
  }

  std::vector<double> gx, gw;
  gauss_legendre(opt.gauss, gx, gw);
  std::vector<Field> acc(times.size(), Field::Zero(g.n));
  auto panel_run = [&](double a, double e) {
    const int np = std::max(1, int(std::ceil((e - a) / opt.panel)));
    const double w = (e - a) / np;
    for (int p = 0; p < np; ++p) {
      for (int q = 0; q < opt.gauss; ++q) {
        const double c = a + w * (p + 0.5 * (1 + gx[q]));
        const double wt = 0.5 * w * gw[q];
        const CriticalLayer cl = march_real(b, c, g.y, &omega_in, opt.march);
        const cd F = (cl.j1 * cl.j4 + cl.j2 * cl.j3) / (cl.j1 * cl.j1 + cl.j2 * cl.j2);
        const Field R = F * cl.gamma.cast<cd>() - (chi(c) * rep.A / c) * rep.gamma0.cast<cd>();
        for (size_t k = 0; k < times.size(); ++k) acc[k] += (wt * std::exp(cd(0, -c * times[k]))) * R;
        ++rep.nodes;
      }
    }
  };
  panel_run(opt.c_lo, 0);
  panel_run(0, opt.c_hi);

  rep.psi.resize(times.size());
  for (size_t k = 0; k < times.size(); ++k)
    rep.psi[k] = rep.P * rep.gamma0.cast<cd>() - acc[k] / M_PI - (rep.A / M_PI * psi_chi(times[k])) * rep.gamma0.cast<cd>();
  return rep;
}

PsiDecomposition decompose_psi(const Grid& g, const std::vector<Field>& psi, cd P, const Eigen::VectorXd& gamma0) {
  PsiDecomposition out;
  out.P = P;
  out.psi1 = P * gamma0.cast<cd>();
  for (const Field& f : psi) {
    out.psi2.push_back(f - out.psi1);
    out.l2.push_back(l2_norm(g, out.psi2.back()));
    out.h1.push_back(h1_norm(g, out.psi2.back()));
  }
  return out;
}

} // namespace shear
