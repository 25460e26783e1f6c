#include "shear/flow.hpp"
#include "shear/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shear {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

class Couette final : public Profile {
public:
  Derivs derivs(double y) const override { return {y, 1, 0, 0, 0, 0}; }
  std::string kind() const override { return "couette"; }
  double flat_beyond() const override { return 0; }
};

// d^k/dy^k e^{-(y/a)^2} = (-1/a)^k H_k(y/a) e^{-(y/a)^2}
void gauss_derivs(double y, double a, double* g, int kmax) {
  const double x = y / a, e = std::exp(-x * x);
  double hm = 1, h = 2 * x, s = -1 / a;
  g[0] = e;
  if (kmax >= 1) g[1] = s * h * e;
  double sk = s;
  for (int k = 1; k < kmax; ++k) {
    const double hn = 2 * x * h - 2 * k * hm;
    hm = h;
    h = hn;
    sk *= s;
    g[k + 1] = sk * h * e;
  }
}

class Neutral final : public Profile {
public:
  explicit Neutral(const NeutralParams& p) : p_(p), a1_(p.gamma0 * p.gamma1) {
    if (p.gamma0 <= 0 || p.gamma1 <= 0) throw std::invalid_argument("neutral_family: widths must be positive");
  }

  Derivs derivs(double y) const override {
    double g0[5], g1[5];
    gauss_derivs(y, p_.gamma0, g0, 4);
    gauss_derivs(y, a1_, g1, 4);
    const double c0 = p_.gamma0, c1 = p_.inner_weight * p_.gamma0 * p_.gamma1 * p_.gamma1;
    Derivs d;
    d[0] = y + p_.N * (0.5 * kSqrtPi * (c0 * p_.gamma0 * std::erf(y / p_.gamma0) -
                                        c1 * a1_ * std::erf(y / a1_)));
    d[1] = 1 + p_.N * (c0 * g0[0] - c1 * g1[0]);
    for (int k = 1; k <= 4; ++k) d[k + 1] = p_.N * (c0 * g0[k] - c1 * g1[k]);
    return d;
  }

  std::string kind() const override { return "neutral_family"; }
  double flat_beyond() const override { return 6.5 * p_.gamma0; }

private:
  NeutralParams p_;
  double a1_;
};

class Tabulated final : public Profile {
public:
  Tabulated(std::vector<double> y, std::vector<double> b) : y_(std::move(y)), b_(std::move(b)) {
    const size_t n = y_.size();
    if (n < 4 || b_.size() != n) throw std::invalid_argument("tabulated: need >= 4 (y, b) pairs");
    for (size_t i = 1; i < n; ++i)
      if (!(y_[i] > y_[i - 1])) throw std::invalid_argument("tabulated: y must increase");
    // natural cubic spline second derivatives
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
      const double h0 = y_[i] - y_[i - 1], h1 = y_[i + 1] - y_[i];
      const double a = h0 / 6, bb = (h0 + h1) / 3, cc = h1 / 6;
      const double r = (b_[i + 1] - b_[i]) / h1 - (b_[i] - b_[i - 1]) / h0;
      const double den = bb - a * c[i - 1];
      c[i] = cc / den;
      d[i] = (r - a * d[i - 1]) / den;
    }
    for (size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
    flat_ = std::max(std::abs(y_.front()), std::abs(y_.back()));
  }

  Derivs derivs(double y) const override {
    const size_t n = y_.size();
    if (y <= y_.front() || y >= y_.back()) {
      // affine continuation with the end slope
      const bool left = y <= y_.front();
      const size_t i = left ? 0 : n - 2;
      const double h = y_[i + 1] - y_[i];
      const double s = (b_[i + 1] - b_[i]) / h + (left ? -h * (2 * m_[i] + m_[i + 1]) / 6
                                                       : h * (m_[i] + 2 * m_[i + 1]) / 6);
      const double y0 = left ? y_.front() : y_.back(), b0 = left ? b_.front() : b_.back();
      return {b0 + s * (y - y0), s, 0, 0, 0, 0};
    }
    const size_t i = size_t(std::upper_bound(y_.begin(), y_.end(), y) - y_.begin()) - 1;
    const double h = y_[i + 1] - y_[i], A = (y_[i + 1] - y) / h, B = (y - y_[i]) / h;
    Derivs d{};
    d[0] = A * b_[i] + B * b_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6;
    d[1] = (b_[i + 1] - b_[i]) / h - (3 * A * A - 1) * h / 6 * m_[i] + (3 * B * B - 1) * h / 6 * m_[i + 1];
    d[2] = A * m_[i] + B * m_[i + 1];
    d[3] = (m_[i + 1] - m_[i]) / h;
    return d;
  }

  std::string kind() const override { return "tabulated"; }
  double flat_beyond() const override { return flat_; }

private:
  std::vector<double> y_, b_, m_;
  double flat_ = 0;
};

} // namespace

ProfilePtr make_couette() { return std::make_shared<Couette>(); }
ProfilePtr make_neutral(const NeutralParams& p) { return std::make_shared<Neutral>(p); }
ProfilePtr make_tabulated(const std::vector<double>& y, const std::vector<double>& b) {
  return std::make_shared<Tabulated>(y, b);
}

ProfilePtr make_profile(const std::string& kind, const NeutralParams& p, const std::vector<double>& ty,
                        const std::vector<double>& tb) {
  if (kind == "couette") return make_couette();
  if (kind == "neutral_family") return make_neutral(p);
  if (kind == "tabulated") return make_tabulated(ty, tb);
  throw std::invalid_argument("unknown profile kind: " + kind);
}

FlowReport validate(const Profile& b, double L_probe, int n) {
  FlowReport r;
  const double h = 2 * L_probe / (n - 1);
  Eigen::VectorXd bp(n), bpp(n), ys(n);
  r.c_m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    ys[i] = -L_probe + i * h;
    const auto d = b.derivs(ys[i]);
    bp[i] = d[1];
    bpp[i] = d[2];
    if (!std::isfinite(d[0]) || !std::isfinite(d[1]) || !std::isfinite(d[2])) {
      r.error = "profile is not finite at y = " + std::to_string(ys[i]);
      return r;
    }
    r.c_m = std::min(r.c_m, d[1]);
    r.bp_max = std::max(r.bp_max, std::abs(d[1]));
    r.bpp_max = std::max(r.bpp_max, std::abs(d[2]));
  }
  if (!(r.c_m > 0)) {
    r.error = "profile is not strictly monotone (min b' = " + std::to_string(r.c_m) + ")";
    return r;
  }
  // H^4 norm of b'' from repeated centred differences
  Eigen::VectorXd f = bpp;
  double s = f.squaredNorm() * h;
  for (int k = 1; k <= 4; ++k) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(f.size() - 2);
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = (f[i + 2] - f[i]) / (2 * h);
    f = g;
    s += f.squaredNorm() * h;
  }
  r.h4_norm = std::sqrt(s);
  // decay of b'': largest e-folding rate consistent with the tail samples
  const double edge = std::max(std::abs(bpp[0]), std::abs(bpp[n - 1]));
  if (r.bpp_max > 0 && edge > 1e-10 * std::max(1.0, r.bpp_max)) {
    r.error = "b'' does not decay at the truncation edge (|b''(L)| = " + std::to_string(edge) + ")";
    return r;
  }
  // fitted rate from where |b''| drops below 1e-3 and 1e-9 of its peak
  double y3 = 0, y9 = L_probe;
  for (int i = n / 2; i < n; ++i) {
    const double v = std::max(std::abs(bpp[i]), std::abs(bpp[n - 1 - i]));
    if (v > 1e-3 * r.bpp_max) y3 = ys[i];
    if (v > 1e-9 * r.bpp_max) y9 = ys[i];
  }
  r.decay_rate = r.bpp_max > 0 && y9 > y3 ? std::log(1e6) / (y9 - y3) : std::numeric_limits<double>::infinity();
  const double rate = std::min(1.0, r.decay_rate);
  r.L = std::log(1e12) / rate;
  r.ok = true;
  return r;
}

double invert(const Profile& b, double v) {
  // bracket using monotonicity
  double lo = -1, hi = 1;
  while (b(lo) > v) { lo *= 2; if (lo < -1e8) throw std::domain_error("invert: value out of range"); }
  while (b(hi) < v) { hi *= 2; if (hi > 1e8) throw std::domain_error("invert: value out of range"); }
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto d = b.derivs(y);
    const double f = d[0] - v;
    if (f > 0) hi = y; else lo = y;
    double yn = y - f / d[1];
    if (!(yn > lo && yn < hi)) yn = 0.5 * (lo + hi);
    if (std::abs(yn - y) <= 1e-16 * (1 + std::abs(y))) return yn;
    y = yn;
    if (hi - lo < 1e-16 * (1 + std::abs(y))) break;
  }
  return y;
}

double rayleigh_potential(const Profile& b, double y, double y0) {
  const double s = y - y0;
  if (std::abs(s) < 1e-4) {
    // b(y0) = 0 and b''(y0) = 0 for a regular potential; expand both
    const auto d = b.derivs(y0);
    const double num = d[3] + d[4] * s / 2 + d[5] * s * s / 6;
    const double den = d[1] + d[2] * s / 2 + d[3] * s * s / 6;
    return num / den;
  }
  const auto d = b.derivs(y);
  return d[2] / d[0];
}

double tridiag_lowest(const Eigen::VectorXd& diag, double off, double tol) {
  const Eigen::Index n = diag.size();
  double lo = diag.minCoeff() - 2 * std::abs(off), hi = diag.maxCoeff() + 2 * std::abs(off);
  const double o2 = off * off;
  auto count_below = [&](double x) {
    int c = 0;
    double q = diag[0] - x;
    if (q < 0) ++c;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (q == 0) q = 1e-300;
      q = diag[i] - x - o2 / q;
      if (q < 0) ++c;
    }
    return c;
  };
  while (hi - lo > tol * std::max(1.0, std::abs(lo))) {
    const double m = 0.5 * (lo + hi);
    if (count_below(m) >= 1) hi = m; else lo = m;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct FdLevel {
  double lambda;
  Eigen::VectorXd y, phi;
};

FdLevel fd_ground(const Profile& b, double y0, double L, int n, bool vector) {
  const double h = 2 * L / (n + 1);
  Eigen::VectorXd diag(n), y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = -L + (i + 1) * h;
    diag[i] = 2 / (h * h) + rayleigh_potential(b, y[i], y0);
  }
  FdLevel out;
  out.lambda = tridiag_lowest(diag, -1 / (h * h));
  if (vector) {
    // inverse iteration with a slightly shifted tridiagonal solve
    const double shift = out.lambda - 1e-10 * std::max(1.0, std::abs(out.lambda));
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n), c(n), dd(n);
    for (int it = 0; it < 3; ++it) {
      const double off = -1 / (h * h);
      dd[0] = diag[0] - shift;
      c[0] = off / dd[0];
      Eigen::VectorXd r = v;
      r[0] /= dd[0];
      for (int i = 1; i < n; ++i) {
        dd[i] = diag[i] - shift - off * c[i - 1];
        c[i] = off / dd[i];
        r[i] = (v[i] - off * r[i - 1]) / dd[i];
      }
      for (int i = n - 2; i >= 0; --i) r[i] -= c[i] * r[i + 1];
      v = r / r.cwiseAbs().maxCoeff();
    }
    if (v.sum() < 0) v = -v;
    out.y = y;
    out.phi = v;
  }
  return out;
}

} // namespace

GroundState schrodinger_ground_eigen(const Profile& b, double L, int n) {
  const double y0 = invert(b, 0.0);
  if (std::abs(b.d2(y0)) > 1e-8 * std::max(1.0, std::abs(b.d3(y0))))
    throw std::domain_error("schrodinger_ground_eigen: b''/b is singular (b'' does not vanish at the zero of b)");
  // odd n keeps the zero of b at a node for symmetric profiles
  if (n % 2 == 0) ++n;
  const FdLevel l1 = fd_ground(b, y0, L, n, false);
  const FdLevel l2 = fd_ground(b, y0, L, 2 * n + 1, false);
  const FdLevel l3 = fd_ground(b, y0, L, 4 * n + 3, true);
  GroundState g;
  const double r12 = richardson(l1.lambda, l2.lambda), r23 = richardson(l2.lambda, l3.lambda);
  g.lambda = (16 * r23 - r12) / 15;
  g.certificate = std::abs(r23 - r12);
  g.lambda_h = l3.lambda;
  g.y = l3.y;
  g.phi = l3.phi;
  return g;
}

NeutralFlow build_neutral_flow(NeutralParams base, double target, double N_lo, double N_hi, double tol,
                               double L, int n) {
  auto lam = [&](double N) {
    NeutralParams p = base;
    p.N = N;
    Neutral prof(p);
    return schrodinger_ground_eigen(prof, L, n);
  };
  double f_lo = lam(N_lo).lambda - target, f_hi = lam(N_hi).lambda - target;
  if (f_lo * f_hi > 0) throw std::domain_error("build_neutral_flow: target eigenvalue not bracketed in N");
  NeutralFlow out;
  while (std::abs(N_hi - N_lo) > tol && out.iterations < 200) {
    // regula falsi with Illinois damping, bisection fallback
    double Nm = N_hi - f_hi * (N_hi - N_lo) / (f_hi - f_lo);
    if (!(Nm > std::min(N_lo, N_hi) && Nm < std::max(N_lo, N_hi))) Nm = 0.5 * (N_lo + N_hi);
    const double fm = lam(Nm).lambda - target;
    ++out.iterations;
    if (fm == 0) { N_lo = N_hi = Nm; break; }
    if (fm * f_hi < 0) { N_lo = N_hi; f_lo = f_hi; N_hi = Nm; f_hi = fm; }
    else { f_lo *= 0.5; N_hi = Nm; f_hi = fm; }
    if (std::abs(fm) < 1e-14) { N_lo = N_hi = Nm; break; }
  }
  base.N = std::abs(f_lo) < std::abs(f_hi) ? N_lo : N_hi;
  const GroundState g = lam(base.N);
  out.params = base;
  out.profile = make_neutral(base);
  out.lambda = g.lambda;
  out.lambda_error = std::max(std::abs(g.lambda - target), g.certificate);
  return out;
}

} // namespace shear
