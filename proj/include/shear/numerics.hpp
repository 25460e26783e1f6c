#ifndef SHEAR_NUMERICS_HPP
#define SHEAR_NUMERICS_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace shear {

using cd = std::complex<double>;

namespace internal {

template <typename T> inline double magnitude(const T& v) { return std::abs(v); }

} // namespace internal

// Adaptive Dormand-Prince 5(4) stepper.  State is any fixed or dynamic Eigen
// column vector; the right-hand side is called as f(x, y, dydx).
template <typename State>
class Dopri5 {
public:
  double rtol = 1e-11;
  double atol = 1e-13;
  double hmax = 0.25;
  double hmin = 1e-14;
  int max_steps = 2000000;
  int steps = 0;
  int rejected = 0;

  Dopri5() = default;
  Dopri5(double rt, double at) : rtol(rt), atol(at) {}

  // Advance y from x to x1 (either direction).  The accepted step size is
  // kept between calls so node-to-node marching stays cheap.
  template <typename F>
  void advance(F&& f, double& x, State& y, double x1) {
    const double dir = x1 >= x ? 1.0 : -1.0;
    if (x == x1) return;
    if (h_ <= 0) h_ = std::min(hmax, std::abs(x1 - x));
    if (!have_k1_ || k1x_ != x) {
      k1_.resizeLike(y);
      f(x, y, k1_);
      have_k1_ = true;
      k1x_ = x;
    }
    State k2, k3, k4, k5, k6, k7, yt, yn, err;
    k2.resizeLike(y); k3.resizeLike(y); k4.resizeLike(y);
    k5.resizeLike(y); k6.resizeLike(y); k7.resizeLike(y);
    while (dir * (x1 - x) > 0) {
      if (++steps > max_steps) throw std::runtime_error("Dopri5: step budget exhausted");
      double h = std::min({h_, hmax, std::abs(x1 - x)});
      const bool last = h >= std::abs(x1 - x);
      const double hs = dir * h;
      yt = y + hs * (1.0 / 5) * k1_;
      f(x + hs / 5, yt, k2);
      yt = y + hs * ((3.0 / 40) * k1_ + (9.0 / 40) * k2);
      f(x + hs * 3 / 10, yt, k3);
      yt = y + hs * ((44.0 / 45) * k1_ - (56.0 / 15) * k2 + (32.0 / 9) * k3);
      f(x + hs * 4 / 5, yt, k4);
      yt = y + hs * ((19372.0 / 6561) * k1_ - (25360.0 / 2187) * k2 + (64448.0 / 6561) * k3 -
                     (212.0 / 729) * k4);
      f(x + hs * 8 / 9, yt, k5);
      yt = y + hs * ((9017.0 / 3168) * k1_ - (355.0 / 33) * k2 + (46732.0 / 5247) * k3 +
                     (49.0 / 176) * k4 - (5103.0 / 18656) * k5);
      f(x + hs, yt, k6);
      yn = y + hs * ((35.0 / 384) * k1_ + (500.0 / 1113) * k3 + (125.0 / 192) * k4 -
                     (2187.0 / 6784) * k5 + (11.0 / 84) * k6);
      const double xn = last ? x1 : x + hs;
      f(xn, yn, k7);
      err = hs * ((71.0 / 57600) * k1_ - (71.0 / 16695) * k3 + (71.0 / 1920) * k4 -
                  (17253.0 / 339200) * k5 + (22.0 / 525) * k6 - (1.0 / 40) * k7);
      double e = 0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = atol + rtol * std::max(internal::magnitude(y[i]), internal::magnitude(yn[i]));
        const double r = internal::magnitude(err[i]) / sc;
        e += r * r;
      }
      e = std::sqrt(e / double(y.size()));
      if (!std::isfinite(e)) {
        h_ = h * 0.1;
        ++rejected;
        if (h_ < hmin) throw std::runtime_error("Dopri5: non-finite state");
        continue;
      }
      if (e <= 1.0) {
        x = xn;
        y = yn;
        k1_ = k7;
        k1x_ = x;
        const double fac = e > 0 ? 0.9 * std::pow(e, -0.2) : 5.0;
        const double hn = h * std::clamp(fac, 0.2, 5.0);
        // a truncated final step must not shrink the step used afterwards
        h_ = last ? std::max(h_, hn) : hn;
      } else {
        ++rejected;
        h_ = h * std::max(0.2, 0.9 * std::pow(e, -0.2));
        if (h_ < hmin) throw std::runtime_error("Dopri5: step size underflow");
      }
    }
  }

  void reset() { h_ = -1; have_k1_ = false; }
  double step_size() const { return h_; }
  void set_step_size(double h) { h_ = h; }

private:
  double h_ = -1;
  bool have_k1_ = false;
  double k1x_ = 0;
  State k1_;
};

namespace internal {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082,
                                  0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975,
                                  0.417959183673469387755102040816327};

template <typename T, typename F>
T gk15(F& f, double a, double b, double& err) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  T fc = f(c);
  T rk = fc * kWgk[7];
  T rg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const T f1 = f(c - r * kXgk[j]);
    const T f2 = f(c + r * kXgk[j]);
    rk += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) rg += (f1 + f2) * kWg[j / 2];
  }
  err = std::abs((rk - rg) * r);
  return rk * r;
}

template <typename T, typename F>
T adapt(F& f, double a, double b, double tol, int depth, T whole, double err) {
  if (err <= tol || depth <= 0 || std::abs(b - a) < 1e-15 * (1 + std::abs(a))) return whole;
  const double m = 0.5 * (a + b);
  double el, er;
  const T l = gk15<T>(f, a, m, el);
  const T r = gk15<T>(f, m, b, er);
  return adapt<T>(f, a, m, 0.5 * tol, depth - 1, l, el) +
         adapt<T>(f, m, b, 0.5 * tol, depth - 1, r, er);
}

} // namespace internal

// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b] to absolute tolerance.
template <typename T = double, typename F>
T integrate(F&& f, double a, double b, double tol = 1e-12, int max_depth = 40) {
  if (a == b) return T(0);
  double err;
  const T whole = internal::gk15<T>(f, a, b, err);
  return internal::adapt<T>(f, a, b, tol, max_depth, whole, err);
}

// Thomas algorithm for a constant-coefficient tridiagonal system
// lo*x[i-1] + di*x[i] + up*x[i+1] = r[i] with zero Dirichlet closure.
class ConstTridiag {
public:
  ConstTridiag() = default;
  ConstTridiag(int n, double lo, double di, double up) : lo_(lo), up_(up), c_(n), m_(n) {
    if (n <= 0) return;
    m_[0] = 1.0 / di;
    c_[0] = up * m_[0];
    for (int i = 1; i < n; ++i) {
      m_[i] = 1.0 / (di - lo * c_[i - 1]);
      c_[i] = up * m_[i];
    }
  }

  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = x.size();
    x[0] *= m_[0];
    for (Eigen::Index i = 1; i < n; ++i) x[i] = (x[i] - lo_ * x[i - 1]) * m_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c_[i] * x[i + 1];
  }

  int size() const { return int(m_.size()); }

private:
  double lo_ = 0, up_ = 0;
  std::vector<double> c_, m_;
};

// Richardson extrapolation for an order-p method from values at h and h/2.
inline double richardson(double coarse, double fine, int p = 2) {
  const double f = std::pow(2.0, p);
  return (f * fine - coarse) / (f - 1);
}

inline cd richardson(cd coarse, cd fine, int p = 2) {
  const double f = std::pow(2.0, p);
  return (f * fine - coarse) / (f - 1);
}

// Least-squares slope and coefficient of determination of y against x.
struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i];
    sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
  }
  LineFit r;
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  r.slope = cxy / vx;
  r.intercept = (sy - r.slope * sx) / n;
  r.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return r;
}

} // namespace shear

#endif // SHEAR_NUMERICS_HPP
