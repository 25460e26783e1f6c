#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flows.hpp"
#include "shear/evolution.hpp"
#include "shear/rayleigh.hpp"

#include <cmath>
#include <random>

#include <Eigen/LU>

using namespace shear;
using namespace shear::testing;

namespace {

Eigen::VectorXd linspace(double a, double b, int n) { return Eigen::VectorXd::LinSpaced(n, a, b); }

} // namespace

TEST_CASE("series seed has phi1'' = 1/3 at the critical point") {
  for (auto b : {make_couette(), simple_flow(), multiple_flow()})
    for (double c : {-0.8, 0.0, 0.35}) {
      const LocalExpansion L(*b, c);
      CHECK(L.a[0] == 1.0);
      CHECK(L.a[1] == 0.0);
      CHECK(L.a[2] == doctest::Approx(1.0 / 6).epsilon(1e-15));
    }
}

TEST_CASE("couette: phi1 = sinh x / x and Gamma = -e^{-|x|}") {
  auto b = make_couette();
  const double c = 0.4;
  const Eigen::VectorXd y = linspace(-6, 6, 49);
  const CriticalLayer cl = march_real(*b, c, y);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double x = y[i] - c;
    const double s = std::abs(x) < 1e-12 ? 1.0 : std::sinh(x) / x;
    CHECK(cl.phi1[i] == doctest::Approx(s).epsilon(1e-10));
    CHECK(cl.gamma[i] == doctest::Approx(-std::exp(-std::abs(x))).epsilon(1e-10));
  }
  CHECK(cl.pi1 == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  CHECK(cl.j1 == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(cl.j2 == 0.0);
  // one-sided values are taken at y_c -+ s0
  const double s0 = MarchOptions{}.s0;
  CHECK(cl.gamma_left == doctest::Approx(-std::exp(-s0)).epsilon(1e-10));
  CHECK(cl.gamma_right == doctest::Approx(-std::exp(-s0)).epsilon(1e-10));
}

TEST_CASE("phi1 second derivative at y_c by differences") {
  for (auto b : {make_couette(), simple_flow(), multiple_flow()})
    for (double c : {-0.6, 0.0, 0.25}) {
      const double yc = invert(*b, c), d = 1e-3;
      Eigen::VectorXd y(3);
      y << yc - d, yc, yc + d;
      const Phi1Result r = solve_phi1(*b, c, y);
      CHECK(r.phi1[1] == 1.0);
      CHECK(r.dphi1[1] == 0.0);
      // fourth-order error of the stencil is ~ d^2 phi1''''/12
      CHECK((r.phi1[0] + r.phi1[2] - 2) / (d * d) == doctest::Approx(1.0 / 3).epsilon(1e-6));
    }
}

TEST_CASE("phi1 estimates on random samples") {
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> uc(-1.5, 1.5), ux(-6, 6);
  const ProfilePtr flows[] = {make_couette(), simple_flow(), multiple_flow()};
  int violations = 0;
  double C = 0;
  for (int k = 0; k < 60; ++k) {
    const Profile& b = *flows[k % 3];
    const double c = uc(rng);
    const double yc = invert(b, c);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) y[i] = yc + ux(rng);
    const Phi1Result r = solve_phi1(b, c, y);
    for (int i = 0; i < 5; ++i) {
      const double x = y[i] - yc, p = r.phi1[i], dp = r.dphi1[i];
      if (!(p >= 1 - 1e-12) || !(p <= std::exp(std::abs(x)) * (1 + 1e-10))) ++violations;
      if (!(std::abs(dp) <= p * (1 + 1e-10))) ++violations;
      if (!(dp * x >= -1e-12)) ++violations;
      if (!(std::abs(dp / p) <= std::abs(x) * (1 + 1e-8))) ++violations;
      if (std::abs(x) <= 1) C = std::max(C, std::abs(p - 1) / (x * x));
    }
  }
  CHECK(violations == 0);
  // |phi1 - 1| <= C |y - y_c|^2 on |y - y_c| <= 1 with a moderate constant
  CHECK(C < 1.0);
}

TEST_CASE("Gamma is continuous at the critical layer with value -1/b'") {
  auto b = simple_flow();
  for (double c : {-0.7, 0.0, 0.45}) {
    const CriticalLayer cl = march_real(*b, c, Eigen::VectorXd());
    // values at y_c -+ s0; the correction is O(s0 log s0)
    CHECK(cl.gamma_left == doctest::Approx(-1 / cl.b1).epsilon(1e-4));
    CHECK(cl.gamma_right == doctest::Approx(-1 / cl.b1).epsilon(1e-4));
    CHECK(std::abs(cl.gamma_right - cl.gamma_left) < 1e-4);
    CHECK(cl.j2 == doctest::Approx(M_PI * cl.b2 / std::pow(cl.b1, 3)).epsilon(1e-14));
  }
}

TEST_CASE("glue_gamma matches the far-field decay") {
  auto b = simple_flow();
  Eigen::VectorXd y(2);
  y << -9, -8;
  const GammaField g = glue_gamma(*b, 0.2, y);
  // b is affine far out, so Gamma ~ e^{y}
  CHECK(g.gamma[0] / g.gamma[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("couette Wronskian") {
  auto b = make_couette();
  for (double ci : {0.3, 0.05, -0.2}) {
    const VarphiPM v = varphi_pm(*b, cd(0.1, ci), linspace(-3, 3, 7));
    CHECK(std::abs(v.W - cd(-2 / (1 + ci * ci), 0)) < 1e-9);
  }
  CHECK_THROWS(varphi_pm(*b, cd(0.1, 0), linspace(-1, 1, 3)));
}

TEST_CASE("phi = (b - c) phi1 phi2") {
  auto b = simple_flow();
  const cd c(0.3, 0.05);
  const Eigen::VectorXd y = linspace(-4, 4, 33);
  const VarphiPM v = varphi_pm(*b, c, y);
  const Phi2Result p2 = solve_phi2(*b, c, y);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const cd prod = ((*b)(y[i]) - c) * p2.phi1[i] * p2.phi2[i];
    CHECK(std::abs(prod - v.phi[i]) <= 1e-8 * std::max(1.0, std::abs(v.phi[i])));
  }
}

TEST_CASE("phi^- and phi^+ have constant determinant and decay") {
  auto b = simple_flow();
  const VarphiPM v = varphi_pm(*b, cd(-0.2, 0.1), linspace(-8, 8, 41));
  const Eigen::VectorXcd det = wronskian_det(v);
  for (Eigen::Index i = 0; i < det.size(); ++i) CHECK(std::abs(det[i] - v.W) < 1e-8 * std::abs(v.W));
  CHECK(std::abs(v.phim[0]) < 1e-3 * std::abs(v.phim[20]));
  CHECK(std::abs(v.phip[40]) < 1e-3 * std::abs(v.phip[20]));
}

TEST_CASE("inhomogeneous solve satisfies the forced Rayleigh equation") {
  auto b = simple_flow();
  const Source w = [](double y) { return cd(std::exp(-4 * (y - 0.3) * (y - 0.3)), 0.2 * y * std::exp(-y * y)); };
  const cd c(0.15, 0.08);
  const double h = 1e-3;
  Eigen::VectorXd y(3 * 7);
  for (int k = 0; k < 7; ++k) {
    const double y0 = -2.5 + 0.8 * k + 0.013;
    y.segment(3 * k, 3) << y0 - h, y0, y0 + h;
  }
  const VarphiPM v = solve_inhomogeneous(*b, w, c, y);
  for (int k = 0; k < 7; ++k) {
    const double y0 = y[3 * k + 1];
    const auto D = b->derivs(y0);
    const cd d2 = (v.Phi[3 * k] + v.Phi[3 * k + 2] - 2.0 * v.Phi[3 * k + 1]) / (h * h);
    // (b - c)(Phi'' - Phi) - b'' Phi = i omega
    const cd res = (D[0] - c) * (d2 - v.Phi[3 * k + 1]) - D[2] * v.Phi[3 * k + 1] - cd(0, 1) * w(y0);
    CHECK(std::abs(res) < 1e-5);
  }
}

TEST_CASE("inhomogeneous solve agrees with the discrete resolvent") {
  auto b = simple_flow();
  const Source w = [](double y) { return cd(std::exp(-4 * (y - 0.3) * (y - 0.3)), 0); };
  const cd c(0.15, 0.2);
  const Grid g = make_grid(401, 10);
  const VarphiPM v = solve_inhomogeneous(*b, w, c, g.y);
  // (R - c) H Phi = i omega  with R = b - b'' H^{-1}
  const LinearizedEuler op(*b, g);
  OperatorMatrix R = cd(0, 1) * op.dense();
  R.diagonal().array() -= c;
  Field om(g.n);
  for (int j = 0; j < g.n; ++j) om[j] = cd(0, 1) * w(g.y[j]);
  const Field x = R.partialPivLu().solve(om);
  const Field Phi_h = helmholtz_inverse(g, x);
  CHECK(l2_norm(g, Field(Phi_h - v.Phi)) < 5e-3 * l2_norm(g, v.Phi));
}

TEST_CASE("J* tends to J3 + i J4 as Im c -> 0+") {
  auto b = simple_flow();
  const Source w = [](double y) { return cd(std::exp(-4 * (y - 0.3) * (y - 0.3)), 0); };
  for (double cr : {-0.4, 0.0, 0.3}) {
    const CriticalLayer cl = march_real(*b, cr, Eigen::VectorXd(), &w);
    const cd target = cl.j3 + cd(0, 1) * cl.j4;
    const double e1 = std::abs(varphi_pm(*b, cd(cr, 1e-3), Eigen::VectorXd(), &w).Jstar - target);
    const double e2 = std::abs(varphi_pm(*b, cd(cr, 1e-4), Eigen::VectorXd(), &w).Jstar - target);
    CHECK(e2 < 1e-3 * std::abs(target) + 1e-6);
    CHECK(e2 < e1);
  }
}

TEST_CASE("couette J3 and J4 by nested quadrature") {
  // phi1 = sinh x / x: J3 = P.V. int K(x)/sinh^2 x dx, K(x) = int_0^x omega(c + s) sinh s / s ds
  auto b = make_couette();
  const Source w = [](double y) { return cd(std::exp(-y * y), 0); };
  const double c = 0.25;
  const CriticalLayer cl = march_real(*b, c, Eigen::VectorXd(), &w);
  auto sh = [](double s) { return s == 0 ? 1.0 : std::sinh(s) / s; };
  // K(x) + K(-x) = int_0^x (omega(c + s) - omega(c - s)) sinh s / s ds
  auto Ksym = [&](double x) {
    return integrate([&](double s) { return (w(c + s).real() - w(c - s).real()) * sh(s); }, 0, x, 1e-14);
  };
  auto f = [&](double x) { return Ksym(x) / std::pow(std::sinh(x), 2); };
  const double j3 = integrate(f, 1e-9, 1, 1e-12) + integrate(f, 1, 4, 1e-12) + integrate(f, 4, 30, 1e-12);
  CHECK(cl.j4.real() == doctest::Approx(M_PI * w(c).real()).epsilon(1e-12));
  CHECK(cl.j3.real() == doctest::Approx(j3).epsilon(1e-8));
  CHECK(cl.j3.imag() == 0.0);
}

TEST_CASE("Gamma c-derivative on the multiple-eigenvalue flow") {
  auto b = multiple_flow();
  const Eigen::VectorXd y = linspace(-3, 3, 13);
  const GammaCDerivative d = gamma_c_derivative(*b, 0.0, y);
  CHECK(d.left_limit == doctest::Approx(d.left_oracle).epsilon(1e-5));
  CHECK(d.right_limit == doctest::Approx(d.right_oracle).epsilon(1e-5));
  CHECK(std::abs(d.jump_value) < 1e-5);
  CHECK(std::abs(d.jump_deriv) < 1e-5);
  // Gamma(y, 0) is even for the odd flow, so d_c Gamma is odd
  for (int i = 0; i < 6; ++i) CHECK(d.dc_gamma[i] == doctest::Approx(-d.dc_gamma[12 - i]).epsilon(1e-6));
}
