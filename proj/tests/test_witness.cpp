#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flows.hpp"
#include "shear/witness.hpp"

#include <cmath>

using namespace shear;
using namespace shear::testing;

TEST_CASE("chi_Z shape") {
  const double Z = std::exp(3.0);
  CHECK(chi_Z(0.0, Z) == 0.0);
  CHECK(chi_Z(1 / Z, Z) == 0.0);
  CHECK(chi_Z(1.5 / Z, Z) == doctest::Approx(0.5));
  CHECK(chi_Z(2 / Z, Z) == 1.0);
  CHECK(chi_Z(0.3, Z) == 1.0);
  CHECK(chi_Z(0.75, Z) == doctest::Approx(0.5));
  CHECK(chi_Z(1.0, Z) == 0.0);
  CHECK(chi_Z(-0.3, Z) == 0.0);
  // C^1 across the ramp ends
  const double d = 1e-7;
  for (double y : {1 / Z, 2 / Z, 0.5, 1.0})
    CHECK(std::abs(chi_Z(y + d, Z) - chi_Z(y - d, Z)) < 1e-10);
  for (double y = 0; y < 1.2; y += 1e-3) {
    CHECK(chi_Z(y, Z) >= 0);
    CHECK(chi_Z(y, Z) <= 1);
  }
}

TEST_CASE("witness data: norms and grid check") {
  const Grid g = make_grid(2001, 8);
  const WitnessData d = theorem1_data(2.0, g);
  CHECK(d.Z == doctest::Approx(std::exp(2.0)));
  CHECK(d.linf == doctest::Approx(0.5));
  // |chi_Z/2|_2^2 = (1/4)(1/2 - 2/Z + q (1/Z + 1/2)), q = int_0^1 r^2 = 1/3 + 5/(8 pi^2)
  const double Z = d.Z, q = 1.0 / 3 + 5 / (8 * M_PI * M_PI);
  const double exact = 0.5 * std::sqrt(0.5 - 2 / Z + q * (1 / Z + 0.5));
  CHECK(d.l2 == doctest::Approx(exact).epsilon(1e-4));
  CHECK(d.source(0.3) == cd(0.5, 0));
  CHECK_THROWS_AS(theorem1_data(2.0, make_grid(300, 8)), std::invalid_argument);
  CHECK_THROWS_AS(theorem1_data(1.0, g), std::invalid_argument);
}

TEST_CASE("toy closed forms against expm and rk4") {
  const ToyState init{1.0, 0.5};
  for (ToyVariant v : {ToyVariant::A1, ToyVariant::A2})
    for (double nu : {0.0, 1e-9, 1e-2, 0.3})
      for (double t : {0.5, 10.0, 100.0}) {
        const ToyState c = toy_solve(v, nu, init, t);
        const ToyState e = toy_numeric(v, nu, init, t);
        const ToyState r = toy_numeric(v, nu, init, t, Method::rk4, 1e-2);
        const double s = std::max(1.0, std::abs(c.phi));
        CHECK(std::abs(c.psi - e.psi) < 1e-10 * s);
        CHECK(std::abs(c.phi - e.phi) < 1e-10 * s);
        CHECK(std::abs(c.phi - r.phi) < 1e-10 * s);
      }
}

TEST_CASE("toy growth") {
  // A1, (1, 0): phi = (e^{-nu t} - e^{-2 nu t})/nu; at nu = 0.01, t = 100: (e^-1 - e^-2)/0.01
  const ToyState a = toy_solve(ToyVariant::A1, 0.01, {1, 0}, 100);
  CHECK(a.phi == doctest::Approx((std::exp(-1.0) - std::exp(-2.0)) / 0.01).epsilon(1e-14));
  CHECK(a.phi == doctest::Approx(23.254).epsilon(1e-4));
  // maximum at t = ln 2/nu with value 1/(4 nu)
  const ToyState m = toy_solve(ToyVariant::A1, 0.01, {1, 0}, std::log(2.0) / 0.01);
  CHECK(m.phi == doctest::Approx(25.0).epsilon(1e-12));
  for (double t : {1.0, 50.0, 1e4}) CHECK(toy_solve(ToyVariant::A2, 0.0, {1, 0}, t).phi == t);
}

TEST_CASE("couette control: no embedded eigenvalue, no growth") {
  const Grid g = make_grid(481, 8);
  Theorem1Options opt;
  opt.horizon = 10;
  const GrowthReport r = run_theorem1(*make_couette(), g, 2.0, opt);
  CHECK_FALSE(r.hypothesis_ok);
  CHECK_FALSE(r.note.empty());
  CHECK(r.amp_l2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.amp_linf == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("growth run on a coarse grid") {
  const Grid g = make_grid(481, 8);
  Theorem1Options opt;
  opt.horizon = 20;
  const GrowthReport r = run_theorem1(*simple_flow(), g, 2.0, opt);
  CHECK(r.hypothesis_ok);
  CHECK(r.amp_l2 > 1.1);
  CHECK(r.amp_linf > r.amp_l2);
  CHECK(r.t_star_l2 > 0);
  CHECK(std::abs(r.P) == doctest::Approx(0.09966).epsilon(1e-3));
  CHECK(r.trace.t.size() == 41);
}

TEST_CASE("associated function solves the evolution on a small grid") {
  const Grid g = make_grid(801, 10);
  Theorem2Options opt;
  opt.samples = 9;
  const AssociatedSolution s = theorem2_solution(*multiple_flow(), g, opt);
  CHECK(s.residual < 2e-3);
  CHECK(s.cross_check < 2e-3);
  CHECK(s.fit_closed.slope == doctest::Approx(s.slope_ref).epsilon(1e-2));
  CHECK(s.fit_evolved.slope == doctest::Approx(s.slope_ref).epsilon(1e-2));
  CHECK(s.fit_evolved.r2 > 0.999);
  CHECK((s.w(2.0) - 2.0 * s.omega_star - cd(0, 1) * s.eta).norm() == 0.0);
}

TEST_CASE("the eigenvector is stationary") {
  const Grid g = make_grid(801, 10);
  Theorem2Options opt;
  opt.evolve_check = false;
  const AssociatedSolution s = theorem2_solution(*simple_flow(), g, opt);
  const LinearizedEuler op(*simple_flow(), g);
  CHECK(l2_norm(g, op.rayleigh(s.omega_star)) < 1e-3 * l2_norm(g, s.omega_star));
}

TEST_CASE("viscous sweep bookkeeping") {
  const Grid g = make_grid(481, 8);
  const ViscousReport r = run_viscous(*simple_flow(), g, 2.0, {1e-2, 1e-3}, 1.0, 2.0, 0.58);
  REQUIRE(r.amp_T.size() == 2);
  CHECK(r.delta[1] < r.delta[0]);
  CHECK(r.field_gap[1] < r.field_gap[0]);
  CHECK(r.order.slope > 0);
  CHECK(r.amp_T[0] < r.amp_T_inviscid);
}
