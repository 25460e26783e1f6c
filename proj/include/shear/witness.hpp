#ifndef SHEAR_WITNESS_HPP
#define SHEAR_WITNESS_HPP

#include "shear/evolution.hpp"

#include <string>
#include <vector>

namespace shear {

// Plateau 1 on [2/Z, 1/2], support [1/Z, 1], C^2 ramps r(u) = u - sin(2 pi u)/(2 pi).
double chi_Z(double y, double Z);

struct WitnessData {
  double M = 0, Z = 0;
  Source source;       // omega_in(y) = chi_Z(y)/2
  Field omega_in;      // sampled on the grid
  double l2 = 0, linf = 0;
};

// Throws for M < ln 4 and when the inner ramp [1/Z, 2/Z] spans fewer than 4 grid cells.
WitnessData theorem1_data(double M, const Grid& g);

struct GrowthReport {
  bool hypothesis_ok = true;
  std::string note;
  double M = 0, nu = 0, horizon = 0;
  double amp_l2 = 0, amp_linf = 0;   // max_t |omega(t)| / |omega_in|
  double t_star_l2 = 0, t_star_linf = 0;
  cd P = 0;                          // projection coefficient of omega_in
  double psi_l2_end = 0, psi1_l2 = 0;  // |Psi(T)|, |P| |Gamma(., 0)|
  EvolutionTrace trace;
};

struct Theorem1Options {
  double horizon = 50;
  double dt_out = 0.5;
  double nu = 0;
  bool check_hypothesis = true;  // scan for an embedded eigenvalue near 0 first
  bool projection = true;        // compute P(omega_in) and |Gamma|
};

GrowthReport run_theorem1(const Profile& b, const Grid& g, double M, const Theorem1Options& opt = {});

// Associated-function solution w(t) = t (d^2 - 1) Gamma + i (d^2 - 1) d_c Gamma at c = 0.
struct AssociatedSolution {
  Grid grid;
  Eigen::VectorXd gamma, dc_gamma;
  Field omega_star, eta;           // (d^2 - 1) Gamma, (d^2 - 1) d_c Gamma
  double jump_value = 0, jump_deriv = 0;
  double residual = 0;             // max_t |d_t w + i R w| / |w|
  double slope_ref = 0;            // |(d^2 - 1) Gamma|_{L2}
  LineFit fit_closed, fit_evolved, fit_evolved_linf;
  double cross_check = 0;          // |evolve(w(0))(t_x) - w(t_x)| / |w(t_x)|
  double t_cross = 10;

  Field w(double t) const { return t * omega_star + cd(0, 1) * eta; }
};

struct Theorem2Options {
  double t_lo = 10, t_hi = 50;
  int samples = 21;
  double h_c = 1e-4;
  bool evolve_check = true;
};

AssociatedSolution theorem2_solution(const Profile& b, const Grid& g, const Theorem2Options& opt = {});

enum class ToyVariant { A1, A2 };

struct ToyState {
  double psi = 0, phi = 0;
};

// Closed forms for d/dt (psi, phi) = A (psi, phi), A1 = [-2nu 0; 1 -nu], A2 = [-nu 0; 1 -nu].
ToyState toy_solve(ToyVariant v, double nu, ToyState init, double t);
// Same system by the matrix exponential (expm) or classical RK4 with step dt.
ToyState toy_numeric(ToyVariant v, double nu, ToyState init, double t, Method m = Method::expm, double dt = 1e-3);

struct ViscousReport {
  double M = 0, T = 0, kappa = 0;
  std::vector<double> nu;
  std::vector<double> amp_T;           // L2 amplification at the fixed time T
  std::vector<double> amp_max;         // max over the horizon
  double amp_T_inviscid = 0, amp_max_inviscid = 0;
  std::vector<double> delta;           // |amp_T(nu) - amp_T(0)|
  std::vector<double> field_gap;       // |omega_nu(T) - omega_0(T)| / |omega_in|
  LineFit order;                       // log delta against log nu
  double nu0 = 0;                      // largest nu with amp_max >= M kappa / 2
};

ViscousReport run_viscous(const Profile& b, const Grid& g, double M, const std::vector<double>& nus, double T,
                          double horizon, double kappa);

} // namespace shear

#endif // SHEAR_WITNESS_HPP
