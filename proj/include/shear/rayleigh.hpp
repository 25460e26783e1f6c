#ifndef SHEAR_RAYLEIGH_HPP
#define SHEAR_RAYLEIGH_HPP

#include "shear/flow.hpp"
#include "shear/numerics.hpp"

#include <Eigen/Core>

#include <functional>

namespace shear {

using Source = std::function<cd(double)>;

struct MarchOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  double s0 = 1e-6;     // start offset from the critical point
  double far = 20.0;    // march at least this far on each side
  double near = 1e-3;   // |y - y_c| below which Taylor forms are used
};

// Taylor data of b at a point y_c with critical value c_r = b(y_c).
struct LocalExpansion {
  double yc = 0, cr = 0;
  double d[6] = {0, 0, 0, 0, 0, 0};  // b^{(k)}(y_c)
  double e[5] = {0, 0, 0, 0, 0};     // (b - c_r)/x = e0 + e1 x + ...
  double kappa = 0;                  // -b''/b'^2: residue of the odd pole
  double a[5] = {1, 0, 1.0 / 6, 0, 0};  // phi_1 series coefficients

  LocalExpansion() = default;
  LocalExpansion(const Profile& b, double cr);

  double ex(double x) const { return e[0] + x * (e[1] + x * (e[2] + x * (e[3] + x * e[4]))); }
  // (b(y_c + x) - c_r)
  double B(double x) const { return x * ex(x); }
  // ((b1 - b'(y))/(b - c)^2 - kappa/x), regular near x = 0
  double f_reg(double x) const;
  // (b1 - b'(y))/(b - c)
  double Bf(double x) const;
};

// Real-c critical layer: phi_1, the glued decaying solution Gamma = phi^-
// (left) / phi^+ (right), and the spectral integrals, on a set of nodes.
struct CriticalLayer {
  double cr = 0, yc = 0, b1 = 0, b2 = 0, b3 = 0, kappa = 0;
  Eigen::VectorXd y;
  Eigen::VectorXd phi1, dphi1;
  Eigen::VectorXd gamma, dgamma;
  // regularised one-sided totals (minus = left of y_c, plus = right)
  double T1m = 0, T1p = 0, Q2m = 0, Q2p = 0;
  double pi1 = 0, pi2 = 0, j1 = 0, j2 = 0;
  cd T3m = 0, T3p = 0, j3 = 0, j4 = 0;
  bool has_source = false;
  // one-sided limits of Gamma and dGamma/dy at the critical point
  double gamma_left = 0, gamma_right = 0, dgamma_left = 0, dgamma_right = 0;
};

CriticalLayer march_real(const Profile& b, double cr, const Eigen::VectorXd& y, const Source* g = nullptr,
                         const MarchOptions& opt = {});

// phi_1(., c_r) on nodes (value, y-derivative) via the order-4 series seed.
struct Phi1Result {
  double yc = 0;
  Eigen::VectorXd phi1, dphi1;
};
Phi1Result solve_phi1(const Profile& b, double cr, const Eigen::VectorXd& y, const MarchOptions& opt = {});

// phi_2(., c) co-integrated with phi_1(., Re c).  Im c = 0 returns 1.
struct Phi2Result {
  double yc = 0;
  Eigen::VectorXd phi1;
  Eigen::VectorXcd phi2, dphi2;
};
Phi2Result solve_phi2(const Profile& b, cd c, const Eigen::VectorXd& y, const MarchOptions& opt = {});

// Complex c: phi = (b - c) phi_1 phi_2 (integrated directly as the regular
// Rayleigh solution through y_c), phi^{-}, phi^{+}, W(c) = int 1/phi^2, and
// optionally the inhomogeneous solution for source omega.
struct VarphiPM {
  cd c;
  double yc = 0;
  Eigen::VectorXd y;
  Eigen::VectorXcd phi, dphi, phim, phip, dphim, dphip;
  cd W = 0;
  // inhomogeneous data (valid when has_source)
  bool has_source = false;
  cd Jstar = 0, mu = 0;
  Eigen::VectorXcd Phi, Phi_il, Phi_ir, Phi_hl, Phi_hr;
};

VarphiPM varphi_pm(const Profile& b, cd c, const Eigen::VectorXd& y, const Source* omega = nullptr,
                   const MarchOptions& opt = {});

// Rayleigh residual of the direct solution is the cross-check: returns the
// determinant det(phi^-, phi^+; dphi^-, dphi^+) on the nodes.
Eigen::VectorXcd wronskian_det(const VarphiPM& v);

// Gamma(., c_r) glued at y_c with the matching mismatches.
struct GammaField {
  double cr = 0, yc = 0;
  Eigen::VectorXd gamma, dgamma;
  double jump_value = 0, jump_deriv = 0;
};
GammaField glue_gamma(const Profile& b, double cr, const Eigen::VectorXd& y, const MarchOptions& opt = {});

// d/dc_r Gamma at fixed y by centred differences in c_r with one Richardson
// step, plus the one-sided limits at y_c and the closed-form oracle values.
struct GammaCDerivative {
  double cr = 0, yc = 0;
  Eigen::VectorXd dc_gamma, dc_dgamma;
  double jump_value = 0, jump_deriv = 0;
  double left_limit = 0, right_limit = 0;          // measured
  double left_oracle = 0, right_oracle = 0;        // -Pi1^-/b' - Pi2^- etc. (b''(y_c) = 0)
};
GammaCDerivative gamma_c_derivative(const Profile& b, double cr, const Eigen::VectorXd& y, double h = 1e-4,
                                    const MarchOptions& opt = {});

// Inhomogeneous Rayleigh solve (c_i != 0); iPhi is the resolvent action.
VarphiPM solve_inhomogeneous(const Profile& b, const Source& omega, cd c, const Eigen::VectorXd& y,
                             const MarchOptions& opt = {});

} // namespace shear

#endif // SHEAR_RAYLEIGH_HPP
