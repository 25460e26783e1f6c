#ifndef SHEAR_FLOW_HPP
#define SHEAR_FLOW_HPP

#include <Eigen/Core>

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace shear {

// A monotone shear profile b(y).  derivs() fills b and its first five
// derivatives; the critical-layer series need all of them.
class Profile {
public:
  using Derivs = std::array<double, 6>;

  virtual ~Profile() = default;
  virtual Derivs derivs(double y) const = 0;
  virtual std::string kind() const = 0;
  // |y| beyond which b'' is below double precision (b is affine there).
  virtual double flat_beyond() const = 0;

  double operator()(double y) const { return derivs(y)[0]; }
  double d1(double y) const { return derivs(y)[1]; }
  double d2(double y) const { return derivs(y)[2]; }
  double d3(double y) const { return derivs(y)[3]; }
};

using ProfilePtr = std::shared_ptr<const Profile>;

// b(y) = y + N ( int_0^y g0 e^{-z^2/g0^2} dz - w int_0^y g0 g1^2 e^{-z^2/(g0 g1)^2} dz ).
// w = 1 is the odd two-Gaussian family; other w detune b'''(0).
struct NeutralParams {
  double gamma0 = 0.5;
  double gamma1 = 0.5;
  double N = 1.0;
  double inner_weight = 1.0;
};

ProfilePtr make_couette();
ProfilePtr make_neutral(const NeutralParams& p);
// Natural cubic spline through (y, b); derivatives above the third vanish.
ProfilePtr make_tabulated(const std::vector<double>& y, const std::vector<double>& b);
ProfilePtr make_profile(const std::string& kind, const NeutralParams& p = {},
                        const std::vector<double>& ty = {}, const std::vector<double>& tb = {});

struct FlowReport {
  bool ok = false;
  std::string error;
  double c_m = 0;       // min b'
  double bp_max = 0;    // max |b'|
  double h4_norm = 0;   // H^4 norm of b''
  double bpp_max = 0;   // sup |b''|
  double decay_rate = 0;
  double L = 0;         // truncation half-width
};

// Checks monotonicity, bounds, H^4 regularity of b'' and its decay; picks the
// half-width L with e^{-rate L} < 1e-12 (rate includes the unit Helmholtz decay).
FlowReport validate(const Profile& b, double L_probe = 30.0, int n = 24001);

// b^{-1}(v) by safeguarded Newton.
double invert(const Profile& b, double v);

// b''/b with the removable singularity at the zero of b resolved by Taylor.
double rayleigh_potential(const Profile& b, double y, double y0);

struct GroundState {
  double lambda = 0;       // Richardson-refined lowest eigenvalue
  double lambda_h = 0;     // raw eigenvalue on the finest grid
  double certificate = 0;  // |two successive Richardson estimates|
  Eigen::VectorXd y, phi;  // eigenvector on the finest grid, max-normalised
};

// Lowest eigenvalue of -d^2/dy^2 + b''/b on [-L, L], Dirichlet, second-order
// differences on n, 2n, 4n interior nodes.
GroundState schrodinger_ground_eigen(const Profile& b, double L = 20.0, int n = 4000);

// Lowest eigenvalue of a symmetric tridiagonal matrix (Sturm bisection).
double tridiag_lowest(const Eigen::VectorXd& diag, double off, double tol = 1e-14);

struct NeutralFlow {
  NeutralParams params;
  ProfilePtr profile;
  double lambda = 0;
  double lambda_error = 0;
  int iterations = 0;
};

// Root in N (Illinois regula falsi) so that the ground eigenvalue hits target.  The eigenvalue
// decreases monotonically in N.
NeutralFlow build_neutral_flow(NeutralParams base, double target = -1.0, double N_lo = 0.05,
                               double N_hi = 20.0, double tol = 1e-12, double L = 20.0,
                               int n = 4000);

} // namespace shear

#endif // SHEAR_FLOW_HPP
