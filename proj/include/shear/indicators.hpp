#ifndef SHEAR_INDICATORS_HPP
#define SHEAR_INDICATORS_HPP

#include "shear/rayleigh.hpp"

#include <vector>

namespace shear {

// Principal value int (b'(y_c) - b'(y))/(b - c_r)^2 dy by symmetric pairing
// around y_c (the odd pole cancels), adaptive Gauss-Kronrod.
double pi1(const Profile& b, double cr, double tol = 1e-12);
// int (1/(b - c_r)^2)(1/phi_1^2 - 1) dy, co-integrated with phi_1.
double pi2(const Profile& b, double cr, const MarchOptions& opt = {});

struct J12 {
  double j1 = 0, j2 = 0;
};
J12 j1j2(const Profile& b, double cr, const MarchOptions& opt = {});
// d/dc_r of (J1, J2): centred differences with one Richardson step.
J12 dj1j2(const Profile& b, double cr, double h = 1e-3, const MarchOptions& opt = {});

// W(c) = int 1/phi^2 for Im c != 0, by quadrature along the march and by the
// determinant of (phi^-, phi^+) at the probe points.
struct Wronskian {
  cd by_quadrature = 0;
  cd by_determinant = 0;
  double det_spread = 0;  // max deviation of the determinant over probes
};
Wronskian wronskian(const Profile& b, cd c, const MarchOptions& opt = {});

// lim W(is)/(is) as s -> 0+ from a Richardson sequence, compared with
// dJ1(0) - i dJ2(0).  flag is set when the two routes differ by > 1e-3 (relative).
struct WOverC {
  std::vector<double> s;
  std::vector<cd> ratio_quad, ratio_det;
  cd extrapolated = 0, extrapolated_det = 0;
  cd from_indicators = 0;
  double rel_gap = 0;
  bool routes_disagree = false;
};
WOverC w_over_c(const Profile& b, double cstar = 0.0, const MarchOptions& opt = {});

struct J34 {
  cd j3 = 0, j4 = 0;
};
J34 j3j4(const Profile& b, const Source& g, double cr, const MarchOptions& opt = {});

struct EmbeddedEigenvalue {
  double c = 0;
  double j1 = 0, j2 = 0;
  double dj1 = 0, dj2 = 0;
  bool simple = true;
};
// Zeros of J1^2 + J2^2 on [c_lo, c_hi]: coarse scan, golden-section refinement,
// accepted below tol_e; |dJ1| + |dJ2| < tol_d marks a multiple eigenvalue.
std::vector<EmbeddedEigenvalue> scan_embedded(const Profile& b, double c_lo, double c_hi, int n = 161,
                                              double tol_e = 1e-6, double tol_d = 1e-4,
                                              const MarchOptions& opt = {});

// P(g) = (J3 + i J4)/(dJ1 - i dJ2) at the embedded eigenvalue c_*.
cd projection_coefficient(const Profile& b, const Source& g, double cstar = 0.0, const MarchOptions& opt = {});

} // namespace shear

#endif // SHEAR_INDICATORS_HPP
