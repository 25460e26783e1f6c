#ifndef SHEAR_EVOLUTION_HPP
#define SHEAR_EVOLUTION_HPP

#include "shear/flow.hpp"
#include "shear/indicators.hpp"
#include "shear/numerics.hpp"
#include "shear/rayleigh.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

namespace shear {

// n interior nodes of [-L, L]; fields vanish at +-L.
struct Grid {
  int n = 0;
  double L = 0, h = 0;
  Eigen::VectorXd y;
};

Grid make_grid(int n, double L);

using Field = Eigen::VectorXcd;
using OperatorMatrix = Eigen::MatrixXcd;

// (d^2 - 1)^{-1} with second-order differences and Dirichlet closure.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> helmholtz_inverse(const Grid& g,
                                                                              const Eigen::MatrixBase<Derived>& w) {
  const double ih2 = 1 / (g.h * g.h);
  const ConstTridiag T(g.n, ih2, -2 * ih2 - 1, ih2);
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> psi = w;
  T.solve_in_place(psi);
  return psi;
}

// (d^2 - 1) f with the same stencil.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> helmholtz(const Grid& g, const Eigen::MatrixBase<Derived>& f) {
  const double ih2 = 1 / (g.h * g.h);
  const Eigen::Index n = f.size();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto l = i > 0 ? f[i - 1] : typename Derived::Scalar(0);
    const auto r = i + 1 < n ? f[i + 1] : typename Derived::Scalar(0);
    out[i] = (l + r - 2.0 * f[i]) * ih2 - f[i];
  }
  return out;
}

template <typename Derived>
double l2_norm(const Grid& g, const Eigen::MatrixBase<Derived>& f) {
  return std::sqrt(g.h * f.squaredNorm());
}

template <typename Derived>
double h1_norm(const Grid& g, const Eigen::MatrixBase<Derived>& f) {
  double s = f.squaredNorm();
  const Eigen::Index n = f.size();
  for (Eigen::Index i = 0; i <= n; ++i) {
    const auto l = i > 0 ? f[i - 1] : typename Derived::Scalar(0);
    const auto r = i < n ? f[i] : typename Derived::Scalar(0);
    s += std::norm((r - l) / g.h);
  }
  return std::sqrt(g.h * s);
}

template <typename Derived>
double linf_norm(const Eigen::MatrixBase<Derived>& f) {
  return f.cwiseAbs().maxCoeff();
}

// d_t omega = -i R omega + nu (d^2 - 1) omega, R = b - b'' (d^2 - 1)^{-1}.
class LinearizedEuler {
public:
  LinearizedEuler(const Profile& b, const Grid& g, double nu = 0);

  void apply(const Field& w, Field& out) const;
  Field rayleigh(const Field& w) const;
  OperatorMatrix dense() const;
  // spectral radius bounds of the transport part and of nu (d^2 - 1)
  double advective_bound() const;
  double viscous_bound() const;
  double spectral_bound() const { return advective_bound() + viscous_bound(); }

  const Grid& grid() const { return g_; }
  double nu() const { return nu_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& bpp() const { return bpp_; }

private:
  Grid g_;
  double nu_;
  Eigen::VectorXd b_, bpp_;
  ConstTridiag helm_;
};

OperatorMatrix build_operator(const Profile& b, const Grid& g, double nu = 0);

enum class Method { rk4, expm };

struct EvolutionTrace {
  std::vector<double> t;
  std::vector<Field> omega;   // snapshots (kept when requested)
  std::vector<double> omega_l2, omega_linf, psi_l2, psi_linf, psi_h1;
  double dt = 0;
};

// Norm history at the requested (increasing, >= 0) times.  dt <= 0 picks
// min(0.05, 0.1/advective_bound, 2/spectral_bound).  expm is limited to n <= 512.  Throws when
// the L2 norm leaves the bound e^{2 sup|b''| t}.
EvolutionTrace evolve(const LinearizedEuler& op, const Field& w0, const std::vector<double>& times,
                      Method m = Method::rk4, double dt = 0, bool keep_snapshots = true);

std::vector<double> log_times(double t0, double t1, int n);

// Even cutoff: 1 on |c| < 1, 0 on |c| > 2, C^infinity in between.
double chi(double c);
// int_{|c|>1/2} chi(c) e^{-ict}/c dc + int over the lower half circle of radius 1/2.
cd psi_chi(double t, double tol = 1e-13);

// Stream function by the spectral representation around a simple embedded
// eigenvalue at c_* = 0.  The c_r integral uses Gauss-Legendre panels with a
// panel break at 0, after removing chi(c) A/c Gamma(y, 0).
struct RepresentationOptions {
  double c_lo = 0, c_hi = 0;   // 0, 0: chosen from the supports of b'' and omega_in
  double panel = 0.05;
  int gauss = 8;
  MarchOptions march;
};

struct Representation {
  std::vector<double> t;
  std::vector<Field> psi;
  Eigen::VectorXd gamma0;      // Gamma(., 0)
  cd P = 0, A = 0, B = 0;      // P = B + iA
  cd j3 = 0, j4 = 0;
  double dj1 = 0, dj2 = 0;
  int nodes = 0;
};

Representation psi_representation(const Profile& b, const Grid& g, const Source& omega_in,
                                  const std::vector<double>& times, RepresentationOptions opt = {});

struct PsiDecomposition {
  cd P = 0;
  Field psi1;
  std::vector<Field> psi2;
  std::vector<double> l2, h1;   // norms of psi2
};

// Psi_1 = P Gamma(., 0), Psi_2 = Psi - Psi_1.
PsiDecomposition decompose_psi(const Grid& g, const std::vector<Field>& psi, cd P, const Eigen::VectorXd& gamma0);

} // namespace shear

#endif // SHEAR_EVOLUTION_HPP
