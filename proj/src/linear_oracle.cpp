#include "qpot/linear_oracle.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <random>

namespace qpot {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

double spectral_abscissa(const MatrixXd& A) {
  Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

LinearSystem make_linear_system(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("LinearSystem: A must be square");
  const double mu = spectral_abscissa(A);
  if (mu >= 0.0) {
    throw std::invalid_argument(
        "LinearSystem: A is not stable (spectral abscissa " + std::to_string(mu) + ")");
  }
  return LinearSystem{A};
}

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  if (Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  }
  // A = U T U^H, Y = U^H S U: T Y + Y T^H = -U^H Q U, columnwise backward.
  Eigen::ComplexSchur<MatrixXd> schur(A);
  const MatrixXcd T = schur.matrixT();
  const MatrixXcd U = schur.matrixU();
  const MatrixXcd G = -U.adjoint() * Q * U;

  MatrixXcd Y = MatrixXcd::Zero(n, n);
  for (int k = n - 1; k >= 0; --k) {
    VectorXcd rhs = G.col(k);
    for (int j = k + 1; j < n; ++j) rhs -= std::conj(T(k, j)) * Y.col(j);
    MatrixXcd Tk = T;
    Tk.diagonal().array() += std::conj(T(k, k));
    Y.col(k) = Tk.triangularView<Eigen::Upper>().solve(rhs);
  }
  MatrixXd S = (U * Y * U.adjoint()).real();
  return 0.5 * (S + S.transpose());
}

Polynomial LinearDecomposition::potential() const {
  const int n = static_cast<int>(A_g.rows());
  Polynomial U(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      std::vector<int> exps(n, 0);
      exps[i] += 1;
      exps[j] += 1;
      const double c = (i == j) ? -0.5 * A_g(i, i) : -A_g(i, j);
      U.add_term(Monomial(std::move(exps)), c);
    }
  }
  return U;
}

LinearDecomposition gramian_potential(const MatrixXd& A) {
  make_linear_system(A);  // stability check
  const int n = static_cast<int>(A.rows());
  const MatrixXd S = solve_lyapunov(A, MatrixXd::Identity(n, n));

  LinearDecomposition dec;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  dec.gramian_condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  dec.ill_conditioned = !(lmin > 0.0) || dec.gramian_condition > 1e12;

  dec.A_g = -0.5 * S.inverse();
  dec.A_g = 0.5 * (dec.A_g + dec.A_g.transpose()).eval();
  dec.A_c = A - dec.A_g;
  return dec;
}

MatrixXd normal_case_potential(const MatrixXd& A) {
  const double dev = (A * A.transpose() - A.transpose() * A).norm();
  if (dev > 1e-10 * (1.0 + A.norm() * A.norm())) {
    throw std::invalid_argument(
        "normal_case_potential: A is not normal (||AA^T - A^TA|| = " +
        std::to_string(dev) + "); use gramian_potential instead");
  }
  return 0.5 * (A + A.transpose());
}

double riccati_residual(const MatrixXd& P, const MatrixXd& A) {
  if (P.rows() != A.rows() || P.cols() != A.cols()) {
    throw std::invalid_argument("riccati_residual: dimension mismatch");
  }
  const MatrixXd R = P * A + A.transpose() * P + 2.0 * P * P;
  return R.norm() / A.norm();
}

LinearSystem random_stable_matrix(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_stable_matrix: n >= 1 required");
  std::mt19937_64 rng(seed);
  // Box-Muller on 53-bit uniforms; avoids the implementation-defined
  // std::normal_distribution so seeds reproduce across platforms.
  auto uniform = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  };
  auto normal = [&]() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = normal();
  }
  const double mu = spectral_abscissa(B);
  MatrixXd A = B - (mu + 0.5) * MatrixXd::Identity(n, n);
  return LinearSystem{A};
}

LinearVerification verify_linear_decomposition(const MatrixXd& A, const MatrixXd& A_g) {
  LinearVerification rep;
  rep.symmetry_residual = (A_g - A_g.transpose()).norm();
  const MatrixXd A_c = A - A_g;
  Eigen::EigenSolver<MatrixXd> es(A_c, /*computeEigenvectors=*/false);
  rep.max_real_eig_Ac = es.eigenvalues().real().cwiseAbs().maxCoeff();
  const MatrixXd M = A_g * A_c;
  rep.antisymmetry_residual = (M + M.transpose()).norm();
  return rep;
}

VectorField linear_drift(const MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<Polynomial> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) {
    Polynomial p(n);
    for (int j = 0; j < n; ++j) {
      if (A(i, j) != 0.0) p += Polynomial::variable(n, j) * A(i, j);
    }
    comps.push_back(p);
  }
  return VectorField(std::move(comps));
}

MatrixXd quadratic_form_matrix(const Polynomial& U) {
  const int n = U.dim();
  MatrixXd P = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Polynomial dij = U.derivative(i).derivative(j);
      P(i, j) = dij.coefficient(Monomial(n));  // constant part of d2U/dxidxj
    }
  }
  return P;
}

}  // namespace qpot
