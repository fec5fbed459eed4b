// Analytic reference machinery for linear drift f(x) = A x: the Gramian
// construction of the quadratic potential, the Riccati optimality residual,
// random stable test matrices, and structural verification of a linear
// decomposition A = A_g + A_c.
#pragma once

#include "qpot/poly.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace qpot {

struct LinearSystem {
  Eigen::MatrixXd A;
  int dim() const { return static_cast<int>(A.rows()); }
};

// Validates stability (all eigenvalues in the open left half-plane).
LinearSystem make_linear_system(const Eigen::MatrixXd& A);

// Spectral abscissa (largest real part of the eigenvalues).
double spectral_abscissa(const Eigen::MatrixXd& A);

// Solves A S + S A^T = -Q for S via complex Schur reduction and
// back-substitution. A must be stable; Q symmetric.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

struct LinearDecomposition {
  Eigen::MatrixXd A_g;  // symmetric gradient part, U(x) = -1/2 x' A_g x
  Eigen::MatrixXd A_c;  // remainder, A = A_g + A_c
  double gramian_condition = 0.0;
  bool ill_conditioned = false;

  Polynomial potential() const;  // U as a polynomial
};

// A_g = -1/2 S^{-1} with S the controllability-style Gramian solving
// A S + S A^T = -I. Reproduces 1/2 (A + A^T) exactly when A is normal.
LinearDecomposition gramian_potential(const Eigen::MatrixXd& A);

// 1/2 (A + A^T); requires A A^T = A^T A within 1e-10, else throws with a
// pointer at gramian_potential.
Eigen::MatrixXd normal_case_potential(const Eigen::MatrixXd& A);

// || P A + A^T P + 2 P^2 ||_F / ||A||_F
double riccati_residual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A);

// B - (abscissa(B) + 0.5) I with B standard normal; deterministic in seed
// across platforms (hand-rolled Box-Muller over mt19937_64).
LinearSystem random_stable_matrix(int n, std::uint64_t seed);

struct LinearVerification {
  double symmetry_residual = 0.0;      // ||A_g - A_g^T||_F
  double max_real_eig_Ac = 0.0;        // max |Re lambda(A_c)|
  double antisymmetry_residual = 0.0;  // ||A_g A_c + (A_g A_c)^T||_F
};

LinearVerification verify_linear_decomposition(const Eigen::MatrixXd& A,
                                               const Eigen::MatrixXd& A_g);

// Drift polynomials for f(x) = A x.
VectorField linear_drift(const Eigen::MatrixXd& A);

// Coefficient matrix P of a quadratic polynomial U = 1/2 x' P x + lower order
// (P_ij = d2U/dxi dxj); exact for polynomials of degree <= 2.
Eigen::MatrixXd quadratic_form_matrix(const Polynomial& U);

}  // namespace qpot
