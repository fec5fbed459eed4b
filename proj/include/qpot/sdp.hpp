// Dense primal-dual interior-point solver for semidefinite programs in
// standard form with additional free scalar variables:
//
//   minimize    sum_k <C_k, X_k> + c'f
//   subject to  sum_k <A_{e,k}, X_k> + a_e'f = b_e,   e = 1..m
//               X_k PSD,  f free.
//
// Free variables are eliminated exactly through a QR factorization of their
// constraint columns before the interior-point iteration starts, so the
// iteration itself only ever sees PSD blocks. The search direction is the
// HKM direction with a Mehrotra predictor-corrector; the Schur complement is
// formed densely (problems here have a few hundred equalities at most).
#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace qpot {

struct SdpProblem {
  struct Entry {
    int block = 0;  // PSD block index
    int row = 0;    // row <= col; interpreted symmetrically
    int col = 0;
    double value = 0.0;
  };
  struct Equality {
    std::vector<Entry> entries;
    std::vector<std::pair<int, double>> free_terms;  // (free var index, coeff)
    double rhs = 0.0;
  };

  std::vector<int> block_sizes;
  int num_free = 0;
  std::vector<Equality> equalities;

  // Objective, always minimized by the solver.
  std::vector<Entry> cost_entries;
  std::vector<std::pair<int, double>> cost_free;

  // Plain-text sparse dump for cross-solver reproduction. Format:
  //   blocks <k>            followed by the k block sizes
  //   free <p>
  //   obj <nnz>             lines: B <block> <row> <col> <value>
  //                                F <var> <value>
  //   eq <m>                per equality: eq <nnz> <rhs> then entry lines
  void dump(std::ostream& os) const;
};

struct SdpOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iterations = 100;
  // Interior restoration: the solver works with X' = X + shift*I, which has
  // a strictly feasible point whenever the problem is feasible. SOS cones
  // for vector fields with equilibria have no interior (the defect vanishes
  // at every fixed point), so a small shift keeps the central path defined.
  // Extracted blocks may carry eigenvalues down to -shift.
  double cone_shift = 1e-9;
  bool verbose = false;
};

enum class SdpStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  std::vector<Eigen::MatrixXd> blocks;  // X_k
  Eigen::VectorXd free_values;
  Eigen::VectorXd duals;  // y_e, one per input equality
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double max_equality_residual = 0.0;
  double min_block_eigenvalue = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;
};

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

// Schur complement assembly kernel: out(e,e') = sum_k <lhs[e,k], rhs[e',k]^T>
// for e <= e', mirrored to the lower triangle. Inputs are flattened as
// mats[e * num_blocks + k]. The OpenMP version reproduces the serial
// reference bitwise (entries are independent; no cross-thread reductions).
// Exposed for tests and the kernel benchmark.
void assemble_schur(const std::vector<Eigen::MatrixXd>& lhs_factors,
                    const std::vector<Eigen::MatrixXd>& rhs_factors,
                    int num_eq, int num_blocks, Eigen::MatrixXd& out);
void assemble_schur_serial(const std::vector<Eigen::MatrixXd>& lhs_factors,
                           const std::vector<Eigen::MatrixXd>& rhs_factors,
                           int num_eq, int num_blocks, Eigen::MatrixXd& out);

}  // namespace qpot
