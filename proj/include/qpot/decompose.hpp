// Sub-orthogonal decomposition f = -grad U + f_U of a polynomial drift.
//
// The potential is found in two stages: a steepest-potential program that
// maximizes a monomial lower bound subject to U dominating the bound and the
// polynomial matrix
//     M_U = [ -grad U . f   grad U' ]
//           [  grad U        I      ]
// staying PSD (equivalent, by Schur complement, to the defect
// -grad U . f - |grad U|^2 being non-negative), followed by iterations that
// minimize a contraction factor alpha; alpha = 1 with an unchanged potential
// is always feasible, and alpha < 1 strictly reduces the defect.
#pragma once

#include "qpot/basis.hpp"
#include "qpot/grid.hpp"
#include "qpot/poly.hpp"
#include "qpot/sos.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qpot {

struct DecomposeConfig {
  int max_iterations = 5;
  double alpha_stop = 0.999;       // stop when the improvement factor is ~1
  double defect_stop = 1e-4;       // relative defect-measure improvement floor
  double epsilon_posdef = 1.0;     // fixed positivity weight of the standard program
  double epsilon_floor = 1e-6;     // lower bound for bound/positivity coefficients
  // Weight pinning the free constant of the potential; without it the
  // constant is a zero-cost recession direction of every program.
  double constant_regularization = 1e-10;
  std::optional<Eigen::VectorXd> normalization_point;
  std::optional<Box> box;          // defect-measure box, default [-2,2]^n
  int grid_points_per_dim = 21;
  std::int64_t grid_budget = 200000;  // total grid size cap for high dimensions
  SdpOptions solver;
};

enum class DecomposeStatus { certified, infeasible, unbounded, numerical_failure };

const char* to_string(DecomposeStatus s);

struct IterationStats {
  std::string stage;         // "initial" or "iterate"
  double alpha = 1.0;        // 1.0 for the initial stage
  double defect_measure = 0.0;
  double solver_residual = 0.0;
  double gram_min_eigenvalue = 0.0;
  int solver_iterations = 0;
};

struct DecompositionResult {
  DecomposeStatus status = DecomposeStatus::numerical_failure;
  Polynomial U;
  VectorField f_U;      // f + grad U
  Polynomial defect;    // -grad U . f - |grad U|^2
  std::vector<IterationStats> iterations;
  // bound certificate (U >= sum eps_i b_i) and matrix certificate (M_U >= 0)
  // for the final potential
  std::vector<SosCertificate> certificates;
  BasisSpec basis;
  std::vector<double> bound_epsilons;
  double defect_measure = 0.0;
  std::string message;

  bool certified() const { return status == DecomposeStatus::certified; }
};

// The defect polynomial -grad U . f - |grad U|^2 (exact).
Polynomial defect_polynomial(const Polynomial& U, const VectorField& f);

// U - U(x_ref), so the reference state sits at potential zero.
Polynomial normalize(const Polynomial& U, const Eigen::VectorXd& x_ref);

struct InitialResult {
  DecomposeStatus status = DecomposeStatus::numerical_failure;
  Polynomial U;
  std::vector<double> epsilons;
  SosCertificate bound_certificate;
  SosCertificate matrix_certificate;
  double solver_residual = 0.0;
  double gram_min_eigenvalue = 0.0;
  int solver_iterations = 0;
  std::string message;
};

// Steepest-potential program: maximize sum(eps) with U = c0 + sum c_j p_j,
// U - sum eps_i b_i SOS and M_U PSD.
InitialResult construct_initial(const VectorField& f, const BasisSpec& basis,
                                const DecomposeConfig& config = {});

struct IterateResult {
  DecomposeStatus status = DecomposeStatus::numerical_failure;
  Polynomial U;
  double alpha = 1.0;
  SosCertificate positivity_certificate;
  SosCertificate matrix_certificate;
  SosCertificate improvement_certificate;
  double solver_residual = 0.0;
  double gram_min_eigenvalue = 0.0;
  int solver_iterations = 0;
  std::string message;
};

// One improvement step from U_prev; on solver failure returns U_prev with
// alpha = 1 and a warning message.
IterateResult iterate(const VectorField& f, const Polynomial& U_prev,
                      const BasisSpec& basis, const DecomposeConfig& config = {});

// Standard Lyapunov feasibility program (U >= epsilon_posdef * sum x_i^2 and
// -grad U . f SOS) over the same basis; scaffolding used by tests and as a
// cross-check. Returns an uncertified potential.
InitialResult construct_standard(const VectorField& f, const BasisSpec& basis,
                                 const DecomposeConfig& config = {});

// Full pipeline: basis, initial program, improvement iterations, final
// certification. Defect measure = mean of the defect over a tensor grid.
DecompositionResult decompose(const VectorField& f, const DecomposeConfig& config = {});

// Mean of the defect polynomial over the configured box grid.
double defect_measure_on_box(const Polynomial& defect, const Box& box,
                             int per_dim, std::int64_t budget);

}  // namespace qpot
