#include "qpot/decompose.hpp"

#include <algorithm>
#include <cmath>

namespace qpot {

namespace {

// U as an affine-parameterized polynomial c0 + sum c_j p_j; fills `vars`
// with one free variable per basis monomial (constant first).
ParamPoly parameterized_potential(SosProgram& prog, const BasisSpec& basis,
                                  std::vector<VarId>& vars) {
  const int n = basis.potential_basis.front().dim();
  ParamPoly U(n);
  for (const auto& m : basis.potential_basis) {
    const VarId v = prog.add_free_var("c[" + m.to_string() + "]");
    vars.push_back(v);
    U.add(m, LinExpr::variable(v));
  }
  return U;
}

std::vector<std::vector<ParamPoly>> lyapunov_matrix(const ParamPoly& U,
                                                    const VectorField& f) {
  const int n = f.dim();
  std::vector<ParamPoly> gradU;
  gradU.reserve(n);
  for (int i = 0; i < n; ++i) gradU.push_back(U.derivative(i));

  ParamPoly m00(n);
  for (int i = 0; i < n; ++i) m00 = m00 - gradU[i] * f[i];

  std::vector<std::vector<ParamPoly>> M(n + 1, std::vector<ParamPoly>(n + 1, ParamPoly(n)));
  M[0][0] = m00;
  for (int i = 0; i < n; ++i) {
    M[0][i + 1] = gradU[i];
    M[i + 1][0] = gradU[i];
    M[i + 1][i + 1] = ParamPoly::from(Polynomial::constant(n, 1.0));
  }
  return M;
}

// Max |coefficient| over the drift; decompositions scale exactly
// (f/s pairs with U/s and defect/s^2), so the programs are solved on a
// unit-scale drift and results are scaled back. Keeps Gram blocks O(1).
double drift_scale(const VectorField& f) {
  double s = 0.0;
  for (const auto& p : f.components()) {
    for (const auto& [m, c] : p.terms()) s = std::max(s, std::abs(c));
  }
  return s > 0.0 ? s : 1.0;
}

void unscale_certificate(SosCertificate& cert, double s) {
  cert.gram *= s;
  cert.constrained = cert.constrained * s;
}

// The scalarization q(x,y) = y' M_U y of the unit-scale problem maps to the
// original one under y0 -> s*y0 (the first row of M_U carries grad U . f and
// grad U, the rest is the identity). Gram rows holding a y0 factor scale by
// s, and each monomial scales by s^deg_y0.
void unscale_matrix_certificate(SosCertificate& cert, double s, int n) {
  const int y0 = n;  // combined space: x1..xn, y0, y1..yn
  Eigen::VectorXd d(cert.basis.size());
  for (std::size_t a = 0; a < cert.basis.size(); ++a) {
    d[a] = cert.basis[a].exponent(y0) == 1 ? s : 1.0;
  }
  cert.gram = d.asDiagonal() * cert.gram * d.asDiagonal();
  Polynomial scaled(cert.constrained.dim());
  for (const auto& [m, c] : cert.constrained.terms()) {
    scaled.add_term(m, c * std::pow(s, m.exponent(y0)));
  }
  cert.constrained = scaled;
}

DecomposeStatus map_status(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return DecomposeStatus::certified;
    case SdpStatus::infeasible: return DecomposeStatus::infeasible;
    case SdpStatus::unbounded: return DecomposeStatus::unbounded;
    case SdpStatus::numerical_failure: return DecomposeStatus::numerical_failure;
  }
  return DecomposeStatus::numerical_failure;
}

std::string stage_message(const char* stage, const SosSolution& sol) {
  std::string msg = std::string(stage) + ": solver status " + to_string(sol.status);
  if (!sol.message.empty()) msg += " (" + sol.message + ")";
  if (sol.status == SdpStatus::infeasible) {
    msg +=
        "; the bound basis cannot be dominated by any potential in the "
        "basis -- the drift may be unstable, or the basis lacks the even "
        "monomials needed for upward pressure";
  } else if (sol.status == SdpStatus::unbounded) {
    msg += "; the objective is unbounded, which usually means a bound monomial is "
           "not constrained by the potential basis (basis defect)";
  }
  return msg;
}

}  // namespace

const char* to_string(DecomposeStatus s) {
  switch (s) {
    case DecomposeStatus::certified: return "certified-suborthogonal";
    case DecomposeStatus::infeasible: return "infeasible";
    case DecomposeStatus::unbounded: return "unbounded";
    case DecomposeStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

Polynomial defect_polynomial(const Polynomial& U, const VectorField& f) {
  const VectorField g = gradient(U);
  return -dot(g, f) - dot(g, g);
}

Polynomial normalize(const Polynomial& U, const Eigen::VectorXd& x_ref) {
  return U - Polynomial::constant(U.dim(), U.evaluate(x_ref));
}

double defect_measure_on_box(const Polynomial& defect, const Box& box,
                             int per_dim, std::int64_t budget) {
  const TensorGrid grid = TensorGrid::uniform_capped(box, per_dim, budget);
  return mean(evaluate_on_grid(defect, grid));
}

InitialResult construct_initial(const VectorField& f_in, const BasisSpec& basis,
                                const DecomposeConfig& config) {
  const int n = f_in.dim();
  const double scale = drift_scale(f_in);
  const VectorField f = f_in * (1.0 / scale);
  InitialResult res;

  SosProgram prog;
  std::vector<VarId> cvars;
  ParamPoly U = parameterized_potential(prog, basis, cvars);

  LinExpr objective;
  ParamPoly bound(n);
  std::vector<VarId> evars;
  for (const auto& b : basis.bound_basis) {
    const VarId e = prog.add_nonneg_var("eps[" + b.to_string() + "]", 0.0);
    evars.push_back(e);
    bound.add(b, LinExpr::variable(e));
    objective += LinExpr::variable(e);
  }
  // Pin the free constant: it is a zero-cost recession direction otherwise.
  for (std::size_t j = 0; j < basis.potential_basis.size(); ++j) {
    if (basis.potential_basis[j].is_constant()) {
      objective += LinExpr::variable(cvars[j], -config.constant_regularization);
    }
  }
  prog.maximize(objective);

  std::vector<Monomial> hint = basis.potential_basis;
  hint.insert(hint.end(), basis.bound_basis.begin(), basis.bound_basis.end());
  const int bound_con = prog.add_scalar_sos(U - bound, &hint);
  const int matrix_con = prog.add_matrix_sos(lyapunov_matrix(U, f));

  const SosSolution sol = prog.solve(config.solver);
  res.status = map_status(sol.status);
  res.solver_residual = sol.max_equality_residual;
  res.gram_min_eigenvalue = sol.min_gram_eigenvalue;
  res.solver_iterations = sol.iterations;
  if (sol.status != SdpStatus::optimal) {
    res.message = stage_message("construct_initial", sol);
    return res;
  }

  res.U = U.instantiate(sol.values) * scale;
  for (const VarId e : evars) res.epsilons.push_back(sol.value(e) * scale);
  res.bound_certificate = sol.certificates[bound_con];
  res.matrix_certificate = sol.certificates[matrix_con];
  unscale_certificate(res.bound_certificate, scale);
  unscale_matrix_certificate(res.matrix_certificate, scale, n);

  // A maximal bound with no mass means the steepest admissible potential is
  // flat: no positive lower bound exists and the result carries no Lyapunov
  // information. This is how unstable drifts surface.
  double eps_sum = 0.0;
  for (double e : res.epsilons) eps_sum += e;
  if (eps_sum < config.epsilon_floor * scale) {
    res.status = DecomposeStatus::infeasible;
    res.message =
        "construct_initial: the maximal lower bound is zero (sum eps = " +
        std::to_string(eps_sum) +
        "); no non-flat potential satisfies the descent condition -- the "
        "drift is likely unstable";
    return res;
  }
  return res;
}

InitialResult construct_standard(const VectorField& f, const BasisSpec& basis,
                                 const DecomposeConfig& config) {
  const int n = f.dim();
  InitialResult res;

  SosProgram prog;
  std::vector<VarId> cvars;
  ParamPoly U = parameterized_potential(prog, basis, cvars);

  // U - epsilon_posdef * sum x_i^2 SOS, -grad U . f SOS (plain feasibility).
  Polynomial sq(n);
  for (int i = 0; i < n; ++i) {
    sq += Polynomial::variable(n, i) * Polynomial::variable(n, i);
  }
  ParamPoly positivity = U - ParamPoly::from(sq * config.epsilon_posdef);

  ParamPoly descent(n);
  for (int i = 0; i < n; ++i) descent = descent - U.derivative(i) * f[i];

  LinExpr objective;
  for (std::size_t j = 0; j < basis.potential_basis.size(); ++j) {
    if (basis.potential_basis[j].is_constant()) {
      objective += LinExpr::variable(cvars[j], -config.constant_regularization);
    }
  }
  prog.maximize(objective);

  const int bound_con = prog.add_scalar_sos(positivity);
  const int descent_con = prog.add_scalar_sos(descent);

  const SosSolution sol = prog.solve(config.solver);
  res.status = map_status(sol.status);
  res.solver_residual = sol.max_equality_residual;
  res.gram_min_eigenvalue = sol.min_gram_eigenvalue;
  res.solver_iterations = sol.iterations;
  if (sol.status != SdpStatus::optimal) {
    res.message = stage_message("construct_standard", sol);
    return res;
  }
  res.U = U.instantiate(sol.values);
  res.bound_certificate = sol.certificates[bound_con];
  res.matrix_certificate = sol.certificates[descent_con];
  return res;
}

IterateResult iterate(const VectorField& f_in, const Polynomial& U_prev_in,
                      const BasisSpec& basis, const DecomposeConfig& config) {
  const int n = f_in.dim();
  const double scale = drift_scale(f_in);
  const VectorField f = f_in * (1.0 / scale);
  const Polynomial U_prev = U_prev_in * (1.0 / scale);
  IterateResult res;
  res.U = U_prev_in;
  res.alpha = 1.0;

  SosProgram prog;
  std::vector<VarId> cvars;
  ParamPoly U2 = parameterized_potential(prog, basis, cvars);
  const VarId alpha = prog.add_nonneg_var("alpha", 0.0);
  const VarId eps = prog.add_nonneg_var("eps", config.epsilon_floor);

  LinExpr objective = LinExpr::variable(alpha);
  for (std::size_t j = 0; j < basis.potential_basis.size(); ++j) {
    if (basis.potential_basis[j].is_constant()) {
      objective += LinExpr::variable(cvars[j], config.constant_regularization);
    }
  }
  prog.minimize(objective);

  // U2 >= eps * sum x_i^2
  Polynomial sq(n);
  for (int i = 0; i < n; ++i) {
    sq += Polynomial::variable(n, i) * Polynomial::variable(n, i);
  }
  ParamPoly positivity = U2;
  for (const auto& [m, c] : sq.terms()) {
    positivity.add(m, LinExpr::variable(eps, -c));
  }
  std::vector<Monomial> hint = basis.potential_basis;
  for (const auto& [m, c] : sq.terms()) hint.push_back(m);
  const int pos_con = prog.add_scalar_sos(positivity, &hint);

  const int matrix_con = prog.add_matrix_sos(lyapunov_matrix(U2, f));

  // grad U2 . (f + 2 grad U1) >= alpha (f . grad U1) + (1 + alpha) |grad U1|^2
  const VectorField gradU1 = gradient(U_prev);
  const VectorField shifted = f + gradU1 * 2.0;
  const Polynomial f_dot_g1 = dot(f, gradU1);
  const Polynomial g1_sq = dot(gradU1, gradU1);

  ParamPoly improvement(n);
  for (int i = 0; i < n; ++i) improvement = improvement + U2.derivative(i) * shifted[i];
  improvement = improvement - ParamPoly::from(g1_sq);
  for (const auto& [m, c] : f_dot_g1.terms()) {
    improvement.add(m, LinExpr::variable(alpha, -c));
  }
  for (const auto& [m, c] : g1_sq.terms()) {
    improvement.add(m, LinExpr::variable(alpha, -c));
  }
  const int imp_con = prog.add_scalar_sos(improvement);

  const SosSolution sol = prog.solve(config.solver);
  res.solver_residual = sol.max_equality_residual;
  res.gram_min_eigenvalue = sol.min_gram_eigenvalue;
  res.solver_iterations = sol.iterations;
  if (sol.status != SdpStatus::optimal) {
    res.status = DecomposeStatus::numerical_failure;
    res.message = "iterate: solver did not reach optimality (" +
                  std::string(to_string(sol.status)) +
                  (sol.message.empty() ? "" : ": " + sol.message) +
                  "); keeping previous potential";
    res.U = U_prev_in;
    res.alpha = 1.0;
    return res;
  }

  res.status = DecomposeStatus::certified;
  res.U = U2.instantiate(sol.values) * scale;
  res.alpha = sol.value(alpha);
  res.positivity_certificate = sol.certificates[pos_con];
  res.matrix_certificate = sol.certificates[matrix_con];
  res.improvement_certificate = sol.certificates[imp_con];
  unscale_certificate(res.positivity_certificate, scale);
  unscale_matrix_certificate(res.matrix_certificate, scale, n);
  unscale_certificate(res.improvement_certificate, scale * scale);
  return res;
}

namespace {

// Re-certify the bound inequality for a fixed potential (used after
// iterations changed U away from the initial solve).
struct BoundCertification {
  bool ok = false;
  SosCertificate certificate;
  std::vector<double> epsilons;
  std::string message;
};

BoundCertification certify_bound(const Polynomial& U_in, const BasisSpec& basis,
                                 const DecomposeConfig& config) {
  double scale = 0.0;
  for (const auto& [m, c] : U_in.terms()) scale = std::max(scale, std::abs(c));
  if (scale <= 0.0) scale = 1.0;
  const Polynomial U = U_in * (1.0 / scale);

  BoundCertification out;
  SosProgram prog;
  ParamPoly expr = ParamPoly::from(U);
  LinExpr objective;
  std::vector<VarId> evars;
  for (const auto& b : basis.bound_basis) {
    const VarId e = prog.add_nonneg_var("eps[" + b.to_string() + "]",
                                        config.epsilon_floor);
    evars.push_back(e);
    expr.add(b, LinExpr::variable(e, -1.0));
    objective += LinExpr::variable(e);
  }
  prog.maximize(objective);
  std::vector<Monomial> hint = basis.potential_basis;
  hint.insert(hint.end(), basis.bound_basis.begin(), basis.bound_basis.end());
  const int con = prog.add_scalar_sos(expr, &hint);
  const SosSolution sol = prog.solve(config.solver);
  if (sol.status != SdpStatus::optimal) {
    out.message = stage_message("bound certification", sol);
    return out;
  }
  out.ok = true;
  out.certificate = sol.certificates[con];
  unscale_certificate(out.certificate, scale);
  for (const VarId e : evars) out.epsilons.push_back(sol.value(e) * scale);
  return out;
}

}  // namespace

DecompositionResult decompose(const VectorField& f, const DecomposeConfig& config) {
  const int n = f.dim();
  DecompositionResult result;

  Box box = config.box.value_or(Box::centered(n, 2.0));

  try {
    result.basis = build_basis(f);
  } catch (const BasisError& err) {
    result.status = DecomposeStatus::infeasible;
    result.message = std::string("basis construction: ") + err.what();
    return result;
  }

  InitialResult init = construct_initial(f, result.basis, config);
  if (init.status != DecomposeStatus::certified) {
    result.status = init.status;
    result.message = init.message;
    return result;
  }

  Polynomial U = init.U;
  Polynomial defect = defect_polynomial(U, f);
  double measure = defect_measure_on_box(defect, box, config.grid_points_per_dim,
                                         config.grid_budget);
  result.iterations.push_back({"initial", 1.0, measure, init.solver_residual,
                               init.gram_min_eigenvalue, init.solver_iterations});

  SosCertificate matrix_cert = init.matrix_certificate;
  SosCertificate bound_cert = init.bound_certificate;
  std::vector<double> epsilons = init.epsilons;
  bool bound_cert_current = true;

  for (int it = 0; it < config.max_iterations; ++it) {
    IterateResult step = iterate(f, U, result.basis, config);
    if (step.status != DecomposeStatus::certified) {
      result.message = step.message;
      break;
    }
    const Polynomial defect_next = defect_polynomial(step.U, f);
    const double measure_next = defect_measure_on_box(
        defect_next, box, config.grid_points_per_dim, config.grid_budget);

    result.iterations.push_back({"iterate", step.alpha, measure_next,
                                 step.solver_residual, step.gram_min_eigenvalue,
                                 step.solver_iterations});

    // The improvement lemma guarantees a non-increasing defect; allow solver
    // noise but never accept a genuine regression.
    const double tol = 1e-9 * (1.0 + std::abs(measure));
    if (measure_next > measure + tol) {
      result.iterations.back().stage = "iterate (rejected: defect regressed)";
      break;
    }

    U = step.U;
    defect = defect_next;
    matrix_cert = step.matrix_certificate;
    bound_cert_current = false;
    const double improvement =
        (measure - measure_next) / std::max(std::abs(measure), 1e-300);
    measure = measure_next;

    if (step.alpha >= config.alpha_stop) break;
    if (improvement < config.defect_stop) break;
  }

  if (!bound_cert_current) {
    BoundCertification recert = certify_bound(U, result.basis, config);
    if (recert.ok) {
      bound_cert = recert.certificate;
      epsilons = recert.epsilons;
    } else {
      result.status = DecomposeStatus::numerical_failure;
      result.message = recert.message;
      return result;
    }
  }

  result.U = U;
  result.f_U = f + gradient(U);
  result.defect = defect;
  result.defect_measure = measure;
  result.certificates = {bound_cert, matrix_cert};
  result.bound_epsilons = epsilons;

  const CertificateReport bound_rep = check_certificate(bound_cert);
  const CertificateReport matrix_rep = check_certificate(matrix_cert);
  const double cert_tol = 1e-6;
  if (bound_rep.coeff_residual < cert_tol && bound_rep.lambda_min > -cert_tol &&
      matrix_rep.coeff_residual < cert_tol && matrix_rep.lambda_min > -cert_tol) {
    result.status = DecomposeStatus::certified;
  } else {
    result.status = DecomposeStatus::numerical_failure;
    result.message = "certificate check failed (bound residual " +
                     std::to_string(bound_rep.coeff_residual) +
                     ", matrix residual " + std::to_string(matrix_rep.coeff_residual) +
                     ", min eigenvalues " + std::to_string(bound_rep.lambda_min) +
                     ", " + std::to_string(matrix_rep.lambda_min) + ")";
  }

  // The returned potential keeps the solver's constant so the certificates
  // stay consistent with it; callers normalize for reporting via normalize().
  return result;
}

}  // namespace qpot
