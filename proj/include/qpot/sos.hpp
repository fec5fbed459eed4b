// Sum-of-squares program builder.
//
// Scalar constraints "p(x) is SOS" (with p's coefficients affine in decision
// variables) become one PSD Gram block plus coefficient-matching equalities.
// Polynomial matrix constraints M(x) >= 0 are scalarized: q(x,y) = y'M(x)y
// must be SOS in the combined variables with a Gram basis of degree one in y.
// The resulting program is solved by the dense interior-point solver.
#pragma once

#include "qpot/poly.hpp"
#include "qpot/sdp.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qpot {

using VarId = int;

// constant + sum coeff_v * v over decision variables
struct LinExpr {
  double constant = 0.0;
  std::map<VarId, double> coeffs;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}
  static LinExpr variable(VarId v, double scale = 1.0);

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr operator*(double s) const;
  bool is_zero() const { return constant == 0.0 && coeffs.empty(); }

  double evaluate(const std::vector<double>& values) const;
};

// Polynomial whose coefficients are affine expressions in decision variables.
class ParamPoly {
 public:
  ParamPoly() : dim_(0) {}
  explicit ParamPoly(int dim) : dim_(dim) {}
  static ParamPoly from(const Polynomial& p);
  // scale * v * m
  static ParamPoly term(VarId v, const Monomial& m, double scale = 1.0);

  int dim() const { return dim_; }
  const std::map<Monomial, LinExpr, GrlexLess>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int max_degree() const;

  void add(const Monomial& m, const LinExpr& e);

  ParamPoly operator+(const ParamPoly& other) const;
  ParamPoly operator-(const ParamPoly& other) const;
  ParamPoly operator*(double s) const;
  // Product with a concrete polynomial (keeps coefficients affine).
  ParamPoly operator*(const Polynomial& p) const;
  ParamPoly derivative(int i) const;

  Polynomial instantiate(const std::vector<double>& values) const;
  std::vector<Monomial> support() const;

 private:
  int dim_;
  std::map<Monomial, LinExpr, GrlexLess> terms_;
};

// All monomials of total degree <= degree/2 in n variables; when a support
// hint is given, restricted to monomials whose doubled exponents fit the
// hint's componentwise and total-degree envelope.
std::vector<Monomial> gram_basis(int degree, int n,
                                 const std::vector<Monomial>* support_hint = nullptr);

struct SosCertificate {
  std::vector<Monomial> basis;   // Gram monomials z (combined space for matrix constraints)
  Eigen::MatrixXd gram;          // Q with z'Qz matching the constrained polynomial
  Polynomial constrained;        // instantiated polynomial the certificate backs
};

struct CertificateReport {
  double coeff_residual = 0.0;  // max |coeff(p) - coeff(z'Qz)|
  double lambda_min = 0.0;
};

CertificateReport check_certificate(const SosCertificate& cert);
CertificateReport check_certificate(const SosCertificate& cert, const Polynomial& p);

struct SosSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  std::vector<double> values;               // indexed by VarId
  std::vector<SosCertificate> certificates; // per SOS constraint, in order
  double objective = 0.0;
  double max_equality_residual = 0.0;
  double min_gram_eigenvalue = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;

  double value(VarId v) const { return values[v]; }
};

class SosProgram {
 public:
  VarId add_free_var(const std::string& name);
  // v >= lower, backed by a 1x1 PSD block
  VarId add_nonneg_var(const std::string& name, double lower = 0.0);

  // Returns the constraint index (certificate position in the solution).
  int add_scalar_sos(const ParamPoly& p,
                     const std::vector<Monomial>* support_hint = nullptr);
  int add_scalar_sos_with_basis(const ParamPoly& p, std::vector<Monomial> basis);
  // M must be symmetric; entries are polynomials in the x variables only.
  int add_matrix_sos(const std::vector<std::vector<ParamPoly>>& M);

  void maximize(const LinExpr& objective);
  void minimize(const LinExpr& objective);

  // Structural infeasibility detected while building (odd-degree envelope,
  // unmatchable monomial with constant coefficient).
  bool structurally_infeasible() const { return !structural_error_.empty(); }
  const std::string& structural_error() const { return structural_error_; }

  int var_count() const { return static_cast<int>(vars_.size()); }
  const std::string& var_name(VarId v) const { return vars_[v].name; }

  const SdpProblem& compiled() const { return sdp_; }

  SosSolution solve(const SdpOptions& options = {}) const;

 private:
  struct VarInfo {
    std::string name;
    bool nonneg = false;
    int index = 0;     // free index or block index
    double lower = 0.0;
  };
  struct ConstraintInfo {
    std::vector<Monomial> basis;
    int block = -1;
    ParamPoly poly;  // combined-space polynomial backing the constraint
  };

  void add_matching_equalities(const ParamPoly& p,
                               const std::vector<Monomial>& basis, int block);

  std::vector<VarInfo> vars_;
  std::vector<ConstraintInfo> constraints_;
  SdpProblem sdp_;
  LinExpr objective_;
  double objective_sign_ = 1.0;  // +1 minimize, -1 maximize (applied to sdp)
  std::string structural_error_;
};

}  // namespace qpot
