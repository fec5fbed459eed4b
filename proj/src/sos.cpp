#include "qpot/sos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace qpot {

namespace {

// All monomials in n variables with total degree <= cap, graded-lex order.
std::vector<Monomial> monomials_up_to(int n, int cap) {
  std::vector<Monomial> out;
  std::vector<int> exps(n, 0);
  // depth-first over exponents
  struct Rec {
    int n, cap;
    std::vector<Monomial>& out;
    void go(std::vector<int>& e, int var, int left) {
      if (var == n) {
        out.emplace_back(e);
        return;
      }
      for (int v = 0; v <= left; ++v) {
        e[var] = v;
        go(e, var + 1, left - v);
      }
      e[var] = 0;
    }
  } rec{n, cap, out};
  rec.go(exps, 0, cap);
  std::sort(out.begin(), out.end(), GrlexLess{});
  return out;
}

// Whether m can appear in a square-root factor of a polynomial with this
// support: doubled exponents must fit the componentwise and total-degree
// envelope.
bool fits_envelope(const Monomial& m, const std::vector<Monomial>& support) {
  if (support.empty()) return false;
  int max_total = 0, min_total = std::numeric_limits<int>::max();
  std::vector<int> max_exp(m.dim(), 0);
  for (const auto& s : support) {
    max_total = std::max(max_total, s.degree());
    min_total = std::min(min_total, s.degree());
    for (int i = 0; i < m.dim(); ++i) max_exp[i] = std::max(max_exp[i], s.exponent(i));
  }
  const int d2 = 2 * m.degree();
  if (d2 > max_total || d2 < min_total) return false;
  for (int i = 0; i < m.dim(); ++i) {
    if (2 * m.exponent(i) > max_exp[i]) return false;
  }
  return true;
}

}  // namespace

LinExpr LinExpr::variable(VarId v, double scale) {
  LinExpr e;
  if (scale != 0.0) e.coeffs[v] = scale;
  return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  constant += other.constant;
  for (const auto& [v, c] : other.coeffs) {
    auto it = coeffs.find(v);
    if (it == coeffs.end()) {
      if (c != 0.0) coeffs.emplace(v, c);
    } else {
      it->second += c;
      if (it->second == 0.0) coeffs.erase(it);
    }
  }
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  *this += other * -1.0;
  return *this;
}

LinExpr LinExpr::operator*(double s) const {
  LinExpr out;
  if (s == 0.0) return out;
  out.constant = constant * s;
  for (const auto& [v, c] : coeffs) out.coeffs.emplace(v, c * s);
  return out;
}

double LinExpr::evaluate(const std::vector<double>& values) const {
  double total = constant;
  for (const auto& [v, c] : coeffs) total += c * values.at(v);
  return total;
}

ParamPoly ParamPoly::from(const Polynomial& p) {
  ParamPoly out(p.dim());
  for (const auto& [m, c] : p.terms()) out.terms_.emplace(m, LinExpr(c));
  return out;
}

ParamPoly ParamPoly::term(VarId v, const Monomial& m, double scale) {
  ParamPoly out(m.dim());
  out.terms_.emplace(m, LinExpr::variable(v, scale));
  return out;
}

int ParamPoly::max_degree() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

void ParamPoly::add(const Monomial& m, const LinExpr& e) {
  if (m.dim() != dim_) throw std::invalid_argument("ParamPoly::add: dimension mismatch");
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (!e.is_zero()) terms_.emplace(m, e);
    return;
  }
  it->second += e;
  if (it->second.is_zero()) terms_.erase(it);
}

ParamPoly ParamPoly::operator+(const ParamPoly& other) const {
  ParamPoly out(*this);
  for (const auto& [m, e] : other.terms_) out.add(m, e);
  return out;
}

ParamPoly ParamPoly::operator-(const ParamPoly& other) const {
  ParamPoly out(*this);
  for (const auto& [m, e] : other.terms_) out.add(m, e * -1.0);
  return out;
}

ParamPoly ParamPoly::operator*(double s) const {
  ParamPoly out(dim_);
  if (s == 0.0) return out;
  for (const auto& [m, e] : terms_) out.terms_.emplace(m, e * s);
  return out;
}

ParamPoly ParamPoly::operator*(const Polynomial& p) const {
  if (p.dim() != dim_) throw std::invalid_argument("ParamPoly::operator*: dimension mismatch");
  ParamPoly out(dim_);
  for (const auto& [m, e] : terms_) {
    for (const auto& [pm, pc] : p.terms()) {
      out.add(m * pm, e * pc);
    }
  }
  return out;
}

ParamPoly ParamPoly::derivative(int i) const {
  ParamPoly out(dim_);
  for (const auto& [m, e] : terms_) {
    const int ex = m.exponent(i);
    if (ex == 0) continue;
    std::vector<int> exps = m.exponents();
    exps[i] -= 1;
    out.add(Monomial(std::move(exps)), e * static_cast<double>(ex));
  }
  return out;
}

Polynomial ParamPoly::instantiate(const std::vector<double>& values) const {
  Polynomial out(dim_);
  for (const auto& [m, e] : terms_) out.add_term(m, e.evaluate(values));
  return out;
}

std::vector<Monomial> ParamPoly::support() const {
  std::vector<Monomial> out;
  out.reserve(terms_.size());
  for (const auto& [m, e] : terms_) out.push_back(m);
  return out;
}

std::vector<Monomial> gram_basis(int degree, int n,
                                 const std::vector<Monomial>* support_hint) {
  if (degree < 0) throw std::invalid_argument("gram_basis: negative degree");
  if (degree % 2 != 0) throw std::invalid_argument("gram_basis: degree must be even");
  std::vector<Monomial> all = monomials_up_to(n, degree / 2);
  if (support_hint == nullptr || support_hint->empty()) return all;

  int max_total = 0, min_total = std::numeric_limits<int>::max();
  std::vector<int> max_exp(n, 0);
  for (const auto& m : *support_hint) {
    max_total = std::max(max_total, m.degree());
    min_total = std::min(min_total, m.degree());
    for (int i = 0; i < n; ++i) max_exp[i] = std::max(max_exp[i], m.exponent(i));
  }

  std::vector<Monomial> out;
  for (const auto& m : all) {
    const int d2 = 2 * m.degree();
    if (d2 > max_total || d2 < min_total) continue;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = 2 * m.exponent(i) <= max_exp[i];
    if (ok) out.push_back(m);
  }
  return out;
}

CertificateReport check_certificate(const SosCertificate& cert) {
  return check_certificate(cert, cert.constrained);
}

CertificateReport check_certificate(const SosCertificate& cert, const Polynomial& p) {
  CertificateReport rep;
  const int sz = static_cast<int>(cert.basis.size());
  Polynomial realized(p.dim());
  for (int a = 0; a < sz; ++a) {
    for (int b = a; b < sz; ++b) {
      const double mult = (a == b) ? 1.0 : 2.0;
      realized.add_term(cert.basis[a] * cert.basis[b], mult * cert.gram(a, b));
    }
  }
  const Polynomial diff = realized - p;
  double res = 0.0;
  for (const auto& [m, c] : diff.terms()) res = std::max(res, std::abs(c));
  rep.coeff_residual = res;
  if (sz == 0) {
    rep.lambda_min = 0.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.gram,
                                                      Eigen::EigenvaluesOnly);
    rep.lambda_min = es.eigenvalues().minCoeff();
  }
  return rep;
}

VarId SosProgram::add_free_var(const std::string& name) {
  VarInfo info;
  info.name = name;
  info.nonneg = false;
  info.index = sdp_.num_free++;
  vars_.push_back(info);
  return static_cast<VarId>(vars_.size() - 1);
}

VarId SosProgram::add_nonneg_var(const std::string& name, double lower) {
  VarInfo info;
  info.name = name;
  info.nonneg = true;
  info.lower = lower;
  info.index = static_cast<int>(sdp_.block_sizes.size());
  sdp_.block_sizes.push_back(1);
  vars_.push_back(info);
  return static_cast<VarId>(vars_.size() - 1);
}

void SosProgram::add_matching_equalities(const ParamPoly& p,
                                         const std::vector<Monomial>& basis,
                                         int block) {
  const int sz = static_cast<int>(basis.size());
  std::map<Monomial, std::vector<std::pair<int, int>>, GrlexLess> products;
  for (int a = 0; a < sz; ++a) {
    for (int b = a; b < sz; ++b) {
      products[basis[a] * basis[b]].push_back({a, b});
    }
  }

  std::set<Monomial, GrlexLess> gammas;
  for (const auto& [m, pairs] : products) gammas.insert(m);
  for (const auto& [m, e] : p.terms()) gammas.insert(m);

  for (const auto& gamma : gammas) {
    SdpProblem::Equality eq;
    double rhs = 0.0;
    auto pit = products.find(gamma);
    if (pit != products.end()) {
      // Off-diagonal entries are interpreted symmetrically downstream, so a
      // unit weight already contributes Q_ab + Q_ba = 2 Q_ab, matching the
      // coefficient produced by z'Qz.
      for (const auto& [a, b] : pit->second) {
        eq.entries.push_back({block, a, b, 1.0});
      }
    }
    auto tit = p.terms().find(gamma);
    if (tit != p.terms().end()) {
      rhs += tit->second.constant;
      for (const auto& [v, c] : tit->second.coeffs) {
        const VarInfo& info = vars_[v];
        if (info.nonneg) {
          eq.entries.push_back({info.index, 0, 0, -c});
          rhs += c * info.lower;
        } else {
          eq.free_terms.push_back({info.index, -c});
        }
      }
    }
    if (eq.entries.empty() && eq.free_terms.empty()) {
      if (rhs != 0.0) {
        structural_error_ =
            "monomial " + gamma.to_string() +
            " has a fixed nonzero coefficient but no Gram product can "
            "produce it (degree envelope too small or odd leading degree)";
      }
      continue;
    }
    eq.rhs = rhs;
    sdp_.equalities.push_back(std::move(eq));
  }
}

int SosProgram::add_scalar_sos(const ParamPoly& p,
                               const std::vector<Monomial>* support_hint) {
  int deg = p.max_degree();
  if (deg % 2 != 0) deg += 1;  // odd leading terms must cancel to be SOS
  std::vector<Monomial> support = p.support();
  const std::vector<Monomial>* hint = support_hint ? support_hint : &support;
  return add_scalar_sos_with_basis(p, gram_basis(deg, p.dim(), hint));
}

int SosProgram::add_scalar_sos_with_basis(const ParamPoly& p,
                                          std::vector<Monomial> basis) {
  ConstraintInfo info;
  info.basis = std::move(basis);
  info.poly = p;
  if (!info.basis.empty()) {
    info.block = static_cast<int>(sdp_.block_sizes.size());
    sdp_.block_sizes.push_back(static_cast<int>(info.basis.size()));
    add_matching_equalities(p, info.basis, info.block);
  } else if (!p.terms().empty()) {
    // No basis at all: the polynomial itself must vanish identically.
    add_matching_equalities(p, info.basis, /*block unused*/ 0);
  }
  constraints_.push_back(info);
  return static_cast<int>(constraints_.size() - 1);
}

int SosProgram::add_matrix_sos(const std::vector<std::vector<ParamPoly>>& M) {
  const int r = static_cast<int>(M.size());
  if (r == 0) throw std::invalid_argument("add_matrix_sos: empty matrix");
  const int n = M[0][0].dim();
  for (const auto& row : M) {
    if (static_cast<int>(row.size()) != r) {
      throw std::invalid_argument("add_matrix_sos: matrix not square");
    }
  }
  const int D = n + r;

  auto lift = [&](const Monomial& m, int yk, int yl) {
    std::vector<int> exps(D, 0);
    for (int i = 0; i < n; ++i) exps[i] = m.exponent(i);
    exps[n + yk] += 1;
    exps[n + yl] += 1;
    return Monomial(std::move(exps));
  };

  // Scalarization q(x,y) = y' M(x) y.
  ParamPoly q(D);
  for (int k = 0; k < r; ++k) {
    for (int l = k; l < r; ++l) {
      const double mult = (k == l) ? 1.0 : 2.0;
      for (const auto& [m, e] : M[k][l].terms()) {
        q.add(lift(m, k, l), e * mult);
      }
    }
  }

  // Gram basis {y_k * u : u in U_k}, degree one in y. U_k comes from the
  // diagonal entry's envelope. Cross-entry monomials must be reachable as
  // u * 1 products, so each is attached to a side whose diagonal envelope
  // admits it (a monomial whose square cannot appear on the diagonal would
  // only pin a forced-zero Gram row).
  std::vector<std::set<Monomial, GrlexLess>> U(r);
  std::vector<std::vector<Monomial>> diag_support(r);
  for (int k = 0; k < r; ++k) {
    diag_support[k] = M[k][k].support();
    if (!diag_support[k].empty()) {
      int dk = M[k][k].max_degree();
      if (dk % 2 != 0) dk += 1;
      for (const auto& u : gram_basis(dk, n, &diag_support[k])) U[k].insert(u);
    }
  }
  for (int k = 0; k < r; ++k) {
    for (int l = k + 1; l < r; ++l) {
      for (const auto& m : M[k][l].support()) {
        if (fits_envelope(m, diag_support[k])) {
          U[k].insert(m);
        } else if (fits_envelope(m, diag_support[l])) {
          U[l].insert(m);
        } else {
          U[k].insert(m);
        }
      }
    }
  }

  std::vector<Monomial> basis;
  for (int k = 0; k < r; ++k) {
    for (const auto& u : U[k]) {
      std::vector<int> exps(D, 0);
      for (int i = 0; i < n; ++i) exps[i] = u.exponent(i);
      exps[n + k] = 1;
      basis.emplace_back(std::move(exps));
    }
  }
  return add_scalar_sos_with_basis(q, std::move(basis));
}

void SosProgram::maximize(const LinExpr& objective) {
  objective_ = objective;
  objective_sign_ = -1.0;
}

void SosProgram::minimize(const LinExpr& objective) {
  objective_ = objective;
  objective_sign_ = 1.0;
}

SosSolution SosProgram::solve(const SdpOptions& options) const {
  SosSolution sol;
  sol.values.assign(vars_.size(), 0.0);
  if (!structural_error_.empty()) {
    sol.status = SdpStatus::infeasible;
    sol.message = structural_error_;
    return sol;
  }

  SdpProblem prob = sdp_;
  for (const auto& [v, c] : objective_.coeffs) {
    const VarInfo& info = vars_[v];
    const double w = objective_sign_ * c;
    if (info.nonneg) {
      prob.cost_entries.push_back({info.index, 0, 0, w});
    } else {
      prob.cost_free.push_back({info.index, w});
    }
  }

  const SdpSolution sdp_sol = solve_sdp(prob, options);
  sol.status = sdp_sol.status;
  sol.message = sdp_sol.message;
  sol.iterations = sdp_sol.iterations;
  sol.max_equality_residual = sdp_sol.max_equality_residual;
  sol.gap = sdp_sol.gap;

  for (std::size_t v = 0; v < vars_.size(); ++v) {
    const VarInfo& info = vars_[v];
    if (info.nonneg) {
      sol.values[v] = info.lower + (sdp_sol.blocks.empty()
                                        ? 0.0
                                        : sdp_sol.blocks[info.index](0, 0));
    } else {
      sol.values[v] = sdp_sol.free_values.size() > static_cast<Eigen::Index>(info.index)
                          ? sdp_sol.free_values[info.index]
                          : 0.0;
    }
  }
  sol.objective = objective_.evaluate(sol.values);

  double min_eig = 0.0;
  bool first = true;
  for (const auto& info : constraints_) {
    SosCertificate cert;
    cert.basis = info.basis;
    if (info.block >= 0 && static_cast<std::size_t>(info.block) < sdp_sol.blocks.size()) {
      cert.gram = sdp_sol.blocks[info.block];
    } else {
      cert.gram = Eigen::MatrixXd::Zero(info.basis.size(), info.basis.size());
    }
    cert.constrained = info.poly.instantiate(sol.values);
    if (cert.gram.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.gram,
                                                        Eigen::EigenvaluesOnly);
      const double lm = es.eigenvalues().minCoeff();
      min_eig = first ? lm : std::min(min_eig, lm);
      first = false;
    }
    sol.certificates.push_back(std::move(cert));
  }
  sol.min_gram_eigenvalue = min_eig;
  return sol;
}

}  // namespace qpot
