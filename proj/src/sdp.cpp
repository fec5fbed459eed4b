#include "qpot/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qpot {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double lambda_min(const MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double lambda_max(const MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Largest alpha in (0, cap] with M + alpha*D staying positive semidefinite.
double step_to_boundary(const MatrixXd& M, const MatrixXd& D, double cap) {
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd L = llt.matrixL();
  MatrixXd T = L.triangularView<Eigen::Lower>().solve(D);
  T = L.triangularView<Eigen::Lower>().solve(T.transpose()).eval();
  const double lmin = lambda_min(0.5 * (T + T.transpose()));
  if (lmin >= 0.0) return cap;
  return std::min(cap, -1.0 / lmin);
}

struct Reduced {
  // Dense symmetric constraint matrices, A[e * K + k].
  std::vector<MatrixXd> A;
  VectorXd b;
  std::vector<MatrixXd> C;
  std::vector<int> dims;
  double obj_offset = 0.0;
};

MatrixXd densify(const std::vector<SdpProblem::Entry>& entries, int block,
                 int dim) {
  MatrixXd m = MatrixXd::Zero(dim, dim);
  for (const auto& en : entries) {
    if (en.block != block) continue;
    m(en.row, en.col) += en.value;
    if (en.row != en.col) m(en.col, en.row) += en.value;
  }
  return m;
}

struct IpmResult {
  SdpStatus status = SdpStatus::numerical_failure;
  std::vector<MatrixXd> X;
  VectorXd y;
  double pobj = 0.0, dobj = 0.0, gap = 0.0;
  int iterations = 0;
  std::string message;
};

IpmResult run_ipm(const Reduced& red, const SdpOptions& opt) {
  const int m = static_cast<int>(red.b.size());
  const int K = static_cast<int>(red.dims.size());

  IpmResult res;
  res.y = VectorXd::Zero(m);

  int total_dim = 0;
  for (int d : red.dims) total_dim += d;

  double max_a = 0.0, norm_c = 0.0;
  for (const auto& a : red.A) max_a = std::max(max_a, a.norm());
  for (const auto& c : red.C) norm_c = std::max(norm_c, c.norm());
  const double norm_b = m > 0 ? red.b.cwiseAbs().maxCoeff() : 0.0;

  double xi_p = 10.0;
  for (int e = 0; e < m; ++e) {
    double arow = 0.0;
    for (int k = 0; k < K; ++k) arow = std::max(arow, red.A[e * K + k].norm());
    xi_p = std::max(xi_p, static_cast<double>(total_dim) *
                              (1.0 + std::abs(red.b[e])) / (1.0 + arow));
  }
  const double xi_d =
      std::max(10.0, (1.0 + std::max(max_a, norm_c)) * std::sqrt(total_dim));

  std::vector<MatrixXd> X(K), S(K);
  for (int k = 0; k < K; ++k) {
    X[k] = xi_p * MatrixXd::Identity(red.dims[k], red.dims[k]);
    S[k] = xi_d * MatrixXd::Identity(red.dims[k], red.dims[k]);
  }

  std::vector<MatrixXd> Rd(K), Rc(K), dX(K), dS(K), dXc(K), dSc(K);
  std::vector<MatrixXd> lhs(m * (std::size_t)K), rhs(m * (std::size_t)K);
  MatrixXd schur;
  VectorXd y = VectorXd::Zero(m);

  int consecutive_short_steps = 0;

  // Best iterate so far and recent history, for graceful endgame handling:
  // extreme conditioning near degenerate optima can break the factorization
  // after the iterate is already essentially converged.
  struct Best {
    double score = kInf;
    double pinf = kInf, dinf = kInf, gap = kInf, mu = kInf;
    std::vector<MatrixXd> X;
    VectorXd y;
    double pobj = 0.0, dobj = 0.0;
  } best;

  // Classify the final state once progress has stopped.
  auto finish = [&](const std::string& why) {
    res.X = best.X;
    res.y = best.y;
    res.pobj = best.pobj;
    res.dobj = best.dobj;
    res.gap = best.gap;
    if (best.pinf < 10.0 * opt.tol_feas && best.dinf < 10.0 * opt.tol_feas &&
        best.gap < 1e2 * opt.tol_gap) {
      res.status = SdpStatus::optimal;
      res.message = "converged near tolerance (" + why + ")";
      return;
    }
    res.status = SdpStatus::numerical_failure;
    res.message = why + "; best residuals p=" + std::to_string(best.pinf) +
                  " d=" + std::to_string(best.dinf) +
                  " gap=" + std::to_string(best.gap);
  };

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter;

    VectorXd rp = red.b;
    double pobj = 0.0;
    for (int k = 0; k < K; ++k) pobj += red.C[k].cwiseProduct(X[k]).sum();
    for (int e = 0; e < m; ++e) {
      for (int k = 0; k < K; ++k) {
        rp[e] -= red.A[e * K + k].cwiseProduct(X[k]).sum();
      }
    }
    const double dobj = red.b.dot(y);

    double mu = 0.0;
    for (int k = 0; k < K; ++k) mu += X[k].cwiseProduct(S[k]).sum();
    mu /= total_dim;

    double dinf = 0.0;
    for (int k = 0; k < K; ++k) {
      Rd[k] = red.C[k] - S[k];
      for (int e = 0; e < m; ++e) Rd[k] -= y[e] * red.A[e * K + k];
      dinf = std::max(dinf, Rd[k].norm());
    }
    const double pinf = m > 0 ? rp.cwiseAbs().maxCoeff() / (1.0 + norm_b) : 0.0;
    const double dinf_rel = dinf / (1.0 + norm_c);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap =
        std::min(std::abs(pobj - dobj), mu * total_dim) / denom;

    if (opt.verbose) {
      std::cerr << "ipm iter " << iter << " mu=" << mu << " pinf=" << pinf
                << " dinf=" << dinf_rel << " gap=" << rel_gap
                << " pobj=" << pobj << " dobj=" << dobj << "\n";
    }

    res.pobj = pobj;
    res.dobj = dobj;
    res.gap = rel_gap;
    res.X = X;
    res.y = y;

    const double mu_rel = mu * total_dim / denom;
    const double score = std::max({pinf, dinf_rel, rel_gap});
    if (score < best.score) {
      best = {score, pinf, dinf_rel, rel_gap, mu_rel, X, y, pobj, dobj};
    }

    if (pinf < opt.tol_feas && dinf_rel < opt.tol_feas && rel_gap < opt.tol_gap) {
      res.status = SdpStatus::optimal;
      return res;
    }

    // Ray-based certificates. A dual improving ray proves primal
    // infeasibility; a primal improving ray proves unboundedness.
    if (iter >= 5) {
      const double by = red.b.dot(y);
      const double ynorm = y.lpNorm<1>();
      if (by > 1e-6 * (1.0 + ynorm) && ynorm > 1.0) {
        double ray_viol = 0.0;
        for (int k = 0; k < K; ++k) {
          MatrixXd Z = MatrixXd::Zero(red.dims[k], red.dims[k]);
          for (int e = 0; e < m; ++e) Z += (y[e] / by) * red.A[e * K + k];
          ray_viol = std::max(ray_viol, lambda_max(Z));
        }
        if (ray_viol <= 1e-9 * (1.0 + max_a) * (1.0 + ynorm / by)) {
          res.status = SdpStatus::infeasible;
          res.message = "dual improving ray found (primal infeasible)";
          return res;
        }
      }
      double trx = 0.0;
      for (int k = 0; k < K; ++k) trx += X[k].trace();
      if (pobj < -1e-6 * trx && trx > 1e6) {
        double feas_viol = 0.0;
        for (int e = 0; e < m; ++e) {
          double axe = 0.0;
          for (int k = 0; k < K; ++k) {
            axe += red.A[e * K + k].cwiseProduct(X[k]).sum();
          }
          feas_viol = std::max(feas_viol, std::abs(axe) / trx);
        }
        if (feas_viol <= 1e-9 * (1.0 + max_a) && pobj / trx < -1e-9) {
          res.status = SdpStatus::unbounded;
          res.message = "primal improving ray found (objective unbounded)";
          return res;
        }
      }
    }

    // Factor S and X once per iteration.
    std::vector<Eigen::LLT<MatrixXd>> lltS(K), lltX(K);
    bool factor_ok = true;
    for (int k = 0; k < K; ++k) {
      lltS[k].compute(S[k]);
      lltX[k].compute(X[k]);
      if (lltS[k].info() != Eigen::Success || lltX[k].info() != Eigen::Success) {
        factor_ok = false;
      }
    }
    if (!factor_ok) {
      finish("factorization failed near the end of the path");
      return res;
    }

    // Schur M(e,e') = sum_k tr(A_e X A_e' S^{-1}) = sum_k <A_e X, S^{-1} A_e'>_F
    for (int e = 0; e < m; ++e) {
      for (int k = 0; k < K; ++k) {
        const MatrixXd& Ae = red.A[e * K + k];
        lhs[e * K + k].noalias() = Ae * X[k];
        rhs[e * K + k] = lltS[k].solve(Ae);
      }
    }
    assemble_schur(lhs, rhs, m, K, schur);

    Eigen::LLT<MatrixXd> lltM;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      MatrixXd Mreg = schur;
      if (ridge > 0.0) Mreg.diagonal().array() += ridge;
      lltM.compute(Mreg);
      if (lltM.info() == Eigen::Success) break;
      ridge = ridge == 0.0 ? 1e-14 * (1.0 + schur.trace() / std::max(1, m))
                           : ridge * 100.0;
    }
    if (lltM.info() != Eigen::Success) {
      finish("Schur complement lost positive definiteness");
      return res;
    }

    // Cholesky solve with iterative refinement against the unregularized
    // Schur matrix; the refinement also absorbs any ridge that was added.
    auto schur_solve = [&](const VectorXd& rhs_vec) {
      VectorXd x = lltM.solve(rhs_vec);
      for (int pass = 0; pass < 3; ++pass) {
        VectorXd r = rhs_vec - schur * x;
        const double rel = r.norm() / (1.0 + rhs_vec.norm());
        if (rel < 1e-14) break;
        x += lltM.solve(r);
      }
      return x;
    };

    auto solve_direction = [&](const std::vector<MatrixXd>& Rcin,
                               std::vector<MatrixXd>& dXo,
                               std::vector<MatrixXd>& dSo, VectorXd& dy) {
      VectorXd rhs_vec = rp;
      for (int k = 0; k < K; ++k) {
        // tr(A_e T S^{-1}) = <A_e, S^{-1} T'>_F with T = Rc - X Rd.
        const MatrixXd T = Rcin[k] - X[k] * Rd[k];
        const MatrixXd W = lltS[k].solve(T.transpose());
        for (int e = 0; e < m; ++e) {
          rhs_vec[e] -= red.A[e * K + k].cwiseProduct(W).sum();
        }
      }
      dy = schur_solve(rhs_vec);
      for (int k = 0; k < K; ++k) {
        dSo[k] = Rd[k];
        for (int e = 0; e < m; ++e) dSo[k] -= dy[e] * red.A[e * K + k];
        const MatrixXd T = Rcin[k] - X[k] * dSo[k];
        MatrixXd dx = lltS[k].solve(T.transpose()).transpose();
        dXo[k] = 0.5 * (dx + dx.transpose());
      }
    };

    // Predictor (affine scaling).
    for (int k = 0; k < K; ++k) Rc[k] = -X[k] * S[k];
    VectorXd dy_aff(m);
    solve_direction(Rc, dX, dS, dy_aff);

    double ap_aff = 1.0, ad_aff = 1.0;
    for (int k = 0; k < K; ++k) {
      ap_aff = std::min(ap_aff, step_to_boundary(X[k], dX[k], 1.0));
      ad_aff = std::min(ad_aff, step_to_boundary(S[k], dS[k], 1.0));
    }
    double mu_aff = 0.0;
    for (int k = 0; k < K; ++k) {
      mu_aff += (X[k] + ap_aff * dX[k]).cwiseProduct(S[k] + ad_aff * dS[k]).sum();
    }
    mu_aff /= total_dim;
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
    sigma = std::clamp(sigma, 1e-8, 0.99);

    // Corrector.
    for (int k = 0; k < K; ++k) {
      Rc[k] = sigma * mu * MatrixXd::Identity(red.dims[k], red.dims[k]) -
              X[k] * S[k] - dX[k] * dS[k];
    }
    VectorXd dy(m);
    solve_direction(Rc, dXc, dSc, dy);

    const double gamma = 0.9 + 0.09 * std::min({1.0, ap_aff, ad_aff});
    double ap = 1.0, ad = 1.0;
    for (int k = 0; k < K; ++k) {
      ap = std::min(ap, step_to_boundary(X[k], dXc[k], 1.0 / gamma));
      ad = std::min(ad, step_to_boundary(S[k], dSc[k], 1.0 / gamma));
    }
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    for (int k = 0; k < K; ++k) {
      X[k] += ap * dXc[k];
      S[k] += ad * dSc[k];
    }
    y += ad * dy;

    if (std::min(ap, ad) < 1e-7) {
      ++consecutive_short_steps;
    } else {
      consecutive_short_steps = 0;
    }
    if (consecutive_short_steps >= 5) {
      finish("step lengths collapsed");
      return res;
    }
  }

  finish("iteration limit reached");
  return res;
}

}  // namespace

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

void assemble_schur_serial(const std::vector<MatrixXd>& lhs_factors,
                           const std::vector<MatrixXd>& rhs_factors,
                           int num_eq, int num_blocks, MatrixXd& out) {
  out.resize(num_eq, num_eq);
  for (int e = 0; e < num_eq; ++e) {
    for (int f = e; f < num_eq; ++f) {
      double v = 0.0;
      for (int k = 0; k < num_blocks; ++k) {
        v += lhs_factors[e * num_blocks + k]
                 .cwiseProduct(rhs_factors[f * num_blocks + k])
                 .sum();
      }
      out(e, f) = v;
      out(f, e) = v;
    }
  }
}

void assemble_schur(const std::vector<MatrixXd>& lhs_factors,
                    const std::vector<MatrixXd>& rhs_factors,
                    int num_eq, int num_blocks, MatrixXd& out) {
  out.resize(num_eq, num_eq);
#pragma omp parallel for schedule(dynamic, 4)
  for (int e = 0; e < num_eq; ++e) {
    for (int f = e; f < num_eq; ++f) {
      double v = 0.0;
      for (int k = 0; k < num_blocks; ++k) {
        v += lhs_factors[e * num_blocks + k]
                 .cwiseProduct(rhs_factors[f * num_blocks + k])
                 .sum();
      }
      out(e, f) = v;
      out(f, e) = v;
    }
  }
}

void SdpProblem::dump(std::ostream& os) const {
  os << "blocks " << block_sizes.size();
  for (int s : block_sizes) os << " " << s;
  os << "\nfree " << num_free << "\n";
  os << "obj " << cost_entries.size() + cost_free.size() << "\n";
  for (const auto& en : cost_entries) {
    os << "B " << en.block << " " << en.row << " " << en.col << " " << en.value
       << "\n";
  }
  for (const auto& [v, c] : cost_free) os << "F " << v << " " << c << "\n";
  os << "eq " << equalities.size() << "\n";
  for (const auto& eq : equalities) {
    os << "eq " << eq.entries.size() + eq.free_terms.size() << " " << eq.rhs
       << "\n";
    for (const auto& en : eq.entries) {
      os << "B " << en.block << " " << en.row << " " << en.col << " "
         << en.value << "\n";
    }
    for (const auto& [v, c] : eq.free_terms) os << "F " << v << " " << c << "\n";
  }
}

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  const int K = static_cast<int>(problem.block_sizes.size());
  const int m = static_cast<int>(problem.equalities.size());
  const int p = problem.num_free;

  SdpSolution sol;
  sol.free_values = VectorXd::Zero(p);
  sol.duals = VectorXd::Zero(m);

  for (const auto& eq : problem.equalities) {
    for (const auto& en : eq.entries) {
      if (en.block < 0 || en.block >= K || en.row > en.col ||
          en.col >= problem.block_sizes[en.block]) {
        throw std::invalid_argument("solve_sdp: entry out of range");
      }
    }
    for (const auto& [v, c] : eq.free_terms) {
      (void)c;
      if (v < 0 || v >= p) throw std::invalid_argument("solve_sdp: free var out of range");
    }
  }

  // Free-variable elimination: E f = b - A(X) with E = Q1 R P^T.
  MatrixXd E = MatrixXd::Zero(m, p);
  VectorXd c_free = VectorXd::Zero(p);
  for (int e = 0; e < m; ++e) {
    for (const auto& [v, c] : problem.equalities[e].free_terms) E(e, v) += c;
  }
  for (const auto& [v, c] : problem.cost_free) c_free[v] += c;

  for (int v = 0; v < p; ++v) {
    if (E.col(v).cwiseAbs().maxCoeff() == 0.0) {
      if (std::abs(c_free[v]) > 0.0) {
        sol.status = SdpStatus::unbounded;
        sol.message = "free variable " + std::to_string(v) +
                      " has objective weight but no constraints";
        return sol;
      }
    }
  }

  MatrixXd Q1, Q2, R;
  Eigen::VectorXi perm_idx;
  int m_red = m;
  if (p > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(E);
    qr.setThreshold(1e-12);
    if (qr.rank() < std::min(m, p) || p > m) {
      // Columns that are exactly zero were allowed above; anything else
      // unresolved means the program does not determine the free variables.
      if (qr.rank() < p) {
        sol.status = SdpStatus::numerical_failure;
        sol.message = "free variables are not uniquely determined by the constraints";
        return sol;
      }
    }
    MatrixXd Qfull = MatrixXd::Identity(m, m);
    Qfull.applyOnTheLeft(qr.householderQ());
    Q1 = Qfull.leftCols(p);
    Q2 = Qfull.rightCols(m - p);
    R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    perm_idx = qr.colsPermutation().indices();
    m_red = m - p;
  }

  // Dense per-block constraint data for the original equalities.
  std::vector<MatrixXd> Aorig(m * (std::size_t)K);
  for (int e = 0; e < m; ++e) {
    for (int k = 0; k < K; ++k) {
      Aorig[e * K + k] =
          densify(problem.equalities[e].entries, k, problem.block_sizes[k]);
    }
  }
  std::vector<MatrixXd> Corig(K);
  for (int k = 0; k < K; ++k) {
    Corig[k] = densify(problem.cost_entries, k, problem.block_sizes[k]);
  }
  VectorXd borig(m);
  for (int e = 0; e < m; ++e) borig[e] = problem.equalities[e].rhs;

  // w = Q1 R^{-T} P^T c  (objective folding weights for eliminated vars).
  VectorXd w = VectorXd::Zero(m);
  if (p > 0) {
    VectorXd cp(p);
    for (int v = 0; v < p; ++v) cp[v] = c_free[perm_idx[v]];
    const VectorXd z = R.transpose().triangularView<Eigen::Lower>().solve(cp);
    w = Q1 * z;
  }

  Reduced red;
  red.dims = problem.block_sizes;
  red.C.resize(K);
  for (int k = 0; k < K; ++k) {
    red.C[k] = Corig[k];
    for (int e = 0; e < m; ++e) red.C[k] -= w[e] * Aorig[e * K + k];
  }
  red.obj_offset = w.dot(borig);

  std::vector<int> kept_rows;
  std::vector<double> row_scale;
  {
    std::vector<MatrixXd> Ared;
    std::vector<double> bred;
    for (int j = 0; j < m_red; ++j) {
      std::vector<MatrixXd> row(K);
      double norm = 0.0;
      for (int k = 0; k < K; ++k) {
        row[k] = MatrixXd::Zero(problem.block_sizes[k], problem.block_sizes[k]);
        for (int e = 0; e < m; ++e) {
          const double q = p > 0 ? Q2(e, j) : (e == j ? 1.0 : 0.0);
          if (q != 0.0) row[k] += q * Aorig[e * K + k];
        }
        norm = std::max(norm, row[k].cwiseAbs().maxCoeff());
      }
      double bj = 0.0;
      for (int e = 0; e < m; ++e) {
        bj += (p > 0 ? Q2(e, j) : (e == j ? 1.0 : 0.0)) * borig[e];
      }
      if (norm < 1e-13) {
        if (std::abs(bj) > 1e-9) {
          sol.status = SdpStatus::infeasible;
          sol.message = "inconsistent equality after free-variable elimination";
          return sol;
        }
        continue;  // vacuous row
      }
      kept_rows.push_back(j);
      row_scale.push_back(norm);
      for (int k = 0; k < K; ++k) Ared.push_back(row[k] / norm);
      // Shifted cone: request A(X') = b + shift * A(I).
      double tr_row = 0.0;
      for (int k = 0; k < K; ++k) tr_row += row[k].trace();
      bred.push_back((bj + options.cone_shift * tr_row) / norm);
    }
    red.A = std::move(Ared);
    red.b = Eigen::Map<VectorXd>(bred.data(), bred.size());
  }

  IpmResult ipm;
  if (red.b.size() == 0) {
    // No residual constraints: X = 0 is optimal iff the reduced cost is PSD.
    ipm.X.resize(K);
    bool psd = true;
    for (int k = 0; k < K; ++k) {
      ipm.X[k] = MatrixXd::Zero(problem.block_sizes[k], problem.block_sizes[k]);
      psd = psd && lambda_min(red.C[k]) > -1e-10;
    }
    ipm.status = psd ? SdpStatus::optimal : SdpStatus::unbounded;
    ipm.y = VectorXd::Zero(0);
  } else {
    ipm = run_ipm(red, options);
  }

  sol.status = ipm.status;
  sol.message = ipm.message;
  sol.iterations = ipm.iterations;
  sol.blocks = ipm.X;
  sol.gap = ipm.gap;
  if (sol.blocks.empty()) {
    sol.blocks.resize(K);
    for (int k = 0; k < K; ++k) {
      sol.blocks[k] = MatrixXd::Zero(problem.block_sizes[k], problem.block_sizes[k]);
    }
  } else if (options.cone_shift != 0.0) {
    for (int k = 0; k < K; ++k) {
      sol.blocks[k].diagonal().array() -= options.cone_shift;
    }
  }

  // Recover the eliminated free variables: f = P R^{-1} Q1^T (b - A(X)).
  VectorXd ax = VectorXd::Zero(m);
  for (int e = 0; e < m; ++e) {
    for (int k = 0; k < K; ++k) {
      ax[e] += Aorig[e * K + k].cwiseProduct(sol.blocks[k]).sum();
    }
  }
  if (p > 0) {
    const VectorXd g = Q1.transpose() * (borig - ax);
    const VectorXd fp = R.triangularView<Eigen::Upper>().solve(g);
    for (int v = 0; v < p; ++v) sol.free_values[perm_idx[v]] = fp[v];
  }

  // Duals on the original equalities.
  sol.duals = w;
  for (std::size_t j = 0; j < kept_rows.size(); ++j) {
    const double yj = (ipm.y.size() > static_cast<int>(j) ? ipm.y[j] : 0.0) /
                      row_scale[j];
    if (p > 0) {
      sol.duals += yj * Q2.col(kept_rows[j]);
    } else {
      sol.duals[kept_rows[j]] += yj;
    }
  }

  // Residuals and objective against the original data.
  double max_res = 0.0;
  for (int e = 0; e < m; ++e) {
    double r = ax[e] - borig[e];
    for (const auto& [v, c] : problem.equalities[e].free_terms) {
      r += c * sol.free_values[v];
    }
    max_res = std::max(max_res, std::abs(r));
  }
  sol.max_equality_residual = max_res;

  double pobj = c_free.dot(sol.free_values);
  for (int k = 0; k < K; ++k) pobj += Corig[k].cwiseProduct(sol.blocks[k]).sum();
  sol.primal_objective = pobj;
  sol.dual_objective = ipm.dobj + red.obj_offset;

  double min_eig = kInf;
  for (int k = 0; k < K; ++k) min_eig = std::min(min_eig, lambda_min(sol.blocks[k]));
  sol.min_block_eigenvalue = K > 0 ? min_eig : 0.0;
  return sol;
}

}  // namespace qpot
