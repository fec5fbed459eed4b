#include "qpot/basis.hpp"

#include <algorithm>
#include <set>

namespace qpot {

namespace {

bool is_mixed(const Monomial& m) {
  int vars = 0;
  for (int i = 0; i < m.dim(); ++i) {
    if (m.exponent(i) > 0) ++vars;
  }
  return vars >= 2;
}

bool is_pure_power(const Monomial& m) {
  int vars = 0;
  for (int i = 0; i < m.dim(); ++i) {
    if (m.exponent(i) > 0) ++vars;
  }
  return vars == 1;
}

std::vector<Monomial> sorted_unique(std::set<Monomial, GrlexLess>&& s) {
  return std::vector<Monomial>(s.begin(), s.end());
}

// All monomials in n variables with total degree <= max_total.
void enumerate_monomials(int n, int max_total, std::vector<int>& exps, int var,
                         int remaining, std::vector<Monomial>& out) {
  if (var == n) {
    out.emplace_back(exps);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    exps[var] = e;
    enumerate_monomials(n, max_total, exps, var + 1, remaining - e, out);
  }
  exps[var] = 0;
}

}  // namespace

int degree_bound(const VectorField& f) {
  const int e = f.degree();
  if (e == 0) {
    bool all_zero = true;
    for (const auto& c : f.components()) all_zero = all_zero && c.is_zero();
    if (all_zero) throw BasisError("degree_bound: zero vector field");
  }
  int d = e + 1;
  if (d % 2 != 0) d -= 1;
  return std::max(d, 2);
}

std::vector<Monomial> minimal_basis(const VectorField& f) {
  const int n = f.dim();
  const int d = degree_bound(f);
  Polynomial s(n);
  for (int i = 0; i < n; ++i) s += f[i] * Polynomial::variable(n, i);
  std::set<Monomial, GrlexLess> basis;
  for (const auto& [m, c] : s.terms()) {
    if (m.degree() <= d) basis.insert(m);
  }
  basis.insert(Monomial(n));  // constant
  return sorted_unique(std::move(basis));
}

std::vector<Monomial> extend_basis(const std::vector<Monomial>& minimal, int n) {
  std::set<Monomial, GrlexLess> out(minimal.begin(), minimal.end());

  int max_total = 0;
  std::vector<int> mixed_cap(n, 0);
  bool any_mixed = false;
  for (const auto& m : minimal) {
    max_total = std::max(max_total, m.degree());
    if (is_mixed(m)) {
      any_mixed = true;
      for (int i = 0; i < n; ++i) {
        mixed_cap[i] = std::max(mixed_cap[i], m.exponent(i));
      }
    }
  }
  if (!any_mixed) return sorted_unique(std::move(out));

  std::vector<Monomial> candidates;
  std::vector<int> exps(n, 0);
  enumerate_monomials(n, max_total, exps, 0, max_total, candidates);
  for (const auto& m : candidates) {
    if (!is_mixed(m)) continue;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = m.exponent(i) <= mixed_cap[i];
    if (ok) out.insert(m);
  }
  return sorted_unique(std::move(out));
}

std::vector<Monomial> lower_bound_monomials(const std::vector<Monomial>& basis) {
  if (basis.empty()) throw BasisError("lower_bound_monomials: empty basis");
  const int n = basis.front().dim();

  std::set<Monomial, GrlexLess> bound;

  // Highest pure even power per variable.
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (const auto& m : basis) {
      if (is_pure_power(m) && m.exponent(i) > 0 && m.exponent(i) % 2 == 0) {
        best = std::max(best, m.exponent(i));
      }
    }
    if (best == 0) {
      throw BasisError(
          "no pure even power of x" + std::to_string(i + 1) +
          " in the potential basis; the lower bound cannot push the "
          "potential up along x" + std::to_string(i + 1) +
          " (drift may be unstable or independent of this variable)");
    }
    std::vector<int> exps(n, 0);
    exps[i] = best;
    bound.insert(Monomial(std::move(exps)));
  }

  // Every all-even mixed monomial of maximal total degree.
  int max_total = 0;
  for (const auto& m : basis) max_total = std::max(max_total, m.degree());
  for (const auto& m : basis) {
    if (m.degree() == max_total && is_mixed(m) && m.all_even()) bound.insert(m);
  }
  return sorted_unique(std::move(bound));
}

BasisSpec build_basis(const VectorField& f) {
  BasisSpec spec;
  spec.degree = degree_bound(f);
  spec.potential_basis = extend_basis(minimal_basis(f), f.dim());
  spec.bound_basis = lower_bound_monomials(spec.potential_basis);

  int basis_max = 0, bound_max = 0;
  for (const auto& m : spec.potential_basis) basis_max = std::max(basis_max, m.degree());
  for (const auto& m : spec.bound_basis) bound_max = std::max(bound_max, m.degree());
  if (bound_max != basis_max) {
    throw BasisError(
        "bound degree " + std::to_string(bound_max) +
        " cannot dominate the potential basis degree " +
        std::to_string(basis_max) +
        "; the program would be unbounded or lack upward pressure");
  }
  return spec;
}

}  // namespace qpot
