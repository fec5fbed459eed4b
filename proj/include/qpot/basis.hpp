// Monomial basis selection for the potential and its lower bound.
//
// The search space for the potential is not "all monomials up to degree d":
// it is grown from the monomials of sum_i f_i*x_i, extended with mixed terms
// that respect the degree pattern already present, and paired with a lower
// bound built from the highest even monomials.  Getting this wrong either
// removes the upward pressure that makes the optimum unique or makes the
// program infeasible outright.
#pragma once

#include "qpot/poly.hpp"

#include <stdexcept>
#include <vector>

namespace qpot {

struct BasisSpec {
  std::vector<Monomial> potential_basis;  // the p_j, constant included
  std::vector<Monomial> bound_basis;      // the b_i, all exponents even
  int degree = 0;                         // even degree cap for the potential
};

// Raised when no valid bound exists for the requested basis, e.g. a variable
// without any pure even power. The pipeline reports these as infeasible
// results rather than solver failures.
class BasisError : public std::runtime_error {
 public:
  explicit BasisError(const std::string& msg) : std::runtime_error(msg) {}
};

// Largest admissible even degree for the potential: e+1 rounded down to an
// even integer, at least 2, where e is the drift degree.
int degree_bound(const VectorField& f);

// Monomials of sum_i f_i*x_i (capped at degree_bound) plus the constant.
std::vector<Monomial> minimal_basis(const VectorField& f);

// Adds mixed monomials compatible with the mixed-degree pattern of the
// minimal basis: total degree at most the basis maximum and per-variable
// degree at most the maximum seen among the mixed monomials already present.
// A basis without mixed monomials is returned unchanged.
std::vector<Monomial> extend_basis(const std::vector<Monomial>& minimal, int n);

// Per variable the highest pure even power present, plus every all-even
// mixed monomial of maximal total degree. Throws BasisError when a variable
// has no pure even power (no bound can push the potential up along it).
std::vector<Monomial> lower_bound_monomials(const std::vector<Monomial>& basis);

// Full pipeline: degree cap, minimal basis, extension, bound selection, plus
// the structural checks that make the downstream program meaningful.
BasisSpec build_basis(const VectorField& f);

}  // namespace qpot
