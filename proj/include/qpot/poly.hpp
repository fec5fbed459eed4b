// Sparse multivariate polynomial algebra over the reals.
//
// A Monomial is an exponent vector, a Polynomial maps monomials to double
// coefficients (zero coefficients are never stored), and a VectorField is a
// fixed-dimension vector of polynomials.  All values are immutable after
// construction in the sense that operations return new objects; concurrent
// reads are safe.
#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace qpot {

class Monomial {
 public:
  explicit Monomial(int dim) : exps_(dim, 0) {}
  Monomial(std::initializer_list<int> exps);
  explicit Monomial(std::vector<int> exps);

  int dim() const { return static_cast<int>(exps_.size()); }
  int degree() const;
  int exponent(int i) const { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  bool is_constant() const { return degree() == 0; }
  bool all_even() const;

  // Product of monomials (exponent-wise sum).
  Monomial operator*(const Monomial& other) const;
  // Divides exponent-wise; valid only if every exponent stays non-negative.
  bool divides(const Monomial& other) const;

  bool operator==(const Monomial& other) const { return exps_ == other.exps_; }
  bool operator!=(const Monomial& other) const { return exps_ != other.exps_; }

  std::string to_string() const;

 private:
  std::vector<int> exps_;
};

// Graded lexicographic order: total degree first, ties broken
// lexicographically with x1 most significant.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

class VectorField;

class Polynomial {
 public:
  Polynomial() : dim_(0) {}  // empty sentinel; any operation requires a dim
  explicit Polynomial(int dim) : dim_(dim) {}

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int i);
  static Polynomial from_monomial(const Monomial& m, double c = 1.0);

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  // Total degree; 0 for the zero polynomial.
  int degree() const;
  std::size_t term_count() const { return terms_.size(); }

  double coefficient(const Monomial& m) const;
  void set_coefficient(const Monomial& m, double c);
  void add_term(const Monomial& m, double c);

  const std::map<Monomial, double, GrlexLess>& terms() const { return terms_; }

  double evaluate(const Eigen::VectorXd& x) const;

  Polynomial derivative(int i) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);

  bool operator==(const Polynomial& other) const;

  // Exact text form (round-trips through parse). Terms are emitted in
  // descending graded-lex order as `c*x1^a1*x2^a2`.
  std::string to_string() const;
  // Human-oriented form: short coefficients, terms below 1e-9 suppressed.
  std::string to_display_string() const;

  // Parses the text form. Throws std::invalid_argument with context on
  // malformed input (unknown symbols, negative exponents, bad dimension).
  static Polynomial parse(const std::string& text, int dim);

 private:
  std::string format(int precision, double prune) const;

  int dim_;
  std::map<Monomial, double, GrlexLess> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

class VectorField {
 public:
  VectorField() = default;  // empty sentinel
  explicit VectorField(int dim);
  explicit VectorField(std::vector<Polynomial> components);

  int dim() const { return static_cast<int>(components_.size()); }
  const Polynomial& operator[](int i) const { return components_[i]; }
  Polynomial& operator[](int i) { return components_[i]; }
  const std::vector<Polynomial>& components() const { return components_; }

  // Max total degree over components.
  int degree() const;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  VectorField operator+(const VectorField& other) const;
  VectorField operator-(const VectorField& other) const;
  VectorField operator*(double s) const;

 private:
  std::vector<Polynomial> components_;
};

VectorField gradient(const Polynomial& p);
Polynomial dot(const VectorField& a, const VectorField& b);

}  // namespace qpot
