#include "qpot/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qpot {

namespace {

void check_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) +
                                ")");
  }
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

}  // namespace

Monomial::Monomial(std::initializer_list<int> exps) : exps_(exps) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
  }
}

Monomial::Monomial(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
  }
}

int Monomial::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

bool Monomial::all_even() const {
  return std::all_of(exps_.begin(), exps_.end(),
                     [](int e) { return e % 2 == 0; });
}

Monomial Monomial::operator*(const Monomial& other) const {
  check_same_dim(dim(), other.dim(), "Monomial::operator*");
  std::vector<int> e(exps_);
  for (int i = 0; i < other.dim(); ++i) e[i] += other.exps_[i];
  return Monomial(std::move(e));
}

bool Monomial::divides(const Monomial& other) const {
  if (dim() != other.dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (exps_[i] > other.exps_[i]) return false;
  }
  return true;
}

std::string Monomial::to_string() const {
  std::string out;
  for (int i = 0; i < dim(); ++i) {
    if (exps_[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += "x" + std::to_string(i + 1);
    if (exps_[i] > 1) out += "^" + std::to_string(exps_[i]);
  }
  return out.empty() ? "1" : out;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  return std::lexicographical_compare(a.exponents().begin(),
                                      a.exponents().end(),
                                      b.exponents().begin(),
                                      b.exponents().end());
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(Monomial(dim), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int i) {
  if (i < 0 || i >= dim) throw std::invalid_argument("variable: index out of range");
  std::vector<int> e(dim, 0);
  e[i] = 1;
  return from_monomial(Monomial(std::move(e)));
}

Polynomial Polynomial::from_monomial(const Monomial& m, double c) {
  Polynomial p(m.dim());
  p.add_term(m, c);
  return p;
}

int Polynomial::degree() const {
  // Map is graded, so the last key has maximal total degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set_coefficient(const Monomial& m, double c) {
  check_same_dim(dim_, m.dim(), "Polynomial::set_coefficient");
  if (c == 0.0) {
    terms_.erase(m);
  } else {
    terms_[m] = c;
  }
}

void Polynomial::add_term(const Monomial& m, double c) {
  check_same_dim(dim_, m.dim(), "Polynomial::add_term");
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

double Polynomial::evaluate(const Eigen::VectorXd& x) const {
  check_same_dim(dim_, static_cast<int>(x.size()), "Polynomial::evaluate");
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    for (int i = 0; i < dim_; ++i) {
      const int e = m.exponent(i);
      if (e == 0) continue;
      double base = x[i], pw = 1.0;
      int k = e;
      while (k > 0) {  // exponentiation by squaring; exponents are small
        if (k & 1) pw *= base;
        base *= base;
        k >>= 1;
      }
      v *= pw;
    }
    total += v;
  }
  return total;
}

Polynomial Polynomial::derivative(int i) const {
  if (i < 0 || i >= dim_) throw std::invalid_argument("derivative: index out of range");
  Polynomial out(dim_);
  for (const auto& [m, c] : terms_) {
    const int e = m.exponent(i);
    if (e == 0) continue;
    std::vector<int> exps = m.exponents();
    exps[i] -= 1;
    out.add_term(Monomial(std::move(exps)), c * e);
  }
  return out;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial out(*this);
  out += other;
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial out(*this);
  out -= other;
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_same_dim(dim_, other.dim_, "Polynomial::operator+=");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_same_dim(dim_, other.dim_, "Polynomial::operator-=");
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  check_same_dim(dim_, other.dim_, "Polynomial::operator*");
  Polynomial out(dim_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      out.add_term(ma * mb, ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out(dim_);
  if (s == 0.0) return out;
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, c * s);
  return out;
}

bool Polynomial::operator==(const Polynomial& other) const {
  return dim_ == other.dim_ && terms_ == other.terms_;
}

std::string Polynomial::format(int precision, double prune) const {
  std::string out;
  // Descending graded-lex: highest degree first.
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const double c = it->second;
    if (std::abs(c) < prune) continue;
    const bool neg = c < 0.0;
    if (out.empty()) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    const std::string mono = it->first.to_string();
    const std::string coeff = format_double(std::abs(c), precision);
    if (mono == "1") {
      out += coeff;
    } else if (coeff == "1") {
      out += mono;
    } else {
      out += coeff + "*" + mono;
    }
  }
  return out.empty() ? "0" : out;
}

std::string Polynomial::to_string() const { return format(17, 0.0); }

std::string Polynomial::to_display_string() const { return format(6, 1e-9); }

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int dim;

  explicit Parser(const std::string& t, int d) : text(t), dim(d) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("polynomial parse error at position " +
                                std::to_string(pos) + ": " + msg + " in \"" +
                                text + "\"");
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool done() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  // coefficient | variable factor: x<idx>[^<exp>]
  void parse_factor(double& coeff, std::vector<int>& exps, bool& saw_factor) {
    skip_ws();
    if (pos >= text.size()) fail("expected factor");
    const char c = text[pos];
    if (c == 'x' || c == 'X') {
      ++pos;
      std::size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (start == pos) fail("expected variable index after 'x'");
      const int idx = std::atoi(text.substr(start, pos - start).c_str());
      if (idx < 1 || idx > dim) fail("variable x" + std::to_string(idx) +
                                     " out of range for dimension " + std::to_string(dim));
      int expn = 1;
      skip_ws();
      if (pos < text.size() && text[pos] == '^') {
        ++pos;
        skip_ws();
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
          fail("exponent must be a non-negative integer");
        }
        std::size_t estart = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (estart == pos) fail("expected exponent after '^'");
        expn = std::atoi(text.substr(estart, pos - estart).c_str());
      }
      exps[idx - 1] += expn;
      saw_factor = true;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text.c_str() + pos;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos += static_cast<std::size_t>(end - begin);
      coeff *= v;
      saw_factor = true;
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void parse_term(Polynomial& out, double sign) {
    double coeff = sign;
    std::vector<int> exps(dim, 0);
    bool saw_factor = false;
    parse_factor(coeff, exps, saw_factor);
    while (true) {
      skip_ws();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        parse_factor(coeff, exps, saw_factor);
        continue;
      }
      // Juxtaposed variable ("2x1") is accepted as an implicit product.
      if (pos < text.size() && (text[pos] == 'x' || text[pos] == 'X')) {
        parse_factor(coeff, exps, saw_factor);
        continue;
      }
      break;
    }
    if (!saw_factor) fail("empty term");
    out.add_term(Monomial(std::move(exps)), coeff);
  }

  Polynomial run() {
    Polynomial out(dim);
    skip_ws();
    if (pos >= text.size()) fail("empty input");
    double sign = 1.0;
    if (text[pos] == '+' || text[pos] == '-') {
      sign = text[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    }
    parse_term(out, sign);
    while (!done()) {
      const char c = peek();
      if (c == '+' || c == '-') {
        ++pos;
        parse_term(out, c == '-' ? -1.0 : 1.0);
      } else {
        fail(std::string("expected '+' or '-', got '") + c + "'");
      }
    }
    return out;
  }
};

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int dim) {
  if (dim <= 0) throw std::invalid_argument("parse: dimension must be positive");
  return Parser(text, dim).run();
}

VectorField::VectorField(int dim) : components_(dim, Polynomial(dim)) {}

VectorField::VectorField(std::vector<Polynomial> components)
    : components_(std::move(components)) {
  const int n = dim();
  for (const auto& p : components_) {
    check_same_dim(p.dim(), n, "VectorField");
  }
}

int VectorField::degree() const {
  int d = 0;
  for (const auto& p : components_) d = std::max(d, p.degree());
  return d;
}

Eigen::VectorXd VectorField::evaluate(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = components_[i].evaluate(x);
  return out;
}

Eigen::MatrixXd VectorField::jacobian(const Eigen::VectorXd& x) const {
  const int n = dim();
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      J(i, j) = components_[i].derivative(j).evaluate(x);
    }
  }
  return J;
}

VectorField VectorField::operator+(const VectorField& other) const {
  check_same_dim(dim(), other.dim(), "VectorField::operator+");
  std::vector<Polynomial> out;
  out.reserve(dim());
  for (int i = 0; i < dim(); ++i) out.push_back(components_[i] + other.components_[i]);
  return VectorField(std::move(out));
}

VectorField VectorField::operator-(const VectorField& other) const {
  check_same_dim(dim(), other.dim(), "VectorField::operator-");
  std::vector<Polynomial> out;
  out.reserve(dim());
  for (int i = 0; i < dim(); ++i) out.push_back(components_[i] - other.components_[i]);
  return VectorField(std::move(out));
}

VectorField VectorField::operator*(double s) const {
  std::vector<Polynomial> out;
  out.reserve(dim());
  for (int i = 0; i < dim(); ++i) out.push_back(components_[i] * s);
  return VectorField(std::move(out));
}

VectorField gradient(const Polynomial& p) {
  std::vector<Polynomial> comps;
  comps.reserve(p.dim());
  for (int i = 0; i < p.dim(); ++i) comps.push_back(p.derivative(i));
  return VectorField(std::move(comps));
}

Polynomial dot(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("dot: dimension mismatch");
  }
  Polynomial out(a.dim());
  for (int i = 0; i < a.dim(); ++i) out += a[i] * b[i];
  return out;
}

}  // namespace qpot
