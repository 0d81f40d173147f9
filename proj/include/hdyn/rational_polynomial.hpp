#pragma once

#include "hdyn/rational.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace hdyn {

/// Exact polynomial with rational coefficients in ascending degree. The zero
/// polynomial has no coefficients and degree -1.
class RationalPolynomial {
 public:
  RationalPolynomial() = default;
  explicit RationalPolynomial(std::vector<Rational> coeffs);
  RationalPolynomial(std::initializer_list<Rational> coeffs);

  static RationalPolynomial monomial(int degree, const Rational& c = Rational(1));

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  /// Coefficient of x^k; zero past the degree.
  Rational coeff(int k) const;

  Rational operator()(const Rational& x) const;

  /// x ↦ ∫₀ˣ p(t) dt.
  RationalPolynomial integrate() const;
  RationalPolynomial derivative() const;

  RationalPolynomial& operator+=(const RationalPolynomial& rhs);
  RationalPolynomial& operator-=(const RationalPolynomial& rhs);
  RationalPolynomial& operator*=(const Rational& c);

  friend RationalPolynomial operator+(RationalPolynomial a, const RationalPolynomial& b) { return a += b; }
  friend RationalPolynomial operator-(RationalPolynomial a, const RationalPolynomial& b) { return a -= b; }
  friend RationalPolynomial operator*(RationalPolynomial a, const Rational& c) { return a *= c; }
  friend RationalPolynomial operator*(const Rational& c, RationalPolynomial a) { return a *= c; }
  friend RationalPolynomial operator*(const RationalPolynomial& a, const RationalPolynomial& b);
  friend bool operator==(const RationalPolynomial& a, const RationalPolynomial& b) = default;

  std::string str() const;

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// (x - root)^k with exact coefficients.
RationalPolynomial power_of_linear(const Rational& root, int k);

}  // namespace hdyn
