#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Core>

#include <string>
#include <string_view>
#include <type_traits>

namespace hdyn {

/// Arbitrary-precision rational. Expression templates are off so the type
/// behaves like a plain value inside Eigen containers.
using Rational = boost::multiprecision::number<
    boost::multiprecision::cpp_rational_backend,
    boost::multiprecision::et_off>;

template <typename Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

/// Parses "3", "-7/2" or a finite decimal such as "0.125" exactly.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

template <typename Scalar>
Scalar abs_value(const Scalar& x) {
  return x < Scalar(0) ? Scalar(-x) : x;
}

}  // namespace hdyn

namespace Eigen {

template <>
struct NumTraits<hdyn::Rational> : GenericNumTraits<hdyn::Rational> {
  using Real = hdyn::Rational;
  using NonInteger = hdyn::Rational;
  using Nested = hdyn::Rational;
  using Literal = hdyn::Rational;

  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 20,
    AddCost = 50,
    MulCost = 100
  };

  static Real epsilon() { return Real(0); }
  static Real dummy_precision() { return Real(0); }
  static int digits10() { return 0; }
};

}  // namespace Eigen
