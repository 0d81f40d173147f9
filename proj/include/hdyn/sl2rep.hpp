#pragma once

// Irreducible SL(2,R) representations in the weight basis w_0, ..., w_l:
//   dρ(h) w_k = (l - 2k) w_k,      h = diag(1, -1)
//   dρ(n) w_k = k w_{k-1},         n = [[0,1],[0,0]]
//   ρ(u_r) w_k = Σ_{j<=k} C(k,j) r^{k-j} w_j
//   ρ(J) w_k = (-1)^k w_{l-k},     J = [[0,1],[-1,0]]
// V+ / V0 / V- collect the basis vectors of positive / zero / negative weight.

#include "hdyn/exact_linalg.hpp"
#include "hdyn/rational.hpp"
#include "hdyn/rational_polynomial.hpp"

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdyn {

enum class WeightPart { plus, zero, minus, plus_zero, zero_minus };

inline bool in_part(double weight, WeightPart part) {
  switch (part) {
    case WeightPart::plus: return weight > 0;
    case WeightPart::zero: return weight == 0;
    case WeightPart::minus: return weight < 0;
    case WeightPart::plus_zero: return weight >= 0;
    case WeightPart::zero_minus: return weight <= 0;
  }
  return false;
}

inline int weight_of(int l, int k) { return l - 2 * k; }

/// Exact binomial coefficient; throws past the int64 range.
std::int64_t binomial(int n, int k);

template <typename Scalar>
Scalar int_power(const Scalar& base, int exponent) {
  Scalar out(1);
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

template <typename Scalar>
struct IrrepBlock {
  int l = 0;
  VectorX<Scalar> coeffs;

  IrrepBlock() = default;
  explicit IrrepBlock(int highest_weight) : l(highest_weight), coeffs(VectorX<Scalar>::Zero(highest_weight + 1)) {
    if (highest_weight < 0) throw std::invalid_argument("highest weight must be non-negative");
  }
  IrrepBlock(int highest_weight, VectorX<Scalar> c) : l(highest_weight), coeffs(std::move(c)) {
    if (highest_weight < 0) throw std::invalid_argument("highest weight must be non-negative");
    if (coeffs.size() != highest_weight + 1)
      throw std::invalid_argument("block of highest weight " + std::to_string(l) + " needs " +
                                  std::to_string(l + 1) + " coefficients");
  }

  static IrrepBlock basis(int highest_weight, int k) {
    IrrepBlock b(highest_weight);
    b.coeffs(k) = Scalar(1);
    return b;
  }

  int dim() const { return l + 1; }
  friend bool operator==(const IrrepBlock& a, const IrrepBlock& b) { return a.l == b.l && a.coeffs == b.coeffs; }
};

/// Direct sum V = ⊕ V_i, one block per irreducible summand.
template <typename Scalar>
struct RepVector {
  std::vector<IrrepBlock<Scalar>> blocks;
  friend bool operator==(const RepVector& a, const RepVector& b) = default;
};

// ---- matrices in the weight basis (column k is the image of w_k) ----

template <typename Scalar>
MatrixX<Scalar> h_matrix(int l) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(l + 1, l + 1);
  for (int k = 0; k <= l; ++k) m(k, k) = Scalar(weight_of(l, k));
  return m;
}

template <typename Scalar>
MatrixX<Scalar> n_matrix(int l) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(l + 1, l + 1);
  for (int k = 1; k <= l; ++k) m(k - 1, k) = Scalar(k);
  return m;
}

template <typename Scalar>
MatrixX<Scalar> unipotent_matrix(int l, const Scalar& r) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(l + 1, l + 1);
  for (int k = 0; k <= l; ++k)
    for (int j = 0; j <= k; ++j) m(j, k) = Scalar(binomial(k, j)) * int_power(r, k - j);
  return m;
}

template <typename Scalar>
MatrixX<Scalar> j_matrix(int l) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(l + 1, l + 1);
  for (int k = 0; k <= l; ++k) m(l - k, k) = Scalar(k % 2 == 0 ? 1 : -1);
  return m;
}

/// ρ(diag(e^{t/2}, e^{-t/2})): w_k ↦ e^{t(l-2k)/2} w_k.
Eigen::MatrixXd diag_matrix(int l, double t);

// ---- actions ----

template <typename Scalar>
IrrepBlock<Scalar> act_h(const IrrepBlock<Scalar>& v) {
  return {v.l, h_matrix<Scalar>(v.l).lazyProduct(v.coeffs)};
}

template <typename Scalar>
IrrepBlock<Scalar> act_n(const IrrepBlock<Scalar>& v) {
  return {v.l, n_matrix<Scalar>(v.l).lazyProduct(v.coeffs)};
}

template <typename Scalar>
IrrepBlock<Scalar> act_unipotent(const IrrepBlock<Scalar>& v, const Scalar& r) {
  return {v.l, unipotent_matrix<Scalar>(v.l, r).lazyProduct(v.coeffs)};
}

template <typename Scalar>
IrrepBlock<Scalar> act_J(const IrrepBlock<Scalar>& v) {
  return {v.l, j_matrix<Scalar>(v.l).lazyProduct(v.coeffs)};
}

inline IrrepBlock<double> act_diag(const IrrepBlock<double>& v, double t) {
  return {v.l, diag_matrix(v.l, t) * v.coeffs};
}

template <typename Scalar>
IrrepBlock<Scalar> project(const IrrepBlock<Scalar>& v, WeightPart part) {
  IrrepBlock<Scalar> out = v;
  for (int k = 0; k <= v.l; ++k)
    if (!in_part(weight_of(v.l, k), part)) out.coeffs(k) = Scalar(0);
  return out;
}

template <typename Scalar, typename F>
RepVector<Scalar> map_blocks(const RepVector<Scalar>& v, F&& f) {
  RepVector<Scalar> out;
  out.blocks.reserve(v.blocks.size());
  for (const auto& b : v.blocks) out.blocks.push_back(f(b));
  return out;
}

template <typename Scalar>
RepVector<Scalar> act_unipotent(const RepVector<Scalar>& v, const Scalar& r) {
  return map_blocks(v, [&](const auto& b) { return act_unipotent(b, r); });
}

template <typename Scalar>
RepVector<Scalar> act_J(const RepVector<Scalar>& v) {
  return map_blocks(v, [](const auto& b) { return act_J(b); });
}

inline RepVector<double> act_diag(const RepVector<double>& v, double t) {
  return map_blocks(v, [&](const auto& b) { return act_diag(b, t); });
}

template <typename Scalar>
RepVector<Scalar> project(const RepVector<Scalar>& v, WeightPart part) {
  return map_blocks(v, [&](const auto& b) { return project(b, part); });
}

template <typename Scalar>
RepVector<Scalar> operator+(const RepVector<Scalar>& a, const RepVector<Scalar>& b) {
  if (a.blocks.size() != b.blocks.size()) throw std::invalid_argument("direct sums of different shape");
  RepVector<Scalar> out = a;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    if (a.blocks[i].l != b.blocks[i].l) throw std::invalid_argument("direct sums of different shape");
    out.blocks[i].coeffs += b.blocks[i].coeffs;
  }
  return out;
}

// ---- key lemma ----

/// Rows j = 0..p-1 of the constraint "the w_j coefficient of ρ(u_r)v vanishes",
/// in the unknowns c_p..c_{2p} (or c_{p+1}..c_{2p} when `minus_only`).
template <typename Scalar>
MatrixX<Scalar> lemma_system(int l, const Scalar& r, bool minus_only = false) {
  if (l < 2 || l % 2 != 0) throw std::invalid_argument("odd highest weight (or l < 2): lemma needs l = 2p >= 2");
  if (r == Scalar(0)) throw std::invalid_argument("lemma parameter r must be nonzero");
  const int p = l / 2;
  const int first = minus_only ? p + 1 : p;
  MatrixX<Scalar> a(p, l - first + 1);
  for (int j = 0; j < p; ++j)
    for (int k = first; k <= l; ++k) a(j, k - first) = Scalar(binomial(k, j)) * int_power(r, k - j);
  return a;
}

namespace detail {

template <typename Scalar>
Scalar pivot_tolerance() {
  if constexpr (is_exact_v<Scalar>) return Scalar(0);
  else return Scalar(1e-10);
}

template <typename Scalar>
MatrixX<Scalar> normalized_rows(MatrixX<Scalar> a) {
  if constexpr (!is_exact_v<Scalar>) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Scalar m = a.row(i).cwiseAbs().maxCoeff();
      if (m > 0) a.row(i) /= m;
    }
  }
  return a;
}

}  // namespace detail

/// Basis of { v ∈ V^{0-} : ρ(u_r) v ∈ V^{0-} } inside the irreducible block of highest weight l.
template <typename Scalar>
std::vector<IrrepBlock<Scalar>> solve_lemma_space(int l, const Scalar& r) {
  const int p = l / 2;
  const MatrixX<Scalar> kernel =
      nullspace<Scalar>(detail::normalized_rows<Scalar>(lemma_system<Scalar>(l, r)), detail::pivot_tolerance<Scalar>());
  std::vector<IrrepBlock<Scalar>> basis;
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    IrrepBlock<Scalar> v(l);
    v.coeffs.segment(p, p + 1) = kernel.col(c);
    basis.push_back(std::move(v));
  }
  return basis;
}

struct KeyLemmaReport {
  bool identity_ok = false;     ///< q0(ρ(u_r)v) == ρ(J) q0(v) on the lemma space
  bool minus_claim_ok = false;  ///< only v = 0 in V- keeps ρ(u_r)v inside V^{0-}
  double max_residual = 0.0;
  int lemma_dim = 0;
  int minus_kernel_dim = 0;
};

template <typename Scalar>
KeyLemmaReport verify_key_lemma(int l, const Scalar& r) {
  KeyLemmaReport report;
  const auto basis = solve_lemma_space<Scalar>(l, r);
  report.lemma_dim = static_cast<int>(basis.size());
  report.identity_ok = true;
  for (const auto& v : basis) {
    const auto moved = act_unipotent(v, r);
    const auto lhs = project(moved, WeightPart::zero);
    const auto rhs = act_J(project(v, WeightPart::zero));
    const VectorX<Scalar> diff = lhs.coeffs - rhs.coeffs;
    double residual = 0.0;
    for (Eigen::Index i = 0; i < diff.size(); ++i) residual = std::max(residual, std::abs(to_double(diff(i))));
    if constexpr (is_exact_v<Scalar>) {
      if (diff != VectorX<Scalar>::Zero(diff.size())) report.identity_ok = false;
    } else {
      double scale = 1.0;
      for (Eigen::Index i = 0; i < moved.coeffs.size(); ++i) scale = std::max(scale, std::abs(moved.coeffs(i)));
      if (residual > 1e-9 * scale) report.identity_ok = false;
    }
    report.max_residual = std::max(report.max_residual, residual);
  }
  const MatrixX<Scalar> minus_kernel = nullspace<Scalar>(
      detail::normalized_rows<Scalar>(lemma_system<Scalar>(l, r, true)), detail::pivot_tolerance<Scalar>());
  report.minus_kernel_dim = static_cast<int>(minus_kernel.cols());
  report.minus_claim_ok = minus_kernel.cols() == 0;
  return report;
}

// ---- polynomial-integration oracle (exact) ----

struct PolynomialOracleReport {
  bool constraints_hold = false;  ///< F_i(1) = 0 for i = 1..p
  bool F_p_factored = false;      ///< F_p == C x^p (x-1)^p
  Rational C;
  Rational f1;
  bool f1_identity_ok = false;  ///< f(1) == (-1)^p c_p whenever the constraints hold
  RationalPolynomial f;
  std::vector<RationalPolynomial> F;  ///< F[i] = I^i f, i = 0..p
};

/// `c` holds (c_p, ..., c_{2p}); f(x) = Σ C(k,p) r^{k-p} c_k x^{k-p}.
PolynomialOracleReport polynomial_oracle(int p, const std::vector<Rational>& c, const Rational& r);

// ---- κ-inequality ----

struct KappaEstimate {
  double kappa_hat = 0.0;
  Eigen::VectorXd argmin;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
};

/// max{ |q+(v)|, |q^{+0}(U v)| } for a representation graded by `weights`.
double kappa_objective(const Eigen::MatrixXd& unipotent, const Eigen::VectorXd& weights, const Eigen::VectorXd& v);

/// Seeded sampling of unit vectors followed by pattern-search refinement of the best candidates.
/// Throws if `unipotent` is the identity (the inequality then fails on V-).
KappaEstimate kappa_estimate(const Eigen::MatrixXd& unipotent, const Eigen::VectorXd& weights, std::size_t trials,
                             std::uint64_t seed);

/// Same estimator on ⊕ V_{l_i} with ρ(u_t).
KappaEstimate kappa_estimate(const std::vector<int>& highest_weights, double t, std::size_t trials,
                             std::uint64_t seed);

/// Number of fresh seeded unit vectors v with kappa_objective(v) < kappa.
std::size_t kappa_violations(const Eigen::MatrixXd& unipotent, const Eigen::VectorXd& weights, double kappa,
                             std::size_t samples, std::uint64_t seed);

/// Block-diagonal ρ(u_t) and the weight vector for ⊕ V_{l_i}.
Eigen::MatrixXd direct_sum_unipotent(const std::vector<int>& highest_weights, double t);
Eigen::VectorXd direct_sum_weights(const std::vector<int>& highest_weights);

}  // namespace hdyn
