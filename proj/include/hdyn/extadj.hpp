#pragma once

// Representations of SO(n,1) on pieces of ⊕_d ∧^d 𝔤, 𝔤 = so(n,1), graded by
// the eigenvalues of ad(H0) where a_t = exp(t H0).
//
// Basis of 𝔤 (in this order):
//   N_i  = E_{0i} + E_{in}          weight +1   (i = 1..n-1)
//   H0   = E_{00} - E_{nn}          weight  0
//   M_ij = E_{ij} - E_{ji}, i < j   weight  0
//   Nm_i = E_{i0} + E_{ni}          weight -1

#include "hdyn/curves.hpp"
#include "hdyn/lingroup.hpp"
#include "hdyn/sl2rep.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hdyn {

struct AlgebraBasis {
  std::vector<Eigen::MatrixXd> elements;
  std::vector<std::string> names;
  std::vector<int> n_index;
  int h_index = 0;
  std::vector<int> m_index;
  std::vector<int> nminus_index;
  Eigen::VectorXd weights;
};

AlgebraBasis algebra_basis(const QuadraticSpace& space);
/// Coordinates of X ∈ 𝔤 in algebra_basis (read off matrix entries; exact).
Eigen::VectorXd algebra_coords(const QuadraticSpace& space, const Eigen::MatrixXd& x);

struct GradedRep {
  int n = 0;
  std::string name;
  std::vector<std::vector<int>> labels;  ///< wedge index sets over the algebra basis
  Eigen::VectorXd weights;
  std::vector<Eigen::MatrixXd> generators;  ///< dρ(X_b) for every algebra basis element
  std::function<Eigen::MatrixXd(const GroupElement&)> action;

  Eigen::Index dim() const { return weights.size(); }
  Eigen::MatrixXd act(const GroupElement& g) const { return action(g); }

  const Eigen::MatrixXd& gen_h() const;
  const Eigen::MatrixXd& gen_n(int i) const;
  const Eigen::MatrixXd& gen_nminus(int i) const;
  std::vector<Eigen::MatrixXd> gen_m() const;
};

/// Adjoint representation of so(n,1), n ≤ 4.
GradedRep build_adjoint(const QuadraticSpace& space);
/// d-th exterior power: compound matrices for the group, Leibniz rule for 𝔤.
GradedRep build_exterior(const GradedRep& rep, int d);
GradedRep direct_sum(const std::vector<GradedRep>& reps);

/// d-th compound matrix (all d×d minors, subsets in lexicographic order).
Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& a, int d);
/// Derivation induced on ∧^d by the endomorphism a.
Eigen::MatrixXd leibniz_matrix(const Eigen::MatrixXd& a, int d);

/// max over basis pairs of ‖[ρ(X_a), ρ(X_b)] - ρ([X_a, X_b])‖.
double bracket_residual(const QuadraticSpace& space, const GradedRep& rep);

/// Υ(s) = ρ(u(φ(s))).
Eigen::MatrixXd upsilon(const GradedRep& rep, const Curve& curve, double s);
/// s ↦ Υ(s)_{ij}, a member of the function space spanned by the coordinates of Υ.
std::function<double(double)> upsilon_entry(const GradedRep& rep, const Curve& curve, Eigen::Index i, Eigen::Index j);
/// Polynomial curves: the entry is a polynomial of degree at most
/// (max weight - min weight) * deg φ, recovered once by interpolation.
std::function<double(double)> upsilon_entry(const GradedRep& rep, const AnalyticCurve& curve, Eigen::Index i,
                                            Eigen::Index j);

struct GoodFnReport {
  double C = 0.0;
  double alpha = 0.0;
  double worst_ratio = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double worst_j_begin = 0.0;
  double worst_j_end = 0.0;
  double worst_r = 0.0;
};

/// Sublevel-set test |{s ∈ J : |ξ(s)| < r}| ≤ C (r / sup_J |ξ|)^α |J| on `trials`
/// seeded pairs (J ⊆ [a, b], r = sup_J |ξ| · 10^{-6u}).
GoodFnReport good_function_check(const std::function<double(double)>& xi, double a, double b, double C,
                                 double alpha, std::size_t trials, std::uint64_t seed);
GoodFnReport good_function_check(const Polynomial& xi, double a, double b, double C, double alpha,
                                 std::size_t trials, std::uint64_t seed);

/// Measure of {s ∈ [a, b] : |ξ(s)| < r}: 10^4-cell scan with bisection at level crossings.
double sublevel_measure(const std::function<double(double)>& xi, double a, double b, double r);

struct InvariantSolution {
  Eigen::MatrixXd nullspace_basis;
  Eigen::MatrixXd global_invariant_basis;
  int excess_dim = 0;
  Eigen::VectorXd singular_values;  ///< of the stacked q+ Υ(s_j) system, descending
  double threshold = 0.0;
  /// smallest kept / largest discarded singular value (infinite when nothing is discarded)
  double gap = 0.0;
  /// smallest kept singular value / threshold
  double threshold_margin = 0.0;
};

/// Solves q+(Υ(s_j) v) = 0 for all sample parameters s_j and compares with the
/// vectors killed by every generator.
InvariantSolution invariant_vector_solver(const GradedRep& rep, const Curve& curve, int sample_count);

/// Vectors annihilated by every generator (relative SVD threshold 1e-8).
Eigen::MatrixXd global_invariants(const GradedRep& rep);

/// κ estimate for ρ(u(t e_1)) on rep.
KappaEstimate kappa_estimate(const QuadraticSpace& space, const GradedRep& rep, double t, std::size_t trials,
                             std::uint64_t seed);

}  // namespace hdyn
