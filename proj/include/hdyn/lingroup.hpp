#pragma once

// Matrix model of H = SO(n,1) preserving Q(x) = 2 x_0 x_n - (x_1^2 + ... + x_{n-1}^2).
//
// Subgroups used throughout:
//   A  = { a_t = diag(e^t, 1, ..., 1, e^-t) }        geodesic flow (left action)
//   N  = { u(x) },  x in R^{n-1}                     expanded by a_t-conjugation
//   N- = { u-(x) }                                    contracted by a_t-conjugation
//   M  = { diag(1, k, 1) : k in SO(n-1) }             centralizer of A in K

#include <Eigen/Dense>

#include <stdexcept>

namespace hdyn {

inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kDegeneracyTol = 1e-12;

/// Raised when h has no N- · MA · N factorization (h^T e_0 has vanishing first coordinate).
class BoundaryCellError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class QuadraticSpace {
 public:
  explicit QuadraticSpace(int n);

  int n() const { return n_; }
  Eigen::Index dim() const { return n_ + 1; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double form(const Eigen::VectorXd& x) const { return x.dot(gram_ * x); }

  friend bool operator==(const QuadraticSpace& a, const QuadraticSpace& b) { return a.n_ == b.n_; }

 private:
  int n_;
  Eigen::MatrixXd gram_;
};

/// Element of SO(n,1). Construction validates form preservation and det = 1,
/// with tolerances scaled by the entry magnitude; products are not re-validated.
class GroupElement {
 public:
  GroupElement(const QuadraticSpace& space, Eigen::MatrixXd mat);

  static GroupElement identity(const QuadraticSpace& space);

  const QuadraticSpace& space() const { return space_; }
  const Eigen::MatrixXd& matrix() const { return mat_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

  /// g^{-1} = B g^T B, exact for any form-preserving g.
  GroupElement inverse() const;
  /// max-norm of g^T B g - B.
  double form_residual() const;

  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);

 private:
  struct Unchecked {};
  GroupElement(const QuadraticSpace& space, Eigen::MatrixXd mat, Unchecked);

  QuadraticSpace space_;
  Eigen::MatrixXd mat_;
};

double max_abs_diff(const GroupElement& a, const GroupElement& b);

/// Projective point of the null cone (a point of the sphere at infinity).
/// The first coordinate with |x_i| > 1e-12 * |x|_max is scaled to +1.
class BoundaryPoint {
 public:
  explicit BoundaryPoint(const QuadraticSpace& space, const Eigen::VectorXd& rep);

  const Eigen::VectorXd& rep() const { return rep_; }
  bool approx_equal(const BoundaryPoint& other, double tol = kIdentityTol) const;

 private:
  Eigen::VectorXd rep_;
};

GroupElement make_a(const QuadraticSpace& space, double t);
GroupElement make_u(const QuadraticSpace& space, const Eigen::VectorXd& x);
/// Lower unipotent u-(x) = u(2x)^T. The factor 2 makes u-(t x) the image of
/// [[1,0],[t,1]] under sl2_embed, matching u(t x) <-> [[1,t],[0,1]].
GroupElement make_u_minus(const QuadraticSpace& space, const Eigen::VectorXd& x);
GroupElement make_m(const QuadraticSpace& space, const Eigen::MatrixXd& k);

/// alpha(a_t) = e^{t/2}; `a` must lie in A.
double alpha_character(const GroupElement& a);

/// Forward endpoint [h^T e_0]; invariant under left multiplication by a_t.
BoundaryPoint visual_map(const GroupElement& h);

struct HorosphericalDecomposition {
  GroupElement nminus;
  GroupElement am;
  GroupElement u;
  Eigen::VectorXd x;  ///< parameter of the N factor: u == make_u(space, x)
};

/// h = nminus * am * u with nminus in N-, am in Z_H(A) = MA, u in N.
HorosphericalDecomposition horospherical_decompose(const GroupElement& h);

/// Rotation k (SO(m) for m >= 2) with k e_1 = x, built from two Householder
/// reflections. For m = 1 the result is [x_0] and lies in O(1).
Eigen::MatrixXd householder_pair_rotation(const Eigen::VectorXd& x);

/// Homomorphism SL(2,R) -> SO(n,1) through the unit direction x:
///   [[1,t],[0,1]] -> u(t x),  diag(e^{t/2}, e^{-t/2}) -> a_t,  [[1,0],[t,1]] -> u-(t x).
class Sl2Embedding {
 public:
  Sl2Embedding(const QuadraticSpace& space, const Eigen::VectorXd& direction);

  GroupElement operator()(const Eigen::Matrix2d& g) const;

  const Eigen::VectorXd& direction() const { return direction_; }
  /// Matrix conjugating the e_1-embedding onto this one.
  const Eigen::MatrixXd& conjugator() const { return conj_; }

 private:
  QuadraticSpace space_;
  Eigen::VectorXd direction_;
  Eigen::MatrixXd conj_;
};

Sl2Embedding sl2_embed(const QuadraticSpace& space, const Eigen::VectorXd& x);

}  // namespace hdyn
