#include "hdyn/lingroup.hpp"

#include <cmath>
#include <string>

namespace hdyn {

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void require_length(const QuadraticSpace& space, const Eigen::VectorXd& x, const char* what) {
  if (x.size() != space.n() - 1)
    throw std::invalid_argument(std::string(what) + ": expected a vector of length " + std::to_string(space.n() - 1) +
                                ", got " + std::to_string(x.size()));
}

}  // namespace

QuadraticSpace::QuadraticSpace(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("hyperbolic dimension must be at least 2");
  gram_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
  gram_(0, n) = gram_(n, 0) = 1.0;
  for (int i = 1; i < n; ++i) gram_(i, i) = -1.0;
}

GroupElement::GroupElement(const QuadraticSpace& space, Eigen::MatrixXd mat)
    : space_(space), mat_(std::move(mat)) {
  if (mat_.rows() != space_.dim() || mat_.cols() != space_.dim())
    throw std::invalid_argument("group element must be " + std::to_string(space_.dim()) + "x" +
                                std::to_string(space_.dim()));
  const double scale = std::max(1.0, max_abs(mat_));
  if (form_residual() > kIdentityTol * scale * scale)
    throw std::invalid_argument("matrix does not preserve the quadratic form");
  if (std::abs(mat_.determinant() - 1.0) > kIdentityTol * std::pow(scale, static_cast<double>(space_.dim())))
    throw std::invalid_argument("matrix does not have determinant 1");
}

GroupElement::GroupElement(const QuadraticSpace& space, Eigen::MatrixXd mat, Unchecked)
    : space_(space), mat_(std::move(mat)) {}

GroupElement GroupElement::identity(const QuadraticSpace& space) {
  return GroupElement(space, Eigen::MatrixXd::Identity(space.dim(), space.dim()), Unchecked{});
}

GroupElement GroupElement::inverse() const {
  const auto& b = space_.gram();
  return GroupElement(space_, b * mat_.transpose() * b, Unchecked{});
}

double GroupElement::form_residual() const {
  const auto& b = space_.gram();
  return max_abs(mat_.transpose() * b * mat_ - b);
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (!(a.space_ == b.space_)) throw std::invalid_argument("group elements from different spaces");
  return GroupElement(a.space_, a.mat_ * b.mat_, GroupElement::Unchecked{});
}

double max_abs_diff(const GroupElement& a, const GroupElement& b) { return max_abs(a.matrix() - b.matrix()); }

BoundaryPoint::BoundaryPoint(const QuadraticSpace& space, const Eigen::VectorXd& rep) {
  if (rep.size() != space.dim()) throw std::invalid_argument("boundary point has wrong length");
  const double scale = rep.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw std::invalid_argument("boundary point must be nonzero");
  if (std::abs(space.form(rep / scale)) > kIdentityTol) throw std::invalid_argument("vector is not isotropic");
  Eigen::Index lead = 0;
  while (std::abs(rep(lead)) <= kDegeneracyTol * scale) ++lead;
  rep_ = rep / rep(lead);
}

bool BoundaryPoint::approx_equal(const BoundaryPoint& other, double tol) const {
  if (rep_.size() != other.rep_.size()) return false;
  const double scale = std::max({1.0, rep_.cwiseAbs().maxCoeff(), other.rep_.cwiseAbs().maxCoeff()});
  return (rep_ - other.rep_).cwiseAbs().maxCoeff() <= tol * scale;
}

GroupElement make_a(const QuadraticSpace& space, double t) {
  if (!(std::abs(t) <= 300.0)) throw std::overflow_error("a_t: |t| must not exceed 300");
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(space.dim(), space.dim());
  m(0, 0) = std::exp(t);
  m(space.n(), space.n()) = std::exp(-t);
  return GroupElement(space, std::move(m));
}

GroupElement make_u(const QuadraticSpace& space, const Eigen::VectorXd& x) {
  require_length(space, x, "u(x)");
  const int n = space.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n + 1, n + 1);
  m.block(0, 1, 1, n - 1) = x.transpose();
  m.block(1, n, n - 1, 1) = x;
  m(0, n) = 0.5 * x.squaredNorm();
  return GroupElement(space, std::move(m));
}

GroupElement make_u_minus(const QuadraticSpace& space, const Eigen::VectorXd& x) {
  require_length(space, x, "u-(x)");
  return GroupElement(space, make_u(space, 2.0 * x).matrix().transpose());
}

GroupElement make_m(const QuadraticSpace& space, const Eigen::MatrixXd& k) {
  const int n = space.n();
  if (k.rows() != n - 1 || k.cols() != n - 1)
    throw std::invalid_argument("m(k): k must be " + std::to_string(n - 1) + "x" + std::to_string(n - 1));
  if (max_abs(k.transpose() * k - Eigen::MatrixXd::Identity(n - 1, n - 1)) > kIdentityTol)
    throw std::invalid_argument("m(k): k is not orthogonal");
  if (std::abs(k.determinant() - 1.0) > kIdentityTol) throw std::invalid_argument("m(k): det k != 1");
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n + 1, n + 1);
  m.block(1, 1, n - 1, n - 1) = k;
  return GroupElement(space, std::move(m));
}

double alpha_character(const GroupElement& a) {
  const auto& m = a.matrix();
  const Eigen::Index n = m.rows() - 1;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(n + 1, n + 1);
  expected(0, 0) = m(0, 0);
  expected(n, n) = m(n, n);
  if (m(0, 0) <= 0.0 || max_abs(m - expected) > kIdentityTol * std::max(1.0, max_abs(m)))
    throw std::invalid_argument("alpha: element is not in A");
  return std::sqrt(m(0, 0));
}

BoundaryPoint visual_map(const GroupElement& h) {
  return BoundaryPoint(h.space(), h.matrix().row(0).transpose());
}

HorosphericalDecomposition horospherical_decompose(const GroupElement& h) {
  const auto& space = h.space();
  const int n = space.n();
  const Eigen::VectorXd row = h.matrix().row(0).transpose();
  const double lead = row(0);
  if (std::abs(lead) <= kDegeneracyTol * row.cwiseAbs().maxCoeff())
    throw BoundaryCellError("element lies outside the open cell N-·MA·N: (h^T e_0)_0 vanishes");

  Eigen::VectorXd x = row.segment(1, n - 1) / lead;
  GroupElement u = make_u(space, x);
  const Eigen::MatrixXd lower = h.matrix() * u.inverse().matrix();

  Eigen::MatrixXd am = Eigen::MatrixXd::Zero(n + 1, n + 1);
  am(0, 0) = lower(0, 0);
  am.block(1, 1, n - 1, n - 1) = lower.block(1, 1, n - 1, n - 1);
  am(n, n) = lower(n, n);
  // MA is block diagonal with orthogonal middle block.
  Eigen::MatrixXd am_inv = Eigen::MatrixXd::Zero(n + 1, n + 1);
  am_inv(0, 0) = 1.0 / am(0, 0);
  am_inv.block(1, 1, n - 1, n - 1) = am.block(1, 1, n - 1, n - 1).transpose();
  am_inv(n, n) = 1.0 / am(n, n);
  Eigen::MatrixXd nminus = lower * am_inv;

  return {GroupElement(space, std::move(nminus)), GroupElement(space, std::move(am)), std::move(u), std::move(x)};
}

Eigen::MatrixXd householder_pair_rotation(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  if (m == 0) throw std::invalid_argument("rotation of an empty vector");
  if (std::abs(x.norm() - 1.0) > kIdentityTol) throw std::invalid_argument("rotation target must be a unit vector");
  if (m == 1) return Eigen::MatrixXd::Constant(1, 1, x(0) > 0 ? 1.0 : -1.0);

  Eigen::VectorXd w = -x;
  w(0) += 1.0;
  if (w.norm() <= kDegeneracyTol) return Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd first = eye - 2.0 * w * w.transpose() / w.squaredNorm();

  // Second reflection fixes x and restores det = +1.
  Eigen::Index j = 0;
  x.cwiseAbs().minCoeff(&j);
  Eigen::VectorXd p = eye.col(j) - x(j) * x;
  p.normalize();
  const Eigen::MatrixXd second = eye - 2.0 * p * p.transpose();
  return second * first;
}

Sl2Embedding::Sl2Embedding(const QuadraticSpace& space, const Eigen::VectorXd& direction)
    : space_(space), direction_(direction) {
  require_length(space, direction, "sl2_embed");
  if (std::abs(direction.norm() - 1.0) > kIdentityTol)
    throw std::invalid_argument("sl2_embed: direction must be a unit vector");
  const int n = space.n();
  conj_ = Eigen::MatrixXd::Identity(n + 1, n + 1);
  conj_.block(1, 1, n - 1, n - 1) = householder_pair_rotation(direction);
}

GroupElement Sl2Embedding::operator()(const Eigen::Matrix2d& g) const {
  if (std::abs(g.determinant() - 1.0) > kIdentityTol) throw std::invalid_argument("sl2_embed: det g != 1");
  const double a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  const int n = space_.n();
  // Action on symmetric 2x2 forms S -> g S g^T in the coordinates (x_0, x_1, x_n) = (S_00, 2 S_01, 2 S_11).
  Eigen::MatrixXd base = Eigen::MatrixXd::Identity(n + 1, n + 1);
  const int idx[3] = {0, 1, n};
  const double block[3][3] = {{a * a, a * b, 0.5 * b * b}, {2 * a * c, a * d + b * c, b * d}, {2 * c * c, 2 * c * d, d * d}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) base(idx[i], idx[j]) = block[i][j];
  return GroupElement(space_, conj_ * base * conj_.transpose());
}

Sl2Embedding sl2_embed(const QuadraticSpace& space, const Eigen::VectorXd& x) { return Sl2Embedding(space, x); }

}  // namespace hdyn
