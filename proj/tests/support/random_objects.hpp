#pragma once

#include "hdyn/lingroup.hpp"
#include "hdyn/sampling.hpp"

#include <Eigen/Dense>

namespace hdyn::testing {

inline Eigen::VectorXd random_vector(Stream& rng, Eigen::Index dim, double scale = 1.0) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = scale * rng.normal();
  return v;
}

inline Eigen::MatrixXd random_rotation(Stream& rng, Eigen::Index dim) {
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

/// u-(y) m a_s u(x) with moderate parameters.
inline GroupElement random_group_element(Stream& rng, const QuadraticSpace& space) {
  const int m = space.n() - 1;
  return make_u_minus(space, random_vector(rng, m, 0.7)) * make_m(space, random_rotation(rng, m)) *
         make_a(space, rng.uniform(-2.0, 2.0)) * make_u(space, random_vector(rng, m, 0.7));
}

}  // namespace hdyn::testing
