#pragma once

#include "hdyn/rational.hpp"

#include <Eigen/Core>

#include <vector>

namespace hdyn {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Reduced row echelon form. Pivots with |a| <= tol count as zero; for
/// exact scalars pass tol = 0. Returns the pivot columns.
template <typename Scalar>
std::vector<Eigen::Index> rref_in_place(MatrixX<Scalar>& a, const Scalar& tol) {
  std::vector<Eigen::Index> pivots;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < a.cols() && row < a.rows(); ++col) {
    Eigen::Index best = -1;
    Scalar best_abs(0);
    for (Eigen::Index r = row; r < a.rows(); ++r) {
      Scalar v = abs_value(a(r, col));
      if (v > tol && (best < 0 || v > best_abs)) {
        best = r;
        best_abs = v;
        if constexpr (is_exact_v<Scalar>) break;  // any nonzero pivot is exact
      }
    }
    if (best < 0) {
      if constexpr (!is_exact_v<Scalar>) a.block(row, col, a.rows() - row, 1).setZero();
      continue;
    }
    a.row(best).swap(a.row(row));
    Scalar inv = Scalar(1) / a(row, col);
    a.row(row) *= inv;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (r == row || a(r, col) == Scalar(0)) continue;
      Scalar factor = a(r, col);
      a.row(r) -= factor * a.row(row);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

/// Columns span the kernel of `a`; one column per free variable, with that
/// variable set to 1 (the canonical RREF basis).
template <typename Scalar>
MatrixX<Scalar> nullspace(MatrixX<Scalar> a, const Scalar& tol = Scalar(0)) {
  const Eigen::Index cols = a.cols();
  auto pivots = rref_in_place(a, tol);
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (auto p : pivots) is_pivot[static_cast<std::size_t>(p)] = true;

  std::vector<Eigen::Index> free_cols;
  for (Eigen::Index c = 0; c < cols; ++c)
    if (!is_pivot[static_cast<std::size_t>(c)]) free_cols.push_back(c);

  MatrixX<Scalar> basis = MatrixX<Scalar>::Zero(cols, static_cast<Eigen::Index>(free_cols.size()));
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    const auto f = free_cols[k];
    const auto kk = static_cast<Eigen::Index>(k);
    basis(f, kk) = Scalar(1);
    for (std::size_t r = 0; r < pivots.size(); ++r)
      basis(pivots[r], kk) = Scalar(-a(static_cast<Eigen::Index>(r), f));
  }
  return basis;
}

template <typename Scalar>
Eigen::Index rank(MatrixX<Scalar> a, const Scalar& tol = Scalar(0)) {
  return static_cast<Eigen::Index>(rref_in_place(a, tol).size());
}

}  // namespace hdyn
