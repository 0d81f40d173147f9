#include "hdyn/extadj.hpp"

#include "random_objects.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace hdyn;
using hdyn::testing::random_group_element;
using hdyn::testing::random_vector;

namespace {

std::vector<double> sorted(const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

AnalyticCurve parabola() { return AnalyticCurve({Polynomial({0.0, 1.0}), Polynomial({0.0, 0.0, 1.0})}, 0.0, 1.0); }

AnalyticCurve unit_circle() {
  return make_circle(Eigen::Vector2d::Zero(), 1.0, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), 1.0, 0.0, 0.0,
                     2 * M_PI);
}

GradedRep adjoint_plus_wedge2(const QuadraticSpace& space) {
  const GradedRep adj = build_adjoint(space);
  return direct_sum({adj, build_exterior(adj, 2)});
}

}  // namespace

TEST_CASE("algebra basis") {
  for (int n = 2; n <= 4; ++n) {
    const QuadraticSpace s(n);
    const AlgebraBasis b = algebra_basis(s);
    CHECK(b.elements.size() == static_cast<std::size_t>(n * (n + 1) / 2));
    for (std::size_t i = 0; i < b.elements.size(); ++i) {
      const Eigen::MatrixXd& x = b.elements[i];
      CHECK((x.transpose() * s.gram() + s.gram() * x).norm() == 0.0);
      CHECK(algebra_coords(s, x) == Eigen::VectorXd::Unit(static_cast<Eigen::Index>(b.elements.size()),
                                                           static_cast<Eigen::Index>(i)));
    }
  }
}

TEST_CASE("adjoint representation") {
  SUBCASE("n = 2 weights") {
    const GradedRep adj = build_adjoint(QuadraticSpace(2));
    CHECK(adj.dim() == 3);
    CHECK(adj.weights == Eigen::Vector3d(1, 0, -1));
  }
  SUBCASE("n = 3 zero-weight space") {
    const GradedRep adj = build_adjoint(QuadraticSpace(3));
    CHECK(adj.dim() == 6);
    CHECK(std::count(adj.weights.data(), adj.weights.data() + 6, 0.0) == 2);
  }
  SUBCASE("bracket relations and grading") {
    for (int n = 2; n <= 4; ++n) {
      const QuadraticSpace s(n);
      const GradedRep adj = build_adjoint(s);
      CHECK(bracket_residual(s, adj) == 0.0);
      const Eigen::MatrixXd h = adj.gen_h();
      CHECK((h - Eigen::MatrixXd(adj.weights.asDiagonal())).norm() == 0.0);
    }
  }
  CHECK_THROWS_AS(build_adjoint(QuadraticSpace(5)), std::invalid_argument);
}

TEST_CASE("group action matches the algebra") {
  Stream rng(41, 0);
  for (int n = 2; n <= 3; ++n) {
    const QuadraticSpace s(n);
    const GradedRep rep = adjoint_plus_wedge2(s);
    for (int k = 0; k < 10; ++k) {
      const GroupElement g = random_group_element(rng, s);
      const GroupElement h = random_group_element(rng, s);
      const Eigen::MatrixXd lhs = rep.act(g * h);
      const Eigen::MatrixXd rhs = rep.act(g) * rep.act(h);
      CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, lhs.norm()));
      const double t = rng.uniform(-2, 2);
      const Eigen::MatrixXd diag = rep.act(make_a(s, t));
      const Eigen::VectorXd expected = (t * rep.weights).array().exp();
      CHECK((diag - Eigen::MatrixXd(expected.asDiagonal())).norm() <= 1e-9 * expected.maxCoeff());
    }
  }
}

TEST_CASE("exterior powers") {
  const QuadraticSpace s2(2);
  const GradedRep adj2 = build_adjoint(s2);
  SUBCASE("second power for n = 2") {
    const GradedRep w2 = build_exterior(adj2, 2);
    CHECK(w2.dim() == 3);
    CHECK(sorted(w2.weights) == std::vector<double>{-1, 0, 1});
  }
  SUBCASE("top power is the determinant") {
    const QuadraticSpace s3(3);
    const GradedRep adj3 = build_adjoint(s3);
    const GradedRep top = build_exterior(adj3, 6);
    CHECK(top.dim() == 1);
    CHECK(top.weights(0) == 0.0);
    Stream rng(42, 0);
    const GroupElement g = random_group_element(rng, s3);
    CHECK(top.act(g)(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("first power is the input") {
    const GradedRep w1 = build_exterior(adj2, 1);
    CHECK(w1.weights == adj2.weights);
    CHECK(w1.labels == adj2.labels);
  }
  SUBCASE("weights add and brackets close") {
    const QuadraticSpace s3(3);
    const GradedRep adj3 = build_adjoint(s3);
    for (int d = 1; d <= 3; ++d) {
      const GradedRep w = build_exterior(adj3, d);
      for (Eigen::Index i = 0; i < w.dim(); ++i) {
        double sum = 0.0;
        for (int idx : w.labels[static_cast<std::size_t>(i)]) sum += adj3.weights(idx);
        CHECK(w.weights(i) == sum);
      }
      CHECK(bracket_residual(s3, w) == 0.0);
    }
  }
  CHECK_THROWS_AS(build_exterior(adj2, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_exterior(adj2, 4), std::invalid_argument);
}

TEST_CASE("compound and Leibniz matrices") {
  Stream rng(43, 0);
  const Eigen::MatrixXd a = random_vector(rng, 16).reshaped(4, 4);
  const Eigen::MatrixXd b = random_vector(rng, 16).reshaped(4, 4);
  CHECK((compound_matrix(a * b, 2) - compound_matrix(a, 2) * compound_matrix(b, 2)).norm() < 1e-10);
  CHECK(compound_matrix(a, 4)(0, 0) == doctest::Approx(a.determinant()));
  const double h = 1e-6;
  const Eigen::MatrixXd numeric =
      (compound_matrix(Eigen::MatrixXd::Identity(4, 4) + h * a, 2) - compound_matrix(Eigen::MatrixXd::Identity(4, 4), 2)) / h;
  CHECK((numeric - leibniz_matrix(a, 2)).norm() < 1e-4);
}

TEST_CASE("upsilon") {
  SUBCASE("zero curve gives the identity") {
    const QuadraticSpace s(3);
    const AnalyticCurve zero({Polynomial({0.0}), Polynomial({0.0})}, 0.0, 1.0);
    CHECK(upsilon(adjoint_plus_wedge2(s), zero, 0.4).isIdentity(0.0));
  }
  SUBCASE("n = 2 adjoint matches the l = 2 block up to diagonal rescaling") {
    const QuadraticSpace s(2);
    const GradedRep adj = build_adjoint(s);
    const AnalyticCurve line({Polynomial({0.0, 1.0})}, -1.0, 1.0);
    for (double x : {-0.8, -0.3, 0.4, 0.9}) {
      const Eigen::MatrixXd u = upsilon(adj, line, x);
      CHECK(u.isUpperTriangular(0.0));
      CHECK(u.diagonal().isOnes(0.0));
      CHECK(u(0, 1) * u(1, 2) / u(0, 2) == doctest::Approx(2.0));
    }
    const Eigen::MatrixXd u1 = upsilon(adj, line, 1.0);
    const Eigen::MatrixXd u2 = upsilon(adj, line, 0.5);
    CHECK(u1(0, 1) == doctest::Approx(2 * u2(0, 1)));
    CHECK(u1(0, 2) == doctest::Approx(4 * u2(0, 2)));
  }
  SUBCASE("unipotent with determinant one, and a homomorphism along lines") {
    const QuadraticSpace s(3);
    const GradedRep rep = adjoint_plus_wedge2(s);
    const AnalyticCurve line({Polynomial({0.0, 1.0}), Polynomial({0.0, -2.0})}, -2.0, 2.0);
    Stream rng(44, 0);
    for (int k = 0; k < 100; ++k) {
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      const Eigen::MatrixXd ux = upsilon(rep, line, x);
      CHECK(ux.determinant() == doctest::Approx(1.0).epsilon(1e-9));
      const Eigen::MatrixXd nil = ux - Eigen::MatrixXd::Identity(rep.dim(), rep.dim());
      Eigen::MatrixXd power = nil;
      for (int p = 1; p < 8; ++p) power = power * nil;
      CHECK(power.norm() < 1e-9);
      CHECK((upsilon(rep, line, x) * upsilon(rep, line, y) - upsilon(rep, line, x + y)).norm() < 1e-9);
    }
  }
  SUBCASE("entries are polynomial in s") {
    const QuadraticSpace s(3);
    const GradedRep rep = adjoint_plus_wedge2(s);
    const AnalyticCurve curve = parabola();
    // Degree is at most 2 * 2 * deg(phi) = 8, so the ninth finite difference vanishes.
    const double h = 0.1;
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(rep.dim(), rep.dim());
    for (int k = 0; k <= 9; ++k) {
      const double coeff = ((k % 2 == 0) ? 1.0 : -1.0) * std::tgamma(10) / (std::tgamma(k + 1) * std::tgamma(10 - k));
      diff += coeff * upsilon(rep, curve, k * h);
    }
    CHECK(diff.norm() < 1e-8);
    for (Eigen::Index i = 0; i < rep.dim(); i += 4) {
      for (Eigen::Index j = 0; j < rep.dim(); j += 3) {
        const auto entry = upsilon_entry(rep, curve, i, j);
        for (double x : {0.0, 0.37, 0.81})
          CHECK(entry(x) == doctest::Approx(upsilon(rep, curve, x)(i, j)).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("good functions") {
  SUBCASE("linear function is (1,1)-good") {
    const GoodFnReport rep = good_function_check(Polynomial({0.0, 1.0}), 0.0, 1.0, 1.0, 1.0, 500, 1);
    CHECK(rep.worst_ratio <= 1.0);
    CHECK(rep.seed == 1);
    CHECK(rep.samples == 500);
  }
  SUBCASE("square is (1,1/2)-good") {
    CHECK(good_function_check(Polynomial({0.0, 0.0, 1.0}), 0.0, 1.0, 1.0, 0.5, 500, 2).worst_ratio <= 1.0);
  }
  SUBCASE("square is not (1,1)-good") {
    const GoodFnReport rep = good_function_check(Polynomial({0.0, 0.0, 1.0}), 0.0, 1.0, 1.0, 1.0, 500, 3);
    CHECK(rep.worst_ratio > 1.0);
    CHECK(rep.worst_r > 0.0);
  }
  SUBCASE("sublevel measure in closed form") {
    auto sq = [](double s) { return s * s; };
    for (double r : {1e-6, 1e-3, 0.04, 0.5}) {
      CHECK(sublevel_measure(sq, 0.0, 1.0, r) == doctest::Approx(std::sqrt(r)).epsilon(1e-9));
      CHECK(sublevel_measure([](double s) { return s; }, 0.0, 1.0, r) == doctest::Approx(r).epsilon(1e-9));
    }
  }
  SUBCASE("upsilon entries are good") {
    const QuadraticSpace s(3);
    const GradedRep rep = adjoint_plus_wedge2(s);
    const AnalyticCurve curve = parabola();
    Eigen::Index row = 0, col = 0;
    (upsilon(rep, curve, 1.0) - Eigen::MatrixXd::Identity(rep.dim(), rep.dim())).cwiseAbs().maxCoeff(&row, &col);
    const auto entry = upsilon_entry(rep, curve, row, col);
    // Degree k polynomials are (k(k+1)^{1/k}, 1/k)-good.
    CHECK(good_function_check(entry, 0.0, 1.0, 8.0 * std::pow(9.0, 1.0 / 8.0), 1.0 / 8.0, 200, 4).worst_ratio <= 1.0);
  }
  SUBCASE("determinism") {
    const auto a = good_function_check(Polynomial({0.1, -1.0, 2.0}), 0.0, 1.0, 4.0, 0.5, 300, 9);
    const auto b = good_function_check(Polynomial({0.1, -1.0, 2.0}), 0.0, 1.0, 4.0, 0.5, 300, 9);
    CHECK(a.worst_ratio == b.worst_ratio);
  }
  CHECK_THROWS_AS(good_function_check(Polynomial({0.0}), 0.0, 1.0, 1.0, 1.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(good_function_check(Polynomial({0.0, 1.0}), 0.0, 1.0, -1.0, 1.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(good_function_check(Polynomial({0.0, 1.0}), 0.0, 1.0, 1.0, 0.0, 10, 1), std::invalid_argument);
}

TEST_CASE("invariant vector solver") {
  const QuadraticSpace s(3);
  const GradedRep rep = adjoint_plus_wedge2(s);
  SUBCASE("generic parabola has no excess") {
    const InvariantSolution sol = invariant_vector_solver(rep, parabola(), 64);
    CHECK(sol.excess_dim == 0);
    CHECK(sol.nullspace_basis.cols() == sol.global_invariant_basis.cols());
    CHECK(sol.threshold_margin >= 1e3);
  }
  SUBCASE("circle has excess") {
    const InvariantSolution sol = invariant_vector_solver(rep, unit_circle(), 64);
    CHECK(sol.excess_dim >= 1);
    CHECK(sol.gap >= 1e3);
    for (Eigen::Index c = 0; c < sol.nullspace_basis.cols(); ++c) {
      for (double x : {0.1, 1.7, 4.0}) {
        const Eigen::VectorXd moved = upsilon(rep, unit_circle(), x) * sol.nullspace_basis.col(c);
        for (Eigen::Index i = 0; i < rep.dim(); ++i)
          if (rep.weights(i) > 0) CHECK(std::abs(moved(i)) < 1e-7);
      }
    }
  }
  SUBCASE("more samples never enlarge the solution space") {
    Stream rng(45, 0);
    for (int k = 0; k < 5; ++k) {
      std::vector<Polynomial> comps;
      for (int j = 0; j < 2; ++j)
        comps.emplace_back(std::vector<double>{rng.normal(), rng.normal(), rng.normal(), rng.normal()});
      const AnalyticCurve c(comps, 0.0, 1.0);
      int previous = static_cast<int>(rep.dim());
      for (int m : {22, 43, 85, 169}) {
        const int dim = static_cast<int>(invariant_vector_solver(rep, c, m).nullspace_basis.cols());
        CHECK(dim <= previous);
        previous = dim;
      }
    }
  }
  SUBCASE("global invariants are killed by every generator") {
    const Eigen::MatrixXd inv = global_invariants(rep);
    for (const auto& g : rep.generators) CHECK((g * inv).norm() < 1e-9);
  }
}

TEST_CASE("kappa on adjoint-derived representations") {
  for (int n = 2; n <= 3; ++n) {
    const QuadraticSpace s(n);
    const GradedRep adj = build_adjoint(s);
    for (const GradedRep& rep : {adj, build_exterior(adj, 2)}) {
      const KappaEstimate est = kappa_estimate(s, rep, 1.0, 20000, 5);
      CHECK(est.kappa_hat > 0.0);
      const Eigen::MatrixXd u = rep.act(make_u(s, Eigen::VectorXd::Unit(n - 1, 0)));
      CHECK(kappa_violations(u, rep.weights, est.kappa_hat / 2, 20000, 6) == 0);
    }
    CHECK_THROWS_AS(kappa_estimate(s, adj, 0.0, 100, 1), std::invalid_argument);
  }
}
