#include "hdyn/sl2rep.hpp"

#include "hdyn/sampling.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hdyn {

std::int64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t out = 1;
  for (int i = 1; i <= k; ++i) {
    const std::int64_t num = n - k + i;
    if (out > std::numeric_limits<std::int64_t>::max() / num) throw std::overflow_error("binomial overflow");
    out = out * num / i;  // exact: out * num is divisible by i at each step
  }
  return out;
}

Eigen::MatrixXd diag_matrix(int l, double t) {
  if (std::abs(t) * l > 1400.0) throw std::overflow_error("act_diag: e^{t l / 2} overflows");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(l + 1, l + 1);
  for (int k = 0; k <= l; ++k) m(k, k) = std::exp(0.5 * t * weight_of(l, k));
  return m;
}

PolynomialOracleReport polynomial_oracle(int p, const std::vector<Rational>& c, const Rational& r) {
  if (p < 1) throw std::invalid_argument("polynomial oracle needs p >= 1");
  if (static_cast<int>(c.size()) != p + 1) throw std::invalid_argument("expected coefficients c_p..c_{2p}");
  if (r == 0) throw std::invalid_argument("lemma parameter r must be nonzero");

  PolynomialOracleReport report;
  std::vector<Rational> f_coeffs(static_cast<std::size_t>(p) + 1);
  for (int k = p; k <= 2 * p; ++k)
    f_coeffs[static_cast<std::size_t>(k - p)] =
        Rational(binomial(k, p)) * int_power(r, k - p) * c[static_cast<std::size_t>(k - p)];
  report.f = RationalPolynomial(std::move(f_coeffs));

  report.F.push_back(report.f);
  for (int i = 1; i <= p; ++i) report.F.push_back(report.F.back().integrate());

  report.constraints_hold = true;
  for (int i = 1; i <= p; ++i)
    if (report.F[static_cast<std::size_t>(i)](Rational(1)) != 0) report.constraints_hold = false;

  const RationalPolynomial& fp = report.F.back();
  report.C = fp.coeff(2 * p);
  const RationalPolynomial shape = RationalPolynomial::monomial(p) * power_of_linear(Rational(1), p);
  report.F_p_factored = fp == report.C * shape;

  report.f1 = report.f(Rational(1));
  const Rational expected = (p % 2 == 0 ? Rational(1) : Rational(-1)) * c.front();
  report.f1_identity_ok = !report.constraints_hold || report.f1 == expected;
  return report;
}

// ---- κ ----

namespace {

struct Masks {
  Eigen::VectorXd plus;
  Eigen::VectorXd plus_zero;
};

Masks weight_masks(const Eigen::VectorXd& weights) {
  Masks m{Eigen::VectorXd::Zero(weights.size()), Eigen::VectorXd::Zero(weights.size())};
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) > 1e-9) m.plus(i) = 1.0;
    if (weights(i) > -1e-9) m.plus_zero(i) = 1.0;
  }
  return m;
}

double objective(const Eigen::MatrixXd& u, const Masks& m, const Eigen::VectorXd& v) {
  const double plus = v.cwiseProduct(m.plus).norm();
  const double moved = (u * v).cwiseProduct(m.plus_zero).norm();
  return std::max(plus, moved);
}

struct Candidate {
  double value;
  Eigen::VectorXd v;
};

constexpr std::size_t kKeep = 8;

void keep_best(std::vector<Candidate>& best, Candidate c) {
  best.push_back(std::move(c));
  std::stable_sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  if (best.size() > kKeep) best.resize(kKeep);
}

// Quadratic forms whose square roots are the two terms of the objective.
struct Forms {
  Eigen::MatrixXd plus;
  Eigen::MatrixXd moved;
};

Forms objective_forms(const Eigen::MatrixXd& u, const Masks& m) {
  return {Eigen::MatrixXd(m.plus.asDiagonal()), u.transpose() * m.plus_zero.asDiagonal() * u};
}

// Riemannian gradient descent on the sphere for the smoothed maximum
// (f1^p + f2^p)^(1/p) of the two squared terms, with p doubling towards the
// true maximum. Armijo backtracking along the normalizing retraction.
Eigen::VectorXd smoothed_descent(const Forms& forms, Eigen::VectorXd v) {
  for (double p = 2.0; p <= 16384.0; p *= 2.0) {
    auto smoothed = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
      const Eigen::VectorXd a = forms.plus * w;
      const Eigen::VectorXd b = forms.moved * w;
      const double f1 = w.dot(a), f2 = w.dot(b);
      const double top = std::max(f1, f2);
      if (top <= 0.0) {
        if (grad) grad->setZero(w.size());
        return 0.0;
      }
      const double r1 = std::pow(f1 / top, p), r2 = std::pow(f2 / top, p);
      const double value = top * std::pow(r1 + r2, 1.0 / p);
      if (grad) {
        const double s = r1 + r2;
        Eigen::VectorXd g = 2.0 * ((r1 / s) * (f1 > 0 ? value / f1 : 0.0) * a + (r2 / s) * (f2 > 0 ? value / f2 : 0.0) * b);
        g -= g.dot(w) * w;
        *grad = std::move(g);
      }
      return value;
    };
    double step = 1.0;
    for (int iter = 0; iter < 400; ++iter) {
      Eigen::VectorXd g;
      const double value = smoothed(v, &g);
      const double gnorm2 = g.squaredNorm();
      if (gnorm2 < 1e-30) break;
      bool moved = false;
      for (int k = 0; k < 60; ++k) {
        Eigen::VectorXd w = (v - step * g).normalized();
        if (smoothed(w, nullptr) <= value - 1e-4 * step * gnorm2) {
          v = std::move(w);
          moved = true;
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
  }
  return v;
}

// Smoothed descent followed by pattern search on the sphere (coordinate moves
// plus seeded random directions, halving the step when no move improves).
Candidate refine(const Eigen::MatrixXd& u, const Masks& m, Candidate start, Stream& stream) {
  const Eigen::Index dim = start.v.size();
  Eigen::VectorXd smooth = smoothed_descent(objective_forms(u, m), start.v);
  const double smooth_value = objective(u, m, smooth);
  if (smooth_value < start.value) start = {smooth_value, std::move(smooth)};
  double step = 0.01;
  int sweeps = 0;
  while (step > 1e-10 && sweeps < 20000) {
    ++sweeps;
    bool improved = false;
    auto attempt = [&](const Eigen::VectorXd& dir) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd w = start.v + sign * step * dir;
        const double norm = w.norm();
        if (norm == 0.0) continue;
        w /= norm;
        const double value = objective(u, m, w);
        if (value < start.value) {
          start = {value, std::move(w)};
          improved = true;
          return;
        }
      }
    };
    for (Eigen::Index i = 0; i < dim; ++i) attempt(Eigen::VectorXd::Unit(dim, i));
    for (int k = 0; k < 4; ++k) attempt(stream.unit_vector(dim));
    if (!improved) step *= 0.5;
  }
  return start;
}

constexpr std::uint64_t kFreshStreamOffset = std::uint64_t{1} << 40;
constexpr std::uint64_t kRefineStreamOffset = std::uint64_t{1} << 41;

}  // namespace

double kappa_objective(const Eigen::MatrixXd& unipotent, const Eigen::VectorXd& weights, const Eigen::VectorXd& v) {
  return objective(unipotent, weight_masks(weights), v);
}

KappaEstimate kappa_estimate(const Eigen::MatrixXd& unipotent, const Eigen::VectorXd& weights, std::size_t trials,
                             std::uint64_t seed) {
  const Eigen::Index dim = weights.size();
  if (unipotent.rows() != dim || unipotent.cols() != dim)
    throw std::invalid_argument("kappa_estimate: unipotent matrix and weights disagree in dimension");
  if (dim == 0 || trials == 0) throw std::invalid_argument("kappa_estimate: empty representation or no trials");
  if ((unipotent - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("kappa_estimate: unipotent parameter must be nonzero");

  const Masks masks = weight_masks(weights);
  const std::size_t batches = batch_count(trials);
  std::vector<std::vector<Candidate>> per_batch(batches);
  for_each_batch(batches, [&](std::size_t b) {
    Stream stream(seed, b);
    const std::size_t begin = b * kSamplesPerBatch;
    const std::size_t end = std::min(trials, begin + kSamplesPerBatch);
    auto& best = per_batch[b];
    for (std::size_t i = begin; i < end; ++i) {
      Eigen::VectorXd v = stream.unit_vector(dim);
      const double value = objective(unipotent, masks, v);
      if (best.size() < kKeep || value < best.back().value) keep_best(best, {value, std::move(v)});
    }
  });

  std::vector<Candidate> best;
  for (auto& batch : per_batch)
    for (auto& c : batch) keep_best(best, std::move(c));

  std::vector<Candidate> refined(best.size());
  for_each_batch(best.size(), [&](std::size_t i) {
    Stream stream(seed, kRefineStreamOffset + i);
    refined[i] = refine(unipotent, masks, best[i], stream);
  });
  const auto winner = std::min_element(refined.begin(), refined.end(),
                                       [](const auto& a, const auto& b) { return a.value < b.value; });
  if (!(winner->value > 0.0)) throw std::runtime_error("kappa_estimate: estimated kappa is not positive");
  return {winner->value, winner->v, seed, trials};
}

KappaEstimate kappa_estimate(const std::vector<int>& highest_weights, double t, std::size_t trials,
                             std::uint64_t seed) {
  if (t == 0.0) throw std::invalid_argument("kappa_estimate: t = 0 makes the inequality false on V-");
  return kappa_estimate(direct_sum_unipotent(highest_weights, t), direct_sum_weights(highest_weights), trials, seed);
}

std::size_t kappa_violations(const Eigen::MatrixXd& unipotent, const Eigen::VectorXd& weights, double kappa,
                             std::size_t samples, std::uint64_t seed) {
  const Masks masks = weight_masks(weights);
  const std::size_t batches = batch_count(samples);
  std::vector<std::size_t> counts(batches, 0);
  for_each_batch(batches, [&](std::size_t b) {
    Stream stream(seed, kFreshStreamOffset + b);
    const std::size_t begin = b * kSamplesPerBatch;
    const std::size_t end = std::min(samples, begin + kSamplesPerBatch);
    for (std::size_t i = begin; i < end; ++i)
      if (objective(unipotent, masks, stream.unit_vector(weights.size())) < kappa) ++counts[b];
  });
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Eigen::MatrixXd direct_sum_unipotent(const std::vector<int>& highest_weights, double t) {
  Eigen::Index dim = 0;
  for (int l : highest_weights) dim += l + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::Index offset = 0;
  for (int l : highest_weights) {
    m.block(offset, offset, l + 1, l + 1) = unipotent_matrix<double>(l, t);
    offset += l + 1;
  }
  return m;
}

Eigen::VectorXd direct_sum_weights(const std::vector<int>& highest_weights) {
  Eigen::Index dim = 0;
  for (int l : highest_weights) {
    if (l < 0) throw std::invalid_argument("highest weight must be non-negative");
    dim += l + 1;
  }
  Eigen::VectorXd w(dim);
  Eigen::Index offset = 0;
  for (int l : highest_weights)
    for (int k = 0; k <= l; ++k) w(offset++) = weight_of(l, k);
  return w;
}

}  // namespace hdyn
