#include "hdyn/extadj.hpp"

#include "hdyn/sampling.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace hdyn {

namespace {

Eigen::MatrixXd unit_matrix(int size, int i, int j) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  m(i, j) = 1.0;
  return m;
}

std::vector<std::vector<int>> subsets(int size, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) cur[static_cast<std::size_t>(i)] = i;
  if (d > size) return out;
  while (true) {
    out.push_back(cur);
    int p = d - 1;
    while (p >= 0 && cur[static_cast<std::size_t>(p)] == size - d + p) --p;
    if (p < 0) break;
    ++cur[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < d; ++q) cur[static_cast<std::size_t>(q)] = cur[static_cast<std::size_t>(q - 1)] + 1;
  }
  return out;
}

Eigen::MatrixXd block_diagonal(const std::vector<Eigen::MatrixXd>& blocks) {
  Eigen::Index dim = 0;
  for (const auto& b : blocks) dim += b.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

Eigen::MatrixXd null_columns(const Eigen::MatrixXd& m, Eigen::Index cols, double rel_tol, Eigen::VectorXd* sv_out,
                             double* threshold_out) {
  if (m.rows() == 0) {
    if (sv_out) *sv_out = Eigen::VectorXd();
    if (threshold_out) *threshold_out = 0.0;
    return Eigen::MatrixXd::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double threshold = rel_tol * (sv.size() ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  if (sv_out) *sv_out = sv;
  if (threshold_out) *threshold_out = threshold;
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

// ---- algebra ----

AlgebraBasis algebra_basis(const QuadraticSpace& space) {
  const int n = space.n();
  const int size = n + 1;
  AlgebraBasis b;
  std::vector<double> w;
  auto push = [&](Eigen::MatrixXd x, std::string name, double weight) {
    b.elements.push_back(std::move(x));
    b.names.push_back(std::move(name));
    w.push_back(weight);
    return static_cast<int>(b.elements.size()) - 1;
  };
  for (int i = 1; i < n; ++i)
    b.n_index.push_back(push(unit_matrix(size, 0, i) + unit_matrix(size, i, n), "N" + std::to_string(i), 1.0));
  b.h_index = push(unit_matrix(size, 0, 0) - unit_matrix(size, n, n), "H0", 0.0);
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      b.m_index.push_back(push(unit_matrix(size, i, j) - unit_matrix(size, j, i),
                               "M" + std::to_string(i) + std::to_string(j), 0.0));
  for (int i = 1; i < n; ++i)
    b.nminus_index.push_back(
        push(unit_matrix(size, i, 0) + unit_matrix(size, n, i), "Nm" + std::to_string(i), -1.0));
  b.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return b;
}

Eigen::VectorXd algebra_coords(const QuadraticSpace& space, const Eigen::MatrixXd& x) {
  const int n = space.n();
  Eigen::VectorXd c(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (int i = 1; i < n; ++i) c(k++) = x(0, i);
  c(k++) = x(0, 0);
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c(k++) = x(i, j);
  for (int i = 1; i < n; ++i) c(k++) = x(i, 0);
  return c;
}

// ---- GradedRep ----

namespace {
const Eigen::MatrixXd& generator_at(const GradedRep& rep, int index) {
  return rep.generators.at(static_cast<std::size_t>(index));
}
}  // namespace

const Eigen::MatrixXd& GradedRep::gen_h() const { return generator_at(*this, n - 1); }

const Eigen::MatrixXd& GradedRep::gen_n(int i) const {
  if (i < 1 || i >= n) throw std::out_of_range("gen_n: index must be in 1..n-1");
  return generator_at(*this, i - 1);
}

const Eigen::MatrixXd& GradedRep::gen_nminus(int i) const {
  if (i < 1 || i >= n) throw std::out_of_range("gen_nminus: index must be in 1..n-1");
  return generator_at(*this, static_cast<int>(generators.size()) - (n - 1) + (i - 1));
}

std::vector<Eigen::MatrixXd> GradedRep::gen_m() const {
  const int first = n;
  const int count = (n - 1) * (n - 2) / 2;
  return {generators.begin() + first, generators.begin() + first + count};
}

GradedRep build_adjoint(const QuadraticSpace& space) {
  if (space.n() > 4) throw std::invalid_argument("build_adjoint: n must be at most 4");
  const AlgebraBasis basis = algebra_basis(space);
  const auto dim = static_cast<Eigen::Index>(basis.elements.size());

  GradedRep rep;
  rep.n = space.n();
  rep.name = "ad";
  rep.weights = basis.weights;
  for (Eigen::Index i = 0; i < dim; ++i) rep.labels.push_back({static_cast<int>(i)});
  for (const auto& x : basis.elements) {
    Eigen::MatrixXd ad(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& y = basis.elements[static_cast<std::size_t>(c)];
      ad.col(c) = algebra_coords(space, x * y - y * x);
    }
    rep.generators.push_back(std::move(ad));
  }
  rep.action = [space, basis, dim](const GroupElement& g) {
    if (!(g.space() == space)) throw std::invalid_argument("adjoint action: element from another space");
    const Eigen::MatrixXd gi = g.inverse().matrix();
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
      m.col(c) = algebra_coords(space, g.matrix() * basis.elements[static_cast<std::size_t>(c)] * gi);
    return m;
  };
  return rep;
}

Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& a, int d) {
  const auto sets = subsets(static_cast<int>(a.rows()), d);
  const auto count = static_cast<Eigen::Index>(sets.size());
  Eigen::MatrixXd out(count, count);
  Eigen::MatrixXd minor(d, d);
  for (Eigen::Index r = 0; r < count; ++r)
    for (Eigen::Index c = 0; c < count; ++c) {
      const auto& rows = sets[static_cast<std::size_t>(r)];
      const auto& cols = sets[static_cast<std::size_t>(c)];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          minor(i, j) = a(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      out(r, c) = minor.determinant();
    }
  return out;
}

Eigen::MatrixXd leibniz_matrix(const Eigen::MatrixXd& a, int d) {
  const int size = static_cast<int>(a.rows());
  const auto sets = subsets(size, d);
  std::map<std::vector<int>, Eigen::Index> position;
  for (std::size_t i = 0; i < sets.size(); ++i) position[sets[i]] = static_cast<Eigen::Index>(i);
  const auto count = static_cast<Eigen::Index>(sets.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(count, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    const auto& set = sets[static_cast<std::size_t>(c)];
    for (int p = 0; p < d; ++p) {
      for (int m = 0; m < size; ++m) {
        const double coeff = a(m, set[static_cast<std::size_t>(p)]);
        if (coeff == 0.0) continue;
        std::vector<int> replaced = set;
        replaced[static_cast<std::size_t>(p)] = m;
        int inversions = 0;
        bool repeated = false;
        for (int i = 0; i < d && !repeated; ++i)
          for (int j = i + 1; j < d; ++j) {
            if (replaced[static_cast<std::size_t>(i)] == replaced[static_cast<std::size_t>(j)]) {
              repeated = true;
              break;
            }
            if (replaced[static_cast<std::size_t>(i)] > replaced[static_cast<std::size_t>(j)]) ++inversions;
          }
        if (repeated) continue;
        std::sort(replaced.begin(), replaced.end());
        out(position.at(replaced), c) += (inversions % 2 == 0 ? 1.0 : -1.0) * coeff;
      }
    }
  }
  return out;
}

GradedRep build_exterior(const GradedRep& rep, int d) {
  const auto dim = static_cast<int>(rep.dim());
  if (d < 1 || d > dim) throw std::invalid_argument("build_exterior: need 1 <= d <= dim");
  if (binomial(dim, d) > 10000) throw std::invalid_argument("build_exterior: more than 10^4 wedge basis vectors");
  if (d == 1) return rep;

  GradedRep out;
  out.n = rep.n;
  out.name = "wedge" + std::to_string(d) + "(" + rep.name + ")";
  const auto sets = subsets(dim, d);
  out.weights.resize(static_cast<Eigen::Index>(sets.size()));
  for (std::size_t i = 0; i < sets.size(); ++i) {
    double w = 0.0;
    std::vector<int> label;
    for (int k : sets[i]) {
      w += rep.weights(k);
      label.insert(label.end(), rep.labels[static_cast<std::size_t>(k)].begin(),
                   rep.labels[static_cast<std::size_t>(k)].end());
    }
    out.weights(static_cast<Eigen::Index>(i)) = w;
    out.labels.push_back(std::move(label));
  }
  for (const auto& g : rep.generators) out.generators.push_back(leibniz_matrix(g, d));
  out.action = [base = rep.action, d](const GroupElement& g) { return compound_matrix(base(g), d); };
  return out;
}

GradedRep direct_sum(const std::vector<GradedRep>& reps) {
  if (reps.empty()) throw std::invalid_argument("direct_sum: no summands");
  GradedRep out;
  out.n = reps.front().n;
  Eigen::Index dim = 0;
  for (const auto& r : reps) {
    if (r.n != out.n) throw std::invalid_argument("direct_sum: summands over different groups");
    dim += r.dim();
    out.name += (out.name.empty() ? "" : "+") + r.name;
    out.labels.insert(out.labels.end(), r.labels.begin(), r.labels.end());
  }
  out.weights.resize(dim);
  Eigen::Index off = 0;
  for (const auto& r : reps) {
    out.weights.segment(off, r.dim()) = r.weights;
    off += r.dim();
  }
  for (std::size_t g = 0; g < reps.front().generators.size(); ++g) {
    std::vector<Eigen::MatrixXd> blocks;
    for (const auto& r : reps) blocks.push_back(r.generators[g]);
    out.generators.push_back(block_diagonal(blocks));
  }
  out.action = [reps](const GroupElement& g) {
    std::vector<Eigen::MatrixXd> blocks;
    for (const auto& r : reps) blocks.push_back(r.act(g));
    return block_diagonal(blocks);
  };
  return out;
}

double bracket_residual(const QuadraticSpace& space, const GradedRep& rep) {
  const AlgebraBasis basis = algebra_basis(space);
  double worst = 0.0;
  for (std::size_t a = 0; a < basis.elements.size(); ++a)
    for (std::size_t b = 0; b < basis.elements.size(); ++b) {
      const auto& xa = basis.elements[a];
      const auto& xb = basis.elements[b];
      const Eigen::VectorXd f = algebra_coords(space, xa * xb - xb * xa);
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(rep.dim(), rep.dim());
      for (Eigen::Index c = 0; c < f.size(); ++c) expected += f(c) * rep.generators[static_cast<std::size_t>(c)];
      const Eigen::MatrixXd got = rep.generators[a] * rep.generators[b] - rep.generators[b] * rep.generators[a];
      worst = std::max(worst, (got - expected).cwiseAbs().maxCoeff());
    }
  return worst;
}

// ---- Υ ----

Eigen::MatrixXd upsilon(const GradedRep& rep, const Curve& curve, double s) {
  if (curve.dim() != rep.n - 1) throw std::invalid_argument("upsilon: curve dimension must be n-1");
  const QuadraticSpace space(rep.n);
  return rep.act(make_u(space, curve.value(s)));
}

std::function<double(double)> upsilon_entry(const GradedRep& rep, const Curve& curve, Eigen::Index i, Eigen::Index j) {
  if (i < 0 || j < 0 || i >= rep.dim() || j >= rep.dim()) throw std::out_of_range("upsilon_entry: index");
  return [&rep, &curve, i, j](double s) { return upsilon(rep, curve, s)(i, j); };
}

std::function<double(double)> upsilon_entry(const GradedRep& rep, const AnalyticCurve& curve, Eigen::Index i,
                                            Eigen::Index j) {
  if (i < 0 || j < 0 || i >= rep.dim() || j >= rep.dim()) throw std::out_of_range("upsilon_entry: index");
  int curve_degree = 0;
  for (const auto& c : curve.components()) curve_degree = std::max(curve_degree, c.degree());
  const int nilpotency = static_cast<int>(std::lround(rep.weights.maxCoeff() - rep.weights.minCoeff()));
  const int degree = std::max(0, nilpotency * curve_degree);

  // Interpolate at Chebyshev nodes in x = (2s - a - b) / (b - a).
  const double a = curve.begin(), b = curve.end();
  const int m = degree + 1;
  Eigen::MatrixXd vandermonde(m, m);
  Eigen::VectorXd values(m);
  for (int k = 0; k < m; ++k) {
    const double x = std::cos(M_PI * (k + 0.5) / m);
    for (int p = 0; p < m; ++p) vandermonde(k, p) = std::pow(x, p);
    values(k) = upsilon(rep, curve, 0.5 * (a + b) + 0.5 * (b - a) * x)(i, j);
  }
  const Eigen::VectorXd coeffs = vandermonde.colPivHouseholderQr().solve(values);
  const Polynomial interpolant(std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
  auto entry = [interpolant, a, b](double s) { return interpolant((2.0 * s - a - b) / (b - a)); };

  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (double s : curve.sample_grid(7)) {
    if (std::abs(entry(s) - upsilon(rep, curve, s)(i, j)) > 1e-9 * scale)
      throw std::runtime_error("upsilon_entry: interpolant disagrees with the representation");
  }
  return entry;
}

// ---- good functions ----

double sublevel_measure(const std::function<double(double)>& xi, double a, double b, double r) {
  constexpr int kCells = 10000;
  const double h = (b - a) / kCells;
  auto below = [&](double s) { return std::abs(xi(s)) - r; };
  auto crossing = [&](double lo, double hi, double glo) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double gm = below(mid);
      if ((gm < 0) == (glo < 0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  double measure = 0.0;
  double s0 = a;
  double g0 = below(s0);
  for (int k = 1; k <= kCells; ++k) {
    const double s1 = k == kCells ? b : a + k * h;
    const double g1 = below(s1);
    const bool in0 = g0 < 0, in1 = g1 < 0;
    if (in0 && in1) {
      measure += s1 - s0;
    } else if (in0 != in1) {
      const double x = crossing(s0, s1, g0);
      measure += in0 ? x - s0 : s1 - x;
    }
    s0 = s1;
    g0 = g1;
  }
  return measure;
}

namespace {

double sup_abs(const std::function<double(double)>& xi, double a, double b) {
  constexpr int kPoints = 10000;
  double best = -1.0;
  int best_k = 0;
  for (int k = 0; k <= kPoints; ++k) {
    const double v = std::abs(xi(a + (b - a) * k / kPoints));
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double lo = a + (b - a) * std::max(0, best_k - 1) / kPoints;
  const double hi = a + (b - a) * std::min(kPoints, best_k + 1) / kPoints;
  const auto found = boost::math::tools::brent_find_minima([&](double s) { return -std::abs(xi(s)); }, lo, hi, 52);
  return std::max(best, -found.second);
}

}  // namespace

GoodFnReport good_function_check(const std::function<double(double)>& xi, double a, double b, double C,
                                 double alpha, std::size_t trials, std::uint64_t seed) {
  if (!(C > 0) || !(alpha > 0)) throw std::invalid_argument("good_function_check: C and alpha must be positive");
  if (!(a < b)) throw std::invalid_argument("good_function_check: empty interval");
  if (trials == 0) throw std::invalid_argument("good_function_check: no trials");
  if (sup_abs(xi, a, b) == 0.0) throw std::invalid_argument("good_function_check: xi vanishes identically");

  GoodFnReport report;
  report.C = C;
  report.alpha = alpha;
  report.samples = trials;
  report.seed = seed;
  report.worst_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    Stream stream(seed, t);
    double lo = 0.0, hi = 0.0;
    do {
      const double u1 = stream.uniform(a, b), u2 = stream.uniform(a, b);
      lo = std::min(u1, u2);
      hi = std::max(u1, u2);
    } while (hi - lo < 1e-9 * (b - a));
    const double sup = sup_abs(xi, lo, hi);
    if (sup == 0.0) continue;
    const double r = sup * std::pow(10.0, -6.0 * stream.uniform());
    const double lhs = sublevel_measure(xi, lo, hi, r);
    const double rhs = C * std::pow(r / sup, alpha) * (hi - lo);
    const double ratio = lhs / rhs;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_j_begin = lo;
      report.worst_j_end = hi;
      report.worst_r = r;
    }
  }
  return report;
}

GoodFnReport good_function_check(const Polynomial& xi, double a, double b, double C, double alpha,
                                 std::size_t trials, std::uint64_t seed) {
  return good_function_check([&xi](double s) { return xi(s); }, a, b, C, alpha, trials, seed);
}

// ---- invariant vectors ----

Eigen::MatrixXd global_invariants(const GradedRep& rep) {
  Eigen::MatrixXd stacked(rep.dim() * static_cast<Eigen::Index>(rep.generators.size()), rep.dim());
  Eigen::Index off = 0;
  for (const auto& g : rep.generators) {
    stacked.block(off, 0, rep.dim(), rep.dim()) = g;
    off += rep.dim();
  }
  return null_columns(stacked, rep.dim(), 1e-8, nullptr, nullptr);
}

InvariantSolution invariant_vector_solver(const GradedRep& rep, const Curve& curve, int sample_count) {
  if (!(curve.interval_length() > 0)) throw std::invalid_argument("invariant_vector_solver: degenerate interval");
  if (sample_count < rep.dim() + 1)
    throw std::invalid_argument("invariant_vector_solver: need at least dim + 1 samples");
  std::vector<Eigen::Index> plus_rows;
  for (Eigen::Index i = 0; i < rep.dim(); ++i)
    if (rep.weights(i) > 1e-9) plus_rows.push_back(i);
  const auto per = static_cast<Eigen::Index>(plus_rows.size());

  Eigen::MatrixXd system(per * sample_count, rep.dim());
  Eigen::Index row = 0;
  for (double s : curve.sample_grid(sample_count)) {
    const Eigen::MatrixXd ups = upsilon(rep, curve, s);
    for (Eigen::Index i : plus_rows) system.row(row++) = ups.row(i);
  }

  InvariantSolution out;
  out.nullspace_basis = null_columns(system, rep.dim(), 1e-8, &out.singular_values, &out.threshold);
  out.global_invariant_basis = global_invariants(rep);
  out.excess_dim = static_cast<int>(out.nullspace_basis.cols() - out.global_invariant_basis.cols());

  const Eigen::Index kept = rep.dim() - out.nullspace_basis.cols();
  const double smallest_kept = kept > 0 ? out.singular_values(kept - 1) : 0.0;
  const double largest_discarded = kept < out.singular_values.size() ? out.singular_values(kept) : 0.0;
  out.gap = largest_discarded > 0 ? smallest_kept / largest_discarded : std::numeric_limits<double>::infinity();
  out.threshold_margin = out.threshold > 0 ? smallest_kept / out.threshold : std::numeric_limits<double>::infinity();
  return out;
}

KappaEstimate kappa_estimate(const QuadraticSpace& space, const GradedRep& rep, double t, std::size_t trials,
                             std::uint64_t seed) {
  if (t == 0.0) throw std::invalid_argument("kappa_estimate: t = 0 makes the inequality false on V-");
  if (space.n() != rep.n) throw std::invalid_argument("kappa_estimate: representation of another group");
  const Eigen::VectorXd x = t * Eigen::VectorXd::Unit(space.n() - 1, 0);
  return kappa_estimate(rep.act(make_u(space, x)), rep.weights, trials, seed);
}

}  // namespace hdyn
