#include "hdyn/homsim.hpp"

#include "hdyn/sampling.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hdyn {

namespace {

using cd = std::complex<double>;
using Gauss10 = boost::math::quadrature::gauss<double, 10>;

constexpr int kReduceCap = 10000;
constexpr double kFlowTimeLimit = 60.0;

void require_dimension(Model m, const Curve& curve) {
  if (curve.dim() != model_dimension(m) - 1)
    throw std::invalid_argument("curve of dimension " + std::to_string(curve.dim()) + " does not fit model " +
                                to_string(m));
}

// Composite Gauss-Legendre nodes and weights on [lo, hi] with `panels` panels.
void composite_rule(double lo, double hi, int panels, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  const auto& abs = Gauss10::abscissa();
  const auto& wts = Gauss10::weights();
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t k = 0; k < abs.size(); ++k) {
      if (abs[k] == 0.0) {
        x.push_back(mid);
        w.push_back(wts[k] * half);
        continue;
      }
      x.push_back(mid - half * abs[k]);
      w.push_back(wts[k] * half);
      x.push_back(mid + half * abs[k]);
      w.push_back(wts[k] * half);
    }
  }
}

double integrate_1d(const std::function<double(double)>& f, double lo, double hi, int panels) {
  std::vector<double> x, w;
  composite_rule(lo, hi, panels, x, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
  return acc;
}

double min_square(double c, double w) {
  const double lo = c - w, hi = c + w;
  if (lo <= 0.0 && hi >= 0.0) return 0.0;
  return std::min(lo * lo, hi * hi);
}

void require_supported(Model m, const TestFunction& f) {
  if (f.kind == TestFunction::Kind::constant) return;
  const auto& c = f.center;
  const auto& w = f.widths;
  const bool ok = m == Model::sl2r
                      ? std::abs(c(0)) + w(0) < 0.5 && c(1) - w(1) > 0 &&
                            min_square(c(0), w(0)) + (c(1) - w(1)) * (c(1) - w(1)) > 1.0
                      : std::abs(c(0)) + w(0) < 0.5 && c(1) - w(1) > 0.0 && c(1) + w(1) < 0.5 && c(2) - w(2) > 0 &&
                            min_square(c(0), w(0)) + min_square(c(1), w(1)) + (c(2) - w(2)) * (c(2) - w(2)) > 1.0;
  if (!ok) throw std::invalid_argument("test function '" + f.id + "' is not supported inside the fundamental domain");
}

double raw_integral(Model m, const TestFunction& f, int grid) {
  const auto& c = f.center;
  const auto& w = f.widths;
  if (m == Model::sl2r) {
    return integrate_1d(
        [&](double x) {
          return integrate_1d(
              [&](double y) {
                ModelPoint p{Model::sl2r, cd(x, y), 0.0, true};
                return f(p) / (y * y);
              },
              c(1) - w(1), c(1) + w(1), grid);
        },
        c(0) - w(0), c(0) + w(0), grid);
  }
  return integrate_1d(
      [&](double x) {
        return integrate_1d(
            [&](double y) {
              return integrate_1d(
                  [&](double h) {
                    ModelPoint p{Model::sl2c, cd(x, y), h, true};
                    return f(p) / (h * h * h);
                  },
                  c(2) - w(2), c(2) + w(2), grid);
            },
            c(1) - w(1), c(1) + w(1), grid);
      },
      c(0) - w(0), c(0) + w(0), grid);
}

std::vector<double> sample_parameters(const Curve& curve, std::size_t samples, std::uint64_t seed) {
  std::vector<double> s(samples);
  const std::size_t batches = batch_count(samples);
  for_each_batch(batches, [&](std::size_t b) {
    Stream stream(seed, b);
    const std::size_t begin = b * kSamplesPerBatch;
    const std::size_t end = std::min(samples, begin + kSamplesPerBatch);
    for (std::size_t i = begin; i < end; ++i) s[i] = stream.uniform(curve.begin(), curve.end());
  });
  return s;
}

// Runs body(i, s_i) over all samples in parallel batches.
void for_each_sample(const std::vector<double>& s, const std::function<void(std::size_t, double)>& body) {
  const std::size_t batches = batch_count(s.size());
  for_each_batch(batches, [&](std::size_t b) {
    const std::size_t begin = b * kSamplesPerBatch;
    const std::size_t end = std::min(s.size(), begin + kSamplesPerBatch);
    for (std::size_t i = begin; i < end; ++i) body(i, s[i]);
  });
}

std::pair<double, double> mean_and_std_error(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  const double mean = pairwise_sum(v) / n;
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return {v.empty() ? 0.0 : v.front(), 0.0};
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = v.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

void require_samples(std::size_t samples) {
  if (samples < 1000) throw std::invalid_argument("Monte Carlo estimates need at least 1000 samples");
}

void require_unimodular(const Matrix2c& g) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (std::abs(g.determinant() - cd(1.0)) > 1e-9 * scale * scale)
    throw std::invalid_argument("matrix is not unimodular (|det g - 1| > 1e-9)");
}

}  // namespace

std::string to_string(Model m) { return m == Model::sl2r ? "sl2r" : "sl2c"; }

Model parse_model(const std::string& name) {
  if (name == "sl2r") return Model::sl2r;
  if (name == "sl2c") return Model::sl2c;
  throw std::invalid_argument("unknown model '" + name + "' (expected sl2r or sl2c)");
}

int model_dimension(Model m) { return m == Model::sl2r ? 2 : 3; }

Eigen::VectorXd ModelPoint::coords() const {
  if (model == Model::sl2r) return Eigen::Vector2d(z.real(), z.imag());
  return Eigen::Vector3d(z.real(), z.imag(), h);
}

ModelPoint basepoint(Model m) {
  return m == Model::sl2r ? ModelPoint{m, cd(0.0, 1.0), 0.0, true} : ModelPoint{m, cd(0.0, 0.0), 1.0, true};
}

bool in_fundamental_domain(const ModelPoint& p, double slack) {
  if (p.model == Model::sl2r)
    return p.z.imag() > 0 && std::abs(p.z.real()) <= 0.5 + slack && std::abs(p.z) >= 1.0 - slack;
  return p.h > 0 && std::abs(p.z.real()) <= 0.5 + slack && p.z.imag() >= -slack && p.z.imag() <= 0.5 + slack &&
         std::norm(p.z) + p.h * p.h >= 1.0 - slack;
}

Matrix2c sl2_u(Model m, const Eigen::VectorXd& x) {
  if (x.size() != model_dimension(m) - 1) throw std::invalid_argument("sl2_u: parameter has wrong dimension");
  Matrix2c g = Matrix2c::Identity();
  g(0, 1) = m == Model::sl2r ? cd(x(0), 0.0) : cd(x(0), x(1));
  return g;
}

Matrix2c sl2_a(double t) {
  if (!(std::abs(t) <= kFlowTimeLimit)) throw std::overflow_error("a_t: |t| must not exceed 60");
  Matrix2c g = Matrix2c::Zero();
  g(0, 0) = std::exp(0.5 * t);
  g(1, 1) = std::exp(-0.5 * t);
  return g;
}

Matrix2c sl2_m(double theta) {
  Matrix2c g = Matrix2c::Zero();
  g(0, 0) = std::polar(1.0, 0.5 * theta);
  g(1, 1) = std::polar(1.0, -0.5 * theta);
  return g;
}

Matrix2c sl2_inverse(const Matrix2c& g) {
  Matrix2c out;
  out << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
  return out / g.determinant();
}

ModelPoint mobius_apply(const Matrix2c& g, const ModelPoint& p) {
  require_unimodular(g);
  const cd a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  ModelPoint out = p;
  out.reduced = false;
  if (p.model == Model::sl2r) {
    if (g.imag().cwiseAbs().maxCoeff() > 0.0) throw std::invalid_argument("half-plane model needs a real matrix");
    if (!(p.z.imag() > 0)) throw std::invalid_argument("half-plane point must have y > 0");
    const cd den = c * p.z + d;
    if (std::norm(den) < 1e-300) throw std::underflow_error("mobius_apply: denominator underflow");
    out.z = (a * p.z + b) / den;
    if (!(out.z.imag() > 0)) throw std::underflow_error("mobius_apply: image left the half-plane");
    return out;
  }
  if (!(p.h > 0)) throw std::invalid_argument("half-space point must have h > 0");
  const cd cz_d = c * p.z + d;
  const double den = std::norm(cz_d) + std::norm(c) * p.h * p.h;
  if (den < 1e-300) throw std::underflow_error("mobius_apply: denominator underflow");
  out.z = ((a * p.z + b) * std::conj(cz_d) + a * std::conj(c) * p.h * p.h) / den;
  out.h = p.h / den;
  if (!(out.h > 0)) throw std::underflow_error("mobius_apply: image left the half-space");
  return out;
}

Reduction reduce(const ModelPoint& p) {
  Reduction r{p, 0};
  ModelPoint& q = r.point;
  if (!(q.height() > 0)) throw std::invalid_argument("reduce: point must lie above the boundary");
  for (int iter = 0; iter < kReduceCap; ++iter) {
    const double nx = std::round(q.z.real());
    double ny = 0.0;
    if (q.model == Model::sl2c) ny = std::round(q.z.imag());
    if (nx != 0.0 || ny != 0.0) {
      q.z -= cd(nx, ny);
      ++r.word_length;
    }
    if (q.model == Model::sl2c && q.z.imag() < 0.0) {
      q.z = -q.z;
      ++r.word_length;
    }
    const double rho = q.model == Model::sl2r ? std::norm(q.z) : std::norm(q.z) + q.h * q.h;
    if (rho >= 1.0 - 1e-15) {
      q.reduced = true;
      return r;
    }
    if (q.model == Model::sl2r) {
      q.z = -1.0 / q.z;
    } else {
      q.z = -std::conj(q.z) / rho;
      q.h = q.h / rho;
    }
    ++r.word_length;
  }
  throw std::runtime_error("reduce: iteration cap of 10^4 exceeded");
}

Matrix2c flow_element(Model m, const Curve& curve, double s, double t, const Matrix2c& base) {
  require_dimension(m, curve);
  return sl2_a(t) * sl2_u(m, curve.value(s)) * base;
}

ModelPoint flow_point_unreduced(Model m, const Curve& curve, double s, double t, const Matrix2c& base) {
  require_unimodular(base);
  return mobius_apply(sl2_inverse(flow_element(m, curve, s, t, base)), basepoint(m));
}

ModelPoint flow_point(Model m, const Curve& curve, double s, double t, const Matrix2c& base) {
  return reduce(flow_point_unreduced(m, curve, s, t, base)).point;
}

// ---- test functions ----

double bump_profile(double u) {
  if (!(std::abs(u) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double TestFunction::operator()(const ModelPoint& p) const {
  if (kind == Kind::constant) return value;
  const Eigen::VectorXd x = p.coords();
  if (x.size() != center.size()) throw std::invalid_argument("test function '" + id + "' evaluated on wrong model");
  double acc = 1.0;
  for (Eigen::Index i = 0; i < x.size() && acc != 0.0; ++i) acc *= bump_profile((x(i) - center(i)) / widths(i));
  return acc;
}

TestFunction TestFunction::bump(std::string id, Eigen::VectorXd center, Eigen::VectorXd widths) {
  if (center.size() != widths.size() || center.size() < 2 || center.size() > 3)
    throw std::invalid_argument("bump: center and widths must both have 2 or 3 entries");
  if (!(widths.minCoeff() > 0)) throw std::invalid_argument("bump: widths must be positive");
  TestFunction f;
  f.kind = Kind::bump;
  f.id = std::move(id);
  f.center = std::move(center);
  f.widths = std::move(widths);
  return f;
}

TestFunction TestFunction::constant(std::string id, double value) {
  TestFunction f;
  f.kind = Kind::constant;
  f.id = std::move(id);
  f.value = value;
  return f;
}

std::vector<TestFunction> standard_suite(Model m) {
  std::vector<TestFunction> out;
  if (m == Model::sl2r) {
    const double table[5][4] = {
        {0.0, 1.5, 0.2, 0.2}, {0.25, 1.2, 0.15, 0.1}, {-0.3, 1.1, 0.1, 0.1}, {0.0, 2.5, 0.3, 0.5}, {0.42, 0.97, 0.04, 0.025}};
    for (int i = 0; i < 5; ++i)
      out.push_back(TestFunction::bump("bump" + std::to_string(i), Eigen::Vector2d(table[i][0], table[i][1]),
                                       Eigen::Vector2d(table[i][2], table[i][3])));
  } else {
    const double table[5][6] = {{0.0, 0.25, 1.5, 0.3, 0.2, 0.3},
                                {0.2, 0.2, 1.1, 0.15, 0.15, 0.1},
                                {-0.25, 0.3, 1.1, 0.1, 0.1, 0.08},
                                {0.0, 0.25, 2.5, 0.3, 0.2, 0.5},
                                {0.3, 0.35, 1.0, 0.05, 0.05, 0.05}};
    for (int i = 0; i < 5; ++i)
      out.push_back(TestFunction::bump("bump" + std::to_string(i),
                                       Eigen::Vector3d(table[i][0], table[i][1], table[i][2]),
                                       Eigen::Vector3d(table[i][3], table[i][4], table[i][5])));
  }
  return out;
}

// ---- Haar ----

double domain_volume(Model m, int grid) {
  if (grid < 1) throw std::invalid_argument("quadrature grid must be positive");
  // Substitutions w = 1/y (sl2r) and w = 1/(2h²) (sl2c) turn the cusp into a finite box.
  if (m == Model::sl2r) {
    return integrate_1d(
        [&](double x) { return integrate_1d([](double) { return 1.0; }, 0.0, 1.0 / std::sqrt(1.0 - x * x), grid); },
        -0.5, 0.5, grid);
  }
  return integrate_1d(
      [&](double x) {
        return integrate_1d(
            [&](double y) {
              return integrate_1d([](double) { return 1.0; }, 0.0, 0.5 / (1.0 - x * x - y * y), grid);
            },
            0.0, 0.5, grid);
      },
      -0.5, 0.5, grid);
}

HaarResult haar_integral_detail(Model m, const TestFunction& f, int grid) {
  if (grid < 1) throw std::invalid_argument("quadrature grid must be positive");
  if (f.kind == TestFunction::Kind::constant) return {f.value, 0.0};
  if (f.center.size() != model_dimension(m)) throw std::invalid_argument("test function does not fit the model");
  require_supported(m, f);
  static const double vol_r = domain_volume(Model::sl2r, 16);
  static const double vol_c = domain_volume(Model::sl2c, 16);
  const double vol = m == Model::sl2r ? vol_r : vol_c;
  const double coarse = raw_integral(m, f, grid) / vol;
  const double fine = raw_integral(m, f, 2 * grid) / vol;
  return {fine, std::abs(fine - coarse) / std::max(std::abs(fine), 1e-300)};
}

double haar_integral(Model m, const TestFunction& f, int grid) {
  const HaarResult r = haar_integral_detail(m, f, grid);
  if (r.richardson_error > 1e-4)
    throw std::runtime_error("haar_integral: grid-doubling disagreement above 1e-4 for '" + f.id + "'");
  return r.value;
}

// ---- Monte Carlo ----

std::vector<MeasureEstimate> birkhoff_averages(Model m, const Curve& curve, double t, const Matrix2c& base,
                                               const std::vector<TestFunction>& fs, std::size_t samples,
                                               std::uint64_t seed, const std::string& curve_id) {
  require_samples(samples);
  require_dimension(m, curve);
  require_unimodular(base);
  sl2_a(t);
  const auto s = sample_parameters(curve, samples, seed);
  std::vector<std::vector<double>> values(fs.size(), std::vector<double>(samples));
  for_each_sample(s, [&](std::size_t i, double si) {
    const ModelPoint p = flow_point(m, curve, si, t, base);
    for (std::size_t k = 0; k < fs.size(); ++k) values[k][i] = fs[k](p);
  });
  std::vector<MeasureEstimate> out;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto [mean, se] = mean_and_std_error(values[k]);
    out.push_back({mean, se, t, samples, seed, curve_id, fs[k].id});
  }
  return out;
}

MeasureEstimate birkhoff_average(Model m, const Curve& curve, double t, const Matrix2c& base,
                                 const TestFunction& f, std::size_t samples, std::uint64_t seed,
                                 const std::string& curve_id) {
  return birkhoff_averages(m, curve, t, base, {f}, samples, seed, curve_id).front();
}

double nondivergence_fraction(Model m, const Curve& curve, double t, const Matrix2c& base, double Y,
                              std::size_t samples, std::uint64_t seed) {
  if (!(Y > 1.0)) throw std::invalid_argument("nondivergence_fraction: height cutoff must exceed 1");
  if (samples == 0) throw std::invalid_argument("nondivergence_fraction: no samples");
  require_dimension(m, curve);
  const auto s = sample_parameters(curve, samples, seed);
  std::vector<double> inside(samples);
  for_each_sample(s, [&](std::size_t i, double si) {
    inside[i] = flow_point(m, curve, si, t, base).height() <= Y ? 1.0 : 0.0;
  });
  return pairwise_sum(inside) / static_cast<double>(samples);
}

WInvarianceResult w_invariance_diagnostic(Model m, const Curve& curve, double t, const Matrix2c& base,
                                          const TestFunction& f, double r, std::size_t samples,
                                          std::uint64_t seed) {
  if (!(std::abs(r) <= 1.0)) throw std::invalid_argument("w_invariance_diagnostic: need |r| <= 1");
  require_samples(samples);
  require_dimension(m, curve);
  require_unimodular(base);
  std::optional<FrameZ> frame;
  if (m == Model::sl2c) frame.emplace(curve);
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(model_dimension(m) - 1, 0);
  const Matrix2c shift = sl2_u(m, r * e1);
  const auto s = sample_parameters(curve, samples, seed);
  std::vector<double> diff(samples);
  for_each_sample(s, [&](std::size_t i, double si) {
    Matrix2c zm = Matrix2c::Identity();
    if (frame) {
      const Eigen::MatrixXd z = (*frame)(si);
      zm = sl2_m(std::atan2(z(1, 0), z(0, 0)));
    }
    const Matrix2c plain = zm * flow_element(m, curve, si, t, base);
    const ModelPoint p0 = reduce(mobius_apply(sl2_inverse(plain), basepoint(m))).point;
    const ModelPoint p1 = reduce(mobius_apply(sl2_inverse(shift * plain), basepoint(m))).point;
    diff[i] = f(p1) - f(p0);
  });
  const auto [mean, se] = mean_and_std_error(diff);
  return {std::abs(mean), se};
}

// ---- output ----

std::string format_record(const MeasureRecord& r) {
  nlohmann::ordered_json j;
  j["model"] = to_string(r.model);
  j["curve"] = r.estimate.curve_id;
  j["t"] = r.estimate.t;
  j["samples"] = r.estimate.samples;
  j["seed"] = r.estimate.seed;
  j["test_function"] = r.estimate.test_id;
  j["value"] = r.estimate.value;
  j["std_error"] = r.estimate.std_error;
  j["haar_value"] = r.haar_value;
  return j.dump();
}

void write_records(std::ostream& out, const std::vector<MeasureRecord>& records) {
  for (const auto& r : records) out << format_record(r) << '\n';
}

void write_plot_data(std::ostream& out, const std::vector<MeasureRecord>& records) {
  out << "# t value std_error haar_value\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : records)
    line << r.estimate.t << ' ' << r.estimate.value << ' ' << r.estimate.std_error << ' ' << r.haar_value << '\n';
  out << line.str();
}

}  // namespace hdyn
