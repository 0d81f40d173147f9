#include "hdyn/curves.hpp"

#include "hdyn/lingroup.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdyn {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 30>;

std::vector<double> trimmed(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

std::vector<double> linear_combination(const std::vector<std::pair<double, const Polynomial*>>& terms) {
  std::size_t size = 1;
  for (const auto& [w, p] : terms) size = std::max(size, p->coeffs().size());
  std::vector<double> out(size, 0.0);
  for (const auto& [w, p] : terms)
    for (std::size_t i = 0; i < p->coeffs().size(); ++i) out[i] += w * p->coeffs()[i];
  return out;
}

Eigen::MatrixXd reflection_e(int dim) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(dim, dim);
  e(0, 0) = -1.0;
  return e;
}

}  // namespace

// ---- Polynomial ----

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(trimmed(std::move(coeffs))) {
  if (coeffs_.empty()) throw std::invalid_argument("polynomial needs at least one coefficient");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw std::invalid_argument("polynomial coefficients must be finite");
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

// ---- Curve ----

std::vector<double> Curve::sample_grid(int count) const {
  if (count < 2) throw std::invalid_argument("sample grid needs at least two points");
  std::vector<double> s(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) s[static_cast<std::size_t>(i)] = begin() + interval_length() * i / (count - 1);
  return s;
}

AnalyticCurve::AnalyticCurve(std::vector<Polynomial> components, double a, double b, std::string id)
    : components_(std::move(components)), a_(a), b_(b), id_(std::move(id)) {
  if (components_.empty()) throw std::invalid_argument("curve needs at least one component");
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("curve interval must be finite");
  if (!(a < b)) throw std::invalid_argument("curve interval [a, b] must have a < b");
  for (const auto& c : components_) {
    if (c.coeffs().empty()) throw std::invalid_argument("curve component has no coefficients");
    derivatives_.push_back(c.derivative());
  }
}

Eigen::VectorXd AnalyticCurve::value(double s) const {
  Eigen::VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v(i) = components_[static_cast<std::size_t>(i)](s);
  return v;
}

Eigen::VectorXd AnalyticCurve::velocity(double s) const {
  Eigen::VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v(i) = derivatives_[static_cast<std::size_t>(i)](s);
  return v;
}

double AnalyticCurve::min_speed(int samples) const {
  double m = std::numeric_limits<double>::infinity();
  for (double s : sample_grid(samples)) m = std::min(m, velocity(s).norm());
  return m;
}

// ---- Taylor circles ----

namespace {

Polynomial taylor_trig(double omega, double phase, double reach, bool sine) {
  const double c = std::cos(phase), s = std::sin(phase);
  const double cycle_cos[4] = {c, -s, -c, s};
  const double cycle_sin[4] = {s, c, -s, -c};
  const double x = std::abs(omega) * std::max(std::abs(reach), 1e-300);
  std::vector<double> coeffs;
  double scale = 1.0;  // ω^k / k!
  double bound = 1.0;  // (|ω| reach)^k / k!
  for (int k = 0;; ++k) {
    coeffs.push_back(scale * (sine ? cycle_sin[k % 4] : cycle_cos[k % 4]));
    if (k > x && bound < 1e-20) break;
    if (k > 400) throw std::invalid_argument("taylor circle: interval too long for a polynomial truncation");
    scale *= omega / (k + 1);
    bound *= x / (k + 1);
  }
  return Polynomial(std::move(coeffs));
}

}  // namespace

Polynomial taylor_cos(double omega, double phase, double reach) { return taylor_trig(omega, phase, reach, false); }
Polynomial taylor_sin(double omega, double phase, double reach) { return taylor_trig(omega, phase, reach, true); }

AnalyticCurve make_circle(const Eigen::VectorXd& center, double radius, const Eigen::VectorXd& e1,
                          const Eigen::VectorXd& e2, double omega, double phase, double a, double b,
                          std::string id) {
  if (center.size() != e1.size() || center.size() != e2.size())
    throw std::invalid_argument("make_circle: dimension mismatch");
  const double reach = std::max(std::abs(a), std::abs(b));
  const Polynomial cs = taylor_cos(omega, phase, reach);
  const Polynomial sn = taylor_sin(omega, phase, reach);
  const Polynomial one({1.0});
  std::vector<Polynomial> comps;
  for (Eigen::Index j = 0; j < center.size(); ++j)
    comps.emplace_back(linear_combination({{center(j), &one}, {radius * e1(j), &cs}, {radius * e2(j), &sn}}));
  return AnalyticCurve(std::move(comps), a, b, std::move(id));
}

AnalyticCurve make_line(const Eigen::VectorXd& point, const Eigen::VectorXd& direction, const Polynomial& q, double a,
                        double b, std::string id) {
  if (point.size() != direction.size()) throw std::invalid_argument("make_line: dimension mismatch");
  const Polynomial one({1.0});
  std::vector<Polynomial> comps;
  for (Eigen::Index j = 0; j < point.size(); ++j)
    comps.emplace_back(linear_combination({{point(j), &one}, {direction(j), &q}}));
  return AnalyticCurve(std::move(comps), a, b, std::move(id));
}

// ---- unit speed ----

UnitSpeedCurve::UnitSpeedCurve(std::shared_ptr<const AnalyticCurve> base, int grid) : base_(std::move(base)) {
  if (grid < 2) throw std::invalid_argument("unit_speed_reparam: grid must have at least 2 nodes");
  if (!base_->is_nondegenerate(std::max(1000, 4 * grid)))
    throw std::invalid_argument("unit_speed_reparam: curve is degenerate (speed below 1e-6)");
  sigma_nodes_ = base_->sample_grid(grid + 1);
  length_nodes_.assign(sigma_nodes_.size(), 0.0);
  for (std::size_t i = 1; i < sigma_nodes_.size(); ++i)
    length_nodes_[i] = length_nodes_[i - 1] + arclength_between(sigma_nodes_[i - 1], sigma_nodes_[i]);
  length_ = length_nodes_.back();
}

double UnitSpeedCurve::arclength_between(double from, double to) const {
  return Gauss::integrate([&](double x) { return speed(x); }, from, to);
}

double UnitSpeedCurve::original_parameter(double s) const {
  if (!(s >= -1e-12 * std::max(1.0, length_) && s <= length_ * (1 + 1e-12) + 1e-12))
    throw std::invalid_argument("unit-speed parameter outside [0, length]");
  s = std::clamp(s, 0.0, length_);
  auto it = std::upper_bound(length_nodes_.begin(), length_nodes_.end(), s);
  std::size_t i = it == length_nodes_.begin() ? 0 : static_cast<std::size_t>(it - length_nodes_.begin()) - 1;
  if (i + 1 >= length_nodes_.size()) return sigma_nodes_.back();

  // Cubic Hermite guess in the cell, then Newton on the arclength equation.
  const double l0 = length_nodes_[i], l1 = length_nodes_[i + 1];
  const double s0 = sigma_nodes_[i], s1 = sigma_nodes_[i + 1];
  const double h = l1 - l0;
  const double u = (s - l0) / h;
  const double d0 = h / speed(s0), d1 = h / speed(s1);
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  double sigma = std::clamp(h00 * s0 + h10 * d0 + h01 * s1 + h11 * d1, s0, s1);
  for (int iter = 0; iter < 20; ++iter) {
    const double step = (l0 + arclength_between(s0, sigma) - s) / speed(sigma);
    sigma = std::clamp(sigma - step, s0, s1);
    if (std::abs(step) <= 1e-15 * (s1 - s0 + std::abs(sigma))) break;
  }
  return sigma;
}

Eigen::VectorXd UnitSpeedCurve::value(double s) const { return base_->value(original_parameter(s)); }

Eigen::VectorXd UnitSpeedCurve::velocity(double s) const {
  const Eigen::VectorXd v = base_->velocity(original_parameter(s));
  return v / v.norm();
}

UnitSpeedCurve unit_speed_reparam(const AnalyticCurve& curve, int grid) {
  return UnitSpeedCurve(std::make_shared<AnalyticCurve>(curve), grid);
}

// ---- frames ----

Eigen::MatrixXd minimal_rotation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.size();
  if (m == 1) {
    if (a(0) * b(0) < 0) throw std::invalid_argument("minimal rotation between antipodal directions");
    return Eigen::MatrixXd::Identity(1, 1);
  }
  const double c = a.dot(b);
  if (1.0 + c < 1e-12) throw std::invalid_argument("minimal rotation between antipodal directions");
  const Eigen::MatrixXd k = b * a.transpose() - a * b.transpose();
  return Eigen::MatrixXd::Identity(m, m) + k + k * k / (1.0 + c);
}

FrameTransport::FrameTransport(const Curve& curve, Field field, int nodes) : curve_(curve), field_(field) {
  if (nodes < 2) throw std::invalid_argument("frame transport needs at least 2 nodes");
  nodes_ = curve.sample_grid(nodes);
  frames_.reserve(nodes_.size());
  if (field == Field::position) reject_origin_crossing();
  Eigen::VectorXd prev = direction(nodes_.front());
  frames_.push_back(householder_pair_rotation(prev));
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    Eigen::VectorXd d = direction(nodes_[i]);
    frames_.push_back(minimal_rotation(prev, d) * frames_.back());
    prev = std::move(d);
  }
}

// A crossing can fall between nodes; intervals where the curve could reach the
// origin at its sampled speed are searched for the minimum of |φ|.
void FrameTransport::reject_origin_crossing() const {
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double lo = nodes_[i], hi = nodes_[i + 1];
    const double reach =
        2.0 * (hi - lo) * std::max(curve_.velocity(lo).norm(), curve_.velocity(hi).norm()) + kOriginTolerance;
    if (std::min(curve_.value(lo).norm(), curve_.value(hi).norm()) > reach) continue;
    const auto found = boost::math::tools::brent_find_minima(
        [&](double s) { return curve_.value(s).squaredNorm(); }, lo, hi, 52);
    if (std::sqrt(found.second) < kOriginTolerance)
      throw std::invalid_argument("polar decomposition: curve passes through the origin near s = " +
                                  std::to_string(found.first));
  }
}

Eigen::VectorXd FrameTransport::direction(double s) const {
  const Eigen::VectorXd v = field_ == Field::tangent ? curve_.velocity(s) : curve_.value(s);
  const double norm = v.norm();
  if (field_ == Field::tangent && norm <= 1e-10)
    throw std::invalid_argument("frame: curve velocity vanishes at s = " + std::to_string(s));
  if (field_ == Field::position && norm < kOriginTolerance)
    throw std::invalid_argument("polar decomposition: curve passes through the origin near s = " +
                                std::to_string(s));
  return v / norm;
}

Eigen::MatrixXd FrameTransport::rotation(double s) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  i = std::min(i, nodes_.size() - 1);
  const Eigen::VectorXd from = frames_[i].col(0);
  return minimal_rotation(from, direction(s)) * frames_[i];
}

FrameZ::FrameZ(const Curve& curve, int nodes) : transport_(curve, FrameTransport::Field::tangent, nodes) {}

Eigen::MatrixXd FrameZ::operator()(double s) const { return transport_.rotation(s).transpose(); }

PolarDecomposition::PolarDecomposition(const Curve& curve, int nodes, int check_samples)
    : curve_(curve), transport_(curve, FrameTransport::Field::position, std::max(nodes, check_samples)) {}

PolarData PolarDecomposition::operator()(double s) const {
  return {curve_.value(s).norm(), transport_.rotation(s)};
}

double PolarDecomposition::r_dot(double s) const {
  const Eigen::VectorXd p = curve_.value(s);
  return p.dot(curve_.velocity(s)) / p.norm();
}

// ---- subsphere detection ----

SubsphereWitness decode_witness(const Eigen::VectorXd& w) {
  const Eigen::Index m = w.size() - 2;
  if (m < 1) throw std::invalid_argument("witness too short");
  const double a = w(0);
  const Eigen::VectorXd b = w.segment(1, m);
  const double c = w(m + 1);
  SubsphereWitness out;
  if (std::abs(c) <= 1e-8 * w.norm()) {
    out.kind = SubsphereWitness::Kind::hyperplane;
    const double nb = b.norm();
    if (nb == 0.0) throw std::invalid_argument("witness encodes no sphere or hyperplane");
    out.normal = b / nb;
    out.offset = -a / nb;
  } else {
    out.kind = SubsphereWitness::Kind::sphere;
    out.center = -b / c;
    out.radius = std::sqrt(std::max(0.0, out.center.squaredNorm() - 2.0 * a / c));
  }
  return out;
}

SubsphereResult subsphere_detect(const Curve& curve, int samples) {
  const int cols = curve.dim() + 2;
  if (samples < cols + 1)
    throw std::invalid_argument("subsphere_detect: need at least n+2 = " + std::to_string(cols + 1) + " samples");
  Eigen::MatrixXd lift(samples, cols);
  const auto grid = curve.sample_grid(samples);
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd p = curve.value(grid[static_cast<std::size_t>(i)]);
    lift(i, 0) = 1.0;
    lift.block(i, 1, 1, cols - 2) = p.transpose();
    lift(i, cols - 1) = 0.5 * p.squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lift, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  SubsphereResult out;
  out.min_singular_value = sv(cols - 1);
  out.relative_min_singular_value = sv(0) > 0 ? sv(cols - 1) / sv(0) : 0.0;
  out.contained = out.relative_min_singular_value <= 1e-8;
  if (out.contained) {
    Eigen::VectorXd w = svd.matrixV().col(cols - 1).normalized();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (std::abs(w(i)) > 1e-12) {
        if (w(i) < 0) w = -w;
        break;
      }
    }
    out.witness = w;
    out.decoded = decode_witness(w);
  }
  return out;
}

// ---- sphere ODE ----

SphereOdeReport sphere_ode_check(const Curve& curve, const Eigen::VectorXd& v, int samples) {
  if (v.size() != curve.dim()) throw std::invalid_argument("sphere_ode_check: v has wrong dimension");
  const auto grid = curve.sample_grid(samples);
  std::vector<double> ratio;
  ratio.reserve(grid.size());
  for (double s : grid) {
    const Eigen::VectorXd p = curve.value(s);
    const double r2 = p.squaredNorm();
    if (r2 < 1e-12) throw std::invalid_argument("sphere_ode_check: curve passes through the origin");
    ratio.push_back(p.dot(v) / r2);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  double mean = 0.0;
  for (double x : ratio) mean += x;
  mean /= static_cast<double>(ratio.size());

  SphereOdeReport out;
  out.C = mean;
  for (double x : ratio) out.max_deviation = std::max(out.max_deviation, std::abs(x - mean));
  out.is_constant = *hi - *lo <= 1e-8 * (1.0 + std::abs(mean));
  if (out.is_constant) {
    const PolarDecomposition polar(curve);
    for (double s : grid) {
      const Eigen::VectorXd p = curve.value(s), pd = curve.velocity(s);
      const double r = p.norm();
      const Eigen::VectorXd rhs = pd - 2.0 * polar.r_dot(s) * p / r;
      out.derivative_residual = std::max(out.derivative_residual, std::abs(rhs.dot(v)));
      const Eigen::MatrixXd k = polar(s).k;
      const Eigen::VectorXd lhs = k * reflection_e(curve.dim()) * k.transpose() * pd;
      out.matrix_identity_residual = std::max(out.matrix_identity_residual, (lhs - rhs).norm());
    }
  }
  return out;
}

double reflection_identity_residual(const Curve& curve, int samples) {
  const PolarDecomposition polar(curve);
  const Eigen::MatrixXd e = reflection_e(curve.dim());
  double worst = 0.0;
  for (double s : curve.sample_grid(samples)) {
    const Eigen::VectorXd p = curve.value(s), pd = curve.velocity(s);
    const PolarData pk = polar(s);
    const Eigen::VectorXd lhs = pk.k * e * pk.k.transpose() * pd;
    const Eigen::VectorXd rhs = pd - 2.0 * polar.r_dot(s) * p / pk.r;
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

}  // namespace hdyn
