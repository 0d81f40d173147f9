// Acceptance run: prints one PASS/FAIL line per check and exits nonzero if any fails.

#include "hdyn/curves.hpp"
#include "hdyn/extadj.hpp"
#include "hdyn/homsim.hpp"
#include "hdyn/lingroup.hpp"
#include "hdyn/sampling.hpp"
#include "hdyn/sl2rep.hpp"

#include "random_objects.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace hdyn;
using hdyn::testing::random_group_element;
using hdyn::testing::random_rotation;
using hdyn::testing::random_vector;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = budget_seconds <= 0 || elapsed < budget_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::ostringstream line;
  line << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail;
  line.precision(3);
  line << " (" << std::fixed << elapsed << " s";
  if (budget_seconds > 0) line << ", budget " << budget_seconds << " s";
  line << ")";
  std::puts(line.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

const std::vector<Rational> kLemmaParameters = {Rational(1),      Rational(-1),     Rational(2), Rational(-2),
                                                 Rational(1, 2), Rational(-1, 2), Rational(3), Rational(-3)};

Rational random_rational(Stream& rng) {
  const auto num = static_cast<long>(rng.engine()() % 21) - 10;
  const auto den = static_cast<long>(rng.engine()() % 6) + 1;
  return Rational(num) / Rational(den);
}

AnalyticCurve random_plane_polynomial(Stream& rng, int degree) {
  std::vector<Polynomial> comps;
  for (int j = 0; j < 2; ++j) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (double& x : c) x = rng.normal();
    comps.emplace_back(c);
  }
  return AnalyticCurve(comps, 0.0, 1.0, "generic");
}

Outcome key_lemma() {
  int cases = 0, bad = 0;
  double worst = 0.0;
  for (int l = 2; l <= 16; l += 2) {
    for (const auto& r : kLemmaParameters) {
      const KeyLemmaReport rep = verify_key_lemma<Rational>(l, r);
      ++cases;
      worst = std::max(worst, rep.max_residual);
      if (!rep.identity_ok || !rep.minus_claim_ok || rep.max_residual != 0.0 || rep.minus_kernel_dim != 0) ++bad;
    }
  }
  return {bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) +
                        " (l, r) pairs exact, max residual " + fmt(worst)};
}

Outcome oracle_equivalence() {
  int bad = 0, checks = 0;
  for (int p = 1; p <= 8; ++p) {
    for (const auto& r : kLemmaParameters) {
      const auto basis = solve_lemma_space<Rational>(2 * p, r);
      ++checks;
      if (basis.size() != 1) {
        ++bad;
        continue;
      }
      std::vector<Rational> c(basis[0].coeffs.data() + p, basis[0].coeffs.data() + 2 * p + 1);
      const auto rep = polynomial_oracle(p, c, r);
      const Rational f1 = (p % 2 == 0) ? c[0] : Rational(-c[0]);
      const bool ok = rep.constraints_hold && rep.F_p_factored && rep.f1_identity_ok && rep.f1 == f1 &&
                      rep.F[static_cast<std::size_t>(p)] ==
                          rep.C * RationalPolynomial::monomial(p) * power_of_linear(Rational(1), p);
      if (!ok) ++bad;
    }
  }
  Stream rng(kSeed, 2);
  int disagreements = 0, members = 0;
  for (int p = 1; p <= 8; ++p) {
    const Rational r = kLemmaParameters[static_cast<std::size_t>(p) % kLemmaParameters.size()];
    const auto basis = solve_lemma_space<Rational>(2 * p, r);
    const auto system = lemma_system<Rational>(2 * p, r);
    for (int trial = 0; trial < 100; ++trial) {
      VectorX<Rational> c(p + 1);
      if (trial % 2 == 0) {
        const Rational scale = random_rational(rng);
        for (int k = 0; k <= p; ++k) c(k) = basis[0].coeffs(p + k) * scale;
      } else {
        for (int k = 0; k <= p; ++k) c(k) = random_rational(rng);
      }
      const VectorX<Rational> residual = system.lazyProduct(c);
      const bool member = residual == VectorX<Rational>::Zero(residual.size());
      members += member;
      const auto rep = polynomial_oracle(p, std::vector<Rational>(c.data(), c.data() + c.size()), r);
      if (rep.constraints_hold != member || (member && !rep.f1_identity_ok)) ++disagreements;
    }
  }
  return {bad == 0 && disagreements == 0,
          std::to_string(checks - bad) + "/" + std::to_string(checks) + " lemma vectors factor exactly, " +
              std::to_string(disagreements) + " membership disagreements on 800 random vectors (" +
              std::to_string(members) + " members)"};
}

Outcome kappa_inequality() {
  std::size_t total_violations = 0;
  double smallest = INFINITY;
  int configs = 0;
  for (int n = 2; n <= 3; ++n) {
    const QuadraticSpace space(n);
    const GradedRep adj = build_adjoint(space);
    for (const GradedRep& rep : {adj, build_exterior(adj, 2)}) {
      for (double t : {1.0, 0.5}) {
        const KappaEstimate est = kappa_estimate(space, rep, t, 20000, kSeed);
        smallest = std::min(smallest, est.kappa_hat);
        const Eigen::MatrixXd u = rep.act(make_u(space, t * Eigen::VectorXd::Unit(n - 1, 0)));
        total_violations += kappa_violations(u, rep.weights, est.kappa_hat / 2, 100000, kSeed + 1);
        ++configs;
      }
    }
  }
  return {smallest > 0.0 && total_violations == 0,
          std::to_string(configs) + " configurations, min kappa_hat " + fmt(smallest) + ", " +
              std::to_string(total_violations) + " violations on 10^5 fresh vectors each"};
}

Outcome subsphere() {
  Stream rng(kSeed, 4);
  int detected = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    if (k % 2 == 0) {
      const Eigen::Vector2d center = random_vector(rng, 2);
      const double radius = rng.uniform(0.3, 3.0);
      const Eigen::Matrix2d frame = random_rotation(rng, 2);
      const double a = rng.uniform(-1.0, 1.0);
      const AnalyticCurve circle =
          make_circle(center, radius, frame.col(0), frame.col(1), rng.uniform(0.5, 2.0), 0.0, a, a + 1.5);
      const SubsphereResult res = subsphere_detect(circle, 200);
      if (!res.contained || res.decoded->kind != SubsphereWitness::Kind::sphere) continue;
      const double err = std::max((res.decoded->center - center).norm(), std::abs(res.decoded->radius - radius));
      worst = std::max(worst, err);
      detected += err <= 1e-6;
    } else {
      const Eigen::Vector2d point = random_vector(rng, 2);
      const Eigen::Vector2d dir = random_vector(rng, 2).normalized();
      const AnalyticCurve line = make_line(point, dir, Polynomial({0.0, 1.0, rng.normal(), rng.normal()}), 0.0, 1.0);
      const SubsphereResult res = subsphere_detect(line, 200);
      if (!res.contained || res.decoded->kind != SubsphereWitness::Kind::hyperplane) continue;
      const Eigen::Vector2d normal(-dir(1), dir(0));
      const double sign = res.decoded->normal.dot(normal) > 0 ? 1.0 : -1.0;
      const double err = std::max((sign * res.decoded->normal - normal).norm(),
                                  std::abs(sign * res.decoded->offset - normal.dot(point)));
      worst = std::max(worst, err);
      detected += err <= 1e-6;
    }
  }
  int rejected = 0;
  for (int k = 0; k < 50; ++k) rejected += !subsphere_detect(random_plane_polynomial(rng, 2 + k % 3), 200).contained;
  return {detected == 50 && rejected == 50, std::to_string(detected) + "/50 constrained curves detected (max witness error " +
                                                fmt(worst) + "), " + std::to_string(rejected) +
                                                "/50 generic curves rejected"};
}

Outcome differential_identity() {
  Stream rng(kSeed, 5);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<Polynomial> comps;
    for (int j = 0; j < 2; ++j)
      comps.emplace_back(std::vector<double>{(j == 0 ? 5.0 : 0.0) + rng.normal(), rng.normal(), 0.5 * rng.normal(),
                                             0.3 * rng.normal()});
    const UnitSpeedCurve psi(std::make_shared<AnalyticCurve>(comps, 0.0, 1.0), 512);
    worst = std::max(worst, reflection_identity_residual(psi, 1000));
  }
  double worst_c = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector2d center = random_vector(rng, 2);
    const double phase = std::atan2(-center(1), -center(0));
    const AnalyticCurve c = make_circle(center, center.norm(), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), 1.0, 0.0,
                                        phase + 0.2, phase + 6.0);
    const SphereOdeReport rep = sphere_ode_check(c, center, 1000);
    worst_c = std::max({worst_c, std::abs(rep.C - 0.5), rep.max_deviation});
  }
  return {worst <= 1e-8 && worst_c <= 1e-8,
          "max identity residual " + fmt(worst) + " on 20 curves, max |<phi,c>/r^2 - 1/2| " + fmt(worst_c) +
              " on 20 circles"};
}

Outcome invariant_dichotomy() {
  const QuadraticSpace space(3);
  const GradedRep adj = build_adjoint(space);
  const GradedRep rep = direct_sum({adj, build_exterior(adj, 2)});
  auto separation = [](const InvariantSolution& s) { return std::isfinite(s.gap) ? s.gap : s.threshold_margin; };
  Stream rng(kSeed, 6);
  int generic_ok = 0;
  double worst_sep = INFINITY;
  for (int k = 0; k < 10; ++k) {
    const InvariantSolution sol = invariant_vector_solver(rep, random_plane_polynomial(rng, 3), 64);
    worst_sep = std::min(worst_sep, separation(sol));
    generic_ok += sol.excess_dim == 0 && separation(sol) >= 1e3;
  }
  const AnalyticCurve circle = make_circle(Eigen::Vector2d::Zero(), 1.0, Eigen::Vector2d(1, 0),
                                           Eigen::Vector2d(0, 1), 1.0, 0.0, 0.0, 2 * M_PI);
  const InvariantSolution sol = invariant_vector_solver(rep, circle, 64);
  worst_sep = std::min(worst_sep, separation(sol));
  const bool circle_ok = sol.excess_dim >= 1 && separation(sol) >= 1e3;
  return {generic_ok == 10 && circle_ok, std::to_string(generic_ok) + "/10 generic curves with excess 0, circle excess " +
                                             std::to_string(sol.excess_dim) + ", min singular-value separation " +
                                             fmt(worst_sep)};
}

double tolerance(const MeasureEstimate& e, double haar) { return std::max(3.0 * e.std_error, 0.05 * haar + 0.005); }

const AnalyticCurve& line_n2() {
  static const AnalyticCurve c({Polynomial({0.0, 1.0})}, 0.0, 1.0, "line_n2");
  return c;
}

Outcome equidistribution() {
  const Model m = Model::sl2r;
  const auto suite = standard_suite(m);
  std::vector<double> haar;
  for (const auto& f : suite) haar.push_back(haar_integral(m, f));
  std::vector<double> worst_dev, worst_se;
  bool within = true;
  std::string devs;
  for (double t : {4.0, 8.0, 12.0}) {
    const auto est = birkhoff_averages(m, line_n2(), t, Matrix2c::Identity(), suite, 1000000, kSeed, "line_n2");
    double dev = 0.0, se = 0.0;
    for (std::size_t k = 0; k < suite.size(); ++k) {
      dev = std::max(dev, std::abs(est[k].value - haar[k]));
      se = std::max(se, est[k].std_error);
      if (t == 12.0 && std::abs(est[k].value - haar[k]) > tolerance(est[k], haar[k])) within = false;
    }
    worst_dev.push_back(dev);
    worst_se.push_back(se);
    devs += (devs.empty() ? "" : ", ") + fmt(dev);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < worst_dev.size(); ++k)
    if (worst_dev[k] > worst_dev[k - 1] + worst_se[k]) monotone = false;
  return {within && monotone, std::string("t=12 estimates ") + (within ? "within" : "outside") +
                                  " tolerance, max deviation at t=4,8,12: " + devs +
                                  (monotone ? " (monotone)" : " (not monotone)")};
}

Outcome negative_control() {
  const Model m = Model::sl2c;
  const auto suite = standard_suite(m);
  std::vector<double> haar;
  for (const auto& f : suite) haar.push_back(haar_integral(m, f));
  const AnalyticCurve circle = make_circle(Eigen::Vector2d::Zero(), 1.0, Eigen::Vector2d(1, 0),
                                           Eigen::Vector2d(0, 1), 1.0, 0.0, 0.0, 2 * M_PI, "circle_n3");
  const AnalyticCurve cubic({Polynomial({0.0, 1.0, 0.0, 0.3}), Polynomial({0.0, -0.2, 1.0})}, 0.0, 1.0, "cubic_n3");
  const std::size_t samples = 1000000;
  const auto ec = birkhoff_averages(m, circle, 10.0, Matrix2c::Identity(), suite, samples, kSeed, "circle_n3");
  double circle_z = 0.0, circle_dev = 0.0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const double dev = std::abs(ec[k].value - haar[k]);
    if (dev > 10.0 * ec[k].std_error) circle_z = std::max(circle_z, dev / ec[k].std_error);
    circle_dev = std::max(circle_dev, dev);
  }
  const auto eg = birkhoff_averages(m, cubic, 10.0, Matrix2c::Identity(), suite, samples, kSeed, "cubic_n3");
  bool cubic_ok = true;
  double cubic_ratio = 0.0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const double ratio = std::abs(eg[k].value - haar[k]) / tolerance(eg[k], haar[k]);
    cubic_ratio = std::max(cubic_ratio, ratio);
    if (ratio > 1.0) cubic_ok = false;
  }
  return {circle_z > 10.0 && cubic_ok, "circle max |dev| " + fmt(circle_dev) + " (max |dev|/se " + fmt(circle_z) + ")" +
                                           ", cubic max |dev|/tolerance " + fmt(cubic_ratio)};
}

Outcome nondivergence() {
  double lowest = 1.0;
  std::string values;
  for (double t : {6.0, 8.0, 10.0, 12.0}) {
    const double f = nondivergence_fraction(Model::sl2r, line_n2(), t, Matrix2c::Identity(), 10.0, 1000000, kSeed);
    lowest = std::min(lowest, f);
    values += (values.empty() ? "" : ", ") + fmt(f);
  }
  return {lowest >= 0.9, "fraction at height <= 10 for t=6,8,10,12: " + values};
}

Outcome w_invariance() {
  const TestFunction f = standard_suite(Model::sl2r).front();
  const auto d4 = w_invariance_diagnostic(Model::sl2r, line_n2(), 4.0, Matrix2c::Identity(), f, 0.5, 1000000, kSeed);
  const auto d12 =
      w_invariance_diagnostic(Model::sl2r, line_n2(), 12.0, Matrix2c::Identity(), f, 0.5, 1000000, kSeed);
  return {d12.delta < d4.delta && d12.delta <= 5.0 * d12.std_error,
          "delta(4) = " + fmt(d4.delta) + ", delta(12) = " + fmt(d12.delta) + ", std_error(12) = " +
              fmt(d12.std_error)};
}

Outcome structure_identities() {
  Stream rng(kSeed, 11);
  constexpr int kCases = 1000;
  constexpr double kTol = 1e-9;
  double form = 0.0, commute = 0.0, equivariance = 0.0, decomposition = 0.0;
  int flow_bad = 0;
  for (int k = 0; k < kCases; ++k) {
    const QuadraticSpace s(2 + k % 3);
    const int m = s.n() - 1;
    form = std::max(form, random_group_element(rng, s).form_residual());

    const Eigen::VectorXd x = random_vector(rng, m);
    const double t = rng.uniform(-3, 3);
    commute = std::max(commute, max_abs_diff(make_a(s, t) * make_u(s, x) * make_a(s, -t), make_u(s, std::exp(t) * x)));

    const Eigen::MatrixXd rot = random_rotation(rng, m);
    const GroupElement mk = make_m(s, rot);
    equivariance = std::max(equivariance, max_abs_diff(mk * make_u(s, x) * mk.inverse(), make_u(s, rot * x)));
    equivariance = std::max(equivariance, max_abs_diff(mk * make_a(s, t), make_a(s, t) * mk));

    const GroupElement h = random_group_element(rng, s);
    if (!visual_map(make_a(s, rng.uniform(-5, 5)) * h).approx_equal(visual_map(h), kTol)) ++flow_bad;

    const Eigen::VectorXd y = random_vector(rng, m, 0.7);
    const Eigen::VectorXd x2 = random_vector(rng, m, 0.7);
    const Eigen::MatrixXd rot2 = random_rotation(rng, m);
    const double t2 = rng.uniform(-2, 2);
    const GroupElement g = make_u_minus(s, y) * make_m(s, rot2) * make_a(s, t2) * make_u(s, x2);
    const auto d = horospherical_decompose(g);
    decomposition = std::max({decomposition, max_abs_diff(d.nminus * d.am * d.u, g), (d.x - x2).norm()});
  }
  const bool ok = form <= kTol && commute <= kTol && equivariance <= kTol && flow_bad == 0 && decomposition <= kTol;
  return {ok, "10^3 cases each: form " + fmt(form) + ", a u a^-1 " + fmt(commute) + ", M-equivariance " +
                  fmt(equivariance) + ", visual-map failures " + std::to_string(flow_bad) + ", decomposition " +
                  fmt(decomposition)};
}

}  // namespace

int main() {
  report(1, "key lemma exactness", 10, key_lemma);
  report(2, "integration oracle equivalence", 10, oracle_equivalence);
  report(3, "kappa inequality", 30, kappa_inequality);
  report(4, "subsphere detector", 10, subsphere);
  report(5, "differential identity", 0, differential_identity);
  report(6, "invariant-vector dichotomy", 60, invariant_dichotomy);
  report(7, "equidistribution of an expanding line, n = 2", 120, equidistribution);
  report(8, "negative control, n = 3", 180, negative_control);
  report(9, "nondivergence", 0, nondivergence);
  report(10, "W-invariance", 0, w_invariance);
  report(11, "structure identities", 0, structure_identities);
  std::printf("%d of 11 failed\n", failures);
  return failures == 0 ? 0 : 1;
}
