#pragma once

// Rank-one models of G/Γ:
//   sl2r: SL(2,R)/SL(2,Z) on the upper half-plane, basepoint i
//   sl2c: SL(2,C)/SL(2,Z[i]) on upper half-space {(z, h) : h > 0}, basepoint (0, 1)
// with the dictionary u(x) = [[1, x], [0, 1]] (x ∈ R or x1 + i x2 ∈ C),
// a_t = diag(e^{t/2}, e^{-t/2}) and M ∋ diag(e^{iθ/2}, e^{-iθ/2}).
//
// A coset hΓ is sent to the orbit Γ·(h^{-1}·basepoint); with this convention
// a_t u(φ(s)) sits at the point -φ(s) + i e^{-t}, a horosphere piece that
// equidistributes as t grows.

#include "hdyn/curves.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hdyn {

enum class Model { sl2r, sl2c };

std::string to_string(Model m);
Model parse_model(const std::string& name);
int model_dimension(Model m);  ///< n = 2 or 3

struct ModelPoint {
  Model model = Model::sl2r;
  std::complex<double> z;  ///< sl2r: x + iy with y > 0; sl2c: horizontal coordinate
  double h = 0.0;          ///< sl2c only: height
  bool reduced = false;

  double height() const { return model == Model::sl2r ? z.imag() : h; }
  /// (x, y) for sl2r, (x, y, h) for sl2c.
  Eigen::VectorXd coords() const;
};

ModelPoint basepoint(Model m);
bool in_fundamental_domain(const ModelPoint& p, double slack = 1e-12);

using Matrix2c = Eigen::Matrix2cd;

Matrix2c sl2_u(Model m, const Eigen::VectorXd& x);
Matrix2c sl2_a(double t);
/// diag(e^{iθ/2}, e^{-iθ/2}); acts on the horizontal coordinate by rotation through θ.
Matrix2c sl2_m(double theta);
Matrix2c sl2_inverse(const Matrix2c& g);

/// Linear fractional (sl2r) or quaternionic (sl2c) action. Real entries are required for sl2r.
ModelPoint mobius_apply(const Matrix2c& g, const ModelPoint& p);

struct Reduction {
  ModelPoint point;
  int word_length = 0;
};

/// Fundamental-domain reduction by translations, the unit i (sl2c) and inversion.
Reduction reduce(const ModelPoint& p);

/// a_t u(φ(s)) g as a 2×2 matrix.
Matrix2c flow_element(Model m, const Curve& curve, double s, double t, const Matrix2c& base);
/// Unreduced point (a_t u(φ(s)) g)^{-1} · basepoint.
ModelPoint flow_point_unreduced(Model m, const Curve& curve, double s, double t, const Matrix2c& base);
ModelPoint flow_point(Model m, const Curve& curve, double s, double t, const Matrix2c& base);

struct TestFunction {
  enum class Kind { bump, constant };
  Kind kind = Kind::bump;
  std::string id;
  Eigen::VectorXd center;
  Eigen::VectorXd widths;
  double value = 1.0;  ///< constant kind only

  double operator()(const ModelPoint& p) const;
  static TestFunction bump(std::string id, Eigen::VectorXd center, Eigen::VectorXd widths);
  static TestFunction constant(std::string id, double value);
};

/// b(u) = exp(1 - 1/(1 - u²)) on |u| < 1, else 0.
double bump_profile(double u);

/// Five bumps inside the fundamental domain, ids bump0..bump4.
std::vector<TestFunction> standard_suite(Model m);

struct HaarResult {
  double value = 0.0;
  double richardson_error = 0.0;  ///< |I(grid) - I(2 grid)| / max(|I(2 grid)|, tiny)
};

/// Unnormalized hyperbolic volume of the fundamental domain.
double domain_volume(Model m, int grid = 8);
HaarResult haar_integral_detail(Model m, const TestFunction& f, int grid = 8);
/// Haar probability integral; throws if the grid-doubling check exceeds 1e-4 relative.
double haar_integral(Model m, const TestFunction& f, int grid = 8);

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string curve_id;
  std::string test_id;
};

/// Monte Carlo estimates of (1/|I|) ∫_I f(a_t u(φ(s)) x) ds for every f, sharing the s-samples.
std::vector<MeasureEstimate> birkhoff_averages(Model m, const Curve& curve, double t, const Matrix2c& base,
                                               const std::vector<TestFunction>& fs, std::size_t samples,
                                               std::uint64_t seed, const std::string& curve_id = {});
MeasureEstimate birkhoff_average(Model m, const Curve& curve, double t, const Matrix2c& base,
                                 const TestFunction& f, std::size_t samples, std::uint64_t seed,
                                 const std::string& curve_id = {});

/// Fraction of sampled s whose reduced height is at most Y.
double nondivergence_fraction(Model m, const Curve& curve, double t, const Matrix2c& base, double Y,
                              std::size_t samples, std::uint64_t seed);

struct WInvarianceResult {
  double delta = 0.0;
  double std_error = 0.0;
};

/// |avg f(u(r e_1) z(s) a_t u(φ(s)) g) - avg f(z(s) a_t u(φ(s)) g)| on shared samples.
WInvarianceResult w_invariance_diagnostic(Model m, const Curve& curve, double t, const Matrix2c& base,
                                          const TestFunction& f, double r, std::size_t samples,
                                          std::uint64_t seed);

struct MeasureRecord {
  Model model;
  MeasureEstimate estimate;
  double haar_value;
};

/// One JSON object per line.
std::string format_record(const MeasureRecord& r);
void write_records(std::ostream& out, const std::vector<MeasureRecord>& records);
/// Whitespace columns: t value std_error haar_value.
void write_plot_data(std::ostream& out, const std::vector<MeasureRecord>& records);

}  // namespace hdyn
