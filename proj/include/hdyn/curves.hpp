#pragma once

// Curves φ: [a, b] -> R^{n-1} with polynomial components, plus the frame and
// polar machinery used to move the curve's tangent (or position) onto e_1.

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hdyn {

/// Real polynomial with ascending coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double operator()(double s) const;
  Polynomial derivative() const;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<double> coeffs_;
};

class Curve {
 public:
  virtual ~Curve() = default;

  /// Dimension n-1 of the target space.
  virtual int dim() const = 0;
  virtual double begin() const = 0;
  virtual double end() const = 0;
  virtual Eigen::VectorXd value(double s) const = 0;
  virtual Eigen::VectorXd velocity(double s) const = 0;

  double interval_length() const { return end() - begin(); }
  /// Evenly spaced parameters covering [begin, end] including both endpoints.
  std::vector<double> sample_grid(int count) const;
};

class AnalyticCurve : public Curve {
 public:
  AnalyticCurve(std::vector<Polynomial> components, double a, double b, std::string id = {});

  int dim() const override { return static_cast<int>(components_.size()); }
  double begin() const override { return a_; }
  double end() const override { return b_; }
  Eigen::VectorXd value(double s) const override;
  Eigen::VectorXd velocity(double s) const override;

  /// Hyperbolic dimension n of the ambient space.
  int n() const { return dim() + 1; }
  const std::vector<Polynomial>& components() const { return components_; }
  const std::string& id() const { return id_; }

  /// min ‖φ̇‖ over `samples` evenly spaced parameters.
  double min_speed(int samples = 1000) const;
  bool is_nondegenerate(int samples = 1000) const { return min_speed(samples) > 1e-6; }

  friend bool operator==(const AnalyticCurve& x, const AnalyticCurve& y) {
    return x.components_ == y.components_ && x.a_ == y.a_ && x.b_ == y.b_ && x.id_ == y.id_;
  }

 private:
  std::vector<Polynomial> components_;
  std::vector<Polynomial> derivatives_;
  double a_;
  double b_;
  std::string id_;
};

/// Taylor polynomial of cos(ω s + phase) about 0, truncated once the tail is
/// below double resolution on |s| <= reach.
Polynomial taylor_cos(double omega, double phase, double reach);
Polynomial taylor_sin(double omega, double phase, double reach);

/// center + radius (cos(ω s + phase) e1 + sin(ω s + phase) e2) with orthonormal e1, e2.
AnalyticCurve make_circle(const Eigen::VectorXd& center, double radius, const Eigen::VectorXd& e1,
                          const Eigen::VectorXd& e2, double omega, double phase, double a, double b,
                          std::string id = "circle");
/// point + q(s) direction.
AnalyticCurve make_line(const Eigen::VectorXd& point, const Eigen::VectorXd& direction, const Polynomial& q, double a,
                        double b, std::string id = "line");

/// ψ = φ ∘ σ with σ the inverse of arclength; ψ is defined on [0, length].
class UnitSpeedCurve : public Curve {
 public:
  UnitSpeedCurve(std::shared_ptr<const AnalyticCurve> base, int grid);

  int dim() const override { return base_->dim(); }
  double begin() const override { return 0.0; }
  double end() const override { return length_; }
  Eigen::VectorXd value(double s) const override;
  Eigen::VectorXd velocity(double s) const override;

  double length() const { return length_; }
  /// Original parameter σ(s).
  double original_parameter(double s) const;
  const AnalyticCurve& base() const { return *base_; }

 private:
  double arclength_between(double from, double to) const;
  double speed(double sigma) const { return base_->velocity(sigma).norm(); }

  std::shared_ptr<const AnalyticCurve> base_;
  std::vector<double> sigma_nodes_;
  std::vector<double> length_nodes_;
  double length_ = 0.0;
};

UnitSpeedCurve unit_speed_reparam(const AnalyticCurve& curve, int grid = 512);

/// Rotation taking unit a to unit b inside span{a, b}, fixing the orthogonal complement.
Eigen::MatrixXd minimal_rotation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Continuous family R(s) with R(s) e_1 = d(s) for a unit direction field d,
/// obtained by transporting a Householder-pair frame along cached grid nodes.
class FrameTransport {
 public:
  enum class Field { tangent, position };

  FrameTransport(const Curve& curve, Field field, int nodes = 2048);

  /// R(s) with R(s) e_1 = d(s).
  Eigen::MatrixXd rotation(double s) const;
  Eigen::VectorXd direction(double s) const;

 private:
  static constexpr double kOriginTolerance = 1e-6;
  void reject_origin_crossing() const;

  const Curve& curve_;
  Field field_;
  std::vector<double> nodes_;
  std::vector<Eigen::MatrixXd> frames_;
};

/// z(s) in SO(n-1) with z(s) φ̇(s) = e_1 (for n-1 = 1, z(s) = [sign φ̇(s)]).
class FrameZ {
 public:
  explicit FrameZ(const Curve& curve, int nodes = 2048);
  Eigen::MatrixXd operator()(double s) const;

 private:
  FrameTransport transport_;
};

struct PolarData {
  double r;
  Eigen::MatrixXd k;  ///< φ(s) = r k e_1
};

/// φ(s) = r(s) k(s) e_1 with k continuous in s. Rejects curves through the origin.
class PolarDecomposition {
 public:
  explicit PolarDecomposition(const Curve& curve, int nodes = 2048, int check_samples = 1000);
  PolarData operator()(double s) const;
  /// ṙ(s) = <φ, φ̇> / r.
  double r_dot(double s) const;

 private:
  const Curve& curve_;
  FrameTransport transport_;
};

struct SubsphereWitness {
  enum class Kind { sphere, hyperplane };
  Kind kind;
  Eigen::VectorXd center;  ///< sphere only
  double radius = 0.0;     ///< sphere only
  Eigen::VectorXd normal;  ///< hyperplane only: normal · x = offset
  double offset = 0.0;
};

struct SubsphereResult {
  bool contained = false;
  Eigen::VectorXd witness;  ///< unit null vector (a, b, c); empty when not contained
  std::optional<SubsphereWitness> decoded;
  double min_singular_value = 0.0;
  double relative_min_singular_value = 0.0;
};

/// Lifts samples to (1, φ, ‖φ‖²/2) and tests for a rank drop (threshold 1e-8 relative).
SubsphereResult subsphere_detect(const Curve& curve, int samples);
SubsphereWitness decode_witness(const Eigen::VectorXd& witness);

struct SphereOdeReport {
  bool is_constant = false;
  double C = 0.0;
  double max_deviation = 0.0;
  double derivative_residual = 0.0;       ///< max |<φ̇ - 2ṙφ/r, v>| when is_constant
  double matrix_identity_residual = 0.0;  ///< max ‖k E k^{-1} φ̇ - (φ̇ - 2ṙφ/r)‖
};

/// Tests whether <φ(s), v> / r(s)² is constant on samples.
SphereOdeReport sphere_ode_check(const Curve& curve, const Eigen::VectorXd& v, int samples);

/// max over samples of ‖k(s) E k(s)^{-1} φ̇(s) - (φ̇(s) - 2ṙ(s)φ(s)/r(s))‖, E = diag(-1, 1, ..., 1).
double reflection_identity_residual(const Curve& curve, int samples);

}  // namespace hdyn
