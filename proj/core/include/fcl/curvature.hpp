#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcl/jet.hpp"
#include "fcl/kropina.hpp"
#include "fcl/linalg.hpp"
#include "fcl/riemann.hpp"

namespace fcl::curvature {

/// Spray coefficients G^i(x, y) as jets over (x, y): 2n variables, x first.
/// Consumers read the x-gradient, the y-gradient and the x-y and y-y
/// Hessian blocks; the x-x block is never used.
using SprayEvaluator =
    std::function<std::vector<Jet2>(std::span<const double> x, std::span<const double> y)>;

/// R^i_l = 2 dG^i/dx^l - y^j d2G^i/dx^j dy^l + 2 G^j d2G^i/dy^j dy^l
///         - dG^i/dy^j dG^j/dy^l
Matrix<double> berwald_curvature(const std::vector<Jet2>& spray, std::span<const double> y);
Matrix<double> berwald_curvature(const SprayEvaluator& spray, std::span<const double> x,
                                 std::span<const double> y);

/// h^i_l = delta^i_l - l^i l_l with l^i = y^i / F and l_l = dF/dy^l.
struct FlagProjection {
  Matrix<double> h_mixed;
  double F = 0.0;
};

/// From a phase-space jet of F.
FlagProjection flag_projection(const Jet2& norm, std::span<const double> y);
FlagProjection flag_projection(const kropina::KropinaMetric& metric, std::span<const double> x,
                               std::span<const double> y);

/// l^i l_l in closed form for the generalized Kropina metric:
///   y^i ((m+1) W0 h0l - m h00 W_l) / (W0 h00).
Matrix<double> kropina_flag_quotient(const kropina::HWData& hw, std::span<const double> y);

struct KFit {
  double K = 0.0;
  double rel_residual = 0.0;
};

/// Least-trace fit of R = K F^2 h; residual is relative in Frobenius norm.
KFit estimate_K(const Matrix<double>& R, double F, const Matrix<double>& h_mixed);

/// Spray reconstructed from F alone through the Euler-Lagrange equations:
///   G^i = g^il (y^k d2(F^2)/dx^k dy^l - d(F^2)/dx^l) / 4,
/// with g_ij = d2(F^2)/dy^i dy^j / 2. Independent of any (alpha, beta) formula.
std::vector<double> spray_from_norm(const Jet2& norm, std::span<const double> y);

/// The y-derivative ingredients of the flag-curvature decomposition around
/// the Riemannian spray of h, all as (i, l) matrices.
struct PhiSuite {
  Matrix<double> phi_hl;      // Phi^i||l
  Matrix<double> phi_l;       // Phi^i_l = dPhi^i/dy^l
  Matrix<double> phi_l_0;     // Phi^i_l||0 = y^s Phi^i_l||s
  Matrix<double> phi_phi_l;   // Phi^r_l Phi^i_r
  Matrix<double> phi_phi_rl;  // Phi^r Phi_r^i_l
  Matrix<double> h_curvature;  // curvature operator of h along y
  /// h_curvature + 2 Phi||l - Phi_l||0 + 2 Phi^r Phi_r^i_l - Phi^r_l Phi^i_r
  Matrix<double> assembled;
};

PhiSuite phi_derivative_suite(const kropina::HWData& hw, const kropina::SprayJets& jets,
                              std::span<const double> y);
PhiSuite phi_derivative_suite(const kropina::KropinaMetric& metric, std::span<const double> x,
                              std::span<const double> y);

/// One curvature evaluation at (x, y).
struct CurvatureSample {
  Matrix<double> R;
  double F = 0.0;
  KFit fit;
  /// Residual of the same fit with R assembled from the Phi-derivative
  /// suite, when the space provides it.
  std::optional<double> suite_residual;
  std::optional<double> suite_delta;  // max |R - R_suite| / max(1, max |R|)
};

/// A Finsler space the curvature engine can sample.
class FinslerSpace {
 public:
  virtual ~FinslerSpace() = default;
  virtual int dimension() const = 0;
  virtual std::vector<Jet2> spray(std::span<const double> x, std::span<const double> y) const = 0;
  virtual Jet2 norm(std::span<const double> x, std::span<const double> y) const = 0;
  /// Whether (x, y) lies where F is defined.
  virtual bool in_cone(std::span<const double> x, std::span<const double> y) const = 0;
  /// Whether the sampler may use (x, y); stricter than in_cone.
  virtual bool admissible(std::span<const double> x, std::span<const double> y) const = 0;
  virtual CurvatureSample curvature(std::span<const double> x, std::span<const double> y) const;

  SprayEvaluator spray_evaluator() const;
};

/// F = alpha; the spray is gamma^i_00 / 2.
class RiemannianSpace final : public FinslerSpace {
 public:
  explicit RiemannianSpace(riemann::MetricField metric) : metric_(std::move(metric)) {}
  int dimension() const override { return metric_.dimension(); }
  std::vector<Jet2> spray(std::span<const double> x, std::span<const double> y) const override;
  Jet2 norm(std::span<const double> x, std::span<const double> y) const override;
  bool in_cone(std::span<const double>, std::span<const double>) const override { return true; }
  bool admissible(std::span<const double>, std::span<const double>) const override { return true; }

 private:
  riemann::MetricField metric_;
};

/// Sampling window on s / b, where b is the a-length of the 1-form, plus a
/// keep-out band around the zeros of the Theta denominator (m < 0 only):
/// directions with |s^2 - m s^2 + m b^2| <= theta_margin * max(b^2, s^2)
/// are rejected.
struct SWindow {
  double lo = 0.05;
  double hi = 0.95;
  double theta_margin = 0.02;
};

class KropinaSpace final : public FinslerSpace {
 public:
  KropinaSpace(kropina::KropinaMetric metric, SWindow window = {}, bool with_suite = true)
      : metric_(std::move(metric)), window_(window), with_suite_(with_suite) {}

  const kropina::KropinaMetric& metric() const noexcept { return metric_; }
  int dimension() const override { return metric_.dimension(); }
  std::vector<Jet2> spray(std::span<const double> x, std::span<const double> y) const override;
  Jet2 norm(std::span<const double> x, std::span<const double> y) const override;
  bool in_cone(std::span<const double> x, std::span<const double> y) const override;
  bool admissible(std::span<const double> x, std::span<const double> y) const override;
  CurvatureSample curvature(std::span<const double> x, std::span<const double> y) const override;

 private:
  kropina::KropinaMetric metric_;
  SWindow window_;
  bool with_suite_;
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  bool contains(std::span<const double> x) const;
};

struct SampleConfig {
  Box box;
  int samples = 200;
  std::uint64_t seed = 1;
  double tol_residual = 1e-6;
  double tol_K = 1e-4;
  int threads = 1;
  int max_draws_per_sample = 10000;
};

struct SampleRow {
  int index = 0;
  std::vector<double> x;
  std::vector<double> y;
  double F = 0.0;
  double K_fit = 0.0;
  double rel_residual = 0.0;
  std::optional<double> suite_residual;
  std::optional<double> suite_delta;
  int rejected_draws = 0;
};

struct CheckReport {
  std::vector<SampleRow> rows;
  bool pass = false;
  double K_median = 0.0;
  double K_min = 0.0;
  double K_max = 0.0;
  double K_spread = 0.0;      // K_max - K_min
  double K_spread_rel = 0.0;  // K_spread / (1 + |K_median|)
  double max_residual = 0.0;
  int rejected_draws = 0;
};

/// Draws (x, y) pairs in the box and on the unit sphere from a seeded
/// generator, evaluates the curvature fit of each, and decides
///   pass = max residual < tol_residual && K_spread < tol_K (1 + |K_median|).
/// Samples are drawn sequentially and evaluated in parallel into fixed
/// slots, so the report does not depend on the thread count.
CheckReport constant_curvature_check(const FinslerSpace& space, const SampleConfig& config);

/// Deterministic draws used by the check (exposed for the identity suite).
std::vector<std::pair<std::vector<double>, std::vector<double>>> draw_samples(
    const FinslerSpace& space, const SampleConfig& config, std::vector<int>* rejected = nullptr);

struct TrajectoryPoint {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  double F = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  bool truncated = false;
  std::string reason;
  double max_rel_drift = 0.0;  // max |F(t) - F(0)| / F(0)
};

/// Classical fourth-order Runge-Kutta for x' = y, y' = -2 G(x, y).
/// Stops early (truncated = true) when the state leaves the box or the
/// cone of F. Every `record_every`-th step is stored, plus the last.
Trajectory geodesic_integrate(const FinslerSpace& space, std::span<const double> x0,
                              std::span<const double> y0, double t_end, double dt,
                              const Box* box = nullptr, int record_every = 1);

}  // namespace fcl::curvature
