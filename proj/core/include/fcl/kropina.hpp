#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fcl/jet.hpp"
#include "fcl/linalg.hpp"
#include "fcl/riemann.hpp"

namespace fcl::kropina {

/// Default conic guard: directions need beta > eps_beta * alpha.
inline constexpr double kDefaultEpsBeta = 1e-6;

/// F = alpha^(m+1) / beta^m built from a Riemannian metric a and a 1-form b.
class KropinaMetric {
 public:
  KropinaMetric(riemann::MetricField metric, riemann::OneFormField form, double m,
                double eps_beta = kDefaultEpsBeta);

  int dimension() const noexcept { return metric_.dimension(); }
  const riemann::MetricField& metric() const noexcept { return metric_; }
  const riemann::OneFormField& form() const noexcept { return form_; }
  double m() const noexcept { return m_; }
  double eps_beta() const noexcept { return eps_beta_; }

 private:
  riemann::MetricField metric_;
  riemann::OneFormField form_;
  double m_;
  double eps_beta_;
};

/// The profile phi(s) of an (alpha, beta)-metric F = alpha phi(beta/alpha).
class PhiModel {
 public:
  enum class Family { generalized_kropina, randers };

  static PhiModel generalized_kropina(double m) { return PhiModel(Family::generalized_kropina, m); }
  /// phi(s) = 1 + s; kept as a regression guard for the shared spray code.
  static PhiModel randers() { return PhiModel(Family::randers, 0.0); }

  Family family() const noexcept { return family_; }
  double m() const noexcept { return m_; }
  /// Kropina-type profiles live on the half cone beta > 0.
  bool needs_positive_beta() const noexcept { return family_ == Family::generalized_kropina; }

  template <class T>
  T phi(const T& s) const {
    using std::pow;
    return family_ == Family::randers ? 1.0 + s : pow(s, -m_);
  }
  template <class T>
  T dphi(const T& s) const {
    using std::pow;
    return family_ == Family::randers ? T(1.0) : -m_ * pow(s, -m_ - 1.0);
  }
  template <class T>
  T ddphi(const T& s) const {
    using std::pow;
    return family_ == Family::randers ? T(0.0) : m_ * (m_ + 1.0) * pow(s, -m_ - 2.0);
  }

 private:
  PhiModel(Family f, double m) : family_(f), m_(m) {}
  Family family_;
  double m_;
};

/// omega = phi'/(phi - s phi'), its s-derivative, Theta and the b^i
/// coefficient ratio omega'/(omega - s omega') of the spray formula.
template <class T>
struct OmegaTheta {
  T omega;
  T domega;
  T theta;
  T ratio;
};

template <class T>
OmegaTheta<T> omega_theta(const PhiModel& model, const T& s, const T& bsq) {
  const T p = model.phi(s);
  const T dp = model.dphi(s);
  const T ddp = model.ddphi(s);
  const T q = p - s * dp;
  OmegaTheta<T> out;
  out.omega = dp / q;
  out.domega = p * ddp / (q * q);
  const T num = out.omega - s * out.domega;
  out.theta = num / (2.0 * (1.0 + s * out.omega + (bsq - s * s) * out.domega));
  out.ratio = out.domega / num;
  return out;
}

struct PhiFunctions {
  double s = 0.0;
  double bsq = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  double omega = 0.0;
  double domega = 0.0;
  double theta = 0.0;
};

/// phi-machinery of phi(s) = s^-m through the generic definitions.
/// Throws DomainError at s = 0 or where the Theta denominator vanishes.
PhiFunctions phi_functions(double m, double s, double bsq);
/// The same quantities from their closed forms in m, s, b^2.
PhiFunctions phi_closed_form(double m, double s, double bsq);
/// sigma_1 = 2ms / (s^2 - m s^2 + m b^2).
double sigma1(double m, double s, double bsq);

/// Everything that depends on x only, evaluated once per base point.
struct PointFields {
  std::vector<double> x;
  riemann::MetricSample a;
  std::vector<Jet2> b;  // exact to second order
  riemann::ChristoffelData alpha_gamma;
  riemann::BetaInvariants beta;

  int dimension() const noexcept { return a.dimension(); }
};

PointFields point_fields(const riemann::MetricField& metric, const riemann::OneFormField& form,
                         std::span<const double> x);

/// Navigation-style representation h_ij = e^k a_ij, W_i = e^k b_i / 2 with
/// e^k = 4 / b^2, so that ||W||_h = 1, b^i = 2 W^i and
/// F = pi h00^((m+1)/2) / W0^m with pi = e^((m-1)k/2) / 2^m.
struct HWData {
  double m = 0.0;
  Jet2 k;  // exact to second order in x
  Matrix<double> h;
  Matrix<double> h_inv;
  std::vector<double> W;     // W_i
  std::vector<double> W_up;  // W^i = h^ij W_j
  std::vector<double> k_low;  // k_i
  std::vector<double> k_bar;  // h^ij k_j
  double pi_const = 0.0;
  double eps_const = 0.0;  // (e^k)^((m-1)/2)
  double sigma0 = 0.0;      // m/(m+1) e^(((m-1)/m) k) / 2^(m-1)
  double sigma0_alt = 0.0;  // same with exponent ((m-1)/2) k

  Matrix<Jet2> h_jets;
  Matrix<Jet2> h_inv_jets;
  std::vector<Jet2> W_jets;
  riemann::ChristoffelData h_gamma;  // from the conformal law, with derivatives

  double sigma1(double s, double bsq) const { return kropina::sigma1(m, s, bsq); }
};

HWData to_hw(const PointFields& fields, double m);
HWData to_hw(const KropinaMetric& metric, std::span<const double> x);

struct FValue {
  double F = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double s = 0.0;
};

/// Throws DomainError when beta <= eps_beta * alpha or alpha degenerates.
FValue f_value(const KropinaMetric& metric, std::span<const double> x, std::span<const double> y);

/// Spray ingredients as phase-space jets in 2n variables (x, then y).
struct SprayJets {
  std::vector<Jet2> gamma00_alpha;
  std::vector<Jet2> gamma00_h;  // empty without h/W data
  std::vector<Jet2> G;
  std::vector<Jet2> Phi;  // G - gamma00_h / 2; empty without h/W data
  Jet2 F;
};

/// 2G^i = gamma^i_00 + 2 omega alpha s^i_0
///        + 2 Theta (r_00 - 2 alpha omega s_0)(y^i/alpha + omega'/(omega - s omega') b^i).
SprayJets spray_jets(const PointFields& fields, const PhiModel& model, const HWData* hw,
                     std::span<const double> y, double eps_beta = kDefaultEpsBeta);

/// Spray values plus y-derivatives at one point.
struct SprayData {
  std::vector<double> gamma00_alpha;
  std::vector<double> gamma00_h;
  std::vector<double> G;
  std::vector<double> Phi;
  Matrix<double> G_y;           // G^i_j
  Matrix<double> Phi_y;         // Phi^i_j
  std::vector<double> G_yy;     // G^i_jk, flat (i*n + j)*n + k
  std::vector<double> Phi_yy;   // Phi^i_jk
};

SprayData spray_data(const SprayJets& jets, int n);
SprayData spray_alpha_beta(const KropinaMetric& metric, std::span<const double> x,
                           std::span<const double> y);

/// Killing-type invariants of W under the connection of h.
struct KillingInvariants {
  Matrix<double> R;        // R_ij = (W_i||j + W_j||i) / 2
  Matrix<double> S;        // S_ij = (W_i||j - W_j||i) / 2
  Matrix<double> R_mixed;  // R^i_j = h^ir R_rj
  Matrix<double> S_mixed;  // S^i_j = h^ir S_rj
  std::vector<double> R_low;  // R_i = W^r R_ri
  std::vector<double> S_low;  // S_i = W^r S_ri
  std::vector<double> R_up;   // R^i = h^ir R_r
  std::vector<double> S_up;   // S^i = h^ir S_r
};

KillingInvariants killing_invariants(const HWData& hw);

/// Max-abs residuals of the relations tying r, s (covariant derivatives of
/// b under a) to R, S (of W under h), evaluated at one (x, y).
struct KillingRelations {
  double r_ij = 0.0;     // r_ij = 2e^-k (R_ij - W_r kbar^r h_ij / 2)
  double s_ij = 0.0;     // s_ij = 2e^-k (S_ij + (k_i W_j - k_j W_i) / 2)
  double s_mixed = 0.0;  // s^i_j = 2 S^i_j + kbar^i W_j - k_j W^i
  double s_i0 = 0.0;     // s^i_0 = 2 S^i_0 + W0 kbar^i - k0 W^i
  double s_low = 0.0;    // s_i = 2e^-k (2 S_i + W_r kbar^r W_i - k_i)
  double s_0 = 0.0;      // s_0 = 2e^-k (2 S_0 + W_r kbar^r W_0 - k_0)
  double r_00 = 0.0;     // r_00 = 2e^-k (R_00 - W_r kbar^r h00 / 2)
  double b_up = 0.0;     // b^i = 2 W^i
};

KillingRelations killing_relations(const PointFields& fields, const HWData& hw,
                                   std::span<const double> y);

/// One report-only comparison between a closed-form expansion and the
/// value computed from the spray.
struct DiagnosticRow {
  std::string name;
  double reference = 0.0;  // max-abs size of the ground-truth side
  double residual = 0.0;   // max-abs difference
  double relative = 0.0;   // residual / reference (0 when both vanish)
};

/// Evaluates the three-part decomposition
///   2 Phi^i h00^((m+1)/2) W0^m = A1^i h00^(m+1) + A2^i h00^((m+1)/2) W0^m + A3^i W0^(2m)
/// for both sigma0 variants, and the halved-coefficient flag quotient,
/// against the ground truth. Never throws on a mismatch.
std::vector<DiagnosticRow> decomposition_diagnostics(const KropinaMetric& metric,
                                                     std::span<const double> x,
                                                     std::span<const double> y);

}  // namespace fcl::kropina
