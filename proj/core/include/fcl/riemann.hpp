#pragma once

#include <span>
#include <vector>

#include "fcl/expr.hpp"
#include "fcl/jet.hpp"
#include "fcl/linalg.hpp"

namespace fcl::riemann {

/// Symmetric metric a_ij(x); only the upper triangle is stored.
class MetricField {
 public:
  MetricField() = default;
  /// `upper` lists a_11, a_12, ..., a_1n, a_22, ..., a_nn.
  MetricField(int n, std::vector<expr::Expression> upper);

  int dimension() const noexcept { return n_; }
  const expr::Expression& entry(int i, int j) const;

 private:
  int n_ = 0;
  std::vector<expr::Expression> upper_;
};

/// A 1-form b_i(x).
class OneFormField {
 public:
  OneFormField() = default;
  explicit OneFormField(std::vector<expr::Expression> components);

  int dimension() const noexcept { return static_cast<int>(b_.size()); }
  const expr::Expression& component(int i) const { return b_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<expr::Expression> b_;
};

/// A metric at one point: values plus jets exact to second order in x.
struct MetricSample {
  Matrix<double> a;
  Matrix<double> a_inv;
  Matrix<Jet2> jets;
  Matrix<Jet2> inv_jets;

  int dimension() const noexcept { return a.rows(); }
};

/// Evaluates and factors the metric; throws DomainError naming the first
/// leading minor that is not positive.
MetricSample metric_at(const MetricField& metric, std::span<const double> x);

/// Same checks for a metric already available as jets (e.g. a conformal
/// rescaling of another metric).
MetricSample metric_from_jets(Matrix<Jet2> jets);

/// One-form components at x as jets exact to second order.
std::vector<Jet2> one_form_at(const OneFormField& form, std::span<const double> x);

/// Christoffel symbols gamma^i_jk at a point, symmetric in (j, k), with
/// their x-derivatives d gamma^i_jk / d x^l when available.
struct ChristoffelData {
  int n = 0;
  std::vector<double> gamma;
  std::vector<double> dgamma;

  double operator()(int i, int j, int k) const { return gamma[flat(i, j, k)]; }
  double d(int i, int j, int k, int l) const {
    return dgamma[flat(i, j, k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)];
  }
  bool has_derivatives() const noexcept { return !dgamma.empty(); }

  /// gamma^i_jk as a jet in `vars` variables whose first n are x.
  Jet2 jet(int i, int j, int k, int vars) const;

  std::size_t flat(int i, int j, int k) const {
    return static_cast<std::size_t>((i * n + j) * n + k);
  }
};

/// Levi-Civita symbols from metric jets; derivatives included.
ChristoffelData christoffel(const MetricSample& g);
ChristoffelData christoffel(const MetricField& metric, std::span<const double> x);

/// Symbols of e^{2 rho} g from those of g:
///   gamma*^i_jk = gamma^i_jk + rho_j delta^i_k + rho_k delta^i_j - rho^i g_jk.
/// Derivatives of the result are produced when the base carries them and
/// rho and g are jets exact to second order.
ChristoffelData conformal_christoffel(const ChristoffelData& base, const Jet2& rho,
                                      const Matrix<Jet2>& g, const Matrix<Jet2>& g_inv);
/// Value-only variant.
ChristoffelData conformal_christoffel(const ChristoffelData& base, const Jet2& rho,
                                      const Matrix<double>& g, const Matrix<double>& g_inv);

/// Connection of h_ij = e^k a_ij obtained from the connection of a via the
/// conformal law with rho = k/2.
ChristoffelData h_connection(const MetricSample& a, const ChristoffelData& alpha_gamma,
                             const Jet2& k);

/// gamma^i_00 = gamma^i_jk y^j y^k.
std::vector<double> transvect00(const ChristoffelData& gamma, std::span<const double> y);

/// Covariant-derivative invariants of a 1-form under the connection of a.
/// Jets carry first x-derivatives only (their Hessians are not meaningful).
struct BetaInvariants {
  Matrix<Jet2> bcov;     // b_{i;j}
  Matrix<Jet2> r;        // (b_{i;j} + b_{j;i}) / 2
  Matrix<Jet2> s;        // (b_{i;j} - b_{j;i}) / 2
  Matrix<Jet2> s_mixed;  // s^i_j = a^{ir} s_rj
  std::vector<Jet2> s_low;  // s_j = b^i s_ij
  std::vector<Jet2> b_up;   // b^i = a^{ij} b_j (exact to second order)
  Jet2 bsq;                 // b^2 = b_i b^i (exact to second order)
};

BetaInvariants beta_invariants(const MetricSample& a, const ChristoffelData& gamma,
                               const std::vector<Jet2>& b);
BetaInvariants beta_invariants(const MetricField& metric, const OneFormField& form,
                               std::span<const double> x);

/// Riemann tensor R_j^i_kl = d_k gamma^i_jl - d_l gamma^i_jk
///                          + gamma^r_jl gamma^i_rk - gamma^r_jk gamma^i_rl.
/// With this convention R_ijkl u^i v^j u^k v^l / |u ^ v|^2 is +1 on the unit
/// sphere (see sectional_curvature), and the flag transvection
/// R^i_l = y^j R_j^i_lk y^k equals K (|y|^2 delta^i_l - y^i y_l).
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  explicit CurvatureTensor(int n)
      : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

  int dimension() const noexcept { return n_; }
  double& operator()(int j, int i, int k, int l) { return data_[flat(j, i, k, l)]; }
  double operator()(int j, int i, int k, int l) const { return data_[flat(j, i, k, l)]; }

 private:
  std::size_t flat(int j, int i, int k, int l) const {
    return static_cast<std::size_t>(((j * n_ + i) * n_ + k) * n_ + l);
  }
  int n_ = 0;
  std::vector<double> data_;
};

CurvatureTensor riemann_curvature(const ChristoffelData& gamma);
CurvatureTensor riemann_curvature(const MetricField& metric, std::span<const double> x);

/// R^i_l = y^j R_j^i_lk y^k, the curvature operator along y.
Matrix<double> flag_transvection(const CurvatureTensor& r, std::span<const double> y);

double sectional_curvature(const CurvatureTensor& r, const Matrix<double>& g,
                           std::span<const double> u, std::span<const double> v);

/// Index position of a tensor slot.
enum class Slot { upper, lower };

/// A tensor of arbitrary rank over an n-dimensional space, row-major with
/// the last slot varying fastest.
template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, std::vector<Slot> slots, const T& fill = T{})
      : n_(n), slots_(std::move(slots)), data_(size_for(n, slots_.size()), fill) {}

  int dimension() const noexcept { return n_; }
  int rank() const noexcept { return static_cast<int>(slots_.size()); }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }
  T& at(std::initializer_list<int> idx) { return data_[flatten(idx)]; }
  const T& at(std::initializer_list<int> idx) const { return data_[flatten(idx)]; }

  std::vector<int> unflatten(std::size_t flat) const {
    std::vector<int> idx(slots_.size());
    for (std::size_t p = slots_.size(); p-- > 0;) {
      idx[p] = static_cast<int>(flat % static_cast<std::size_t>(n_));
      flat /= static_cast<std::size_t>(n_);
    }
    return idx;
  }
  std::size_t flatten(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    return f;
  }
  std::size_t flatten(std::initializer_list<int> idx) const {
    return flatten(std::span<const int>(idx.begin(), idx.size()));
  }

 private:
  static std::size_t size_for(int n, std::size_t rank) {
    std::size_t s = 1;
    for (std::size_t p = 0; p < rank; ++p) s *= static_cast<std::size_t>(n);
    return s;
  }

  int n_ = 0;
  std::vector<Slot> slots_;
  std::vector<T> data_;
};

/// Horizontal covariant derivative of a tensor field T(x, y) under the
/// connection `gamma` with nonlinear connection N^s_l = gamma^s_lk y^k:
///
///   T_||l = dT/dx^l - (dT/dy^s) N^s_l + sum_upper gamma^a_lr T(..r..)
///                                     - sum_lower gamma^r_la T(..r..)
///
/// Components of `t` are phase-space jets in 2n variables (x first, then y)
/// with valid first derivatives. The result gains a trailing lower slot.
Tensor<double> h_cov_derivative(const Tensor<Jet2>& t, std::span<const double> y,
                                const ChristoffelData& gamma);

/// The Riemannian spray G^i = gamma^i_jk y^j y^k / 2 as phase-space jets.
std::vector<Jet2> riemannian_spray_jets(const ChristoffelData& gamma, std::span<const double> y);

}  // namespace fcl::riemann
