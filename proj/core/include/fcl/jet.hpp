#pragma once

#include <array>
#include <cmath>

namespace fcl {

/// Maximum number of independent variables a Jet2 can carry.
/// Phase-space jets use 2n variables (x then y), so n <= 6.
inline constexpr int kMaxJetVars = 12;

/// Forward-mode jet carrying a value, its gradient and its (symmetric)
/// Hessian with respect to up to kMaxJetVars independent variables.
///
/// Unused slots beyond vars() are always zero, so jets with different
/// variable counts combine by treating the shorter one as constant in the
/// missing directions. The Hessian is stored once (packed lower triangle),
/// so it is symmetric by construction.
class Jet2 {
 public:
  Jet2() = default;
  explicit Jet2(double value, int vars = 0) : n_(vars), v_(value) {}

  /// The coordinate function `index` evaluated at `value`.
  static Jet2 variable(double value, int index, int vars) {
    Jet2 j(value, vars);
    j.g_[static_cast<std::size_t>(index)] = 1.0;
    return j;
  }

  int vars() const noexcept { return n_; }
  double value() const noexcept { return v_; }
  double grad(int i) const { return g_[static_cast<std::size_t>(i)]; }
  double hess(int i, int j) const { return h_[packed(i, j)]; }

  void set_vars(int vars) noexcept { n_ = vars; }
  void set_value(double v) noexcept { v_ = v; }
  void set_grad(int i, double v) { g_[static_cast<std::size_t>(i)] = v; }
  void set_hess(int i, int j, double v) { h_[packed(i, j)] = v; }

  Jet2 operator-() const {
    Jet2 r(*this);
    r.v_ = -v_;
    for (int i = 0; i < n_; ++i) r.g_[idx(i)] = -g_[idx(i)];
    for (int k = 0; k < tri(n_); ++k) r.h_[idx(k)] = -h_[idx(k)];
    return r;
  }

  Jet2& operator+=(const Jet2& o) {
    widen(o.n_);
    v_ += o.v_;
    for (int i = 0; i < o.n_; ++i) g_[idx(i)] += o.g_[idx(i)];
    for (int k = 0; k < tri(o.n_); ++k) h_[idx(k)] += o.h_[idx(k)];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    widen(o.n_);
    v_ -= o.v_;
    for (int i = 0; i < o.n_; ++i) g_[idx(i)] -= o.g_[idx(i)];
    for (int k = 0; k < tri(o.n_); ++k) h_[idx(k)] -= o.h_[idx(k)];
    return *this;
  }
  Jet2& operator*=(const Jet2& o) {
    const int n = n_ > o.n_ ? n_ : o.n_;
    Jet2 r(v_ * o.v_, n);
    for (int i = 0; i < n; ++i) {
      r.g_[idx(i)] = v_ * o.g_[idx(i)] + o.v_ * g_[idx(i)];
      for (int j = 0; j <= i; ++j) {
        r.h_[packed(i, j)] = v_ * o.h_[packed(i, j)] + o.v_ * h_[packed(i, j)] +
                             g_[idx(i)] * o.g_[idx(j)] + o.g_[idx(i)] * g_[idx(j)];
      }
    }
    *this = r;
    return *this;
  }
  Jet2& operator/=(const Jet2& o);

  Jet2& operator+=(double c) {
    v_ += c;
    return *this;
  }
  Jet2& operator-=(double c) {
    v_ -= c;
    return *this;
  }
  Jet2& operator*=(double c) {
    v_ *= c;
    for (int i = 0; i < n_; ++i) g_[idx(i)] *= c;
    for (int k = 0; k < tri(n_); ++k) h_[idx(k)] *= c;
    return *this;
  }
  Jet2& operator/=(double c) { return *this *= (1.0 / c); }

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
  friend Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }
  friend Jet2 operator+(Jet2 a, double c) { return a += c; }
  friend Jet2 operator+(double c, Jet2 a) { return a += c; }
  friend Jet2 operator-(Jet2 a, double c) { return a -= c; }
  friend Jet2 operator-(double c, const Jet2& a) { return (-a) += c; }
  friend Jet2 operator*(Jet2 a, double c) { return a *= c; }
  friend Jet2 operator*(double c, Jet2 a) { return a *= c; }
  friend Jet2 operator/(Jet2 a, double c) { return a /= c; }
  friend Jet2 operator/(double c, const Jet2& a);

  /// Applies a scalar function with f(u) = f0, f'(u) = f1, f''(u) = f2.
  friend Jet2 compose(const Jet2& u, double f0, double f1, double f2) {
    Jet2 r(f0, u.n_);
    for (int i = 0; i < u.n_; ++i) {
      r.g_[idx(i)] = f1 * u.g_[idx(i)];
      for (int j = 0; j <= i; ++j) {
        r.h_[packed(i, j)] = f1 * u.h_[packed(i, j)] + f2 * u.g_[idx(i)] * u.g_[idx(j)];
      }
    }
    return r;
  }

 private:
  static constexpr std::size_t idx(int i) { return static_cast<std::size_t>(i); }
  static constexpr int tri(int n) { return n * (n + 1) / 2; }
  static constexpr std::size_t packed(int i, int j) {
    return i >= j ? idx(i * (i + 1) / 2 + j) : idx(j * (j + 1) / 2 + i);
  }
  void widen(int n) noexcept {
    if (n > n_) n_ = n;
  }

  int n_ = 0;
  double v_ = 0.0;
  std::array<double, kMaxJetVars> g_{};
  std::array<double, kMaxJetVars*(kMaxJetVars + 1) / 2> h_{};
};

inline Jet2 operator/(double c, const Jet2& a) {
  const double inv = 1.0 / a.value();
  return compose(a, c * inv, -c * inv * inv, 2.0 * c * inv * inv * inv);
}

inline Jet2& Jet2::operator/=(const Jet2& o) {
  const double inv = 1.0 / o.v_;
  return *this *= compose(o, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 sin(const Jet2& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return compose(u, s, c, -s);
}
inline Jet2 cos(const Jet2& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return compose(u, c, -s, -c);
}
inline Jet2 tan(const Jet2& u) {
  const double t = std::tan(u.value());
  const double sec2 = 1.0 + t * t;
  return compose(u, t, sec2, 2.0 * t * sec2);
}
inline Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.value());
  return compose(u, e, e, e);
}
inline Jet2 log(const Jet2& u) {
  const double inv = 1.0 / u.value();
  return compose(u, std::log(u.value()), inv, -inv * inv);
}
inline Jet2 sqrt(const Jet2& u) {
  const double r = std::sqrt(u.value());
  return compose(u, r, 0.5 / r, -0.25 / (r * u.value()));
}
inline Jet2 sinh(const Jet2& u) {
  const double s = std::sinh(u.value()), c = std::cosh(u.value());
  return compose(u, s, c, s);
}
inline Jet2 cosh(const Jet2& u) {
  const double s = std::sinh(u.value()), c = std::cosh(u.value());
  return compose(u, c, s, c);
}

/// u^p for a numeric exponent. Integer exponents accept any base; callers
/// guard non-integer exponents against non-positive bases.
inline Jet2 pow(const Jet2& u, double p) {
  const double x = u.value();
  const double f0 = std::pow(x, p);
  const double f1 = p == 0.0 ? 0.0 : p * std::pow(x, p - 1.0);
  const double f2 = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(x, p - 2.0);
  return compose(u, f0, f1, f2);
}

/// Re-indexes a jet into a space with `vars` variables, placing its own
/// variables at offset 0. Used to lift x-only jets into (x, y) phase space.
inline Jet2 embed(const Jet2& u, int vars) {
  Jet2 r(u);
  r.set_vars(vars);
  return r;
}

/// The jet of the partial derivative d u / d var_k, known to first order:
/// value = grad(k), gradient = row k of the Hessian. Second-order
/// information is unavailable and left zero, so the result's Hessian must
/// not be consumed.
inline Jet2 partial(const Jet2& u, int k) {
  Jet2 r(u.grad(k), u.vars());
  for (int i = 0; i < u.vars(); ++i) r.set_grad(i, u.hess(k, i));
  return r;
}

inline double value_of(double v) { return v; }
inline double value_of(const Jet2& j) { return j.value(); }

}  // namespace fcl
