#include "fcl/riemann.hpp"

#include <cmath>
#include <string>

#include "fcl/errors.hpp"

namespace fcl::riemann {

namespace {

std::size_t upper_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  // Row i of the upper triangle starts after i rows of decreasing length.
  return static_cast<std::size_t>(i * n - i * (i - 1) / 2 + (j - i));
}

void require_dimension(int n, std::span<const double> x) {
  if (static_cast<int>(x.size()) != n)
    throw ValidationError("point has " + std::to_string(x.size()) + " coordinates, expected " +
                          std::to_string(n));
}

}  // namespace

MetricField::MetricField(int n, std::vector<expr::Expression> upper)
    : n_(n), upper_(std::move(upper)) {
  if (n < 1) throw ValidationError("metric dimension must be positive");
  if (upper_.size() != static_cast<std::size_t>(n * (n + 1) / 2))
    throw ValidationError("metric needs " + std::to_string(n * (n + 1) / 2) +
                          " upper-triangle entries");
}

const expr::Expression& MetricField::entry(int i, int j) const {
  return upper_[upper_index(n_, i, j)];
}

OneFormField::OneFormField(std::vector<expr::Expression> components)
    : b_(std::move(components)) {}

MetricSample metric_from_jets(Matrix<Jet2> jets) {
  MetricSample s;
  s.a = values(jets);
  if (const auto minor = first_nonpositive_minor(s.a)) {
    throw DomainError("metric is not positive definite: leading minor of order " +
                      std::to_string(*minor + 1) + " is not positive");
  }
  s.inv_jets = invert_spd(jets);
  s.a_inv = values(s.inv_jets);
  s.jets = std::move(jets);
  return s;
}

MetricSample metric_at(const MetricField& metric, std::span<const double> x) {
  const int n = metric.dimension();
  require_dimension(n, x);
  Matrix<Jet2> jets = Matrix<Jet2>::square(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      jets(i, j) = expr::eval_jet2(metric.entry(i, j), x);
      jets(j, i) = jets(i, j);
    }
  }
  return metric_from_jets(std::move(jets));
}

std::vector<Jet2> one_form_at(const OneFormField& form, std::span<const double> x) {
  require_dimension(form.dimension(), x);
  std::vector<Jet2> b;
  b.reserve(x.size());
  for (int i = 0; i < form.dimension(); ++i) b.push_back(expr::eval_jet2(form.component(i), x));
  return b;
}

Jet2 ChristoffelData::jet(int i, int j, int k, int vars) const {
  Jet2 r((*this)(i, j, k), vars);
  if (has_derivatives())
    for (int l = 0; l < n; ++l) r.set_grad(l, d(i, j, k, l));
  return r;
}

namespace {

ChristoffelData from_jets(int n, const std::vector<Jet2>& jets, bool with_derivatives) {
  ChristoffelData c;
  c.n = n;
  c.gamma.resize(jets.size());
  for (std::size_t p = 0; p < jets.size(); ++p) c.gamma[p] = jets[p].value();
  if (with_derivatives) {
    c.dgamma.resize(jets.size() * static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < jets.size(); ++p)
      for (int l = 0; l < n; ++l)
        c.dgamma[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)] = jets[p].grad(l);
  }
  return c;
}

}  // namespace

ChristoffelData christoffel(const MetricSample& g) {
  const int n = g.dimension();
  // dg[(r*n + k)*n + j] = d_j g_rk as a first-order jet
  std::vector<Jet2> dg(static_cast<std::size_t>(n * n * n));
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        dg[static_cast<std::size_t>((r * n + k) * n + j)] = partial(g.jets(r, k), j);
  auto d = [&](int j, int r, int k) -> const Jet2& {
    return dg[static_cast<std::size_t>((r * n + k) * n + j)];
  };

  std::vector<Jet2> out(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet2 sum(0.0);
        for (int r = 0; r < n; ++r) sum += g.inv_jets(i, r) * (d(j, r, k) + d(k, r, j) - d(r, j, k));
        sum *= 0.5;
        out[static_cast<std::size_t>((i * n + j) * n + k)] = sum;
        out[static_cast<std::size_t>((i * n + k) * n + j)] = sum;
      }
    }
  }
  return from_jets(n, out, true);
}

ChristoffelData christoffel(const MetricField& metric, std::span<const double> x) {
  return christoffel(metric_at(metric, x));
}

ChristoffelData conformal_christoffel(const ChristoffelData& base, const Jet2& rho,
                                      const Matrix<Jet2>& g, const Matrix<Jet2>& g_inv) {
  const int n = base.n;
  if (g.rows() != n || g_inv.rows() != n)
    throw ValidationError("conformal_christoffel: dimension mismatch");
  const int vars = rho.vars();
  std::vector<Jet2> rho_low(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) rho_low[static_cast<std::size_t>(j)] = partial(rho, j);
  std::vector<Jet2> rho_up(static_cast<std::size_t>(n), Jet2(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rho_up[static_cast<std::size_t>(i)] += g_inv(i, j) * rho_low[static_cast<std::size_t>(j)];

  std::vector<Jet2> out(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet2 v = base.jet(i, j, k, vars);
        if (i == k) v += rho_low[static_cast<std::size_t>(j)];
        if (i == j) v += rho_low[static_cast<std::size_t>(k)];
        v -= rho_up[static_cast<std::size_t>(i)] * g(j, k);
        out[base.flat(i, j, k)] = v;
        out[base.flat(i, k, j)] = v;
      }
    }
  }
  return from_jets(n, out, base.has_derivatives() && vars >= n);
}

ChristoffelData conformal_christoffel(const ChristoffelData& base, const Jet2& rho,
                                      const Matrix<double>& g, const Matrix<double>& g_inv) {
  Matrix<Jet2> gj = Matrix<Jet2>::square(g.rows());
  Matrix<Jet2> gi = Matrix<Jet2>::square(g.rows());
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) {
      gj(i, j) = Jet2(g(i, j));
      gi(i, j) = Jet2(g_inv(i, j));
    }
  ChristoffelData c = conformal_christoffel(base, rho, gj, gi);
  c.dgamma.clear();
  return c;
}

ChristoffelData h_connection(const MetricSample& a, const ChristoffelData& alpha_gamma,
                             const Jet2& k) {
  return conformal_christoffel(alpha_gamma, 0.5 * k, a.jets, a.inv_jets);
}

std::vector<double> transvect00(const ChristoffelData& gamma, std::span<const double> y) {
  const int n = gamma.n;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out[static_cast<std::size_t>(i)] +=
            gamma(i, j, k) * y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(k)];
  return out;
}

BetaInvariants beta_invariants(const MetricSample& a, const ChristoffelData& gamma,
                               const std::vector<Jet2>& b) {
  const int n = a.dimension();
  if (static_cast<int>(b.size()) != n) throw ValidationError("one-form dimension mismatch");
  const int vars = b.empty() ? 0 : b.front().vars();
  BetaInvariants out;
  out.bcov = Matrix<Jet2>::square(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet2 v = partial(b[static_cast<std::size_t>(i)], j);
      for (int r = 0; r < n; ++r) v -= gamma.jet(r, i, j, vars) * b[static_cast<std::size_t>(r)];
      out.bcov(i, j) = v;
    }
  }
  out.r = Matrix<Jet2>::square(n);
  out.s = Matrix<Jet2>::square(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.r(i, j) = 0.5 * (out.bcov(i, j) + out.bcov(j, i));
      out.s(i, j) = 0.5 * (out.bcov(i, j) - out.bcov(j, i));
    }
  }
  out.b_up.assign(static_cast<std::size_t>(n), Jet2(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.b_up[static_cast<std::size_t>(i)] += a.inv_jets(i, j) * b[static_cast<std::size_t>(j)];
  out.bsq = Jet2(0.0);
  for (int i = 0; i < n; ++i)
    out.bsq += b[static_cast<std::size_t>(i)] * out.b_up[static_cast<std::size_t>(i)];

  out.s_mixed = Matrix<Jet2>::square(n, Jet2(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) out.s_mixed(i, j) += a.inv_jets(i, r) * out.s(r, j);
  out.s_low.assign(static_cast<std::size_t>(n), Jet2(0.0));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out.s_low[static_cast<std::size_t>(j)] += out.b_up[static_cast<std::size_t>(i)] * out.s(i, j);
  return out;
}

BetaInvariants beta_invariants(const MetricField& metric, const OneFormField& form,
                               std::span<const double> x) {
  const MetricSample a = metric_at(metric, x);
  return beta_invariants(a, christoffel(a), one_form_at(form, x));
}

CurvatureTensor riemann_curvature(const ChristoffelData& gamma) {
  if (!gamma.has_derivatives())
    throw ValidationError("riemann_curvature needs Christoffel derivatives");
  const int n = gamma.n;
  CurvatureTensor r(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          double v = gamma.d(i, j, l, k) - gamma.d(i, j, k, l);
          for (int s = 0; s < n; ++s)
            v += gamma(s, j, l) * gamma(i, s, k) - gamma(s, j, k) * gamma(i, s, l);
          r(j, i, k, l) = v;
          r(j, i, l, k) = -v;
        }
  return r;
}

CurvatureTensor riemann_curvature(const MetricField& metric, std::span<const double> x) {
  return riemann_curvature(christoffel(metric, x));
}

Matrix<double> flag_transvection(const CurvatureTensor& r, std::span<const double> y) {
  const int n = r.dimension();
  Matrix<double> out = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      double v = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          v += y[static_cast<std::size_t>(j)] * r(j, i, l, k) * y[static_cast<std::size_t>(k)];
      out(i, l) = v;
    }
  return out;
}

double sectional_curvature(const CurvatureTensor& r, const Matrix<double>& g,
                           std::span<const double> u, std::span<const double> v) {
  const int n = r.dimension();
  auto ip = [&](std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s += g(i, j) * p[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(j)];
    return s;
  };
  double num = 0.0;
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            num += g(m, i) * r(j, m, k, l) * u[static_cast<std::size_t>(i)] *
                   v[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(k)] *
                   v[static_cast<std::size_t>(l)];
  const double area = ip(u, u) * ip(v, v) - ip(u, v) * ip(u, v);
  return num / area;
}

Tensor<double> h_cov_derivative(const Tensor<Jet2>& t, std::span<const double> y,
                                const ChristoffelData& gamma) {
  const int n = t.dimension();
  if (gamma.n != n || static_cast<int>(y.size()) != n)
    throw ValidationError("h_cov_derivative: dimension mismatch");
  if (t.size() > 0 && t[0].vars() > 2 * n)
    throw ValidationError("h_cov_derivative: components must be jets over (x, y)");

  std::vector<Slot> slots = t.slots();
  slots.push_back(Slot::lower);
  Tensor<double> out(n, slots, 0.0);

  Matrix<double> nl = Matrix<double>::square(n);  // N^s_l
  for (int s = 0; s < n; ++s)
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) nl(s, l) += gamma(s, l, k) * y[static_cast<std::size_t>(k)];

  const int rank = t.rank();
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::vector<int> idx = t.unflatten(flat);
    for (int l = 0; l < n; ++l) {
      double v = t[flat].grad(l);
      for (int s = 0; s < n; ++s) v -= t[flat].grad(n + s) * nl(s, l);
      for (int p = 0; p < rank; ++p) {
        const int a = idx[static_cast<std::size_t>(p)];
        for (int r = 0; r < n; ++r) {
          idx[static_cast<std::size_t>(p)] = r;
          const double tr = t[t.flatten(idx)].value();
          if (t.slots()[static_cast<std::size_t>(p)] == Slot::upper)
            v += gamma(a, l, r) * tr;
          else
            v -= gamma(r, l, a) * tr;
        }
        idx[static_cast<std::size_t>(p)] = a;
      }
      out[flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)] = v;
    }
  }
  return out;
}

std::vector<Jet2> riemannian_spray_jets(const ChristoffelData& gamma, std::span<const double> y) {
  const int n = gamma.n;
  const int vars = 2 * n;
  std::vector<Jet2> yj;
  for (int i = 0; i < n; ++i) yj.push_back(Jet2::variable(y[static_cast<std::size_t>(i)], n + i, vars));
  std::vector<Jet2> g(static_cast<std::size_t>(n), Jet2(0.0, vars));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        g[static_cast<std::size_t>(i)] +=
            gamma.jet(i, j, k, vars) * yj[static_cast<std::size_t>(j)] * yj[static_cast<std::size_t>(k)];
  for (auto& gi : g) gi *= 0.5;
  return g;
}

}  // namespace fcl::riemann
