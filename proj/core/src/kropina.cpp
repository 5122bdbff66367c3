#include "fcl/kropina.hpp"

#include <algorithm>
#include <cmath>

#include "fcl/errors.hpp"

namespace fcl::kropina {

namespace {

constexpr double kExcludedTol = 1e-12;

std::size_t u(int i) { return static_cast<std::size_t>(i); }

void check_theta_denominator(double m, double s, double bsq) {
  const double den = s * s - m * s * s + m * bsq;
  if (std::fabs(den) <= 1e-14 * std::max({1.0, bsq, s * s}))
    throw DomainError("singular Theta denominator s^2 - m s^2 + m b^2 at s = " + std::to_string(s));
}

}  // namespace

KropinaMetric::KropinaMetric(riemann::MetricField metric, riemann::OneFormField form, double m,
                             double eps_beta)
    : metric_(std::move(metric)), form_(std::move(form)), m_(m), eps_beta_(eps_beta) {
  if (std::fabs(m) < kExcludedTol || std::fabs(m + 1.0) < kExcludedTol)
    throw ValidationError("m must not be 0 or -1");
  if (form_.dimension() != metric_.dimension())
    throw ValidationError("one-form and metric dimensions differ");
  if (!(eps_beta >= 0.0)) throw ValidationError("eps_beta must be non-negative");
}

PhiFunctions phi_functions(double m, double s, double bsq) {
  if (s == 0.0 || !std::isfinite(s)) throw DomainError("phi-functions are singular at s = 0");
  check_theta_denominator(m, s, bsq);
  const PhiModel model = PhiModel::generalized_kropina(m);
  const auto ot = omega_theta(model, s, bsq);
  PhiFunctions out;
  out.s = s;
  out.bsq = bsq;
  out.phi = model.phi(s);
  out.dphi = model.dphi(s);
  out.omega = ot.omega;
  out.domega = ot.domega;
  out.theta = ot.theta;
  return out;
}

PhiFunctions phi_closed_form(double m, double s, double bsq) {
  if (s == 0.0 || !std::isfinite(s)) throw DomainError("phi-functions are singular at s = 0");
  check_theta_denominator(m, s, bsq);
  PhiFunctions out;
  out.s = s;
  out.bsq = bsq;
  out.phi = std::pow(s, -m);
  out.dphi = -m * std::pow(s, -m - 1.0);
  out.omega = -m / (1.0 + m) / s;
  out.domega = m / (1.0 + m) / (s * s);
  out.theta = -m * s / (s * s - m * s * s + m * bsq);
  return out;
}

double sigma1(double m, double s, double bsq) {
  return 2.0 * m * s / (s * s - m * s * s + m * bsq);
}

PointFields point_fields(const riemann::MetricField& metric, const riemann::OneFormField& form,
                         std::span<const double> x) {
  PointFields f;
  f.x.assign(x.begin(), x.end());
  f.a = riemann::metric_at(metric, x);
  f.b = riemann::one_form_at(form, x);
  f.alpha_gamma = riemann::christoffel(f.a);
  f.beta = riemann::beta_invariants(f.a, f.alpha_gamma, f.b);
  return f;
}

HWData to_hw(const PointFields& fields, double m) {
  const int n = fields.dimension();
  const Jet2& bsq = fields.beta.bsq;
  if (!(bsq.value() > 0.0)) throw DomainError("b^2 vanishes; conformal factor undefined");

  HWData hw;
  hw.m = m;
  hw.k = log(4.0 / bsq);
  const Jet2 ek = exp(hw.k);
  const double ekv = ek.value();

  hw.h_jets = Matrix<Jet2>::square(n);
  hw.h_inv_jets = Matrix<Jet2>::square(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      hw.h_jets(i, j) = ek * fields.a.jets(i, j);
      hw.h_inv_jets(i, j) = fields.a.inv_jets(i, j) / ek;
    }
  hw.h = values(hw.h_jets);
  hw.h_inv = values(hw.h_inv_jets);

  hw.W_jets.resize(u(n));
  for (int i = 0; i < n; ++i) hw.W_jets[u(i)] = 0.5 * ek * fields.b[u(i)];
  hw.W = values(hw.W_jets);
  hw.W_up.assign(u(n), 0.0);
  hw.k_low.assign(u(n), 0.0);
  hw.k_bar.assign(u(n), 0.0);
  for (int i = 0; i < n; ++i) hw.k_low[u(i)] = hw.k.grad(i);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      hw.W_up[u(i)] += hw.h_inv(i, j) * hw.W[u(j)];
      hw.k_bar[u(i)] += hw.h_inv(i, j) * hw.k_low[u(j)];
    }

  const double k = hw.k.value();
  hw.pi_const = std::exp(0.5 * (m - 1.0) * k) / std::pow(2.0, m);
  hw.eps_const = std::pow(ekv, 0.5 * (m - 1.0));
  hw.sigma0 = m / (m + 1.0) * std::exp((m - 1.0) / m * k) / std::pow(2.0, m - 1.0);
  hw.sigma0_alt = m / (m + 1.0) * std::exp(0.5 * (m - 1.0) * k) / std::pow(2.0, m - 1.0);

  hw.h_gamma = riemann::h_connection(fields.a, fields.alpha_gamma, hw.k);
  return hw;
}

HWData to_hw(const KropinaMetric& metric, std::span<const double> x) {
  return to_hw(point_fields(metric.metric(), metric.form(), x), metric.m());
}

FValue f_value(const KropinaMetric& metric, std::span<const double> x,
               std::span<const double> y) {
  const int n = metric.dimension();
  if (static_cast<int>(y.size()) != n) throw ValidationError("direction has wrong dimension");
  const riemann::MetricSample a = riemann::metric_at(metric.metric(), x);
  const std::vector<Jet2> b = riemann::one_form_at(metric.form(), x);
  double a00 = 0.0, beta = 0.0;
  for (int i = 0; i < n; ++i) {
    beta += b[u(i)].value() * y[u(i)];
    for (int j = 0; j < n; ++j) a00 += a.a(i, j) * y[u(i)] * y[u(j)];
  }
  if (!(a00 > 0.0)) throw DomainError("alpha vanishes for this direction");
  FValue f;
  f.alpha = std::sqrt(a00);
  f.beta = beta;
  if (!(beta > metric.eps_beta() * f.alpha))
    throw DomainError("beta too small: direction outside the cone beta > eps_beta * alpha");
  f.s = beta / f.alpha;
  f.F = std::pow(f.alpha, metric.m() + 1.0) / std::pow(beta, metric.m());
  return f;
}

SprayJets spray_jets(const PointFields& fields, const PhiModel& model, const HWData* hw,
                     std::span<const double> y, double eps_beta) {
  const int n = fields.dimension();
  const int vars = 2 * n;
  if (static_cast<int>(y.size()) != n) throw ValidationError("direction has wrong dimension");
  if (vars > kMaxJetVars) throw ValidationError("dimension too large for phase-space jets");

  std::vector<Jet2> Y(u(n));
  for (int i = 0; i < n; ++i) Y[u(i)] = Jet2::variable(y[u(i)], n + i, vars);

  Jet2 a00(0.0, vars), beta(0.0, vars), r00(0.0, vars), s0(0.0, vars);
  std::vector<Jet2> s_i0(u(n), Jet2(0.0, vars));
  std::vector<Jet2> b_up(u(n));
  for (int i = 0; i < n; ++i) {
    beta += embed(fields.b[u(i)], vars) * Y[u(i)];
    s0 += embed(fields.beta.s_low[u(i)], vars) * Y[u(i)];
    b_up[u(i)] = embed(fields.beta.b_up[u(i)], vars);
    for (int j = 0; j < n; ++j) {
      a00 += embed(fields.a.jets(i, j), vars) * Y[u(i)] * Y[u(j)];
      r00 += embed(fields.beta.r(i, j), vars) * Y[u(i)] * Y[u(j)];
      s_i0[u(i)] += embed(fields.beta.s_mixed(i, j), vars) * Y[u(j)];
    }
  }
  if (!(a00.value() > 0.0)) throw DomainError("alpha vanishes for this direction");
  const Jet2 alpha = sqrt(a00);
  if (model.needs_positive_beta() && !(beta.value() > eps_beta * alpha.value()))
    throw DomainError("beta too small: direction outside the cone beta > eps_beta * alpha");
  const Jet2 s = beta / alpha;
  const Jet2 bsq = embed(fields.beta.bsq, vars);
  if (model.family() == PhiModel::Family::generalized_kropina)
    check_theta_denominator(model.m(), s.value(), bsq.value());

  const OmegaTheta<Jet2> ot = omega_theta(model, s, bsq);

  SprayJets out;
  out.F = alpha * model.phi(s);
  out.gamma00_alpha.assign(u(n), Jet2(0.0, vars));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out.gamma00_alpha[u(i)] += fields.alpha_gamma.jet(i, j, k, vars) * Y[u(j)] * Y[u(k)];

  const Jet2 wa = ot.omega * alpha;
  const Jet2 bracket = 2.0 * ot.theta * (r00 - 2.0 * wa * s0);
  out.G.resize(u(n));
  for (int i = 0; i < n; ++i) {
    const Jet2 two_g = out.gamma00_alpha[u(i)] + 2.0 * wa * s_i0[u(i)] +
                       bracket * (Y[u(i)] / alpha + ot.ratio * b_up[u(i)]);
    out.G[u(i)] = 0.5 * two_g;
  }

  if (hw != nullptr) {
    out.gamma00_h.assign(u(n), Jet2(0.0, vars));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          out.gamma00_h[u(i)] += hw->h_gamma.jet(i, j, k, vars) * Y[u(j)] * Y[u(k)];
    out.Phi.resize(u(n));
    for (int i = 0; i < n; ++i) out.Phi[u(i)] = out.G[u(i)] - 0.5 * out.gamma00_h[u(i)];
  }
  return out;
}

SprayData spray_data(const SprayJets& jets, int n) {
  SprayData d;
  d.gamma00_alpha = values(jets.gamma00_alpha);
  d.gamma00_h = values(jets.gamma00_h);
  d.G = values(jets.G);
  d.Phi = values(jets.Phi);
  auto first = [n](const std::vector<Jet2>& v) {
    Matrix<double> m = Matrix<double>::square(n);
    if (v.empty()) return m;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = v[u(i)].grad(n + j);
    return m;
  };
  auto second = [n](const std::vector<Jet2>& v) {
    std::vector<double> t;
    if (v.empty()) return t;
    t.resize(u(n * n * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) t[u((i * n + j) * n + k)] = v[u(i)].hess(n + j, n + k);
    return t;
  };
  d.G_y = first(jets.G);
  d.Phi_y = first(jets.Phi);
  d.G_yy = second(jets.G);
  d.Phi_yy = second(jets.Phi);
  return d;
}

SprayData spray_alpha_beta(const KropinaMetric& metric, std::span<const double> x,
                           std::span<const double> y) {
  const PointFields fields = point_fields(metric.metric(), metric.form(), x);
  const HWData hw = to_hw(fields, metric.m());
  const SprayJets jets = spray_jets(fields, PhiModel::generalized_kropina(metric.m()), &hw, y,
                                    metric.eps_beta());
  return spray_data(jets, metric.dimension());
}

KillingInvariants killing_invariants(const HWData& hw) {
  const int n = hw.h.rows();
  Matrix<double> cov = Matrix<double>::square(n);  // W_i||j
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = hw.W_jets[u(i)].grad(j);
      for (int r = 0; r < n; ++r) v -= hw.h_gamma(r, i, j) * hw.W[u(r)];
      cov(i, j) = v;
    }
  KillingInvariants out;
  out.R = Matrix<double>::square(n);
  out.S = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.R(i, j) = 0.5 * (cov(i, j) + cov(j, i));
      out.S(i, j) = 0.5 * (cov(i, j) - cov(j, i));
    }
  out.R_mixed = Matrix<double>::square(n);
  out.S_mixed = Matrix<double>::square(n);
  out.R_low.assign(u(n), 0.0);
  out.S_low.assign(u(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) {
        out.R_mixed(i, j) += hw.h_inv(i, r) * out.R(r, j);
        out.S_mixed(i, j) += hw.h_inv(i, r) * out.S(r, j);
      }
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < n; ++r) {
      out.R_low[u(i)] += hw.W_up[u(r)] * out.R(r, i);
      out.S_low[u(i)] += hw.W_up[u(r)] * out.S(r, i);
    }
  out.R_up.assign(u(n), 0.0);
  out.S_up.assign(u(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < n; ++r) {
      out.R_up[u(i)] += hw.h_inv(i, r) * out.R_low[u(r)];
      out.S_up[u(i)] += hw.h_inv(i, r) * out.S_low[u(r)];
    }
  return out;
}

KillingRelations killing_relations(const PointFields& fields, const HWData& hw,
                                   std::span<const double> y) {
  const int n = fields.dimension();
  const KillingInvariants kv = killing_invariants(hw);
  const double emk = std::exp(-hw.k.value());
  double wk = 0.0;  // W_r kbar^r
  for (int r = 0; r < n; ++r) wk += hw.W[u(r)] * hw.k_bar[u(r)];

  auto dot = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[u(i)] * y[u(i)];
    return s;
  };
  const double W0 = dot(hw.W);
  const double k0 = dot(hw.k_low);

  KillingRelations out;
  double h00 = 0.0, R00 = 0.0, r00 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double r = fields.beta.r(i, j).value();
      const double s = fields.beta.s(i, j).value();
      out.r_ij = std::max(out.r_ij,
                          std::fabs(r - 2.0 * emk * (kv.R(i, j) - 0.5 * wk * hw.h(i, j))));
      out.s_ij = std::max(out.s_ij, std::fabs(s - 2.0 * emk *
                                                      (kv.S(i, j) + 0.5 * (hw.k_low[u(i)] * hw.W[u(j)] -
                                                                           hw.k_low[u(j)] * hw.W[u(i)]))));
      out.s_mixed = std::max(
          out.s_mixed, std::fabs(fields.beta.s_mixed(i, j).value() -
                                 (2.0 * kv.S_mixed(i, j) + hw.k_bar[u(i)] * hw.W[u(j)] -
                                  hw.k_low[u(j)] * hw.W_up[u(i)])));
      h00 += hw.h(i, j) * y[u(i)] * y[u(j)];
      R00 += kv.R(i, j) * y[u(i)] * y[u(j)];
      r00 += r * y[u(i)] * y[u(j)];
    }
  }
  double S0 = 0.0, s0 = 0.0;
  for (int i = 0; i < n; ++i) {
    double si0 = 0.0, Si0 = 0.0;
    for (int j = 0; j < n; ++j) {
      si0 += fields.beta.s_mixed(i, j).value() * y[u(j)];
      Si0 += kv.S_mixed(i, j) * y[u(j)];
    }
    out.s_i0 = std::max(out.s_i0, std::fabs(si0 - (2.0 * Si0 + W0 * hw.k_bar[u(i)] -
                                                   k0 * hw.W_up[u(i)])));
    const double sl = fields.beta.s_low[u(i)].value();
    out.s_low = std::max(out.s_low, std::fabs(sl - 2.0 * emk * (2.0 * kv.S_low[u(i)] +
                                                                wk * hw.W[u(i)] - hw.k_low[u(i)])));
    out.b_up = std::max(out.b_up, std::fabs(fields.beta.b_up[u(i)].value() - 2.0 * hw.W_up[u(i)]));
    S0 += kv.S_low[u(i)] * y[u(i)];
    s0 += sl * y[u(i)];
  }
  out.s_0 = std::fabs(s0 - 2.0 * emk * (2.0 * S0 + wk * W0 - k0));
  out.r_00 = std::fabs(r00 - 2.0 * emk * (R00 - 0.5 * wk * h00));
  return out;
}

std::vector<DiagnosticRow> decomposition_diagnostics(const KropinaMetric& metric,
                                                     std::span<const double> x,
                                                     std::span<const double> y) {
  const int n = metric.dimension();
  const double m = metric.m();
  const PointFields fields = point_fields(metric.metric(), metric.form(), x);
  const HWData hw = to_hw(fields, m);
  const SprayJets jets =
      spray_jets(fields, PhiModel::generalized_kropina(m), &hw, y, metric.eps_beta());
  const KillingInvariants kv = killing_invariants(hw);

  double h00 = 0.0, W0 = 0.0, k0 = 0.0, R00 = 0.0, wk = 0.0, S0 = 0.0;
  for (int i = 0; i < n; ++i) {
    W0 += hw.W[u(i)] * y[u(i)];
    k0 += hw.k_low[u(i)] * y[u(i)];
    wk += hw.W[u(i)] * hw.k_bar[u(i)];
    S0 += kv.S_low[u(i)] * y[u(i)];
    for (int j = 0; j < n; ++j) {
      h00 += hw.h(i, j) * y[u(i)] * y[u(j)];
      R00 += kv.R(i, j) * y[u(i)] * y[u(j)];
    }
  }
  const double alpha = std::sqrt(h00 / std::exp(hw.k.value()));
  double beta = 0.0;
  for (int i = 0; i < n; ++i) beta += fields.b[u(i)].value() * y[u(i)];
  const double s = beta / alpha;
  const double bsq = fields.beta.bsq.value();
  const double sig1 = sigma1(m, s, bsq);

  std::vector<double> lhs(u(n));
  const double hpow = std::pow(h00, 0.5 * (m + 1.0));
  const double wpow = std::pow(W0, m);
  for (int i = 0; i < n; ++i) lhs[u(i)] = 2.0 * jets.Phi[u(i)].value() * hpow * wpow;
  const double ref = max_abs(lhs);

  auto decomposition = [&](double sig0) {
    std::vector<double> diff(u(n));
    for (int i = 0; i < n; ++i) {
      double Si0 = 0.0;
      for (int j = 0; j < n; ++j) Si0 += kv.S_mixed(i, j) * y[u(j)];
      const double bi = fields.beta.b_up[u(i)].value();
      const double a1 = -2.0 * sig0 * Si0 - sig0 * W0 * hw.k_bar[u(i)] +
                        sig0 * k0 * hw.W_up[u(i)] + 2.0 * sig0 * sig1 * S0 * hw.W_up[u(i)];
      const double a2 = -k0 * y[u(i)] + 0.5 * h00 * hw.k_bar[u(i)] + sig1 * R00 * bi;
      const double a3 = -4.0 * sig1 * R00 * y[u(i)] + 2.0 * sig1 * h00 * wk * y[u(i)] +
                        0.5 * sig1 * std::pow(h00, 0.5 * (m + 3.0)) * wk * bi;
      const double rhs = a1 * std::pow(h00, m + 1.0) + a2 * hpow * wpow + a3 * std::pow(W0, 2.0 * m);
      diff[u(i)] = lhs[u(i)] - rhs;
    }
    return max_abs(diff);
  };

  std::vector<DiagnosticRow> rows;
  auto push = [&](std::string name, double reference, double residual) {
    DiagnosticRow r;
    r.name = std::move(name);
    r.reference = reference;
    r.residual = residual;
    r.relative = residual == 0.0 ? 0.0 : residual / std::max(reference, 1e-300);
    rows.push_back(std::move(r));
  };
  push("phi-decomposition, sigma0 exponent (m-1)/m", ref, decomposition(hw.sigma0));
  push("phi-decomposition, sigma0 exponent (m-1)/2", ref, decomposition(hw.sigma0_alt));

  // Flag quotient l^i l_l with the coefficient of W0 h0l halved, against
  // the exact y-derivative of F.
  const double F = jets.F.value();
  double quotient_diff = 0.0, quotient_ref = 0.0;
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      double h0l = 0.0;
      for (int j = 0; j < n; ++j) h0l += hw.h(l, j) * y[u(j)];
      const double halved = (0.5 * (m + 1.0) * W0 * h0l - m * h00 * hw.W[u(l)]) / (W0 * h00) * y[u(i)];
      const double exact = y[u(i)] / F * jets.F.grad(n + l);
      quotient_ref = std::max(quotient_ref, std::fabs(exact));
      quotient_diff = std::max(quotient_diff, std::fabs(halved - exact));
    }
  push("flag quotient with (m+1)/2 coefficient", quotient_ref, quotient_diff);
  return rows;
}

}  // namespace fcl::kropina
