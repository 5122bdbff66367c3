#include "fcl/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "fcl/errors.hpp"

namespace fcl::curvature {

namespace {

std::size_t u(int i) { return static_cast<std::size_t>(i); }

std::string format_point(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

Jet2 alpha_jet(const riemann::MetricSample& a, std::span<const double> y) {
  const int n = a.dimension();
  const int vars = 2 * n;
  Jet2 a00(0.0, vars);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a00 += embed(a.jets(i, j), vars) * Jet2::variable(y[u(i)], n + i, vars) *
             Jet2::variable(y[u(j)], n + j, vars);
  if (!(a00.value() > 0.0)) throw DomainError("alpha vanishes for this direction");
  return sqrt(a00);
}

}  // namespace

Matrix<double> berwald_curvature(const std::vector<Jet2>& G, std::span<const double> y) {
  const int n = static_cast<int>(G.size());
  Matrix<double> R = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      double v = 2.0 * G[u(i)].grad(l);
      for (int j = 0; j < n; ++j) {
        v -= y[u(j)] * G[u(i)].hess(j, n + l);
        v += 2.0 * G[u(j)].value() * G[u(i)].hess(n + j, n + l);
        v -= G[u(i)].grad(n + j) * G[u(j)].grad(n + l);
      }
      R(i, l) = v;
    }
  return R;
}

Matrix<double> berwald_curvature(const SprayEvaluator& spray, std::span<const double> x,
                                 std::span<const double> y) {
  return berwald_curvature(spray(x, y), y);
}

FlagProjection flag_projection(const Jet2& norm, std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  FlagProjection out;
  out.F = norm.value();
  if (!(out.F > 0.0)) throw DomainError("flag projection needs F > 0");
  out.h_mixed = identity(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) out.h_mixed(i, l) -= y[u(i)] / out.F * norm.grad(n + l);
  return out;
}

FlagProjection flag_projection(const kropina::KropinaMetric& metric, std::span<const double> x,
                               std::span<const double> y) {
  return flag_projection(KropinaSpace(metric).norm(x, y), y);
}

Matrix<double> kropina_flag_quotient(const kropina::HWData& hw, std::span<const double> y) {
  const int n = hw.h.rows();
  const double m = hw.m;
  double h00 = 0.0, W0 = 0.0;
  std::vector<double> h0(u(n), 0.0);
  for (int i = 0; i < n; ++i) {
    W0 += hw.W[u(i)] * y[u(i)];
    for (int j = 0; j < n; ++j) {
      h0[u(i)] += hw.h(i, j) * y[u(j)];
      h00 += hw.h(i, j) * y[u(i)] * y[u(j)];
    }
  }
  Matrix<double> q = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      q(i, l) = y[u(i)] * ((m + 1.0) * W0 * h0[u(l)] - m * h00 * hw.W[u(l)]) / (W0 * h00);
  return q;
}

KFit estimate_K(const Matrix<double>& R, double F, const Matrix<double>& h_mixed) {
  const int n = R.rows();
  if (n < 2) throw ValidationError("estimate_K needs n >= 2");
  if (!(F > 0.0)) throw DomainError("estimate_K needs F > 0");
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += R(i, i);
  KFit fit;
  fit.K = trace / (F * F * (n - 1));
  double num = 0.0;
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      const double d = R(i, l) - fit.K * F * F * h_mixed(i, l);
      num += d * d;
    }
  fit.rel_residual = std::sqrt(num) / std::max(frobenius(R), 1e-300);
  return fit;
}

std::vector<double> spray_from_norm(const Jet2& norm, std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  const Jet2 f2 = norm * norm;
  Matrix<double> g = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = 0.5 * f2.hess(n + i, n + j);
  const Matrix<double> g_inv = invert_spd(g);
  std::vector<double> rhs(u(n), 0.0);
  for (int l = 0; l < n; ++l) {
    double v = -f2.grad(l);
    for (int k = 0; k < n; ++k) v += y[u(k)] * f2.hess(k, n + l);
    rhs[u(l)] = v;
  }
  std::vector<double> G(u(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) G[u(i)] += 0.25 * g_inv(i, l) * rhs[u(l)];
  return G;
}

PhiSuite phi_derivative_suite(const kropina::HWData& hw, const kropina::SprayJets& jets,
                              std::span<const double> y) {
  using riemann::Slot;
  const int n = hw.h.rows();
  const std::vector<Jet2>& phi = jets.Phi;
  if (phi.empty()) throw ValidationError("phi_derivative_suite needs the deviation Phi");

  PhiSuite s;
  riemann::Tensor<Jet2> phi_vec(n, {Slot::upper});
  riemann::Tensor<Jet2> phi_mixed(n, {Slot::upper, Slot::lower});
  for (int i = 0; i < n; ++i) {
    phi_vec[u(i)] = phi[u(i)];
    for (int l = 0; l < n; ++l) phi_mixed.at({i, l}) = partial(phi[u(i)], n + l);
  }
  const auto d_phi = riemann::h_cov_derivative(phi_vec, y, hw.h_gamma);
  const auto d_phi_mixed = riemann::h_cov_derivative(phi_mixed, y, hw.h_gamma);

  s.phi_hl = Matrix<double>::square(n);
  s.phi_l = Matrix<double>::square(n);
  s.phi_l_0 = Matrix<double>::square(n);
  s.phi_phi_l = Matrix<double>::square(n);
  s.phi_phi_rl = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      s.phi_hl(i, l) = d_phi.at({i, l});
      s.phi_l(i, l) = phi[u(i)].grad(n + l);
      double v = 0.0;
      for (int q = 0; q < n; ++q) v += y[u(q)] * d_phi_mixed.at({i, l, q});
      s.phi_l_0(i, l) = v;
    }
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      double a = 0.0, b = 0.0;
      for (int r = 0; r < n; ++r) {
        a += s.phi_l(r, l) * s.phi_l(i, r);
        b += phi[u(r)].value() * phi[u(i)].hess(n + r, n + l);
      }
      s.phi_phi_l(i, l) = a;
      s.phi_phi_rl(i, l) = b;
    }
  s.h_curvature = riemann::flag_transvection(riemann::riemann_curvature(hw.h_gamma), y);
  s.assembled = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      s.assembled(i, l) = s.h_curvature(i, l) + 2.0 * s.phi_hl(i, l) - s.phi_l_0(i, l) +
                          2.0 * s.phi_phi_rl(i, l) - s.phi_phi_l(i, l);
  return s;
}

PhiSuite phi_derivative_suite(const kropina::KropinaMetric& metric, std::span<const double> x,
                              std::span<const double> y) {
  const auto fields = kropina::point_fields(metric.metric(), metric.form(), x);
  const auto hw = kropina::to_hw(fields, metric.m());
  const auto jets = kropina::spray_jets(fields, kropina::PhiModel::generalized_kropina(metric.m()),
                                        &hw, y, metric.eps_beta());
  return phi_derivative_suite(hw, jets, y);
}

CurvatureSample FinslerSpace::curvature(std::span<const double> x,
                                        std::span<const double> y) const {
  CurvatureSample out;
  out.R = berwald_curvature(spray(x, y), y);
  const FlagProjection fp = flag_projection(norm(x, y), y);
  out.F = fp.F;
  out.fit = estimate_K(out.R, fp.F, fp.h_mixed);
  return out;
}

SprayEvaluator FinslerSpace::spray_evaluator() const {
  return [this](std::span<const double> x, std::span<const double> y) { return spray(x, y); };
}

std::vector<Jet2> RiemannianSpace::spray(std::span<const double> x,
                                         std::span<const double> y) const {
  return riemann::riemannian_spray_jets(riemann::christoffel(metric_, x), y);
}

Jet2 RiemannianSpace::norm(std::span<const double> x, std::span<const double> y) const {
  return alpha_jet(riemann::metric_at(metric_, x), y);
}

std::vector<Jet2> KropinaSpace::spray(std::span<const double> x,
                                      std::span<const double> y) const {
  const auto fields = kropina::point_fields(metric_.metric(), metric_.form(), x);
  return kropina::spray_jets(fields, kropina::PhiModel::generalized_kropina(metric_.m()), nullptr,
                             y, metric_.eps_beta())
      .G;
}

Jet2 KropinaSpace::norm(std::span<const double> x, std::span<const double> y) const {
  const auto fields = kropina::point_fields(metric_.metric(), metric_.form(), x);
  return kropina::spray_jets(fields, kropina::PhiModel::generalized_kropina(metric_.m()), nullptr,
                             y, metric_.eps_beta())
      .F;
}

bool KropinaSpace::in_cone(std::span<const double> x, std::span<const double> y) const {
  const auto a = riemann::metric_at(metric_.metric(), x);
  const auto b = riemann::one_form_at(metric_.form(), x);
  double a00 = 0.0, beta = 0.0;
  for (int i = 0; i < dimension(); ++i) {
    beta += b[u(i)].value() * y[u(i)];
    for (int j = 0; j < dimension(); ++j) a00 += a.a(i, j) * y[u(i)] * y[u(j)];
  }
  return a00 > 0.0 && beta > metric_.eps_beta() * std::sqrt(a00);
}

bool KropinaSpace::admissible(std::span<const double> x, std::span<const double> y) const {
  const int n = dimension();
  const auto a = riemann::metric_at(metric_.metric(), x);
  const auto b = riemann::one_form_at(metric_.form(), x);
  double a00 = 0.0, beta = 0.0, bsq = 0.0;
  for (int i = 0; i < n; ++i) {
    beta += b[u(i)].value() * y[u(i)];
    for (int j = 0; j < n; ++j) {
      a00 += a.a(i, j) * y[u(i)] * y[u(j)];
      bsq += a.a_inv(i, j) * b[u(i)].value() * b[u(j)].value();
    }
  }
  if (!(a00 > 0.0) || !(bsq > 0.0)) return false;
  const double alpha = std::sqrt(a00);
  const double bnorm = std::sqrt(bsq);
  if (!(beta > metric_.eps_beta() * alpha)) return false;
  const double s = beta / alpha;
  if (s < window_.lo * bnorm || s > window_.hi * bnorm) return false;
  const double m = metric_.m();
  const double den = s * s - m * s * s + m * bsq;
  return std::fabs(den) > window_.theta_margin * std::max(bsq, s * s);
}

CurvatureSample KropinaSpace::curvature(std::span<const double> x,
                                        std::span<const double> y) const {
  const auto fields = kropina::point_fields(metric_.metric(), metric_.form(), x);
  const auto model = kropina::PhiModel::generalized_kropina(metric_.m());
  std::optional<kropina::HWData> hw;
  if (with_suite_) hw = kropina::to_hw(fields, metric_.m());
  const auto jets = kropina::spray_jets(fields, model, hw ? &*hw : nullptr, y, metric_.eps_beta());

  CurvatureSample out;
  out.R = berwald_curvature(jets.G, y);
  const FlagProjection fp = flag_projection(jets.F, y);
  out.F = fp.F;
  out.fit = estimate_K(out.R, fp.F, fp.h_mixed);
  if (hw) {
    const PhiSuite suite = phi_derivative_suite(*hw, jets, y);
    out.suite_residual = estimate_K(suite.assembled, fp.F, fp.h_mixed).rel_residual;
    double scale = 1.0;
    for (double v : out.R.data()) scale = std::max(scale, std::fabs(v));
    out.suite_delta = max_abs_diff(out.R, suite.assembled) / scale;
  }
  return out;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  return true;
}

std::vector<std::pair<std::vector<double>, std::vector<double>>> draw_samples(
    const FinslerSpace& space, const SampleConfig& config, std::vector<int>* rejected) {
  const int n = space.dimension();
  if (static_cast<int>(config.box.lo.size()) != n || static_cast<int>(config.box.hi.size()) != n)
    throw ValidationError("sampling box has wrong dimension");
  if (config.samples < 1) throw ValidationError("need at least one sample");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  out.reserve(u(config.samples));
  if (rejected) rejected->assign(u(config.samples), 0);
  for (int k = 0; k < config.samples; ++k) {
    int draws = 0;
    for (;;) {
      if (draws >= config.max_draws_per_sample)
        throw DomainError("empty sample: no admissible (x, y) found in the sampling domain after " +
                          std::to_string(draws) + " draws");
      ++draws;
      std::vector<double> x(u(n)), y(u(n));
      for (int i = 0; i < n; ++i)
        x[u(i)] = config.box.lo[u(i)] + (config.box.hi[u(i)] - config.box.lo[u(i)]) * unit(rng);
      double norm2 = 0.0;
      for (int i = 0; i < n; ++i) {
        y[u(i)] = normal(rng);
        norm2 += y[u(i)] * y[u(i)];
      }
      if (!(norm2 > 0.0)) continue;
      for (double& v : y) v /= std::sqrt(norm2);
      if (!space.admissible(x, y)) continue;
      if (rejected) (*rejected)[u(k)] = draws - 1;
      out.emplace_back(std::move(x), std::move(y));
      break;
    }
  }
  return out;
}

CheckReport constant_curvature_check(const FinslerSpace& space, const SampleConfig& config) {
  std::vector<int> rejected;
  const auto samples = draw_samples(space, config, &rejected);
  const int count = static_cast<int>(samples.size());

  std::vector<SampleRow> rows(u(count));
  std::vector<std::string> errors(u(count));
  auto work = [&](int worker, int workers) {
    for (int k = worker; k < count; k += workers) {
      const auto& [x, y] = samples[u(k)];
      try {
        const CurvatureSample cs = space.curvature(x, y);
        SampleRow& row = rows[u(k)];
        row.index = k;
        row.x = x;
        row.y = y;
        row.F = cs.F;
        row.K_fit = cs.fit.K;
        row.rel_residual = cs.fit.rel_residual;
        row.suite_residual = cs.suite_residual;
        row.suite_delta = cs.suite_delta;
        row.rejected_draws = rejected[u(k)];
      } catch (const std::exception& e) {
        errors[u(k)] = e.what();
      }
    }
  };
  const int workers = std::clamp(config.threads, 1, std::max(1, count));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  for (int k = 0; k < count; ++k) {
    if (!errors[u(k)].empty()) {
      const auto& [x, y] = samples[u(k)];
      throw DomainError("sample " + std::to_string(k) + " at x = " + format_point(x) +
                        ", y = " + format_point(y) + ": " + errors[u(k)]);
    }
  }

  CheckReport report;
  report.rows = std::move(rows);
  std::vector<double> ks;
  for (const auto& r : report.rows) {
    ks.push_back(r.K_fit);
    report.max_residual = std::max(report.max_residual, r.rel_residual);
    report.rejected_draws += r.rejected_draws;
  }
  std::sort(ks.begin(), ks.end());
  const std::size_t mid = ks.size() / 2;
  report.K_median = ks.size() % 2 ? ks[mid] : 0.5 * (ks[mid - 1] + ks[mid]);
  report.K_min = ks.front();
  report.K_max = ks.back();
  report.K_spread = report.K_max - report.K_min;
  report.K_spread_rel = report.K_spread / (1.0 + std::fabs(report.K_median));
  report.pass = report.max_residual < config.tol_residual &&
                report.K_spread < config.tol_K * (1.0 + std::fabs(report.K_median));
  return report;
}

Trajectory geodesic_integrate(const FinslerSpace& space, std::span<const double> x0,
                              std::span<const double> y0, double t_end, double dt,
                              const Box* box, int record_every) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(t_end >= 0.0)) throw ValidationError("t_end must be non-negative");
  const int n = space.dimension();
  if (static_cast<int>(x0.size()) != n || static_cast<int>(y0.size()) != n)
    throw ValidationError("initial data has wrong dimension");
  if (!space.in_cone(x0, y0)) throw DomainError("initial direction outside the cone of F");
  record_every = std::max(1, record_every);

  using State = std::vector<double>;  // x then y
  auto rhs = [&](const State& s) {
    std::span<const double> x(s.data(), u(n));
    std::span<const double> y(s.data() + n, u(n));
    const auto G = space.spray(x, y);
    State d(u(2 * n));
    for (int i = 0; i < n; ++i) {
      d[u(i)] = y[u(i)];
      d[u(n + i)] = -2.0 * G[u(i)].value();
    }
    return d;
  };
  auto axpy = [](const State& s, double h, const State& k) {
    State r(s);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += h * k[i];
    return r;
  };
  auto norm_at = [&](const State& s) {
    return space.norm(std::span<const double>(s.data(), u(n)),
                      std::span<const double>(s.data() + n, u(n)))
        .value();
  };

  State state(u(2 * n));
  std::copy(x0.begin(), x0.end(), state.begin());
  std::copy(y0.begin(), y0.end(), state.begin() + n);
  const double F0 = norm_at(state);

  Trajectory traj;
  auto record = [&](double t, const State& s, double F) {
    TrajectoryPoint p;
    p.t = t;
    p.x.assign(s.begin(), s.begin() + n);
    p.y.assign(s.begin() + n, s.end());
    p.F = F;
    traj.points.push_back(std::move(p));
    traj.max_rel_drift = std::max(traj.max_rel_drift, std::fabs(F - F0) / F0);
  };
  record(0.0, state, F0);

  const long steps = std::lround(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  for (long step = 1; step <= steps; ++step) {
    const double h = std::min(dt, t_end - t);
    State next;
    try {
      const State k1 = rhs(state);
      const State k2 = rhs(axpy(state, 0.5 * h, k1));
      const State k3 = rhs(axpy(state, 0.5 * h, k2));
      const State k4 = rhs(axpy(state, h, k3));
      next = state;
      for (std::size_t i = 0; i < next.size(); ++i)
        next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } catch (const DomainError& e) {
      traj.truncated = true;
      traj.reason = e.what();
      break;
    }
    std::span<const double> nx(next.data(), u(n)), ny(next.data() + n, u(n));
    if (box && !box->contains(nx)) {
      traj.truncated = true;
      traj.reason = "left the chart box";
      break;
    }
    if (!space.in_cone(nx, ny)) {
      traj.truncated = true;
      traj.reason = "left the cone of F";
      break;
    }
    state = std::move(next);
    t += h;
    const double F = norm_at(state);
    if (step % record_every == 0 || step == steps) {
      record(t, state, F);
    } else {
      traj.max_rel_drift = std::max(traj.max_rel_drift, std::fabs(F - F0) / F0);
    }
  }
  return traj;
}

}  // namespace fcl::curvature
