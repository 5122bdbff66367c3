#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "fcl/errors.hpp"

namespace fcl::app {

namespace {

using nlohmann::ordered_json;

std::size_t u(int i) { return static_cast<std::size_t>(i); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

void require_dims(const MetricFile& f, const std::vector<double>& x, const std::vector<double>& y) {
  if (static_cast<int>(x.size()) != f.dimension || static_cast<int>(y.size()) != f.dimension)
    throw ValidationError("x and y need " + std::to_string(f.dimension) + " components each");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double quad(const Matrix<double>& m, const std::vector<double>& y) {
  double s = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * y[u(i)] * y[u(j)];
  return s;
}

// 2G^i with omega and Theta taken from their closed forms, values only.
std::vector<double> closed_form_spray(const kropina::PointFields& fields, double m,
                                      const std::vector<double>& y) {
  const int n = fields.dimension();
  const double alpha = std::sqrt(quad(fields.a.a, y));
  double beta = 0, r00 = 0, s0 = 0;
  for (int i = 0; i < n; ++i) {
    beta += fields.b[u(i)].value() * y[u(i)];
    s0 += fields.beta.s_low[u(i)].value() * y[u(i)];
    for (int j = 0; j < n; ++j) r00 += fields.beta.r(i, j).value() * y[u(i)] * y[u(j)];
  }
  const double s = beta / alpha;
  const auto pf = kropina::phi_closed_form(m, s, fields.beta.bsq.value());
  const double ratio = pf.domega / (pf.omega - s * pf.domega);
  const auto g00 = riemann::transvect00(fields.alpha_gamma, y);
  std::vector<double> G(u(n));
  for (int i = 0; i < n; ++i) {
    double si0 = 0;
    for (int j = 0; j < n; ++j) si0 += fields.beta.s_mixed(i, j).value() * y[u(j)];
    G[u(i)] = 0.5 * (g00[u(i)] + 2 * pf.omega * alpha * si0 +
                     2 * pf.theta * (r00 - 2 * alpha * pf.omega * s0) *
                         (y[u(i)] / alpha + ratio * fields.beta.b_up[u(i)].value()));
  }
  return G;
}

curvature::SampleConfig sample_config(const MetricFile& f, int samples, std::uint64_t seed) {
  curvature::SampleConfig cfg;
  cfg.box = f.domain;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.tol_residual = f.options.tol_residual;
  cfg.tol_K = f.options.tol_k;
  return cfg;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int cmd_info(const MetricFile& f, std::ostream& out) {
  const int n = f.dimension;
  out << "dimension n = " << n << "\n";
  out << "mode = " << to_string(f.mode) << "\n";
  if (f.mode == Mode::kropina) out << "m = " << num(f.m) << "\n";
  if (!f.coords.empty()) {
    out << "coords =";
    for (std::size_t i = 0; i < f.coords.size(); ++i) out << (i ? ", " : " ") << "x" << i + 1 << " " << f.coords[i];
    out << "\n";
  }
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++k) out << "a" << i + 1 << j + 1 << " = " << f.a[k].to_string() << "\n";
  for (int i = 0; i < static_cast<int>(f.b.size()); ++i) out << "b" << i + 1 << " = " << f.b[u(i)].to_string() << "\n";
  for (int i = 0; i < n; ++i)
    out << "domain x" << i + 1 << " in [" << num(f.domain.lo[u(i)]) << ", " << num(f.domain.hi[u(i)]) << "]\n";

  if (!f.b.empty()) {
    // b^2 over a coarse grid of the domain box
    const int per_axis = 5;
    long total = 1;
    for (int i = 0; i < n; ++i) total *= per_axis;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const auto metric = f.metric_field();
    const auto form = f.one_form();
    std::vector<double> x(u(n));
    for (long idx = 0; idx < total; ++idx) {
      long rest = idx;
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(rest % per_axis) / (per_axis - 1);
        rest /= per_axis;
        x[u(i)] = f.domain.lo[u(i)] + t * (f.domain.hi[u(i)] - f.domain.lo[u(i)]);
      }
      const auto a = riemann::metric_at(metric, x);
      const auto b = riemann::one_form_at(form, x);
      double bsq = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) bsq += a.a_inv(i, j) * b[u(i)].value() * b[u(j)].value();
      lo = std::min(lo, bsq);
      hi = std::max(hi, bsq);
    }
    if (hi - lo <= 1e-12 * std::max(1.0, hi))
      out << "b^2 = " << num(lo) << " everywhere on a " << per_axis << "^" << n << " grid\n";
    else
      out << "b^2 in [" << num(lo) << ", " << num(hi) << "] on a " << per_axis << "^" << n << " grid\n";
  }
  out << "options: eps_beta = " << num(f.options.eps_beta) << ", s_window = [" << num(f.options.s_lo) << ", "
      << num(f.options.s_hi) << "], tol_residual = " << num(f.options.tol_residual)
      << ", tol_k = " << num(f.options.tol_k) << ", samples = " << f.options.samples
      << ", seed = " << f.options.seed << "\n";
  return kPass;
}

int cmd_spray(const MetricFile& f, const std::vector<double>& x, const std::vector<double>& y, std::ostream& out) {
  require_dims(f, x, y);
  const int n = f.dimension;
  out << "x = " << vec(x) << "\n";
  out << "y = " << vec(y) << "\n";
  const auto space = f.space();
  if (!space->in_cone(x, y)) throw DomainError("beta too small: direction outside the cone beta > eps_beta * alpha");

  std::vector<double> y3 = y;
  for (double& v : y3) v *= 3.0;
  auto homogeneity = [&](const std::vector<double>& G1, const std::vector<double>& G3) {
    double d = 0;
    for (int i = 0; i < n; ++i) d = std::max(d, std::fabs(G3[u(i)] - 9.0 * G1[u(i)]));
    return d / std::max(1.0, 9.0 * max_abs(G1));
  };

  if (f.mode == Mode::riemannian) {
    const auto G = values(space->spray(x, y));
    out << "alpha = " << num(space->norm(x, y).value()) << "\n";
    out << "G^i = gamma^i_00 / 2 = " << vec(G) << "\n";
    const double h = homogeneity(G, values(space->spray(x, y3)));
    out << "homogeneity (lambda = 3): " << num(h) << (h < 1e-10 ? " ok" : " FAILED") << "\n";
    return kPass;
  }

  const auto K = f.kropina_metric();
  const auto fields = kropina::point_fields(K.metric(), K.form(), x);
  const auto hw = kropina::to_hw(fields, K.m());
  const auto jets = kropina::spray_jets(fields, kropina::PhiModel::generalized_kropina(K.m()), &hw, y, K.eps_beta());
  const auto fv = kropina::f_value(K, x, y);
  const auto G = values(jets.G);
  out << "F = " << num(fv.F) << ", alpha = " << num(fv.alpha) << ", beta = " << num(fv.beta)
      << ", s = " << num(fv.s) << ", b^2 = " << num(fields.beta.bsq.value()) << "\n";
  out << "gamma^i_00 (alpha) = " << vec(values(jets.gamma00_alpha)) << "\n";
  out << "gamma^i_00 (h) = " << vec(values(jets.gamma00_h)) << "\n";
  out << "G^i = " << vec(G) << "\n";
  out << "Phi^i = " << vec(values(jets.Phi)) << "\n";
  double wn = 0;
  for (int i = 0; i < n; ++i) wn += hw.W[u(i)] * hw.W_up[u(i)];
  out << "h/W: k = " << num(hw.k.value()) << ", pi = " << num(hw.pi_const) << ", |W|_h = " << num(std::sqrt(wn))
      << ", W_i = " << vec(hw.W) << ", h00 = " << num(quad(hw.h, y)) << ", W0 = " << num(dot(hw.W, y)) << "\n";
  const auto jets3 = kropina::spray_jets(fields, kropina::PhiModel::generalized_kropina(K.m()), &hw, y3, K.eps_beta());
  const double h = homogeneity(G, values(jets3.G));
  out << "homogeneity (lambda = 3): " << num(h) << (h < 1e-10 ? " ok" : " FAILED") << "\n";
  const double c = max_abs_diff(closed_form_spray(fields, K.m(), y), G) / std::max(1.0, max_abs(G));
  out << "closed-form omega/Theta cross-check: " << num(c) << (c < 1e-10 ? " ok" : " FAILED") << "\n";
  return kPass;
}

std::string check_report_json(const MetricFile& f, std::string_view bytes, const CheckOptions& o, bool* pass) {
  auto cfg = sample_config(f, o.samples.value_or(f.options.samples), o.seed.value_or(f.options.seed));
  if (o.tol_residual) cfg.tol_residual = *o.tol_residual;
  if (o.tol_k) cfg.tol_K = *o.tol_k;
  if (!(cfg.tol_residual > 0.0) || !(cfg.tol_K > 0.0)) throw ValidationError("tolerances must be positive");
  if (cfg.samples < 1) throw ValidationError("--samples must be at least 1");
  cfg.threads = std::max(1, o.threads);
  const auto space = f.space();
  const auto report = curvature::constant_curvature_check(*space, cfg);

  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "check";
  j["input"] = {{"fnv1a64", hash}, {"dimension", f.dimension}, {"mode", to_string(f.mode)}};
  if (f.mode == Mode::kropina) j["input"]["m"] = f.m;
  j["config"] = {{"samples", cfg.samples},
                 {"seed", cfg.seed},
                 {"tol_residual", cfg.tol_residual},
                 {"tol_k", cfg.tol_K},
                 {"eps_beta", f.options.eps_beta},
                 {"s_window", {f.options.s_lo, f.options.s_hi}},
                 {"box_lo", f.domain.lo},
                 {"box_hi", f.domain.hi}};
  ordered_json rows = ordered_json::array();
  double max_delta = 0.0;
  for (const auto& r : report.rows) {
    ordered_json row;
    row["index"] = r.index;
    row["x"] = r.x;
    row["y"] = r.y;
    row["F"] = r.F;
    row["K_fit"] = r.K_fit;
    row["rel_residual"] = r.rel_residual;
    if (r.suite_residual) row["suite_residual"] = *r.suite_residual;
    if (r.suite_delta) {
      row["suite_delta"] = *r.suite_delta;
      max_delta = std::max(max_delta, *r.suite_delta);
    }
    row["rejected_draws"] = r.rejected_draws;
    row["flags"] = {{"residual_ok", r.rel_residual < cfg.tol_residual}};
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  ordered_json summary;
  summary["verdict"] = report.pass ? "PASS" : "FAIL";
  summary["K_median"] = report.K_median;
  summary["K_min"] = report.K_min;
  summary["K_max"] = report.K_max;
  summary["K_spread"] = report.K_spread;
  summary["K_spread_rel"] = report.K_spread_rel;
  summary["max_residual"] = report.max_residual;
  if (f.mode == Mode::kropina) summary["max_suite_delta"] = max_delta;
  summary["rejected_draws"] = report.rejected_draws;
  j["summary"] = std::move(summary);
  if (pass) *pass = report.pass;
  return j.dump(2) + "\n";
}

int cmd_check(const MetricFile& f, std::string_view bytes, const CheckOptions& o, std::ostream& out) {
  bool pass = false;
  out << check_report_json(f, bytes, o, &pass);
  return pass ? kPass : kFail;
}

std::vector<IdentityRow> verify_rows(const MetricFile& f, int samples) {
  if (samples < 1) throw ValidationError("--samples must be at least 1");
  const int n = f.dimension;
  const auto space = f.space();
  const auto pts = curvature::draw_samples(*space, sample_config(f, samples, f.options.seed));
  const auto metric = f.metric_field();

  std::vector<IdentityRow> rows;
  auto row = [&](const std::string& name, bool asserting = true, double tol = 1e-8) -> IdentityRow& {
    for (auto& r : rows)
      if (r.name == name) return r;
    rows.push_back({name, asserting, 0.0, tol});
    return rows.back();
  };
  auto note = [&](const std::string& name, double v, bool asserting = true) {
    auto& r = row(name, asserting);
    r.residual = std::max(r.residual, std::isnan(v) ? std::numeric_limits<double>::infinity() : v);
  };
  auto rel = [](double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); };

  for (const auto& [x, y] : pts) {
    // Riemannian layer
    const auto a = riemann::metric_at(metric, x);
    const auto gamma = riemann::christoffel(a);
    {
      Matrix<double> prod = Matrix<double>::square(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) prod(i, j) += a.a_inv(i, k) * a.a(k, j);
      note("metric inverse: a^-1 a = I", max_abs_diff(prod, identity(n)));

      riemann::Tensor<Jet2> t(n, {riemann::Slot::lower, riemann::Slot::lower}, Jet2(0.0, 2 * n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t.at({i, j}) = embed(a.jets(i, j), 2 * n);
      const auto d = riemann::h_cov_derivative(t, y, gamma);
      double comp = 0;
      for (std::size_t q = 0; q < d.size(); ++q) comp = std::max(comp, std::fabs(d[q]));
      note("metric compatibility: a_ij;k = 0", comp);

      const Jet2 rho = 0.1 * Jet2::variable(x[0], 0, n) + 0.05 * Jet2::variable(x[u(n - 1)], n - 1, n) *
                                                             Jet2::variable(x[0], 0, n);
      const Jet2 scale = exp(2.0 * rho);
      Matrix<Jet2> scaled = a.jets;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scaled(i, j) = scale * a.jets(i, j);
      const auto direct = riemann::christoffel(riemann::metric_from_jets(scaled));
      const auto law = riemann::conformal_christoffel(gamma, rho, a.jets, a.inv_jets);
      note("conformal law: rho = x1/10 + x1 xn/20, vs direct Christoffel of e^(2 rho) a",
           std::max(max_abs_diff(law.gamma, direct.gamma), max_abs_diff(law.dgamma, direct.dgamma)));

      const auto R = riemann::riemann_curvature(gamma);
      double bianchi = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              bianchi = std::max(bianchi, std::fabs(R(j, i, k, l) + R(k, i, l, j) + R(l, i, j, k)));
      note("first Bianchi identity", bianchi);
    }

    // Finsler layer (both modes)
    const auto cs = space->curvature(x, y);
    {
      const auto Fj = space->norm(x, y);
      const auto G = values(space->spray(x, y));
      note("spray vs Euler-Lagrange equations of F",
           max_abs_diff(curvature::spray_from_norm(Fj, y), G) / std::max(1.0, max_abs(G)));
      const auto fp = curvature::flag_projection(Fj, y);
      double tr = 0;
      for (int i = 0; i < n; ++i) tr += fp.h_mixed(i, i);
      note("flag projection: trace h = n - 1", std::fabs(tr - (n - 1)));
      std::vector<double> y3 = y;
      for (double& v : y3) v *= 3.0;
      const auto R3 = curvature::berwald_curvature(space->spray(x, y3), y3);
      const double scale = std::max(1.0, max_abs(cs.R.data()));
      double hom = 0, ann = 0;
      for (int i = 0; i < n; ++i) {
        double ry = 0;
        for (int l = 0; l < n; ++l) {
          hom = std::max(hom, std::fabs(R3(i, l) - 9.0 * cs.R(i, l)) / (9.0 * scale));
          ry += cs.R(i, l) * y[u(l)];
        }
        ann = std::max(ann, std::fabs(ry) / scale);
      }
      note("curvature operator: R(x, 3y) = 9 R(x, y)", hom);
      note("curvature operator annihilates y", ann);
      if (f.mode == Mode::riemannian) {
        const auto T = riemann::flag_transvection(riemann::riemann_curvature(gamma), y);
        note("Berwald curvature of gamma^i_00/2 vs transvected Riemann tensor", max_abs_diff(cs.R, T) / scale);
      }
    }

    if (f.mode != Mode::kropina) continue;
    const auto K = f.kropina_metric();
    const auto fields = kropina::point_fields(K.metric(), K.form(), x);
    const auto hw = kropina::to_hw(fields, K.m());
    const auto jets = kropina::spray_jets(fields, kropina::PhiModel::generalized_kropina(K.m()), &hw, y, K.eps_beta());
    const auto fv = kropina::f_value(K, x, y);
    const double h00 = quad(hw.h, y), W0 = dot(hw.W, y);

    const auto hdirect = riemann::christoffel(riemann::metric_from_jets(hw.h_jets));
    note("conformal law: h-connection vs direct Christoffel of h = e^k a",
         std::max(max_abs_diff(hw.h_gamma.gamma, hdirect.gamma), max_abs_diff(hw.h_gamma.dgamma, hdirect.dgamma)));
    {
      const auto hg = riemann::transvect00(hw.h_gamma, y);
      const auto ag = riemann::transvect00(fields.alpha_gamma, y);
      const double k0 = dot(hw.k_low, y);
      double d = 0;
      for (int i = 0; i < n; ++i)
        d = std::max(d, std::fabs(hg[u(i)] - ag[u(i)] - k0 * y[u(i)] + 0.5 * h00 * hw.k_bar[u(i)]));
      note("h-spray: h gamma^i_00 = a gamma^i_00 + k0 y^i - h00 kbar^i / 2", d);
    }
    note("F = pi h00^((m+1)/2) / W0^m", rel(hw.pi_const * std::pow(h00, 0.5 * (K.m() + 1)) / std::pow(W0, K.m()), fv.F));
    note("|W|_h = 1", std::fabs(dot(hw.W, hw.W_up) - 1.0));
    note("alpha^2 / beta = h00 / (2 W0)", rel(h00 / (2 * W0), fv.alpha * fv.alpha / fv.beta));
    const auto kr = kropina::killing_relations(fields, hw, y);
    note("b^i = 2 W^i", kr.b_up);
    note("r_ij = 2e^-k (R_ij - W_r kbar^r h_ij / 2)", kr.r_ij);
    note("s_ij = 2e^-k (S_ij + (k_i W_j - k_j W_i) / 2)", kr.s_ij);
    note("s^i_j, s^i_0, s_i, s_0, r_00 in terms of S, R, k, W",
         std::max({kr.s_mixed, kr.s_i0, kr.s_low, kr.s_0, kr.r_00}));
    {
      const double bsq = fields.beta.bsq.value();
      const auto g = kropina::phi_functions(K.m(), fv.s, bsq);
      const auto c = kropina::phi_closed_form(K.m(), fv.s, bsq);
      note("omega, omega', Theta: generic vs closed form",
           std::max({rel(g.omega, c.omega), rel(g.domega, c.domega), rel(g.theta, c.theta)}));
      note("sigma1 = -2 Theta", rel(kropina::sigma1(K.m(), fv.s, bsq), -2.0 * c.theta));
      const auto G = values(jets.G);
      note("spray: generic omega/Theta vs closed forms",
           max_abs_diff(closed_form_spray(fields, K.m(), y), G) / std::max(1.0, max_abs(G)));
    }
    {
      const auto q = curvature::kropina_flag_quotient(hw, y);
      const auto fp = curvature::flag_projection(jets.F, y);
      double d = 0;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) d = std::max(d, std::fabs(q(i, l) - ((i == l) - fp.h_mixed(i, l))));
      note("flag quotient l^i l_l with (m+1) coefficient vs dF/dy", d);
    }
    if (cs.suite_delta) note("curvature: Phi-derivative assembly vs Berwald formula", *cs.suite_delta);
    note("Killing: max |R_ij| of W under h (report only)", max_abs(kropina::killing_invariants(hw).R.data()), false);
    for (const auto& d : kropina::decomposition_diagnostics(K, x, y))
      note("diagnostic: " + d.name + " (relative, report only)", d.relative, false);
  }
  return rows;
}

int cmd_verify(const MetricFile& f, int samples, std::ostream& out) {
  const auto rows = verify_rows(f, samples);
  bool all = true;
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  out << "identity suite over " << samples << " sampled points (asserting rows need residual < 1e-8)\n";
  for (const auto& r : rows) {
    const char* status = r.asserting ? (r.ok() ? "ok    " : "FAILED") : "report";
    all = all && r.ok();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r.residual);
    out << status << "  " << r.name << std::string(width - r.name.size() + 2, ' ') << buf << "\n";
  }
  out << (all ? "all asserting identities hold\n" : "some asserting identities FAILED\n");
  return all ? kPass : kFail;
}

int cmd_geodesic(const MetricFile& f, const GeodesicOptions& o, std::ostream& csv, std::ostream& summary) {
  require_dims(f, o.x0, o.y0);
  const auto space = f.space();
  const auto tr = curvature::geodesic_integrate(*space, o.x0, o.y0, o.t_end, o.dt, &f.domain, o.record_every);
  const int n = f.dimension;
  csv << "t";
  for (int i = 1; i <= n; ++i) csv << ",x" << i;
  for (int i = 1; i <= n; ++i) csv << ",y" << i;
  csv << ",F\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    csv << buf;
  };
  for (const auto& p : tr.points) {
    put(p.t);
    for (double v : p.x) csv << ',', put(v);
    for (double v : p.y) csv << ',', put(v);
    csv << ',';
    put(p.F);
    csv << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.3e", tr.max_rel_drift);
  summary << "# F drift (max relative) = " << buf << ", points = " << tr.points.size()
          << ", t_final = " << num(tr.points.back().t)
          << (tr.truncated ? ", truncated: " + tr.reason : std::string(", complete")) << "\n";
  return kPass;
}

}  // namespace fcl::app
