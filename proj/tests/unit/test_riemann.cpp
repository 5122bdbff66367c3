#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fcl/errors.hpp"
#include "fcl/kropina.hpp"
#include "fcl/riemann.hpp"
#include "support/instances.hpp"

using namespace fcl;
using namespace fcl::riemann;
using fcl::testing::metric;
using fcl::testing::form;

namespace {

constexpr double kPi = std::numbers::pi;

// Christoffel symbols from central differences of metric values only.
std::vector<double> fd_christoffel(const MetricField& g, std::vector<double> x, double h = 1e-5) {
  const int n = g.dimension();
  auto at = [&](std::vector<double> p) { return metric_at(g, p).a; };
  std::vector<Matrix<double>> d;
  for (int l = 0; l < n; ++l) {
    auto p = x, q = x;
    p[static_cast<std::size_t>(l)] += h;
    q[static_cast<std::size_t>(l)] -= h;
    const auto ap = at(p), aq = at(q);
    Matrix<double> dl = Matrix<double>::square(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dl(i, j) = (ap(i, j) - aq(i, j)) / (2 * h);
    d.push_back(dl);
  }
  const auto inv = metric_at(g, x).a_inv;
  std::vector<double> out(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = 0;
        for (int r = 0; r < n; ++r)
          v += 0.5 * inv(i, r) * (d[static_cast<std::size_t>(j)](r, k) + d[static_cast<std::size_t>(k)](r, j) -
                                  d[static_cast<std::size_t>(r)](j, k));
        out[static_cast<std::size_t>((i * n + j) * n + k)] = v;
      }
  return out;
}

MetricField random_metric(int n, std::uint64_t seed) { return fcl::testing::random_instance(n, 1.0, seed).a; }

}  // namespace

TEST(MetricAt, EuclideanIsIdentity) {
  const auto g = metric(3, {"1", "0", "0", "1", "0", "1"});
  const auto s = metric_at(g, std::vector<double>{0.1, -2.0, 5.0});
  EXPECT_EQ(max_abs_diff(s.a, identity(3)), 0.0);
  EXPECT_EQ(max_abs_diff(s.a_inv, identity(3)), 0.0);
}

TEST(MetricAt, SphereAtEquator) {
  const auto s = metric_at(fcl::testing::sphere2(), std::vector<double>{kPi / 2, 0.3});
  EXPECT_NEAR(s.a(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(s.a(1, 1), 1.0, 1e-15);
  EXPECT_EQ(s.a(0, 1), 0.0);
}

TEST(MetricAt, IndefiniteNamesMinor) {
  try {
    metric_at(metric(2, {"1", "0", "-1"}), std::vector<double>{0.0, 0.0});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("order 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(metric_at(metric(2, {"-1", "0", "1"}), std::vector<double>{0, 0}), DomainError);
}

TEST(MetricAt, InverseAccurate) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_metric(3, seed);
    const auto s = metric_at(g, std::vector<double>{0.2, -0.1, 0.4});
    Matrix<double> prod = Matrix<double>::square(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) prod(i, j) += s.a_inv(i, k) * s.a(k, j);
    EXPECT_LT(max_abs_diff(prod, identity(3)), 1e-12);
  }
}

TEST(Christoffel, FlatVanishes) {
  const auto c = christoffel(metric(2, {"1", "0", "1"}), std::vector<double>{0.3, 0.4});
  EXPECT_EQ(max_abs(c.gamma), 0.0);
  EXPECT_EQ(max_abs(c.dgamma), 0.0);
}

TEST(Christoffel, SphereClosedForm) {
  const auto c = christoffel(fcl::testing::sphere2(), std::vector<double>{kPi / 4, 1.0});
  EXPECT_NEAR(c(0, 1, 1), -0.5, 1e-14);
  EXPECT_NEAR(c(1, 0, 1), 1.0, 1e-14);
  EXPECT_NEAR(c(1, 1, 0), 1.0, 1e-14);
  EXPECT_EQ(c(0, 0, 0), 0.0);
}

TEST(Christoffel, SymmetricAndMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int n = seed % 2 ? 2 : 3;
    const auto g = random_metric(n, seed);
    std::vector<double> x(static_cast<std::size_t>(n), 0.15 * static_cast<double>(seed) - 0.4);
    const auto c = christoffel(g, x);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) EXPECT_EQ(c(i, j, k), c(i, k, j));
    EXPECT_LT(max_abs_diff(c.gamma, fd_christoffel(g, x)), 1e-8);
    // d gamma against differences of gamma
    const double h = 1e-5;
    for (int l = 0; l < n; ++l) {
      auto p = x, q = x;
      p[static_cast<std::size_t>(l)] += h;
      q[static_cast<std::size_t>(l)] -= h;
      const auto cp = christoffel(g, p), cq = christoffel(g, q);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            EXPECT_NEAR(c.d(i, j, k, l), (cp(i, j, k) - cq(i, j, k)) / (2 * h), 1e-7);
    }
  }
}

TEST(Christoffel, MetricCompatibility) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const int n = 3;
    const auto g = random_metric(n, seed);
    const std::vector<double> x{0.1, 0.3, -0.2};
    const std::vector<double> y{0.5, -1.0, 0.25};
    const auto s = metric_at(g, x);
    Tensor<Jet2> t(n, {Slot::lower, Slot::lower}, Jet2(0.0, 2 * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t.at({i, j}) = embed(s.jets(i, j), 2 * n);
    const auto d = h_cov_derivative(t, y, christoffel(s));
    for (std::size_t f = 0; f < d.size(); ++f) EXPECT_LT(std::fabs(d[f]), 1e-10);
  }
}

TEST(Conformal, ConstantRhoIsIdentity) {
  const auto g = random_metric(2, 3);
  const std::vector<double> x{0.2, 0.1};
  const auto s = metric_at(g, x);
  const auto base = christoffel(s);
  const auto c = conformal_christoffel(base, Jet2(0.7, 2), s.jets, s.inv_jets);
  EXPECT_EQ(max_abs_diff(c.gamma, base.gamma), 0.0);
  EXPECT_LT(max_abs_diff(c.dgamma, base.dgamma), 1e-15);
}

TEST(Conformal, OneDimensionalHandValue) {
  const auto g = metric(1, {"1"});
  const std::vector<double> x{0.4};
  const auto s = metric_at(g, x);
  const Jet2 rho = expr::eval_jet2(expr::parse("x1", 1), x);
  const auto c = conformal_christoffel(christoffel(s), rho, s.jets, s.inv_jets);
  EXPECT_DOUBLE_EQ(c(0, 0, 0), 1.0);
  const auto v = conformal_christoffel(christoffel(s), rho, s.a, s.a_inv);
  EXPECT_DOUBLE_EQ(v(0, 0, 0), 1.0);
  EXPECT_FALSE(v.has_derivatives());
}

TEST(Conformal, MatchesDirectChristoffelOfScaledMetric) {
  const auto g = metric(2, {"1.5 + 0.2*sin(x1*x2)", "0.1*x1", "2 + 0.3*cos(x2)"});
  const auto rho_e = expr::parse("0.3*x1*x2", 2);
  const auto scaled = metric(2, {"exp(0.6*x1*x2)*(1.5 + 0.2*sin(x1*x2))", "exp(0.6*x1*x2)*0.1*x1",
                                 "exp(0.6*x1*x2)*(2 + 0.3*cos(x2))"});
  for (double t : {-0.7, -0.2, 0.4, 0.9}) {
    const std::vector<double> x{t, 0.5 - t};
    const auto s = metric_at(g, x);
    const auto c = conformal_christoffel(christoffel(s), expr::eval_jet2(rho_e, x), s.jets, s.inv_jets);
    const auto direct = christoffel(scaled, x);
    EXPECT_LT(max_abs_diff(c.gamma, direct.gamma), 1e-9);
    EXPECT_LT(max_abs_diff(c.dgamma, direct.dgamma), 1e-9);
  }
}

TEST(HConnection, ConstantFormOnFlatIsFlat) {
  const auto in = fcl::testing::flat(2.0, 3);
  const auto hw = kropina::to_hw(in.kropina(), std::vector<double>{0.1, 0.2, 0.3});
  EXPECT_EQ(max_abs(hw.h_gamma.gamma), 0.0);
  EXPECT_NEAR(hw.k.value(), 0.0, 1e-15);
}

TEST(HConnection, MatchesDirectAndTransvectionIdentity) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = seed % 2 ? 3 : 2;
    const auto in = fcl::testing::random_instance(n, 1.5, seed);
    for (const auto& [x, y] : fcl::testing::points(in, 4, seed)) {
      const auto fields = kropina::point_fields(in.a, in.b, x);
      const auto hw = kropina::to_hw(fields, in.m);
      const auto direct = christoffel(metric_from_jets(hw.h_jets));
      EXPECT_LT(max_abs_diff(hw.h_gamma.gamma, direct.gamma), 1e-9);
      EXPECT_LT(max_abs_diff(hw.h_gamma.dgamma, direct.dgamma), 1e-9);

      const auto hg = transvect00(hw.h_gamma, y);
      const auto ag = transvect00(fields.alpha_gamma, y);
      double k0 = 0, h00 = 0;
      for (int i = 0; i < n; ++i) {
        k0 += hw.k_low[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) h00 += hw.h(i, j) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
      }
      for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        EXPECT_LT(std::fabs(hg[ui] - ag[ui] - k0 * y[ui] + 0.5 * h00 * hw.k_bar[ui]), 1e-10);
      }
    }
  }
}

TEST(BetaInvariants, ParallelFormVanishes) {
  const auto b = beta_invariants(metric(2, {"1", "0", "1"}), form(2, {"1.5", "-2"}), std::vector<double>{0.3, 0.1});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(b.r(i, j).value(), 0.0);
      EXPECT_EQ(b.s(i, j).value(), 0.0);
      EXPECT_EQ(b.s_mixed(i, j).value(), 0.0);
    }
    EXPECT_EQ(b.s_low[static_cast<std::size_t>(i)].value(), 0.0);
  }
  EXPECT_DOUBLE_EQ(b.bsq.value(), 6.25);
}

TEST(BetaInvariants, LinearField) {
  const auto b = beta_invariants(metric(2, {"1", "0", "1"}), form(2, {"x2", "0"}), std::vector<double>{0.0, 1.0});
  EXPECT_DOUBLE_EQ(b.bcov(0, 1).value(), 1.0);
  EXPECT_DOUBLE_EQ(b.bcov(1, 0).value(), 0.0);
  EXPECT_DOUBLE_EQ(b.s(0, 1).value(), 0.5);
  EXPECT_DOUBLE_EQ(b.r(0, 1).value(), 0.5);
  // s_j = b^i s_ij with b^i = (1, 0): s_1 = s_11 = 0, s_2 = s_12 = +1/2.
  EXPECT_DOUBLE_EQ(b.s_low[0].value(), 0.0);
  EXPECT_DOUBLE_EQ(b.s_low[1].value(), 0.5);
  const double s0 = b.s_low[0].value() * 1.0 + b.s_low[1].value() * 1.0;
  EXPECT_DOUBLE_EQ(s0, 0.5);
}

TEST(BetaInvariants, ExactStructure) {
  const auto in = fcl::testing::random_instance(3, 1.0, 9);
  const auto b = beta_invariants(in.a, in.b, std::vector<double>{0.2, -0.3, 0.1});
  const auto a = metric_at(in.a, std::vector<double>{0.2, -0.3, 0.1});
  for (int i = 0; i < 3; ++i) {
    double sj = 0;
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(b.r(i, j).value(), b.r(j, i).value());
      EXPECT_EQ(b.s(i, j).value(), -b.s(j, i).value());
      EXPECT_NEAR(b.r(i, j).value() + b.s(i, j).value(), b.bcov(i, j).value(), 1e-15);
      sj += b.b_up[static_cast<std::size_t>(j)].value() * b.s(j, i).value();
    }
    EXPECT_NEAR(sj, b.s_low[static_cast<std::size_t>(i)].value(), 1e-14);
  }
  (void)a;
}

TEST(Curvature, FlatVanishes) {
  const auto r = riemann_curvature(metric(3, {"1", "0", "0", "1", "0", "1"}), std::vector<double>{0.1, 0.2, 0.3});
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) EXPECT_EQ(r(j, i, k, l), 0.0);
}

TEST(Curvature, SphereSectionalCurvature) {
  const std::vector<double> u{1.0, 0.0}, v{0.3, 0.8};
  for (double radius : {1.0, 2.0}) {
    const auto g = fcl::testing::sphere2(radius);
    for (double t : {0.4, 0.9, 1.5, 2.2, 2.7}) {
      const std::vector<double> x{t, 1.0 + t};
      const double K = sectional_curvature(riemann_curvature(g, x), metric_at(g, x).a, u, v);
      EXPECT_NEAR(K, 1.0 / (radius * radius), 1e-8);
    }
  }
}

TEST(Curvature, SphereFromFiniteDifferencesOfChristoffel) {
  // R_j^i_kl from differences of gamma values instead of their jets.
  const auto g = fcl::testing::sphere2();
  const std::vector<double> x{1.1, 0.4};
  const auto r = riemann_curvature(g, x);
  const auto c = christoffel(g, x);
  const double h = 1e-5;
  auto dg = [&](int i, int j, int k, int l) {
    auto p = x, q = x;
    p[static_cast<std::size_t>(l)] += h;
    q[static_cast<std::size_t>(l)] -= h;
    return (christoffel(g, p)(i, j, k) - christoffel(g, q)(i, j, k)) / (2 * h);
  };
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          double v = dg(i, j, l, k) - dg(i, j, k, l);
          for (int q = 0; q < 2; ++q) v += c(q, j, l) * c(i, q, k) - c(q, j, k) * c(i, q, l);
          EXPECT_NEAR(r(j, i, k, l), v, 1e-8);
        }
}

TEST(Curvature, BianchiAndAntisymmetry) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = random_metric(3, seed);
    const auto r = riemann_curvature(g, std::vector<double>{0.1, -0.2, 0.3});
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            EXPECT_EQ(r(j, i, k, l), -r(j, i, l, k));
            EXPECT_LT(std::fabs(r(j, i, k, l) + r(k, i, l, j) + r(l, i, j, k)), 1e-9);
          }
  }
}

TEST(HCovDerivative, DirectionVectorIsParallel) {
  const auto in = fcl::testing::random_instance(3, 1.0, 4);
  const std::vector<double> x{0.1, 0.2, -0.1}, y{0.3, 1.0, -0.7};
  const auto c = christoffel(in.a, x);
  const int n = 3;
  Tensor<Jet2> t(n, {Slot::upper}, Jet2(0.0, 2 * n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = Jet2::variable(y[static_cast<std::size_t>(i)], n + i, 2 * n);
  const auto d = h_cov_derivative(t, y, c);
  for (std::size_t f = 0; f < d.size(); ++f) EXPECT_LT(std::fabs(d[f]), 1e-14);
}

TEST(HCovDerivative, ConstantScalarAndFlatConstantField) {
  const auto c = christoffel(metric(2, {"1", "0", "1"}), std::vector<double>{0.0, 0.0});
  const std::vector<double> y{1.0, 2.0};
  Tensor<Jet2> scalar(2, {}, Jet2(3.0, 4));
  const auto ds = h_cov_derivative(scalar, y, c);
  EXPECT_EQ(ds[0], 0.0);
  EXPECT_EQ(ds[1], 0.0);
  Tensor<Jet2> w(2, {Slot::lower}, Jet2(0.6, 4));
  const auto dw = h_cov_derivative(w, y, c);
  for (std::size_t f = 0; f < dw.size(); ++f) EXPECT_EQ(dw[f], 0.0);
}

TEST(HCovDerivative, SignatureMismatch) {
  const auto c = christoffel(metric(2, {"1", "0", "1"}), std::vector<double>{0.0, 0.0});
  Tensor<Jet2> t(3, {Slot::upper}, Jet2(0.0, 6));
  EXPECT_THROW(h_cov_derivative(t, std::vector<double>{1, 0}, c), ValidationError);
}

TEST(RiemannianSpray, MatchesHalfTransvection) {
  const auto c = christoffel(fcl::testing::sphere2(), std::vector<double>{0.8, 0.1});
  const std::vector<double> y{0.3, 0.9};
  const auto G = riemannian_spray_jets(c, y);
  const auto t = transvect00(c, y);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(G[static_cast<std::size_t>(i)].value(), 0.5 * t[static_cast<std::size_t>(i)], 1e-15);
}
