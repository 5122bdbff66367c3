#pragma once
// Shared test instances: metrics, 1-forms and sampling helpers.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fcl/curvature.hpp"
#include "fcl/expr.hpp"
#include "fcl/kropina.hpp"
#include "fcl/riemann.hpp"

namespace fcl::testing {

inline riemann::MetricField metric(int n, const std::vector<std::string>& upper) {
  std::vector<expr::Expression> e;
  for (const auto& s : upper) e.push_back(expr::parse(s, n));
  return riemann::MetricField(n, std::move(e));
}

inline riemann::OneFormField form(int n, const std::vector<std::string>& comps) {
  std::vector<expr::Expression> e;
  for (const auto& s : comps) e.push_back(expr::parse(s, n));
  return riemann::OneFormField(std::move(e));
}

struct Instance {
  std::string name;
  riemann::MetricField a;
  riemann::OneFormField b;
  double m = 1.0;
  curvature::Box box;

  kropina::KropinaMetric kropina() const { return kropina::KropinaMetric(a, b, m); }
};

inline Instance flat(double m, int n = 2) {
  Instance in;
  in.name = "flat";
  std::vector<std::string> up, bs;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) up.push_back(i == j ? "1" : "0");
    bs.push_back(i == 0 ? "2" : "0");
  }
  in.a = metric(n, up);
  in.b = form(n, bs);
  in.m = m;
  in.box = {std::vector<double>(static_cast<std::size_t>(n), -1.0),
            std::vector<double>(static_cast<std::size_t>(n), 1.0)};
  return in;
}

inline riemann::MetricField sphere2(double radius = 1.0) {
  const std::string r2 = std::to_string(radius * radius);
  return metric(2, {r2, "0", r2 + "*sin(x1)^2"});
}

inline curvature::Box sphere_box() { return {{0.3, 0.0}, {2.8, 6.0}}; }

/// Round S^3 in Hopf coordinates (eta, xi1, xi2) with the unit Hopf Killing
/// field, pulled back to (a, b) through a nonconstant conformal factor.
inline Instance hopf(double m = 1.0) {
  Instance in;
  in.name = "hopf";
  const std::string f = "exp(0.3*x2 - 0.2*x3)";
  in.a = metric(3, {f, "0", "0", f + "*sin(x1)^2", "0", f + "*cos(x1)^2"});
  in.b = form(3, {"0", "2*" + f + "*sin(x1)^2", "2*" + f + "*cos(x1)^2"});
  in.m = m;
  in.box = {{0.3, -1.0, -1.0}, {1.2, 1.0, 1.0}};
  return in;
}

inline Instance perturbed() {
  Instance in;
  in.name = "perturbed";
  in.a = metric(2, {"1", "0", "1"});
  in.b = form(2, {"1 + 0.1*x2", "0"});
  in.m = 1.0;
  in.box = {{-1.0, -1.0}, {1.0, 1.0}};
  return in;
}

/// A smooth, positive-definite, non-symmetric-looking instance with random
/// coefficients.
inline Instance random_instance(int n, double m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-0.3, 0.3);
  auto num = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", c(rng));
    return std::string(buf);
  };
  auto x = [](int i) { return "x" + std::to_string(i + 1); };
  Instance in;
  in.name = "random" + std::to_string(seed);
  std::vector<std::string> up, bs;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j)
        up.push_back("2 + " + num() + "*sin(" + x(j) + " + " + num() + "*" + x((j + 1) % n) +
                     ") + 0.2*" + x((i + 1) % n) + "^2");
      else
        up.push_back(num() + "*cos(" + x(i) + "*" + x(j) + ") + " + num() + "*" + x(j));
    }
    bs.push_back((i == 0 ? "1.5 + " : "") + num() + "*exp(" + num() + "*" + x((i + 1) % n) +
                 ") + " + num() + "*" + x(i) + "*" + x((i + n - 1) % n));
  }
  in.a = metric(n, up);
  in.b = form(n, bs);
  in.m = m;
  in.box = {std::vector<double>(static_cast<std::size_t>(n), -0.5),
            std::vector<double>(static_cast<std::size_t>(n), 0.5)};
  return in;
}

/// Deterministic admissible (x, y) pairs of a Kropina instance.
inline std::vector<std::pair<std::vector<double>, std::vector<double>>> points(
    const Instance& in, int count, std::uint64_t seed) {
  curvature::KropinaSpace space(in.kropina());
  curvature::SampleConfig cfg;
  cfg.box = in.box;
  cfg.samples = count;
  cfg.seed = seed;
  return curvature::draw_samples(space, cfg);
}

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace fcl::testing
