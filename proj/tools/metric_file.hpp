#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fcl/curvature.hpp"
#include "fcl/expr.hpp"

namespace fcl::app {

/// kropina: F = alpha^(m+1) / beta^m. riemannian: F = alpha, spray gamma^i_00 / 2.
enum class Mode { kropina, riemannian };

struct Options {
  double eps_beta = kropina::kDefaultEpsBeta;
  double s_lo = 0.05;
  double s_hi = 0.95;
  double tol_residual = 1e-6;
  double tol_k = 1e-4;
  int samples = 200;
  std::uint64_t seed = 1;
};

/// A metric definition file:
///
///   # comment
///   [metric]
///   dimension = 2
///   coords = theta, phi        (labels only; expressions use x1..xn)
///   mode = kropina             (or riemannian)
///   m = 1
///   a11 = 1                    (omitted off-diagonal entries are 0)
///   a22 = sin(x1)^2
///   [oneform]
///   b1 = 2
///   b2 = 0
///   [domain]
///   x1 = 0.3, 2.8
///   x2 = 0, 6
///   [options]
///   eps_beta = 1e-6
///   s_window = 0.05, 0.95
///   tol_residual = 1e-6
///   tol_k = 1e-4
///   samples = 200
///   seed = 1
struct MetricFile {
  int dimension = 0;
  std::vector<std::string> coords;
  Mode mode = Mode::kropina;
  double m = 1.0;
  std::vector<std::string> a_source;  // upper triangle, row-major
  std::vector<std::string> b_source;  // empty only in riemannian mode
  std::vector<expr::Expression> a;
  std::vector<expr::Expression> b;
  curvature::Box domain;
  Options options;

  riemann::MetricField metric_field() const;
  riemann::OneFormField one_form() const;
  kropina::KropinaMetric kropina_metric() const;
  /// The sampled space: Kropina or the Riemannian baseline.
  std::unique_ptr<curvature::FinslerSpace> space() const;
};

/// Throws ParseError / ValidationError with "line N: ..." messages.
MetricFile parse_metric_file(std::string_view text);
MetricFile load_metric_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Canonical text; parse_metric_file(serialize(f)) == f.
std::string serialize(const MetricFile& file);
bool operator==(const MetricFile& a, const MetricFile& b);

std::string to_string(Mode mode);

}  // namespace fcl::app
