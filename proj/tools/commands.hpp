#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "metric_file.hpp"

namespace fcl::app {

/// Process exit codes.
enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2, kDomain = 3 };

/// FNV-1a, 64 bit, over the raw bytes of the metric file.
std::uint64_t fnv1a64(std::string_view bytes);

int cmd_info(const MetricFile& file, std::ostream& out);

int cmd_spray(const MetricFile& file, const std::vector<double>& x, const std::vector<double>& y,
              std::ostream& out);

struct CheckOptions {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_residual;
  std::optional<double> tol_k;
  int threads = 1;
};

/// The verdict report as JSON text (schema 1), ending in a newline.
std::string check_report_json(const MetricFile& file, std::string_view file_bytes,
                              const CheckOptions& options, bool* pass = nullptr);

/// Writes the JSON report; returns kPass or kFail.
int cmd_check(const MetricFile& file, std::string_view file_bytes, const CheckOptions& options,
              std::ostream& out);

struct IdentityRow {
  std::string name;
  bool asserting = true;
  double residual = 0.0;
  double tolerance = 1e-8;
  bool ok() const { return !asserting || residual < tolerance; }
};

/// Cross-identity suite on `samples` sampled points.
std::vector<IdentityRow> verify_rows(const MetricFile& file, int samples);
/// Prints the suite; kPass when every asserting row is within tolerance.
int cmd_verify(const MetricFile& file, int samples, std::ostream& out);

struct GeodesicOptions {
  std::vector<double> x0;
  std::vector<double> y0;
  double t_end = 1.0;
  double dt = 1e-3;
  int record_every = 1;
};

/// CSV (t, x1..xn, y1..yn, F) to `csv`, a drift summary line to `summary`.
int cmd_geodesic(const MetricFile& file, const GeodesicOptions& options, std::ostream& csv,
                 std::ostream& summary);

}  // namespace fcl::app
