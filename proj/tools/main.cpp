// fcl: generalized Kropina metrics from the command line.
//
//   fcl info|spray|check|verify|geodesic <file> [flags]
//
// Exit codes: 0 PASS, 1 FAIL, 2 usage/parse/validation error, 3 numerical domain error.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "fcl/errors.hpp"

namespace {

int default_threads() {
  if (const char* env = std::getenv("FCL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fcl::app;
  CLI::App app{"Generalized Kropina metrics F = alpha^(m+1)/beta^m: spray, curvature, constant-curvature check"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fcl 0.1.0");

  std::string file;
  auto* info = app.add_subcommand("info", "Summarize a metric file");
  info->add_option("file", file, "Metric definition file")->required();

  std::vector<double> x, y;
  auto* spray = app.add_subcommand("spray", "Spray, deviation and h/W data at one (x, y)");
  spray->add_option("file", file, "Metric definition file")->required();
  spray->add_option("--x", x, "Base point, comma separated")->required()->delimiter(',');
  spray->add_option("--y", y, "Direction, comma separated")->required()->delimiter(',');

  CheckOptions check_opts;
  check_opts.threads = default_threads();
  std::string out_path;
  int samples = 0;
  std::uint64_t seed = 0;
  double tol_residual = 0, tol_k = 0;
  auto* check = app.add_subcommand("check", "Constant flag curvature verdict (JSON report)");
  check->add_option("file", file, "Metric definition file")->required();
  auto* o_samples = check->add_option("--samples", samples, "Number of samples")->check(CLI::Range(1, 10000000));
  auto* o_seed = check->add_option("--seed", seed, "Random seed");
  auto* o_tolr = check->add_option("--tol-residual", tol_residual, "Max relative residual")->check(CLI::PositiveNumber);
  auto* o_tolk = check->add_option("--tol-k", tol_k, "Relative K spread tolerance")->check(CLI::PositiveNumber);
  check->add_option("--threads", check_opts.threads, "Worker threads (default: FCL_THREADS or all cores)")
      ->check(CLI::Range(1, 1024));
  check->add_option("--out", out_path, "Write the JSON report here instead of stdout");

  int verify_samples = 20;
  auto* verify = app.add_subcommand("verify", "Cross-identity suite");
  verify->add_option("file", file, "Metric definition file")->required();
  verify->add_option("--samples", verify_samples, "Number of sampled points")->check(CLI::Range(1, 100000));

  GeodesicOptions geo;
  auto* geodesic = app.add_subcommand("geodesic", "Integrate a geodesic, CSV output");
  geodesic->add_option("file", file, "Metric definition file")->required();
  geodesic->add_option("--x0", geo.x0, "Initial point, comma separated")->required()->delimiter(',');
  geodesic->add_option("--y0", geo.y0, "Initial velocity, comma separated")->required()->delimiter(',');
  geodesic->add_option("--t-end", geo.t_end, "Final time")->check(CLI::NonNegativeNumber);
  geodesic->add_option("--dt", geo.dt, "Step size")->check(CLI::PositiveNumber);
  geodesic->add_option("--every", geo.record_every, "Record every k-th step")->check(CLI::PositiveNumber);
  geodesic->add_option("--out", out_path, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    const std::string bytes = read_text(file);
    const MetricFile metric = parse_metric_file(bytes);

    auto with_output = [&](auto&& body) {
      if (out_path.empty()) return body(std::cout);
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw fcl::ValidationError("cannot write " + out_path);
      return body(out);
    };

    if (*info) return cmd_info(metric, std::cout);
    if (*spray) return cmd_spray(metric, x, y, std::cout);
    if (*check) {
      if (*o_samples) check_opts.samples = samples;
      if (*o_seed) check_opts.seed = seed;
      if (*o_tolr) check_opts.tol_residual = tol_residual;
      if (*o_tolk) check_opts.tol_k = tol_k;
      return with_output([&](std::ostream& out) { return cmd_check(metric, bytes, check_opts, out); });
    }
    if (*verify) return cmd_verify(metric, verify_samples, std::cout);
    if (*geodesic) {
      if (out_path.empty()) return cmd_geodesic(metric, geo, std::cout, std::cerr);
      return with_output([&](std::ostream& out) { return cmd_geodesic(metric, geo, out, std::cout); });
    }
  } catch (const fcl::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const fcl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const fcl::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
