#include <gtest/gtest.h>

#include <string>

#include "fcl/errors.hpp"
#include "metric_file.hpp"

using namespace fcl;
using namespace fcl::app;

namespace {

const char* kFlat = R"(# flat
[metric]
dimension = 2
coords = u, v
mode = kropina
m = 2
a11 = 1
a22 = 1
[oneform]
b1 = 2
b2 = 0
[domain]
x1 = -1, 1
x2 = -1, 1
)";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

template <class E>
std::string error_of(const std::string& text) {
  try {
    parse_metric_file(text);
  } catch (const E& e) {
    return e.what();
  }
  return "<no error>";
}

std::string shipped(const std::string& name) { return std::string(FCL_METRICS_DIR) + "/" + name; }

}  // namespace

TEST(MetricFile, ParsesFlatFile) {
  const auto f = parse_metric_file(kFlat);
  EXPECT_EQ(f.dimension, 2);
  EXPECT_EQ(f.mode, Mode::kropina);
  EXPECT_EQ(f.m, 2.0);
  ASSERT_EQ(f.coords.size(), 2u);
  EXPECT_EQ(f.coords[1], "v");
  EXPECT_EQ(f.a_source[1], "0");  // omitted off-diagonal
  EXPECT_EQ(f.domain.lo[0], -1.0);
  EXPECT_EQ(f.options.samples, 200);
  EXPECT_EQ(f.options.s_lo, 0.05);
}

TEST(MetricFile, CrlfAndLowerTriangleKey) {
  std::string text = with(kFlat, "a22 = 1", "a21 = 0.5\na22 = 1");
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  const auto f = parse_metric_file(crlf);
  EXPECT_EQ(f.a_source[1], "0.5");
}

TEST(MetricFile, RoundTrip) {
  for (const char* name : {"flat-parallel.fcl", "sphere-riemannian.fcl", "hopf-s3.fcl", "perturbed-b.fcl"}) {
    const auto f = load_metric_file(shipped(name));
    const auto text = serialize(f);
    const auto g = parse_metric_file(text);
    EXPECT_TRUE(f == g) << name << "\n" << text;
    EXPECT_EQ(serialize(g), text) << name;
  }
  auto f = parse_metric_file(kFlat);
  f.options.tol_k = 0.1 + 0.2;  // not exactly representable in short form
  f.options.seed = 18446744073709551615ull;
  EXPECT_TRUE(parse_metric_file(serialize(f)) == f);
}

TEST(MetricFile, RejectsForbiddenM) {
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "m = 2", "m = -1")).find("m must not be 0 or -1"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "m = 2", "m = 0")).find("line 6"), std::string::npos);
}

TEST(MetricFile, VariableOutOfRange) {
  const auto msg = error_of<ParseError>(with(kFlat, "a22 = 1", "a12 = x3\na22 = 1"));
  EXPECT_NE(msg.find("line 8"), std::string::npos) << msg;
  EXPECT_NE(msg.find("x3"), std::string::npos) << msg;
}

TEST(MetricFile, ValidationErrors) {
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "x1 = -1, 1", "x1 = 1, -1")).find("lo < hi"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "dimension = 2", "dimension = 1")).find("between 2 and 6"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "dimension = 2", "dimension = 7")).find("between 2 and 6"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "b2 = 0\n", "")).find("missing b2"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "m = 2\n", "")).find("needs 'm'"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "a11 = 1\n", "")).find("diagonal entry a11"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "b2 = 0", "b2 = 0\nb3 = 1")).find("unknown key"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>(std::string(kFlat) + "[options]\ns_window = 0.5, 0.2\n").find("s_window"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>(std::string(kFlat) + "[options]\nsamples = 0\n").find("samples"),
            std::string::npos);
  EXPECT_NE(error_of<ValidationError>(std::string(kFlat) + "[options]\nseed = -3\n").find("seed"), std::string::npos);
  EXPECT_NE(error_of<ValidationError>(with(kFlat, "m = 2", "m = two")).find("finite number"), std::string::npos);
}

TEST(MetricFile, ParseErrors) {
  EXPECT_NE(error_of<ParseError>(with(kFlat, "[domain]", "[domian]")).find("unknown section"), std::string::npos);
  EXPECT_NE(error_of<ParseError>(with(kFlat, "a11 = 1", "a11 1")).find("line 7"), std::string::npos);
  EXPECT_NE(error_of<ParseError>(with(kFlat, "a22 = 1", "a22 = 1 +")).find("line 8"), std::string::npos);
  EXPECT_NE(error_of<ParseError>(with(kFlat, "a22 = 1", "a22 = 1\na22 = 2")).find("duplicate"), std::string::npos);
}

TEST(MetricFile, RiemannianModeNeedsNoOneForm) {
  const auto f = load_metric_file(shipped("sphere-riemannian.fcl"));
  EXPECT_EQ(f.mode, Mode::riemannian);
  EXPECT_TRUE(f.b.empty());
  EXPECT_EQ(f.space()->dimension(), 2);
}

TEST(MetricFile, MissingFile) { EXPECT_THROW(load_metric_file("/nonexistent/x.fcl"), ValidationError); }
