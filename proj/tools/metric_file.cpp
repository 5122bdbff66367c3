#include "metric_file.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "fcl/errors.hpp"

namespace fcl::app {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string at_line(int line, const std::string& msg) {
  return "line " + std::to_string(line) + ": " + msg;
}

double to_double(const std::string& s, int line, const std::string& key) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw ValidationError(at_line(line, key + " must be a finite number, got '" + s + "'"));
  return v;
}

template <class Int = long long>
Int to_integer(const std::string& s, int line, const std::string& key) {
  Int v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ValidationError(at_line(line, key + " must be an integer, got '" + s + "'"));
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::pair<double, double> pair_of(const std::string& s, int line, const std::string& key) {
  const auto parts = split_list(s);
  if (parts.size() != 2) throw ValidationError(at_line(line, key + " needs two values 'lo, hi'"));
  return {to_double(parts[0], line, key), to_double(parts[1], line, key)};
}

// "a12" -> (0, 1); "b3" -> 2; nullopt when the key does not have that shape.
std::optional<std::vector<int>> indices(const std::string& key, char prefix, std::size_t count) {
  if (key.size() != count + 1 || key[0] != prefix) return std::nullopt;
  std::vector<int> out;
  for (std::size_t i = 1; i < key.size(); ++i) {
    if (key[i] < '1' || key[i] > '9') return std::nullopt;
    out.push_back(key[i] - '1');
  }
  return out;
}

std::string shortest(double v) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct Entry {
  std::string value;
  int line = 0;
};

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::kropina ? "kropina" : "riemannian"; }

MetricFile parse_metric_file(std::string_view text) {
  using Section = std::map<std::string, Entry>;
  std::map<std::string, Section> sections;
  std::map<std::string, int> section_lines;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(at_line(line_no, "unterminated section header"));
      current = trim(line.substr(1, line.size() - 2));
      if (current != "metric" && current != "oneform" && current != "domain" && current != "options")
        throw ParseError(at_line(line_no, "unknown section [" + current + "]"));
      if (sections.count(current)) throw ParseError(at_line(line_no, "duplicate section [" + current + "]"));
      sections[current];
      section_lines[current] = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(at_line(line_no, "expected 'key = value'"));
    if (current.empty()) throw ParseError(at_line(line_no, "entry outside of a section"));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(at_line(line_no, "empty key"));
    if (value.empty()) throw ParseError(at_line(line_no, "empty value for " + key));
    auto& sec = sections[current];
    if (sec.count(key)) throw ParseError(at_line(line_no, "duplicate key " + key));
    sec[key] = {value, line_no};
  }

  if (!sections.count("metric")) throw ValidationError("missing [metric] section");
  Section& metric = sections["metric"];
  MetricFile f;

  auto take = [](Section& s, const std::string& key) -> std::optional<Entry> {
    auto it = s.find(key);
    if (it == s.end()) return std::nullopt;
    Entry e = it->second;
    s.erase(it);
    return e;
  };

  const auto dim = take(metric, "dimension");
  if (!dim) throw ValidationError("[metric] needs 'dimension'");
  const long long n = to_integer(dim->value, dim->line, "dimension");
  if (n < 2 || n > 6) throw ValidationError(at_line(dim->line, "dimension must be between 2 and 6"));
  f.dimension = static_cast<int>(n);
  const auto un = static_cast<std::size_t>(n);

  if (const auto mode = take(metric, "mode")) {
    if (mode->value == "kropina")
      f.mode = Mode::kropina;
    else if (mode->value == "riemannian")
      f.mode = Mode::riemannian;
    else
      throw ValidationError(at_line(mode->line, "mode must be 'kropina' or 'riemannian'"));
  }
  if (const auto coords = take(metric, "coords")) {
    f.coords = split_list(coords->value);
    if (f.coords.size() != un) throw ValidationError(at_line(coords->line, "coords needs one name per dimension"));
    for (const auto& c : f.coords)
      if (c.empty()) throw ValidationError(at_line(coords->line, "empty coordinate name"));
  }
  const auto m = take(metric, "m");
  if (m) {
    f.m = to_double(m->value, m->line, "m");
    if (std::fabs(f.m) < 1e-12 || std::fabs(f.m + 1.0) < 1e-12)
      throw ValidationError(at_line(m->line, "m must not be 0 or -1"));
  } else if (f.mode == Mode::kropina) {
    throw ValidationError("[metric] needs 'm' in kropina mode");
  }

  auto expression = [&](const Entry& e) {
    try {
      return expr::parse(e.value, f.dimension);
    } catch (const ParseError& err) {
      throw ParseError(at_line(e.line, err.what()), err.position());
    }
  };

  for (std::size_t i = 0; i < un; ++i)
    for (std::size_t j = i; j < un; ++j) {
      const std::string key = "a" + std::to_string(i + 1) + std::to_string(j + 1);
      std::optional<Entry> e = take(metric, key);
      if (!e && i != j) e = take(metric, "a" + std::to_string(j + 1) + std::to_string(i + 1));
      if (!e) {
        if (i == j) throw ValidationError("[metric] is missing diagonal entry " + key);
        e = Entry{"0", 0};
      }
      f.a_source.push_back(e->value);
      f.a.push_back(expression(*e));
    }
  if (!metric.empty()) {
    const auto& [key, e] = *metric.begin();
    if (indices(key, 'a', 2))
      throw ValidationError(at_line(e.line, "metric entry " + key + " is out of range or given twice"));
    throw ValidationError(at_line(e.line, "unknown key '" + key + "' in [metric]"));
  }

  Section& form = sections["oneform"];
  if (f.mode == Mode::kropina || !form.empty()) {
    for (std::size_t i = 0; i < un; ++i) {
      const std::string key = "b" + std::to_string(i + 1);
      const auto e = take(form, key);
      if (!e) throw ValidationError("[oneform] is missing " + key);
      f.b_source.push_back(e->value);
      f.b.push_back(expression(*e));
    }
    if (!form.empty()) {
      const auto& [key, e] = *form.begin();
      throw ValidationError(at_line(e.line, "unknown key '" + key + "' in [oneform]"));
    }
  }

  if (!sections.count("domain")) throw ValidationError("missing [domain] section");
  Section& domain = sections["domain"];
  for (std::size_t i = 0; i < un; ++i) {
    const std::string key = "x" + std::to_string(i + 1);
    const auto e = take(domain, key);
    if (!e) throw ValidationError("[domain] is missing " + key);
    const auto [lo, hi] = pair_of(e->value, e->line, key);
    if (!(lo < hi)) throw ValidationError(at_line(e->line, key + " needs lo < hi"));
    f.domain.lo.push_back(lo);
    f.domain.hi.push_back(hi);
  }
  if (!domain.empty()) {
    const auto& [key, e] = *domain.begin();
    throw ValidationError(at_line(e.line, "unknown key '" + key + "' in [domain]"));
  }

  Section& opts = sections["options"];
  if (const auto e = take(opts, "eps_beta")) {
    f.options.eps_beta = to_double(e->value, e->line, "eps_beta");
    if (!(f.options.eps_beta >= 0.0)) throw ValidationError(at_line(e->line, "eps_beta must be >= 0"));
  }
  if (const auto e = take(opts, "s_window")) {
    std::tie(f.options.s_lo, f.options.s_hi) = pair_of(e->value, e->line, "s_window");
    if (!(f.options.s_lo >= 0.0 && f.options.s_lo < f.options.s_hi && f.options.s_hi <= 1.0))
      throw ValidationError(at_line(e->line, "s_window needs 0 <= lo < hi <= 1"));
  }
  if (const auto e = take(opts, "tol_residual")) {
    f.options.tol_residual = to_double(e->value, e->line, "tol_residual");
    if (!(f.options.tol_residual > 0.0)) throw ValidationError(at_line(e->line, "tol_residual must be > 0"));
  }
  if (const auto e = take(opts, "tol_k")) {
    f.options.tol_k = to_double(e->value, e->line, "tol_k");
    if (!(f.options.tol_k > 0.0)) throw ValidationError(at_line(e->line, "tol_k must be > 0"));
  }
  if (const auto e = take(opts, "samples")) {
    const long long s = to_integer(e->value, e->line, "samples");
    if (s < 1 || s > 10000000) throw ValidationError(at_line(e->line, "samples must be between 1 and 1e7"));
    f.options.samples = static_cast<int>(s);
  }
  if (const auto e = take(opts, "seed")) {
    if (!e->value.empty() && e->value[0] == '-') throw ValidationError(at_line(e->line, "seed must be >= 0"));
    f.options.seed = to_integer<std::uint64_t>(e->value, e->line, "seed");
  }
  if (!opts.empty()) {
    const auto& [key, e] = *opts.begin();
    throw ValidationError(at_line(e.line, "unknown key '" + key + "' in [options]"));
  }
  return f;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MetricFile load_metric_file(const std::filesystem::path& path) { return parse_metric_file(read_text(path)); }

std::string serialize(const MetricFile& f) {
  std::ostringstream out;
  const auto n = static_cast<std::size_t>(f.dimension);
  out << "[metric]\n";
  out << "dimension = " << f.dimension << "\n";
  if (!f.coords.empty()) {
    out << "coords = ";
    for (std::size_t i = 0; i < f.coords.size(); ++i) out << (i ? ", " : "") << f.coords[i];
    out << "\n";
  }
  out << "mode = " << to_string(f.mode) << "\n";
  out << "m = " << shortest(f.m) << "\n";
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j, ++k)
      out << "a" << i + 1 << j + 1 << " = " << f.a[k].to_string() << "\n";
  if (!f.b.empty()) {
    out << "\n[oneform]\n";
    for (std::size_t i = 0; i < n; ++i) out << "b" << i + 1 << " = " << f.b[i].to_string() << "\n";
  }
  out << "\n[domain]\n";
  for (std::size_t i = 0; i < n; ++i)
    out << "x" << i + 1 << " = " << shortest(f.domain.lo[i]) << ", " << shortest(f.domain.hi[i]) << "\n";
  out << "\n[options]\n";
  out << "eps_beta = " << shortest(f.options.eps_beta) << "\n";
  out << "s_window = " << shortest(f.options.s_lo) << ", " << shortest(f.options.s_hi) << "\n";
  out << "tol_residual = " << shortest(f.options.tol_residual) << "\n";
  out << "tol_k = " << shortest(f.options.tol_k) << "\n";
  out << "samples = " << f.options.samples << "\n";
  out << "seed = " << f.options.seed << "\n";
  return out.str();
}

bool operator==(const MetricFile& a, const MetricFile& b) {
  auto same_exprs = [](const std::vector<expr::Expression>& x, const std::vector<expr::Expression>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!x[i].structurally_equal(y[i])) return false;
    return true;
  };
  return a.dimension == b.dimension && a.coords == b.coords && a.mode == b.mode && a.m == b.m &&
         same_exprs(a.a, b.a) && same_exprs(a.b, b.b) && a.domain.lo == b.domain.lo &&
         a.domain.hi == b.domain.hi && a.options.eps_beta == b.options.eps_beta &&
         a.options.s_lo == b.options.s_lo && a.options.s_hi == b.options.s_hi &&
         a.options.tol_residual == b.options.tol_residual && a.options.tol_k == b.options.tol_k &&
         a.options.samples == b.options.samples && a.options.seed == b.options.seed;
}

riemann::MetricField MetricFile::metric_field() const { return riemann::MetricField(dimension, a); }

riemann::OneFormField MetricFile::one_form() const { return riemann::OneFormField(b); }

kropina::KropinaMetric MetricFile::kropina_metric() const {
  if (b.empty()) throw ValidationError("this file has no [oneform]");
  return kropina::KropinaMetric(metric_field(), one_form(), m, options.eps_beta);
}

std::unique_ptr<curvature::FinslerSpace> MetricFile::space() const {
  if (mode == Mode::riemannian) return std::make_unique<curvature::RiemannianSpace>(metric_field());
  return std::make_unique<curvature::KropinaSpace>(kropina_metric(),
                                                   curvature::SWindow{options.s_lo, options.s_hi});
}

}  // namespace fcl::app
