#include "fcl/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "fcl/errors.hpp"

namespace fcl::expr {

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr FuncName kFuncs[] = {
    {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},   {"exp", Func::exp},
    {"ln", Func::ln},     {"sqrt", Func::sqrt}, {"sinh", Func::sinh}, {"cosh", Func::cosh},
};

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::number;
  n->number = v;
  return n;
}

NodePtr make_binary(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool has_variables(const Node& n) {
  switch (n.kind) {
    case Kind::number:
      return false;
    case Kind::variable:
      return true;
    case Kind::negate:
    case Kind::call:
      return has_variables(*n.lhs);
    default:
      return has_variables(*n.lhs) || has_variables(*n.rhs);
  }
}

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  NodePtr run() {
    skip_space();
    if (pos_ >= src_.size()) fail("empty expression");
    NodePtr e = expr();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    const std::string where =
        pos_ >= src_.size() ? "end of input" : "position " + std::to_string(pos_ + 1);
    throw ParseError("syntax error at " + where + ": " + msg, pos_);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make_binary(Kind::add, lhs, term());
      else if (accept('-'))
        lhs = make_binary(Kind::subtract, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make_binary(Kind::multiply, lhs, unary());
      else if (accept('/'))
        lhs = make_binary(Kind::divide, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::negate;
      n->lhs = unary();
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip_space();
    const std::size_t at = pos_;
    if (accept('^')) {
      NodePtr exponent = unary();
      if (has_variables(*exponent)) {
        pos_ = at;
        fail("exponent must not depend on coordinates");
      }
      return make_binary(Kind::power, base, exponent);
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("expected operand");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
    return make_number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
      const int index = std::atoi(std::string(name.substr(1)).c_str());
      if (index < 1 || index > dim_) {
        throw ParseError("variable " + std::string(name) + " out of range for dimension " +
                             std::to_string(dim_),
                         start);
      }
      auto n = std::make_shared<Node>();
      n->kind = Kind::variable;
      n->variable = index - 1;
      return n;
    }
    if (name == "pi") return make_number(M_PI);
    for (const auto& f : kFuncs) {
      if (f.name == name) {
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        auto n = std::make_shared<Node>();
        n->kind = Kind::call;
        n->func = f.func;
        n->lhs = expr();
        if (!accept(')')) fail("expected ')'");
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "' at position " +
                         std::to_string(start + 1),
                     start);
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

// Printing precedence: add/sub 1, mul/div 2, negate 3, power 4, atoms 5.
int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::add:
    case Kind::subtract:
      return 1;
    case Kind::multiply:
    case Kind::divide:
      return 2;
    case Kind::negate:
      return 3;
    case Kind::power:
      return 4;
    default:
      return 5;
  }
}

void print(const Node& n, std::string& out);

void print_child(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print(n, out);
  if (parens) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::number: {
      // shortest text that reads back to the same double
      char buf[32];
      for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, n.number);
        if (std::strtod(buf, nullptr) == n.number) break;
      }
      out += buf;
      return;
    }
    case Kind::variable:
      out += 'x';
      out += std::to_string(n.variable + 1);
      return;
    case Kind::negate:
      out += '-';
      print_child(*n.lhs, precedence(*n.lhs) < 3, out);
      return;
    case Kind::call:
      out += to_string(n.func);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    case Kind::power:
      print_child(*n.lhs, precedence(*n.lhs) <= 4, out);
      out += '^';
      print_child(*n.rhs, precedence(*n.rhs) < 3, out);
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == Kind::add        ? " + "
                       : n.kind == Kind::subtract ? " - "
                       : n.kind == Kind::multiply ? "*"
                                                  : "/";
      print_child(*n.lhs, precedence(*n.lhs) < p, out);
      out += op;
      print_child(*n.rhs, precedence(*n.rhs) <= p, out);
      return;
    }
  }
}

bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::number:
      return a.number == b.number;
    case Kind::variable:
      return a.variable == b.variable;
    case Kind::negate:
      return equal(*a.lhs, *b.lhs);
    case Kind::call:
      return a.func == b.func && equal(*a.lhs, *b.lhs);
    default:
      return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
}

int max_var(const Node& n) {
  switch (n.kind) {
    case Kind::number:
      return 0;
    case Kind::variable:
      return n.variable + 1;
    case Kind::negate:
    case Kind::call:
      return max_var(*n.lhs);
    default:
      return std::max(max_var(*n.lhs), max_var(*n.rhs));
  }
}

std::string describe(const Node& n) {
  std::string s;
  print(n, s);
  return s;
}

[[noreturn]] void domain_fail(const Node& n, const std::string& why) {
  throw DomainError(why + " in '" + describe(n) + "'");
}

template <class T>
T eval(const Node& n, std::span<const double> x) {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tan;

  switch (n.kind) {
    case Kind::number:
      return T(n.number);
    case Kind::variable:
      if constexpr (std::is_same_v<T, double>) {
        return x[static_cast<std::size_t>(n.variable)];
      } else {
        return Jet2::variable(x[static_cast<std::size_t>(n.variable)], n.variable,
                              static_cast<int>(x.size()));
      }
    case Kind::negate:
      return -eval<T>(*n.lhs, x);
    case Kind::add:
      return eval<T>(*n.lhs, x) + eval<T>(*n.rhs, x);
    case Kind::subtract:
      return eval<T>(*n.lhs, x) - eval<T>(*n.rhs, x);
    case Kind::multiply:
      return eval<T>(*n.lhs, x) * eval<T>(*n.rhs, x);
    case Kind::divide: {
      const T den = eval<T>(*n.rhs, x);
      if (value_of(den) == 0.0) domain_fail(n, "division by zero");
      return eval<T>(*n.lhs, x) / den;
    }
    case Kind::power: {
      const T base = eval<T>(*n.lhs, x);
      const double p = eval<double>(*n.rhs, x);
      const bool integer = std::nearbyint(p) == p;
      const double b = value_of(base);
      if (!integer && !(b > 0.0)) domain_fail(n, "non-integer power of non-positive base");
      if (integer && p < 0.0 && b == 0.0) domain_fail(n, "negative power of zero");
      return pow(base, p);
    }
    case Kind::call: {
      const T u = eval<T>(*n.lhs, x);
      const double v = value_of(u);
      switch (n.func) {
        case Func::sin:
          return sin(u);
        case Func::cos:
          return cos(u);
        case Func::tan:
          if (std::cos(v) == 0.0) domain_fail(n, "tan pole");
          return tan(u);
        case Func::exp:
          return exp(u);
        case Func::ln:
          if (!(v > 0.0)) domain_fail(n, "ln of non-positive value");
          return log(u);
        case Func::sqrt:
          if (std::is_same_v<T, double> ? !(v >= 0.0) : !(v > 0.0))
            domain_fail(n, "sqrt outside its domain");
          return sqrt(u);
        case Func::sinh:
          return sinh(u);
        case Func::cosh:
          return cosh(u);
      }
    }
  }
  domain_fail(n, "unknown node");
}

void check_arity(const Expression& e, std::span<const double> x) {
  if (e.empty()) throw ValidationError("evaluating an empty expression");
  if (static_cast<int>(x.size()) < e.max_variable())
    throw ValidationError("point has " + std::to_string(x.size()) +
                          " coordinates but the expression uses x" +
                          std::to_string(e.max_variable()));
  if (x.size() > static_cast<std::size_t>(kMaxJetVars))
    throw ValidationError("too many coordinates for jet evaluation");
}

}  // namespace

std::string to_string(Func f) {
  for (const auto& entry : kFuncs)
    if (entry.func == f) return std::string(entry.name);
  return "?";
}

int Expression::max_variable() const { return root_ ? max_var(*root_) : 0; }

std::string Expression::to_string() const {
  std::string s;
  if (root_) print(*root_, s);
  return s;
}

bool Expression::structurally_equal(const Expression& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return equal(*root_, *other.root_);
}

Expression parse(std::string_view source, int dimension) {
  Parser p(source, dimension);
  return Expression(p.run(), dimension);
}

double evaluate(const Expression& e, std::span<const double> x) {
  check_arity(e, x);
  const double v = eval<double>(e.root(), x);
  if (!std::isfinite(v)) domain_fail(e.root(), "non-finite value");
  return v;
}

Jet2 eval_jet2(const Expression& e, std::span<const double> x) {
  check_arity(e, x);
  Jet2 j = eval<Jet2>(e.root(), x);
  j.set_vars(static_cast<int>(x.size()));
  if (!std::isfinite(j.value())) domain_fail(e.root(), "non-finite value");
  return j;
}

double fd_validate(const Expression& e, std::span<const double> x, double step) {
  if (!(step > 0.0)) throw ValidationError("finite-difference step must be positive");
  const int n = static_cast<int>(x.size());
  const Jet2 jet = eval_jet2(e, x);
  std::vector<double> p(x.begin(), x.end());
  double residual = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    p[kk] = x[kk] + step;
    const Jet2 fp = eval_jet2(e, p);
    p[kk] = x[kk] - step;
    const Jet2 fm = eval_jet2(e, p);
    p[kk] = x[kk];
    const double dv = (fp.value() - fm.value()) / (2.0 * step);
    residual = std::max(residual, std::fabs(dv - jet.grad(k)));
    for (int i = 0; i < n; ++i) {
      const double dg = (fp.grad(i) - fm.grad(i)) / (2.0 * step);
      residual = std::max(residual, std::fabs(dg - jet.hess(k, i)));
    }
  }
  return residual;
}

}  // namespace fcl::expr
