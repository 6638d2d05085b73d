#include "avgkit/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace avgkit {
namespace detail {

struct Node {
  enum class Kind : unsigned char { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind;
  Fn fn = Fn::Sin;
  int var = -1;      // Var: 0 = t, >= 1 = x_i
  double value = 0;  // Const value, or Pow exponent
  NodePtr a, b;
  std::size_t size = 1;
  int max_x = 0;
  bool uses_t = false;
};

namespace {

constexpr std::size_t kNodeLimit = 1'000'000;

NodePtr make(Node n) {
  std::size_t size = 1;
  int max_x = 0;
  bool uses_t = false;
  for (const NodePtr* c : {&n.a, &n.b}) {
    if (*c) {
      size += (*c)->size;
      if ((*c)->max_x > max_x) max_x = (*c)->max_x;
      uses_t = uses_t || (*c)->uses_t;
    }
  }
  if (n.kind == Node::Kind::Var) {
    if (n.var == kVarT)
      uses_t = true;
    else
      max_x = n.var;
  }
  if (size > kNodeLimit)
    throw ResourceError("expression node limit (1e6) exceeded");
  n.size = size;
  n.max_x = max_x;
  n.uses_t = uses_t;
  return std::make_shared<const Node>(std::move(n));
}

NodePtr nconst(double v) {
  Node n;
  n.kind = Node::Kind::Const;
  n.value = v;
  return make(std::move(n));
}

NodePtr nvar(int var) {
  Node n;
  n.kind = Node::Kind::Var;
  n.var = var;
  return make(std::move(n));
}

NodePtr nbin(Node::Kind k, NodePtr a, NodePtr b) {
  Node n;
  n.kind = k;
  n.a = std::move(a);
  n.b = std::move(b);
  return make(std::move(n));
}

NodePtr nneg(NodePtr a) {
  Node n;
  n.kind = Node::Kind::Neg;
  n.a = std::move(a);
  return make(std::move(n));
}

NodePtr npow(NodePtr base, double expo) {
  Node n;
  n.kind = Node::Kind::Pow;
  n.a = std::move(base);
  n.value = expo;
  return make(std::move(n));
}

NodePtr ncall(Fn fn, NodePtr arg) {
  Node n;
  n.kind = Node::Kind::Call;
  n.fn = fn;
  n.a = std::move(arg);
  return make(std::move(n));
}

bool is_const(const NodePtr& p, double v) {
  return p->kind == Node::Kind::Const && p->value == v;
}

// Folding builders used by diff: collapse the 0/1 constants that the
// product and chain rules generate, so derivative trees stay tractable.
NodePtr fadd(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const)
    return nconst(a->value + b->value);
  return nbin(Node::Kind::Add, std::move(a), std::move(b));
}

NodePtr fneg(NodePtr a) {
  if (a->kind == Node::Kind::Const) return nconst(-a->value);
  if (a->kind == Node::Kind::Neg) return a->a;
  return nneg(std::move(a));
}

NodePtr fsub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return fneg(std::move(b));
  if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const)
    return nconst(a->value - b->value);
  return nbin(Node::Kind::Sub, std::move(a), std::move(b));
}

NodePtr fmul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return nconst(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const)
    return nconst(a->value * b->value);
  return nbin(Node::Kind::Mul, std::move(a), std::move(b));
}

NodePtr fdiv(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return nconst(0.0);
  if (is_const(b, 1.0)) return a;
  if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const &&
      b->value != 0.0)
    return nconst(a->value / b->value);
  return nbin(Node::Kind::Div, std::move(a), std::move(b));
}

NodePtr fpow(NodePtr base, double expo) {
  if (expo == 1.0) return base;
  if (expo == 0.0) return nconst(1.0);
  return npow(std::move(base), expo);
}

double eval_node(const Node* n, double t, std::span<const double> x);

double eval_call(Fn fn, double a) {
  switch (fn) {
    case Fn::Sin: return std::sin(a);
    case Fn::Cos: return std::cos(a);
    case Fn::Tan: return std::tan(a);
    case Fn::Exp: return std::exp(a);
    case Fn::Log:
      if (a <= 0.0) throw DomainError("log of non-positive value");
      return std::log(a);
    case Fn::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(a);
    case Fn::Abs: return std::fabs(a);
  }
  throw DomainError("unknown function");
}

double eval_pow(double base, double expo) {
  const bool int_expo = expo == std::rint(expo);
  if (base == 0.0 && expo < 0.0) throw DomainError("division by zero in power");
  if (base < 0.0 && !int_expo)
    throw DomainError("negative base with non-integer exponent");
  return std::pow(base, expo);
}

double eval_node(const Node* n, double t, std::span<const double> x) {
  switch (n->kind) {
    case Node::Kind::Const: return n->value;
    case Node::Kind::Var:
      return n->var == kVarT ? t : x[static_cast<std::size_t>(n->var - 1)];
    case Node::Kind::Neg: return -eval_node(n->a.get(), t, x);
    case Node::Kind::Add:
      return eval_node(n->a.get(), t, x) + eval_node(n->b.get(), t, x);
    case Node::Kind::Sub:
      return eval_node(n->a.get(), t, x) - eval_node(n->b.get(), t, x);
    case Node::Kind::Mul:
      return eval_node(n->a.get(), t, x) * eval_node(n->b.get(), t, x);
    case Node::Kind::Div: {
      const double d = eval_node(n->b.get(), t, x);
      if (d == 0.0) throw DomainError("division by zero");
      return eval_node(n->a.get(), t, x) / d;
    }
    case Node::Kind::Pow:
      return eval_pow(eval_node(n->a.get(), t, x), n->value);
    case Node::Kind::Call:
      return eval_call(n->fn, eval_node(n->a.get(), t, x));
  }
  throw DomainError("corrupt expression node");
}

NodePtr diff_node(const NodePtr& n, int var) {
  switch (n->kind) {
    case Node::Kind::Const: return nconst(0.0);
    case Node::Kind::Var: return nconst(n->var == var ? 1.0 : 0.0);
    case Node::Kind::Neg: return fneg(diff_node(n->a, var));
    case Node::Kind::Add:
      return fadd(diff_node(n->a, var), diff_node(n->b, var));
    case Node::Kind::Sub:
      return fsub(diff_node(n->a, var), diff_node(n->b, var));
    case Node::Kind::Mul:
      return fadd(fmul(diff_node(n->a, var), n->b),
                  fmul(n->a, diff_node(n->b, var)));
    case Node::Kind::Div:
      return fdiv(fsub(fmul(diff_node(n->a, var), n->b),
                       fmul(n->a, diff_node(n->b, var))),
                  fmul(n->b, n->b));
    case Node::Kind::Pow:
      // d/dv a^c = c a^(c-1) a'   (c constant by construction)
      return fmul(fmul(nconst(n->value), fpow(n->a, n->value - 1.0)),
                  diff_node(n->a, var));
    case Node::Kind::Call: {
      NodePtr da = diff_node(n->a, var);
      switch (n->fn) {
        case Fn::Sin: return fmul(ncall(Fn::Cos, n->a), std::move(da));
        case Fn::Cos: return fneg(fmul(ncall(Fn::Sin, n->a), std::move(da)));
        case Fn::Tan:
          return fmul(fadd(nconst(1.0), fpow(ncall(Fn::Tan, n->a), 2.0)),
                      std::move(da));
        case Fn::Exp: return fmul(ncall(Fn::Exp, n->a), std::move(da));
        case Fn::Log: return fdiv(std::move(da), n->a);
        case Fn::Sqrt:
          return fdiv(std::move(da), fmul(nconst(2.0), ncall(Fn::Sqrt, n->a)));
        case Fn::Abs:
          // |a|' = a a' / |a|; faults honestly where a = 0.
          return fdiv(fmul(n->a, std::move(da)), ncall(Fn::Abs, n->a));
      }
      break;
    }
  }
  throw DomainError("corrupt expression node");
}

const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tan: return "tan";
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sqrt: return "sqrt";
    case Fn::Abs: return "abs";
  }
  return "?";
}

void print_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void print_node(std::string& out, const Node* n) {
  switch (n->kind) {
    case Node::Kind::Const:
      print_double(out, n->value);
      return;
    case Node::Kind::Var:
      if (n->var == kVarT) {
        out += 't';
      } else {
        out += 'x';
        out += std::to_string(n->var);
      }
      return;
    case Node::Kind::Neg:
      out += "(-";
      print_node(out, n->a.get());
      out += ')';
      return;
    case Node::Kind::Add:
    case Node::Kind::Sub:
    case Node::Kind::Mul:
    case Node::Kind::Div: {
      const char op = n->kind == Node::Kind::Add   ? '+'
                      : n->kind == Node::Kind::Sub ? '-'
                      : n->kind == Node::Kind::Mul ? '*'
                                                   : '/';
      out += '(';
      print_node(out, n->a.get());
      out += op;
      print_node(out, n->b.get());
      out += ')';
      return;
    }
    case Node::Kind::Pow:
      out += '(';
      print_node(out, n->a.get());
      out += "^(";
      print_double(out, n->value);
      out += "))";
      return;
    case Node::Kind::Call:
      out += fn_name(n->fn);
      out += '(';
      print_node(out, n->a.get());
      out += ')';
      return;
  }
}

}  // namespace
}  // namespace detail

using detail::Node;
using detail::NodePtr;

Expr Expr::constant(double v) { return Expr(detail::nconst(v)); }

Expr Expr::variable(int var) {
  if (var < 0) throw std::invalid_argument("variable index must be >= 0");
  return Expr(detail::nvar(var));
}

Expr Expr::add(Expr a, Expr b) {
  return Expr(detail::nbin(Node::Kind::Add, std::move(a.node_), std::move(b.node_)));
}
Expr Expr::sub(Expr a, Expr b) {
  return Expr(detail::nbin(Node::Kind::Sub, std::move(a.node_), std::move(b.node_)));
}
Expr Expr::mul(Expr a, Expr b) {
  return Expr(detail::nbin(Node::Kind::Mul, std::move(a.node_), std::move(b.node_)));
}
Expr Expr::div(Expr a, Expr b) {
  return Expr(detail::nbin(Node::Kind::Div, std::move(a.node_), std::move(b.node_)));
}
Expr Expr::neg(Expr a) { return Expr(detail::nneg(std::move(a.node_))); }
Expr Expr::pow(Expr base, double exponent) {
  return Expr(detail::npow(std::move(base.node_), exponent));
}
Expr Expr::call(Fn fn, Expr arg) {
  return Expr(detail::ncall(fn, std::move(arg.node_)));
}

double Expr::eval(double t, std::span<const double> x) const {
  if (!node_) throw DomainError("empty expression");
  if (node_->max_x > static_cast<int>(x.size()))
    throw std::invalid_argument("state vector shorter than referenced x index");
  const double v = detail::eval_node(node_.get(), t, x);
  if (!std::isfinite(v)) throw DomainError("non-finite expression value");
  return v;
}

Expr Expr::diff(int var) const {
  if (!node_) throw DomainError("empty expression");
  if (var < 0) throw std::invalid_argument("variable index must be >= 0");
  return Expr(detail::diff_node(node_, var));
}

std::size_t Expr::node_count() const { return node_ ? node_->size : 0; }
int Expr::max_x_index() const { return node_ ? node_->max_x : 0; }
bool Expr::depends_on_t() const { return node_ && node_->uses_t; }
bool Expr::is_constant() const {
  return node_ && !node_->uses_t && node_->max_x == 0;
}

std::string Expr::to_string() const {
  if (!node_) return "";
  std::string out;
  out.reserve(node_->size * 4);
  detail::print_node(out, node_.get());
  return out;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over the documented grammar.

namespace {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;
  int n = 0;
  int depth = 0;

  static constexpr int kMaxDepth = 512;

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw ParseError(at, msg);
  }

  void skip_ws() {
    while (pos < src.size() &&
           (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\r' ||
            src[pos] == '\n'))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  struct DepthGuard {
    Parser* p;
    explicit DepthGuard(Parser* p) : p(p) {
      if (++p->depth > kMaxDepth) p->fail(p->pos, "expression nested too deeply");
    }
    ~DepthGuard() { --p->depth; }
  };

  Expr parse_expr_rule() {
    DepthGuard guard(this);
    Expr e = parse_term();
    for (;;) {
      if (eat('+'))
        e = Expr::add(std::move(e), parse_term());
      else if (eat('-'))
        e = Expr::sub(std::move(e), parse_term());
      else
        return e;
    }
  }

  Expr parse_term() {
    DepthGuard guard(this);
    Expr e = parse_factor();
    for (;;) {
      if (eat('*'))
        e = Expr::mul(std::move(e), parse_factor());
      else if (eat('/'))
        e = Expr::div(std::move(e), parse_factor());
      else
        return e;
    }
  }

  Expr parse_factor() {
    DepthGuard guard(this);
    if (eat('-')) return Expr::neg(parse_factor());
    return parse_power();
  }

  Expr parse_power() {
    DepthGuard guard(this);
    Expr e = parse_atom();
    while (eat('^')) {
      skip_ws();
      const std::size_t expo_at = pos;
      Expr expo = parse_exponent();
      if (!expo.is_constant())
        fail(expo_at, "exponent must be a constant expression");
      double value;
      try {
        value = expo.eval(0.0, {});
      } catch (const DomainError&) {
        fail(expo_at, "exponent does not evaluate to a finite constant");
      }
      e = Expr::pow(std::move(e), value);
    }
    return e;
  }

  Expr parse_exponent() {
    DepthGuard guard(this);
    if (eat('-')) return Expr::neg(parse_exponent());
    return parse_atom();
  }

  Expr parse_atom() {
    DepthGuard guard(this);
    skip_ws();
    if (pos >= src.size()) fail(pos, "unexpected end of input");
    const char c = src[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_expr_rule();
      if (!eat(')')) fail(pos, "expected ')'");
      return e;
    }
    if (c >= '0' && c <= '9') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_')
      return parse_identifier();
    fail(pos, std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos;
    while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') ++pos;
    if (pos < src.size() && src[pos] == '.') {
      ++pos;
      while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') ++pos;
    }
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
      if (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') {
        while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') ++pos;
      } else {
        pos = mark;  // 'e' belongs to a following identifier, not this number
      }
    }
    double value = 0;
    const auto res = std::from_chars(src.data() + start, src.data() + pos, value);
    if (res.ec != std::errc() || res.ptr != src.data() + pos)
      fail(start, "malformed number");
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos;
    while (pos < src.size() &&
           ((src[pos] >= 'a' && src[pos] <= 'z') ||
            (src[pos] >= 'A' && src[pos] <= 'Z') ||
            (src[pos] >= '0' && src[pos] <= '9') || src[pos] == '_'))
      ++pos;
    const std::string_view name = src.substr(start, pos - start);

    if (name == "t") return Expr::variable(kVarT);
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      const auto res =
          std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        if (idx < 1 || idx > n)
          fail(start, "variable x" + std::to_string(idx) +
                          " out of range (dimension " + std::to_string(n) + ")");
        return Expr::variable(idx);
      }
    }

    static constexpr std::pair<std::string_view, Fn> kFns[] = {
        {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"tan", Fn::Tan}, {"exp", Fn::Exp},
        {"log", Fn::Log}, {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
    for (const auto& [fname, fn] : kFns) {
      if (name == fname) {
        if (!eat('(')) fail(pos, "expected '(' after function name");
        Expr arg = parse_expr_rule();
        if (!eat(')')) fail(pos, "expected ')'");
        return Expr::call(fn, std::move(arg));
      }
    }
    fail(start, "unknown identifier '" + std::string(name) + "'");
  }
};

}  // namespace

Expr parse_expr(std::string_view source, int n) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  Parser p{source, 0, n};
  Expr e = p.parse_expr_rule();
  p.skip_ws();
  if (p.pos != source.size())
    throw ParseError(p.pos, "unexpected trailing input");
  return e;
}

}  // namespace avgkit
