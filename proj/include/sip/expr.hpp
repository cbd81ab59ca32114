#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sip/domain.hpp"
#include "sip/errors.hpp"

namespace sip {

// Expression language over variables x1..xN and y1..yM with +, -, *, /,
// integer powers and sin/cos/exp. Grammar (lowest to highest precedence):
//
//   expr    := term { ("+" | "-") term }
//   term    := power { ("*" | "/") power }
//   power   := unary { "^" integer }        integer >= 0, digits only
//   unary   := "-" unary | primary
//   primary := number | variable | function "(" expr ")" | "(" expr ")"
//
// Binary operators associate left; unary minus binds tighter than "^".

enum class VarAxis { X, Y };

enum class NodeKind {
  Constant,
  Variable,
  Negate,
  Add,
  Subtract,
  Multiply,
  Divide,
  PowInt,
  Sin,
  Cos,
  Exp,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;          // Constant
  VarAxis axis = VarAxis::X;   // Variable
  int index = 0;               // Variable, zero-based
  int exponent = 0;            // PowInt, >= 0
  ExprPtr lhs;                 // unary operand / left child / power base
  ExprPtr rhs;                 // right child
};

// ---- node factories ----

inline ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::Constant;
  e->value = v;
  return e;
}

inline ExprPtr variable(VarAxis axis, int index) {
  if (index < 0) throw Error("variable index must be non-negative");
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::Variable;
  e->axis = axis;
  e->index = index;
  return e;
}

inline ExprPtr x_var(int index) { return variable(VarAxis::X, index); }
inline ExprPtr y_var(int index) { return variable(VarAxis::Y, index); }

namespace detail {
inline ExprPtr unary_node(NodeKind k, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(a);
  return e;
}
inline ExprPtr binary_node(NodeKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}
}  // namespace detail

inline ExprPtr neg(ExprPtr a) { return detail::unary_node(NodeKind::Negate, std::move(a)); }
inline ExprPtr add(ExprPtr a, ExprPtr b) { return detail::binary_node(NodeKind::Add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return detail::binary_node(NodeKind::Subtract, std::move(a), std::move(b)); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return detail::binary_node(NodeKind::Multiply, std::move(a), std::move(b)); }
inline ExprPtr divide(ExprPtr a, ExprPtr b) { return detail::binary_node(NodeKind::Divide, std::move(a), std::move(b)); }
inline ExprPtr sin_of(ExprPtr a) { return detail::unary_node(NodeKind::Sin, std::move(a)); }
inline ExprPtr cos_of(ExprPtr a) { return detail::unary_node(NodeKind::Cos, std::move(a)); }
inline ExprPtr exp_of(ExprPtr a) { return detail::unary_node(NodeKind::Exp, std::move(a)); }

inline ExprPtr pow_int(ExprPtr base, int exponent) {
  if (exponent < 0) throw Error("power exponent must be non-negative");
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::PowInt;
  e->exponent = exponent;
  e->lhs = std::move(base);
  return e;
}

// ---- point evaluation ----

// The x and y parts of one evaluation point; y may be empty for x-only
// expressions.
struct VarAssignment {
  PointVec x;
  PointVec y;
};

namespace detail {

inline std::string var_name(const Expr& e) {
  return (e.axis == VarAxis::X ? "x" : "y") + std::to_string(e.index + 1);
}

inline double pow_by_mul(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

}  // namespace detail

inline double eval_point(const Expr& e, const VarAssignment& a) {
  switch (e.kind) {
    case NodeKind::Constant:
      return e.value;
    case NodeKind::Variable: {
      const PointVec& p = e.axis == VarAxis::X ? a.x : a.y;
      if (static_cast<std::size_t>(e.index) >= p.size())
        throw UnboundVariable("variable " + detail::var_name(e) +
                              " is not bound by the assignment");
      return p[static_cast<std::size_t>(e.index)];
    }
    case NodeKind::Negate:
      return -eval_point(*e.lhs, a);
    case NodeKind::Add:
      return eval_point(*e.lhs, a) + eval_point(*e.rhs, a);
    case NodeKind::Subtract:
      return eval_point(*e.lhs, a) - eval_point(*e.rhs, a);
    case NodeKind::Multiply:
      return eval_point(*e.lhs, a) * eval_point(*e.rhs, a);
    case NodeKind::Divide: {
      const double num = eval_point(*e.lhs, a);
      const double den = eval_point(*e.rhs, a);
      if (den == 0.0) throw DivisionByZero("division by zero");
      return num / den;
    }
    case NodeKind::PowInt:
      return detail::pow_by_mul(eval_point(*e.lhs, a), e.exponent);
    case NodeKind::Sin:
      return std::sin(eval_point(*e.lhs, a));
    case NodeKind::Cos:
      return std::cos(eval_point(*e.lhs, a));
    case NodeKind::Exp:
      return std::exp(eval_point(*e.lhs, a));
  }
  throw Error("corrupt expression node");
}

inline double eval_point(const ExprPtr& e, const VarAssignment& a) {
  return eval_point(*e, a);
}

// ---- interval evaluation ----
//
// Natural interval extension. There is no directed rounding; instead every
// operation relatively pads its result endpoints by 1e-12, which dominates
// the per-operation rounding error at the tolerances this library targets.

namespace detail {

constexpr double kIntervalPad = 1e-12;

inline Interval padded(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi))
    throw EvalError("interval arithmetic overflowed to an undefined range");
  if (std::isfinite(lo)) lo -= kIntervalPad * std::abs(lo);
  if (std::isfinite(hi)) hi += kIntervalPad * std::abs(hi);
  return Interval(lo, hi);
}

inline Interval iadd(const Interval& a, const Interval& b) {
  return padded(a.lo + b.lo, a.hi + b.hi);
}

inline Interval isub(const Interval& a, const Interval& b) {
  return padded(a.lo - b.hi, a.hi - b.lo);
}

inline Interval ineg(const Interval& a) { return padded(-a.hi, -a.lo); }

// Endpoint product. Infinite endpoints only ever stand for overflowed finite
// reals, so the indeterminate inf * 0 pairing contributes 0, not NaN (which
// std::min/max would silently drop, shedding an infinite bound).
inline double endpoint_product(double a, double b) {
  const double p = a * b;
  return std::isnan(p) ? 0.0 : p;
}

inline Interval imul(const Interval& a, const Interval& b) {
  const double p1 = endpoint_product(a.lo, b.lo);
  const double p2 = endpoint_product(a.lo, b.hi);
  const double p3 = endpoint_product(a.hi, b.lo);
  const double p4 = endpoint_product(a.hi, b.hi);
  return padded(std::min(std::min(p1, p2), std::min(p3, p4)),
                std::max(std::max(p1, p2), std::max(p3, p4)));
}

inline Interval idiv(const Interval& a, const Interval& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0)
    throw IntervalDivisionByZero("denominator interval contains zero");
  const Interval inv = padded(1.0 / b.hi, 1.0 / b.lo);
  return imul(a, inv);
}

inline Interval ipow(const Interval& a, int n) {
  if (n == 0) return Interval(1.0, 1.0);
  const double plo = pow_by_mul(a.lo, n);
  const double phi = pow_by_mul(a.hi, n);
  if (n % 2 == 1) return padded(plo, phi);
  // even power: decreasing for negative arguments, minimum 0 inside
  if (a.lo >= 0.0) return padded(plo, phi);
  if (a.hi <= 0.0) return padded(phi, plo);
  return padded(0.0, std::max(plo, phi));
}

inline Interval iexp(const Interval& a) {
  return padded(std::exp(a.lo), std::exp(a.hi));
}

// Range of sin or cos over [a.lo, a.hi]: endpoint values plus the values at
// every contained multiple of pi/2 (which covers all extrema).
template <typename Fn>
inline Interval itrig(const Interval& a, Fn fn) {
  const double half_pi = std::numbers::pi / 2.0;
  if (a.width() >= 2.0 * std::numbers::pi || std::abs(a.lo) > 1e15 ||
      std::abs(a.hi) > 1e15)
    return padded(-1.0, 1.0);
  double lo = std::min(fn(a.lo), fn(a.hi));
  double hi = std::max(fn(a.lo), fn(a.hi));
  const double m_first = std::ceil(a.lo / half_pi);
  const double m_last = std::floor(a.hi / half_pi);
  for (double m = m_first; m <= m_last; m += 1.0) {
    const double v = fn(m * half_pi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return padded(std::max(lo, -1.0), std::min(hi, 1.0));
}

}  // namespace detail

inline Interval eval_interval(const Expr& e, std::span<const Interval> x_dims,
                              std::span<const Interval> y_dims = {}) {
  switch (e.kind) {
    case NodeKind::Constant:
      return Interval(e.value, e.value);
    case NodeKind::Variable: {
      const std::span<const Interval>& dims =
          e.axis == VarAxis::X ? x_dims : y_dims;
      if (static_cast<std::size_t>(e.index) >= dims.size())
        throw UnboundVariable("variable " + detail::var_name(e) +
                              " is not covered by the boxes");
      return dims[static_cast<std::size_t>(e.index)];
    }
    case NodeKind::Negate:
      return detail::ineg(eval_interval(*e.lhs, x_dims, y_dims));
    case NodeKind::Add:
      return detail::iadd(eval_interval(*e.lhs, x_dims, y_dims),
                          eval_interval(*e.rhs, x_dims, y_dims));
    case NodeKind::Subtract:
      return detail::isub(eval_interval(*e.lhs, x_dims, y_dims),
                          eval_interval(*e.rhs, x_dims, y_dims));
    case NodeKind::Multiply:
      return detail::imul(eval_interval(*e.lhs, x_dims, y_dims),
                          eval_interval(*e.rhs, x_dims, y_dims));
    case NodeKind::Divide:
      return detail::idiv(eval_interval(*e.lhs, x_dims, y_dims),
                          eval_interval(*e.rhs, x_dims, y_dims));
    case NodeKind::PowInt:
      return detail::ipow(eval_interval(*e.lhs, x_dims, y_dims), e.exponent);
    case NodeKind::Sin:
      return detail::itrig(eval_interval(*e.lhs, x_dims, y_dims),
                           [](double v) { return std::sin(v); });
    case NodeKind::Cos:
      return detail::itrig(eval_interval(*e.lhs, x_dims, y_dims),
                           [](double v) { return std::cos(v); });
    case NodeKind::Exp:
      return detail::iexp(eval_interval(*e.lhs, x_dims, y_dims));
  }
  throw Error("corrupt expression node");
}

inline Interval eval_interval(const Expr& e, const BoxRegion& x_box) {
  return eval_interval(e, std::span<const Interval>(x_box.dims), {});
}

inline Interval eval_interval(const Expr& e, const BoxRegion& x_box,
                              const BoxRegion& y_box) {
  return eval_interval(e, std::span<const Interval>(x_box.dims),
                       std::span<const Interval>(y_box.dims));
}

// ---- structure utilities ----

struct VarUsage {
  int x_count = 0;  // 1 + highest x index used, 0 if none
  int y_count = 0;
};

namespace detail {
inline void collect_usage(const Expr& e, VarUsage& u) {
  if (e.kind == NodeKind::Variable) {
    int& slot = e.axis == VarAxis::X ? u.x_count : u.y_count;
    slot = std::max(slot, e.index + 1);
  }
  if (e.lhs) collect_usage(*e.lhs, u);
  if (e.rhs) collect_usage(*e.rhs, u);
}
}  // namespace detail

inline VarUsage var_usage(const Expr& e) {
  VarUsage u;
  detail::collect_usage(e, u);
  return u;
}

// Per-index usage masks; indices beyond the mask sizes are ignored.
inline void mark_used_vars(const Expr& e, std::vector<bool>& x_used,
                           std::vector<bool>& y_used) {
  if (e.kind == NodeKind::Variable) {
    std::vector<bool>& mask = e.axis == VarAxis::X ? x_used : y_used;
    if (static_cast<std::size_t>(e.index) < mask.size())
      mask[static_cast<std::size_t>(e.index)] = true;
  }
  if (e.lhs) mark_used_vars(*e.lhs, x_used, y_used);
  if (e.rhs) mark_used_vars(*e.rhs, x_used, y_used);
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Constant:
      if (a.value != b.value) return false;
      break;
    case NodeKind::Variable:
      if (a.axis != b.axis || a.index != b.index) return false;
      break;
    case NodeKind::PowInt:
      if (a.exponent != b.exponent) return false;
      break;
    default:
      break;
  }
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
  return true;
}

namespace detail {

enum class SubstMode { ReplaceX, ReplaceY, RelabelYtoX };

inline ExprPtr rewrite(const ExprPtr& e, SubstMode mode, const PointVec& p) {
  if (e->kind == NodeKind::Variable) {
    if (mode == SubstMode::ReplaceX && e->axis == VarAxis::X) {
      if (static_cast<std::size_t>(e->index) >= p.size())
        throw UnboundVariable("cannot substitute " + var_name(*e) +
                              ": point too short");
      return constant(p[static_cast<std::size_t>(e->index)]);
    }
    if (mode == SubstMode::ReplaceY && e->axis == VarAxis::Y) {
      if (static_cast<std::size_t>(e->index) >= p.size())
        throw UnboundVariable("cannot substitute " + var_name(*e) +
                              ": point too short");
      return constant(p[static_cast<std::size_t>(e->index)]);
    }
    if (mode == SubstMode::RelabelYtoX && e->axis == VarAxis::Y)
      return x_var(e->index);
    return e;
  }
  if (!e->lhs && !e->rhs) return e;
  auto out = std::make_shared<Expr>(*e);
  if (e->lhs) out->lhs = rewrite(e->lhs, mode, p);
  if (e->rhs) out->rhs = rewrite(e->rhs, mode, p);
  return out;
}

}  // namespace detail

// Replace every x<i> with the constant p[i-1].
inline ExprPtr substitute_x(const ExprPtr& e, const PointVec& p) {
  return detail::rewrite(e, detail::SubstMode::ReplaceX, p);
}

// Replace every y<j> with the constant p[j-1].
inline ExprPtr substitute_y(const ExprPtr& e, const PointVec& p) {
  return detail::rewrite(e, detail::SubstMode::ReplaceY, p);
}

// Turn every y<j> into x<j>; used to optimize a y-only expression with
// machinery that binds boxes to the x axis.
inline ExprPtr relabel_y_as_x(const ExprPtr& e) {
  return detail::rewrite(e, detail::SubstMode::RelabelYtoX, PointVec{});
}

// ---- printing ----

namespace detail {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Fully parenthesized canonical form; parsing it back yields a structurally
// identical tree. Negative constants print as a negation of a positive
// literal, so trees meant to round-trip should carry non-negative constants.
inline std::string to_text(const Expr& e) {
  switch (e.kind) {
    case NodeKind::Constant:
      if (std::signbit(e.value))
        return "(-" + detail::format_number(-e.value) + ")";
      return detail::format_number(e.value);
    case NodeKind::Variable:
      return detail::var_name(e);
    case NodeKind::Negate:
      return "(-" + to_text(*e.lhs) + ")";
    case NodeKind::Add:
      return "(" + to_text(*e.lhs) + " + " + to_text(*e.rhs) + ")";
    case NodeKind::Subtract:
      return "(" + to_text(*e.lhs) + " - " + to_text(*e.rhs) + ")";
    case NodeKind::Multiply:
      return "(" + to_text(*e.lhs) + " * " + to_text(*e.rhs) + ")";
    case NodeKind::Divide:
      return "(" + to_text(*e.lhs) + " / " + to_text(*e.rhs) + ")";
    case NodeKind::PowInt:
      return "(" + to_text(*e.lhs) + "^" + std::to_string(e.exponent) + ")";
    case NodeKind::Sin:
      return "sin(" + to_text(*e.lhs) + ")";
    case NodeKind::Cos:
      return "cos(" + to_text(*e.lhs) + ")";
    case NodeKind::Exp:
      return "exp(" + to_text(*e.lhs) + ")";
  }
  throw Error("corrupt expression node");
}

inline std::string to_text(const ExprPtr& e) { return to_text(*e); }

// ---- parsing ----

namespace detail {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos), pos);
  }

  void skip_ws() {
    while (pos < src.size() &&
           (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\n' ||
            src[pos] == '\r'))
      ++pos;
  }

  bool eof() const { return pos >= src.size(); }
  char peek() const { return src[pos]; }

  bool consume(char c) {
    if (!eof() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      skip_ws();
      if (consume('+'))
        e = add(std::move(e), parse_term());
      else if (consume('-'))
        e = sub(std::move(e), parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_power();
    for (;;) {
      skip_ws();
      if (consume('*'))
        e = mul(std::move(e), parse_power());
      else if (consume('/'))
        e = divide(std::move(e), parse_power());
      else
        return e;
    }
  }

  ExprPtr parse_power() {
    ExprPtr e = parse_unary();
    for (;;) {
      skip_ws();
      if (!consume('^')) return e;
      e = pow_int(std::move(e), parse_exponent());
    }
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (consume('-')) return neg(parse_unary());
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (eof()) fail("unexpected end of input");
    const char c = peek();
    if (consume('(')) {
      ExprPtr e = parse_expr();
      skip_ws();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (is_digit(c) || c == '.') return constant(parse_number());
    if (is_alpha(c)) return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos;
    while (!eof() && is_alpha(peek())) ++pos;
    const std::string_view name = src.substr(start, pos - start);
    if ((name == "x" || name == "y") && !eof() && is_digit(peek())) {
      const int idx = parse_plain_integer();
      if (idx < 1) fail("variable numbering starts at 1");
      return variable(name == "x" ? VarAxis::X : VarAxis::Y, idx - 1);
    }
    skip_ws();
    if (!eof() && peek() == '(') {
      ++pos;
      ExprPtr arg = parse_expr();
      skip_ws();
      if (!consume(')')) fail("expected ')'");
      if (name == "sin") return sin_of(std::move(arg));
      if (name == "cos") return cos_of(std::move(arg));
      if (name == "exp") return exp_of(std::move(arg));
      throw UnknownFunction("unknown function '" + std::string(name) +
                                "' at offset " + std::to_string(start),
                            start);
    }
    pos = start;
    fail("unknown variable '" + std::string(name) + "'");
  }

  int parse_plain_integer() {
    const std::size_t start = pos;
    while (!eof() && is_digit(peek())) ++pos;
    int out = 0;
    const auto rc = std::from_chars(src.data() + start, src.data() + pos, out);
    if (rc.ec != std::errc{}) fail("integer out of range");
    return out;
  }

  int parse_exponent() {
    skip_ws();
    if (eof() || !is_digit(peek()))
      fail("exponent must be a non-negative integer literal");
    return parse_plain_integer();
  }

  double parse_number() {
    const std::size_t start = pos;
    while (!eof() && is_digit(peek())) ++pos;
    if (consume('.'))
      while (!eof() && is_digit(peek())) ++pos;
    if (!eof() && (peek() == 'e' || peek() == 'E')) {
      const std::size_t mark = pos;
      ++pos;
      if (!eof() && (peek() == '+' || peek() == '-')) ++pos;
      if (eof() || !is_digit(peek())) {
        pos = mark;  // not an exponent part after all
      } else {
        while (!eof() && is_digit(peek())) ++pos;
      }
    }
    double out = 0.0;
    const auto rc = std::from_chars(src.data() + start, src.data() + pos, out);
    if (rc.ec != std::errc{} || rc.ptr != src.data() + pos)
      fail("malformed number");
    return out;
  }
};

}  // namespace detail

inline ExprPtr parse(std::string_view text) {
  detail::Parser p{text};
  p.skip_ws();
  if (p.eof()) p.fail("empty expression");
  ExprPtr e = p.parse_expr();
  p.skip_ws();
  if (!p.eof()) p.fail("unexpected trailing input");
  return e;
}

}  // namespace sip
