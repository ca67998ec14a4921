#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoscale/error.hpp"
#include "chronoscale/format.hpp"

namespace chronoscale {

enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kPow, kNeg, kCall };
enum class Fn { kExp, kLn, kSin, kCos, kAbs, kSqrt };

inline constexpr std::array<std::string_view, 6> kFunctionNames = {"exp", "ln",  "sin",
                                                                   "cos", "abs", "sqrt"};

inline std::string_view function_name(Fn fn) { return kFunctionNames[static_cast<int>(fn)]; }

inline std::optional<Fn> function_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFunctionNames.size(); ++i) {
    if (kFunctionNames[i] == name) return static_cast<Fn>(i);
  }
  return std::nullopt;
}

/// Immutable expression tree over the single variable x. Copies share nodes.
class Expr {
 public:
  static Expr constant(double v) { return Expr(make(Op::kConst, v, Fn::kExp, {}, {})); }
  static Expr var() { return Expr(make(Op::kVar, 0.0, Fn::kExp, {}, {})); }
  static Expr add(Expr a, Expr b) { return binary(Op::kAdd, std::move(a), std::move(b)); }
  static Expr sub(Expr a, Expr b) { return binary(Op::kSub, std::move(a), std::move(b)); }
  static Expr mul(Expr a, Expr b) { return binary(Op::kMul, std::move(a), std::move(b)); }
  static Expr div(Expr a, Expr b) { return binary(Op::kDiv, std::move(a), std::move(b)); }
  static Expr pow(Expr a, Expr b) { return binary(Op::kPow, std::move(a), std::move(b)); }
  /// Negating a literal folds into a negative literal, so "-3" has one tree.
  static Expr neg(Expr a) {
    if (a.op() == Op::kConst) return constant(-a.value());
    return Expr(make(Op::kNeg, 0.0, Fn::kExp, std::move(a.node_), {}));
  }
  static Expr call(Fn fn, Expr a) { return Expr(make(Op::kCall, 0.0, fn, std::move(a.node_), {})); }

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  Fn fn() const { return node_->fn; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }
  Expr arg() const { return Expr(node_->lhs); }

  bool is_constant(double v) const { return op() == Op::kConst && value() == v; }

  std::size_t depth() const {
    switch (op()) {
      case Op::kConst:
      case Op::kVar: return 1;
      case Op::kNeg:
      case Op::kCall: return 1 + arg().depth();
      default: return 1 + std::max(lhs().depth(), rhs().depth());
    }
  }

  bool uses(Fn fn_name) const {
    switch (op()) {
      case Op::kConst:
      case Op::kVar: return false;
      case Op::kNeg: return arg().uses(fn_name);
      case Op::kCall: return fn() == fn_name || arg().uses(fn_name);
      default: return lhs().uses(fn_name) || rhs().uses(fn_name);
    }
  }

  /// Evaluates at x. Domain violations (ln or sqrt of an invalid argument,
  /// division by zero, any non-finite intermediate) raise EvalDomain.
  double eval(double x) const {
    double r = 0.0;
    switch (op()) {
      case Op::kConst: return value();
      case Op::kVar: return x;
      case Op::kAdd: r = lhs().eval(x) + rhs().eval(x); break;
      case Op::kSub: r = lhs().eval(x) - rhs().eval(x); break;
      case Op::kMul: r = lhs().eval(x) * rhs().eval(x); break;
      case Op::kDiv: {
        const double den = rhs().eval(x);
        if (den == 0.0) domain_error("division by zero", x);
        r = lhs().eval(x) / den;
        break;
      }
      case Op::kPow: {
        const double base = lhs().eval(x);
        const double expo = rhs().eval(x);
        if (base < 0.0 && expo != std::floor(expo)) {
          domain_error("negative base with non-integer exponent", x);
        }
        if (base == 0.0 && expo < 0.0) domain_error("zero to a negative power", x);
        r = std::pow(base, expo);
        break;
      }
      case Op::kNeg: return -arg().eval(x);
      case Op::kCall: {
        const double v = arg().eval(x);
        switch (fn()) {
          case Fn::kExp: r = std::exp(v); break;
          case Fn::kLn:
            if (!(v > 0.0)) domain_error("ln of a nonpositive value", x);
            r = std::log(v);
            break;
          case Fn::kSin: r = std::sin(v); break;
          case Fn::kCos: r = std::cos(v); break;
          case Fn::kAbs: r = std::abs(v); break;
          case Fn::kSqrt:
            if (v < 0.0) domain_error("sqrt of a negative value", x);
            r = std::sqrt(v);
            break;
        }
        break;
      }
    }
    if (!std::isfinite(r)) domain_error("non-finite result", x);
    return r;
  }

  /// Text that parses back to a structurally identical tree.
  std::string to_string() const {
    std::string out;
    print(out);
    return out;
  }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    switch (a.op()) {
      case Op::kConst: return a.value() == b.value();
      case Op::kVar: return true;
      case Op::kNeg: return a.arg() == b.arg();
      case Op::kCall: return a.fn() == b.fn() && a.arg() == b.arg();
      default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
  }

 private:
  struct Node {
    Op op;
    double value;
    Fn fn;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Op op, double v, Fn fn, NodePtr l, NodePtr r) {
    return std::make_shared<const Node>(Node{op, v, fn, std::move(l), std::move(r)});
  }

  static Expr binary(Op op, Expr a, Expr b) {
    return Expr(make(op, 0.0, Fn::kExp, std::move(a.node_), std::move(b.node_)));
  }

  [[noreturn]] static void domain_error(const char* what, double x) {
    throw Error(ErrorCode::kEvalDomain, std::string(what) + " at x=" + format_real(x));
  }

  // Printing precedence: sums 1, products 2, negation 3, powers 4, atoms 5.
  int precedence() const {
    switch (op()) {
      case Op::kAdd:
      case Op::kSub: return 1;
      case Op::kMul:
      case Op::kDiv: return 2;
      case Op::kNeg: return 3;
      case Op::kPow: return 4;
      case Op::kConst: return value() < 0.0 || std::signbit(value()) ? 3 : 5;
      default: return 5;
    }
  }

  void print_child(std::string& out, const Expr& child, bool parens) const {
    if (parens) out += '(';
    child.print(out);
    if (parens) out += ')';
  }

  void print(std::string& out) const {
    const int prec = precedence();
    switch (op()) {
      case Op::kConst: out += format_real(value()); return;
      case Op::kVar: out += 'x'; return;
      case Op::kNeg:
        out += '-';
        print_child(out, arg(), arg().precedence() < 3);
        return;
      case Op::kCall:
        out += function_name(fn());
        out += '(';
        arg().print(out);
        out += ')';
        return;
      case Op::kPow:
        print_child(out, lhs(), lhs().precedence() <= 4);
        out += '^';
        print_child(out, rhs(), rhs().precedence() < 3);
        return;
      default: {
        static constexpr char kSymbols[] = {'+', '-', '*', '/'};
        print_child(out, lhs(), lhs().precedence() < prec);
        out += kSymbols[static_cast<int>(op()) - static_cast<int>(Op::kAdd)];
        print_child(out, rhs(), rhs().precedence() <= prec);
        return;
      }
    }
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

/// Pratt parser. Binding powers: + - (1,2), * / (3,4), unary - (5),
/// ^ (7,6) so that ^ is right-associative and binds tighter than unary minus.
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, kOperandStart, "empty expression");
    Expr e = expression(0);
    skip_ws();
    if (pos_ < text_.size()) {
      fail(pos_, {"+", "-", "*", "/", "^", "end of input"}, "unexpected character");
    }
    return e;
  }

 private:
  static constexpr std::size_t kMaxDepth = 256;
  inline static const std::vector<std::string> kOperandStart = {"number", "x", "(", "-",
                                                                "function"};

  [[noreturn]] void fail(std::size_t at, std::vector<std::string> expected,
                         const std::string& what) const {
    throw SyntaxError(at, std::move(expected), what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Expr expression(int min_bp) {
    if (++depth_ > kMaxDepth) fail(pos_, {}, "nesting too deep");
    Expr left = prefix();
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      int lbp = 0;
      int rbp = 0;
      Op op = Op::kAdd;
      switch (c) {
        case '+': lbp = 1; rbp = 2; op = Op::kAdd; break;
        case '-': lbp = 1; rbp = 2; op = Op::kSub; break;
        case '*': lbp = 3; rbp = 4; op = Op::kMul; break;
        case '/': lbp = 3; rbp = 4; op = Op::kDiv; break;
        case '^': lbp = 7; rbp = 6; op = Op::kPow; break;
        default: lbp = 0; break;
      }
      if (lbp == 0 || lbp <= min_bp) break;
      ++pos_;
      Expr right = expression(rbp);
      switch (op) {
        case Op::kAdd: left = Expr::add(std::move(left), std::move(right)); break;
        case Op::kSub: left = Expr::sub(std::move(left), std::move(right)); break;
        case Op::kMul: left = Expr::mul(std::move(left), std::move(right)); break;
        case Op::kDiv: left = Expr::div(std::move(left), std::move(right)); break;
        default: left = Expr::pow(std::move(left), std::move(right)); break;
      }
    }
    --depth_;
    return left;
  }

  Expr prefix() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, kOperandStart, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return Expr::neg(expression(5));
    }
    if (c == '(') {
      ++pos_;
      Expr inner = expression(0);
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail(pos_, {")"}, "unbalanced parenthesis");
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(pos_, kOperandStart, "unexpected character");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ == start + 1 && text_[start] == '.') fail(start, {"digit"}, "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[p]))) {
        fail(p, {"digit"}, "malformed exponent");
      }
      while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
      pos_ = p;
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_ || !std::isfinite(v)) {
      fail(start, {"number"}, "number out of range");
    }
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return Expr::var();
    const auto fn = function_from_name(name);
    if (!fn) {
      std::vector<std::string> expected = {"x"};
      for (auto n : kFunctionNames) expected.emplace_back(n);
      fail(start, std::move(expected), "unknown identifier '" + std::string(name) + "'");
    }
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '(') fail(pos_, {"("}, "function call needs '('");
    ++pos_;
    Expr arg = expression(0);
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != ')') fail(pos_, {")"}, "unbalanced parenthesis");
    ++pos_;
    return Expr::call(*fn, std::move(arg));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

// Builders that fold the trivial identities produced by differentiation.
inline bool is_zero(const Expr& e) { return e.is_constant(0.0); }
inline bool is_one(const Expr& e) { return e.is_constant(1.0); }

inline Expr s_add(Expr a, Expr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (a.op() == Op::kConst && b.op() == Op::kConst) return Expr::constant(a.value() + b.value());
  return Expr::add(std::move(a), std::move(b));
}

inline Expr s_sub(Expr a, Expr b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return Expr::neg(std::move(b));
  if (a.op() == Op::kConst && b.op() == Op::kConst) return Expr::constant(a.value() - b.value());
  return Expr::sub(std::move(a), std::move(b));
}

inline Expr s_mul(Expr a, Expr b) {
  if (is_zero(a) || is_zero(b)) return Expr::constant(0.0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  if (a.op() == Op::kConst && b.op() == Op::kConst) return Expr::constant(a.value() * b.value());
  return Expr::mul(std::move(a), std::move(b));
}

inline Expr s_div(Expr a, Expr b) {
  if (is_zero(a)) return Expr::constant(0.0);
  if (is_one(b)) return a;
  return Expr::div(std::move(a), std::move(b));
}

inline Expr s_neg(Expr a) {
  if (a.op() == Op::kNeg) return a.arg();
  return Expr::neg(std::move(a));
}

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::ExprParser(text).parse(); }

/// Symbolic derivative with respect to x. Expressions containing abs are
/// rejected with NotDifferentiable.
inline Expr diff(const Expr& e) {
  using namespace detail;
  switch (e.op()) {
    case Op::kConst: return Expr::constant(0.0);
    case Op::kVar: return Expr::constant(1.0);
    case Op::kAdd: return s_add(diff(e.lhs()), diff(e.rhs()));
    case Op::kSub: return s_sub(diff(e.lhs()), diff(e.rhs()));
    case Op::kNeg: return s_neg(diff(e.arg()));
    case Op::kMul:
      return s_add(s_mul(diff(e.lhs()), e.rhs()), s_mul(e.lhs(), diff(e.rhs())));
    case Op::kDiv:
      return s_div(s_sub(s_mul(diff(e.lhs()), e.rhs()), s_mul(e.lhs(), diff(e.rhs()))),
                   Expr::pow(e.rhs(), Expr::constant(2.0)));
    case Op::kPow: {
      const Expr u = e.lhs();
      const Expr v = e.rhs();
      if (v.op() == Op::kConst) {
        if (v.value() == 0.0) return Expr::constant(0.0);
        const Expr reduced = v.value() == 2.0 ? u : Expr::pow(u, Expr::constant(v.value() - 1.0));
        return s_mul(s_mul(Expr::constant(v.value()), reduced), diff(u));
      }
      if (u.op() == Op::kConst && u.value() > 0.0) {
        return s_mul(s_mul(e, Expr::constant(std::log(u.value()))), diff(v));
      }
      // d(u^v) = u^v * (v' ln u + v u'/u)
      return s_mul(e, s_add(s_mul(diff(v), Expr::call(Fn::kLn, u)),
                            s_div(s_mul(v, diff(u)), u)));
    }
    case Op::kCall: {
      const Expr u = e.arg();
      const Expr du = diff(u);
      switch (e.fn()) {
        case Fn::kExp: return s_mul(e, du);
        case Fn::kLn: return s_div(du, u);
        case Fn::kSin: return s_mul(Expr::call(Fn::kCos, u), du);
        case Fn::kCos: return s_neg(s_mul(Expr::call(Fn::kSin, u), du));
        case Fn::kSqrt: return s_div(du, s_mul(Expr::constant(2.0), e));
        case Fn::kAbs:
          throw Error(ErrorCode::kNotDifferentiable, "abs is not differentiable everywhere");
      }
    }
  }
  throw Error(ErrorCode::kBadArgument, "unknown expression node");
}

}  // namespace chronoscale
