#pragma once

// Scalar expressions over named variables: parse, print, evaluate, and
// differentiate symbolically.
//
// Grammar (whitespace-insensitive):
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)?
//   exponent := '-'? INTEGER ('^' exponent)?       (folded at parse time)
//   primary  := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos exp log sqrt atan2 abs sign.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liecomp/error.hpp"

namespace liecomp {

using Env = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  enum class Op : std::uint8_t { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func : std::uint8_t { Sin, Cos, Exp, Log, Sqrt, Atan2, Abs, Sign };

  struct Node {
    Op op = Op::Number;
    Func func = Func::Sin;
    int exponent = 0;
    double value = 0.0;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expr() : Expr(number(0.0)) {}

  static Expr number(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Number;
    n->value = v;
    return Expr(std::move(n));
  }

  static Expr variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->name = std::move(name);
    return Expr(std::move(n));
  }

  static Expr pow(const Expr& base, int exponent) {
    if (exponent == 0) return number(1.0);
    if (exponent == 1) return base;
    if (base.is_number()) return number(int_pow(base.node_->value, exponent));
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->exponent = exponent;
    n->lhs = base.node_;
    return Expr(std::move(n));
  }

  static Expr call(Func f, const Expr& a) {
    auto n = std::make_shared<Node>();
    n->op = Op::Call;
    n->func = f;
    n->lhs = a.node_;
    return Expr(std::move(n));
  }

  static Expr call(Func f, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->op = Op::Call;
    n->func = f;
    n->lhs = a.node_;
    n->rhs = b.node_;
    return Expr(std::move(n));
  }

  static Expr parse(std::string_view src);

  /// Wraps an existing tree without any folding.
  static Expr wrap(NodePtr n) { return Expr(std::move(n)); }

  friend Expr operator-(const Expr& a) {
    if (a.is_number()) return number(-a.node_->value);
    if (a.node_->op == Op::Neg) return Expr(a.node_->lhs);
    auto n = std::make_shared<Node>();
    n->op = Op::Neg;
    n->lhs = a.node_;
    return Expr(std::move(n));
  }
  friend Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_number() && b.is_number()) return number(a.node_->value + b.node_->value);
    return binary(Op::Add, a, b);
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    if (b.is_zero()) return a;
    if (a.is_zero()) return -b;
    if (a.is_number() && b.is_number()) return number(a.node_->value - b.node_->value);
    return binary(Op::Sub, a, b);
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return number(0.0);
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    if (a.is_number() && b.is_number()) return number(a.node_->value * b.node_->value);
    return binary(Op::Mul, a, b);
  }
  friend Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_one()) return a;
    if (a.is_zero() && !b.is_zero()) return number(0.0);
    return binary(Op::Div, a, b);
  }

  const Node& node() const { return *node_; }
  const NodePtr& node_ptr() const { return node_; }

  bool is_number() const { return node_->op == Op::Number; }
  bool is_zero() const { return is_number() && node_->value == 0.0; }

  std::set<std::string> free_names() const {
    std::set<std::string> out;
    collect_names(*node_, out);
    return out;
  }

  double eval(const Env& env) const { return eval_node(*node_, env); }

  /// Symbolic partial derivative. d|u| is taken as sign(u)·u', which is 0 at u = 0.
  Expr diff(std::string_view var) const { return diff_node(node_, var); }

  std::string to_string() const {
    std::string out;
    print(*node_, out);
    return out;
  }

  static const char* func_name(Func f) {
    switch (f) {
      case Func::Sin: return "sin";
      case Func::Cos: return "cos";
      case Func::Exp: return "exp";
      case Func::Log: return "log";
      case Func::Sqrt: return "sqrt";
      case Func::Atan2: return "atan2";
      case Func::Abs: return "abs";
      case Func::Sign: return "sign";
    }
    return "?";
  }

  static int func_arity(Func f) { return f == Func::Atan2 ? 2 : 1; }

  static double int_pow(double base, int exponent) {
    if (exponent < 0) {
      if (base == 0.0) throw Error(ErrorKind::Domain, "division by zero in negative power");
      return 1.0 / int_pow(base, -exponent);
    }
    double result = 1.0;
    double b = base;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
      if (e & 1u) result *= b;
      b *= b;
      e >>= 1u;
    }
    return result;
  }

  static double apply(Func f, double a, double b) {
    switch (f) {
      case Func::Sin: return std::sin(a);
      case Func::Cos: return std::cos(a);
      case Func::Exp: return std::exp(a);
      case Func::Log:
        if (!(a > 0.0)) throw Error(ErrorKind::Domain, "log of non-positive value");
        return std::log(a);
      case Func::Sqrt:
        if (a < 0.0) throw Error(ErrorKind::Domain, "sqrt of negative value");
        return std::sqrt(a);
      case Func::Atan2: return std::atan2(a, b);
      case Func::Abs: return std::fabs(a);
      case Func::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
    }
    return 0.0;
  }

  static double divide(double a, double b) {
    if (b == 0.0) throw Error(ErrorKind::Domain, "division by zero");
    return a / b;
  }

  static double checked(double v) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "non-finite intermediate value");
    return v;
  }

 private:
  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  static Expr binary(Op op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = a.node_;
    n->rhs = b.node_;
    return Expr(std::move(n));
  }

  bool is_one() const { return is_number() && node_->value == 1.0; }

  static void collect_names(const Node& n, std::set<std::string>& out) {
    if (n.op == Op::Variable) out.insert(n.name);
    if (n.lhs) collect_names(*n.lhs, out);
    if (n.rhs) collect_names(*n.rhs, out);
  }

  static double eval_node(const Node& n, const Env& env) {
    switch (n.op) {
      case Op::Number: return n.value;
      case Op::Variable: {
        auto it = env.find(n.name);
        if (it == env.end()) throw Error(ErrorKind::UnboundName, "unbound name '" + n.name + "'");
        return it->second;
      }
      case Op::Neg: return -eval_node(*n.lhs, env);
      case Op::Add: return checked(eval_node(*n.lhs, env) + eval_node(*n.rhs, env));
      case Op::Sub: return checked(eval_node(*n.lhs, env) - eval_node(*n.rhs, env));
      case Op::Mul: return checked(eval_node(*n.lhs, env) * eval_node(*n.rhs, env));
      case Op::Div: return checked(divide(eval_node(*n.lhs, env), eval_node(*n.rhs, env)));
      case Op::Pow: return checked(int_pow(eval_node(*n.lhs, env), n.exponent));
      case Op::Call: {
        double a = eval_node(*n.lhs, env);
        double b = n.rhs ? eval_node(*n.rhs, env) : 0.0;
        return checked(apply(n.func, a, b));
      }
    }
    return 0.0;
  }

  static Expr diff_node(const NodePtr& p, std::string_view var) {
    const Node& n = *p;
    const Expr self(p);
    switch (n.op) {
      case Op::Number: return number(0.0);
      case Op::Variable: return number(n.name == var ? 1.0 : 0.0);
      case Op::Neg: return -diff_node(n.lhs, var);
      case Op::Add: return diff_node(n.lhs, var) + diff_node(n.rhs, var);
      case Op::Sub: return diff_node(n.lhs, var) - diff_node(n.rhs, var);
      case Op::Mul: {
        Expr a(n.lhs), b(n.rhs);
        return diff_node(n.lhs, var) * b + a * diff_node(n.rhs, var);
      }
      case Op::Div: {
        Expr a(n.lhs), b(n.rhs);
        Expr da = diff_node(n.lhs, var), db = diff_node(n.rhs, var);
        if (db.is_zero()) return da / b;
        return (da * b - a * db) / pow(b, 2);
      }
      case Op::Pow: {
        Expr a(n.lhs);
        return number(n.exponent) * pow(a, n.exponent - 1) * diff_node(n.lhs, var);
      }
      case Op::Call: {
        Expr a(n.lhs);
        Expr da = diff_node(n.lhs, var);
        switch (n.func) {
          case Func::Sin: return call(Func::Cos, a) * da;
          case Func::Cos: return -(call(Func::Sin, a) * da);
          case Func::Exp: return self * da;
          case Func::Log: return da / a;
          case Func::Sqrt: return da / (number(2.0) * self);
          case Func::Abs: return call(Func::Sign, a) * da;
          case Func::Sign: return number(0.0);
          case Func::Atan2: {
            Expr b(n.rhs);
            Expr db = diff_node(n.rhs, var);
            return (b * da - a * db) / (pow(a, 2) + pow(b, 2));
          }
        }
      }
    }
    return number(0.0);
  }

  static int precedence(const Node& n) {
    switch (n.op) {
      case Op::Add:
      case Op::Sub: return 1;
      case Op::Mul:
      case Op::Div: return 2;
      case Op::Neg: return 3;
      case Op::Pow: return 4;
      case Op::Number: return n.value < 0.0 ? 0 : 5;
      default: return 5;
    }
  }

  static void print_number(double v, std::string& out) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }

  static void print_child(const Node& child, int min_prec, std::string& out) {
    if (precedence(child) < min_prec) {
      out += '(';
      print(child, out);
      out += ')';
    } else {
      print(child, out);
    }
  }

  // Right operands at equal precedence are parenthesized so that printing
  // preserves the exact tree shape.
  static void print(const Node& n, std::string& out) {
    switch (n.op) {
      case Op::Number: print_number(n.value, out); return;
      case Op::Variable: out += n.name; return;
      case Op::Neg:
        out += '-';
        print_child(*n.lhs, 4, out);
        return;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: {
        int p = precedence(n);
        print_child(*n.lhs, p, out);
        out += n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
        print_child(*n.rhs, p + 1, out);
        return;
      }
      case Op::Pow:
        print_child(*n.lhs, 5, out);
        out += '^';
        out += std::to_string(n.exponent);
        return;
      case Op::Call:
        out += func_name(n.func);
        out += '(';
        print(*n.lhs, out);
        if (n.rhs) {
          out += ", ";
          print(*n.rhs, out);
        }
        out += ')';
        return;
    }
  }

  NodePtr node_;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(ErrorKind::Syntax, pos_, msg); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = combine(Expr::Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = combine(Expr::Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = combine(Expr::Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = combine(Expr::Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return negate(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      long long e = parse_exponent();
      if (e > 1024 || e < -1024) fail("exponent out of range");
      return raw_pow(base, static_cast<int>(e));
    }
    return base;
  }

  long long parse_exponent() {
    skip_ws();
    bool negative = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be an integer literal");
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
      fail("exponent must be an integer literal");
    if (pos_ - start > 6) fail("exponent out of range");
    long long value = std::stoll(std::string(src_.substr(start, pos_ - start)));
    if (accept('^')) {
      long long rhs = parse_exponent();
      if (rhs < 0) fail("exponent must fold to an integer");
      long long acc = 1;
      for (long long i = 0; i < rhs; ++i) {
        acc *= value;
        if (acc > 1024 || acc < -1024) fail("exponent out of range");
      }
      value = acc;
    }
    return negative ? -value : value;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') return parse_call(name, start);
      return Expr::variable(std::move(name));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr parse_call(const std::string& name, std::size_t name_pos) {
    static const std::array<std::pair<std::string_view, Expr::Func>, 8> table{{
        {"sin", Expr::Func::Sin},
        {"cos", Expr::Func::Cos},
        {"exp", Expr::Func::Exp},
        {"log", Expr::Func::Log},
        {"sqrt", Expr::Func::Sqrt},
        {"atan2", Expr::Func::Atan2},
        {"abs", Expr::Func::Abs},
        {"sign", Expr::Func::Sign},
    }};
    const Expr::Func* func = nullptr;
    for (const auto& [fname, f] : table)
      if (fname == name) func = &f;
    if (func == nullptr)
      throw ParseError(ErrorKind::UnknownFunction, name_pos, "unknown function '" + name + "'");
    expect('(');
    std::vector<Expr> args;
    args.push_back(parse_expr());
    while (accept(',')) args.push_back(parse_expr());
    expect(')');
    if (static_cast<int>(args.size()) != Expr::func_arity(*func))
      throw ParseError(ErrorKind::Syntax, name_pos,
                       "wrong number of arguments to '" + name + "'");
    return args.size() == 2 ? Expr::call(*func, args[0], args[1]) : Expr::call(*func, args[0]);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      std::size_t digits = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (digits == pos_) pos_ = mark;  // "2e" is the number 2 followed by a name
    }
    std::string text(src_.substr(start, pos_ - start));
    if (text == ".") {
      pos_ = start;
      fail("malformed number");
    }
    double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    return Expr::number(v);
  }

  // The parser builds the tree verbatim (no folding) so that a printed
  // expression re-parses to the same shape.
  static Expr combine(Expr::Op op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->lhs = a.node_ptr();
    n->rhs = b.node_ptr();
    return from_node(std::move(n));
  }

  static Expr negate(const Expr& a) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Expr::Op::Neg;
    n->lhs = a.node_ptr();
    return from_node(std::move(n));
  }

  static Expr raw_pow(const Expr& a, int e) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Expr::Op::Pow;
    n->exponent = e;
    n->lhs = a.node_ptr();
    return from_node(std::move(n));
  }

  static Expr from_node(std::shared_ptr<Expr::Node> n) { return Expr::wrap(std::move(n)); }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr Expr::parse(std::string_view src) { return detail::ExprParser(src).run(); }

inline Expr parse(std::string_view src) { return Expr::parse(src); }

/// Stack-machine form of an Expr with variables bound to positional slots.
/// Names that are not slots are folded in from `constants` at compile time.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  CompiledExpr(const Expr& e, std::span<const std::string> slots, const Env& constants) {
    int depth = 0;
    emit(e.node(), slots, constants, depth);
  }

  double eval(std::span<const double> slots) const {
    constexpr std::size_t kInline = 32;
    if (max_depth_ <= static_cast<int>(kInline)) {
      std::array<double, kInline> stack;
      return run(slots, stack.data());
    }
    std::vector<double> stack(static_cast<std::size_t>(max_depth_));
    return run(slots, stack.data());
  }

  bool empty() const { return code_.empty(); }

 private:
  struct Instr {
    Expr::Op op;
    Expr::Func func;
    int arg;  // slot index or exponent
    double value;
  };

  void push(Instr i, int& depth, int delta) {
    code_.push_back(i);
    depth += delta;
    if (depth > max_depth_) max_depth_ = depth;
  }

  void emit(const Expr::Node& n, std::span<const std::string> slots, const Env& constants,
            int& depth) {
    using Op = Expr::Op;
    switch (n.op) {
      case Op::Number: push({Op::Number, Expr::Func::Sin, 0, n.value}, depth, 1); return;
      case Op::Variable: {
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (slots[i] == n.name) {
            push({Op::Variable, Expr::Func::Sin, static_cast<int>(i), 0.0}, depth, 1);
            return;
          }
        }
        auto it = constants.find(n.name);
        if (it == constants.end())
          throw Error(ErrorKind::UnboundName, "unbound name '" + n.name + "'");
        push({Op::Number, Expr::Func::Sin, 0, it->second}, depth, 1);
        return;
      }
      case Op::Neg:
        emit(*n.lhs, slots, constants, depth);
        push({Op::Neg, Expr::Func::Sin, 0, 0.0}, depth, 0);
        return;
      case Op::Pow:
        emit(*n.lhs, slots, constants, depth);
        push({Op::Pow, Expr::Func::Sin, n.exponent, 0.0}, depth, 0);
        return;
      case Op::Call:
        emit(*n.lhs, slots, constants, depth);
        if (n.rhs) {
          emit(*n.rhs, slots, constants, depth);
          push({Op::Call, n.func, 2, 0.0}, depth, -1);
        } else {
          push({Op::Call, n.func, 1, 0.0}, depth, 0);
        }
        return;
      default:
        emit(*n.lhs, slots, constants, depth);
        emit(*n.rhs, slots, constants, depth);
        push({n.op, Expr::Func::Sin, 0, 0.0}, depth, -1);
        return;
    }
  }

  double run(std::span<const double> slots, double* stack) const {
    using Op = Expr::Op;
    int top = -1;
    for (const Instr& in : code_) {
      switch (in.op) {
        case Op::Number: stack[++top] = in.value; break;
        case Op::Variable: stack[++top] = slots[static_cast<std::size_t>(in.arg)]; break;
        case Op::Neg: stack[top] = -stack[top]; break;
        case Op::Pow: stack[top] = Expr::checked(Expr::int_pow(stack[top], in.arg)); break;
        case Op::Call:
          if (in.arg == 2) {
            --top;
            stack[top] = Expr::checked(Expr::apply(in.func, stack[top], stack[top + 1]));
          } else {
            stack[top] = Expr::checked(Expr::apply(in.func, stack[top], 0.0));
          }
          break;
        case Op::Add: --top; stack[top] = Expr::checked(stack[top] + stack[top + 1]); break;
        case Op::Sub: --top; stack[top] = Expr::checked(stack[top] - stack[top + 1]); break;
        case Op::Mul: --top; stack[top] = Expr::checked(stack[top] * stack[top + 1]); break;
        case Op::Div:
          --top;
          stack[top] = Expr::checked(Expr::divide(stack[top], stack[top + 1]));
          break;
      }
    }
    return stack[0];
  }

  std::vector<Instr> code_;
  int max_depth_ = 0;
};

}  // namespace liecomp
