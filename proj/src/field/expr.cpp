#include "nonholo/field/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "nonholo/error.hpp"

namespace nonholo::field {

struct Node {
  Op op = Op::Constant;
  double value = 0.0;
  int index = 0;
  int exponent = 0;
  ScalarExpr a;
  ScalarExpr b;
  int arity = 0;

  mutable std::once_flag tape_once;
  mutable std::unique_ptr<kernels::Tape> tape;
};

namespace {

double pow_int(double base, int exponent) {
  double out = 0.0;
  kernels::scalar_kernels().pow_int(&base, exponent, &out, 1);
  return out;
}

}  // namespace

// Only place that constructs nodes; the public combinators simplify first.
struct Builder {
  static ScalarExpr leaf_constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Constant;
    n->value = v;
    return ScalarExpr(std::move(n));
  }
  static ScalarExpr leaf_variable(int i) {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->index = i;
    n->arity = i + 1;
    return ScalarExpr(std::move(n));
  }
  static ScalarExpr unary(Op op, const ScalarExpr& a, int exponent = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = a;
    n->exponent = exponent;
    n->arity = a.arity();
    return ScalarExpr(std::move(n));
  }
  static ScalarExpr binary(Op op, const ScalarExpr& a, const ScalarExpr& b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = a;
    n->b = b;
    n->arity = std::max(a.arity(), b.arity());
    return ScalarExpr(std::move(n));
  }
  static const Node& node(const ScalarExpr& e) { return *e.node_; }
};

ScalarExpr::ScalarExpr() : node_(nullptr) {}

ScalarExpr ScalarExpr::constant(double value) { return Builder::leaf_constant(value); }

ScalarExpr ScalarExpr::variable(int index) {
  if (index < 0 || index > 2) throw ValidationError("variable index out of range: " + std::to_string(index));
  return Builder::leaf_variable(index);
}

// A default-constructed expression is the constant zero without allocating.
Op ScalarExpr::op() const { return node_ ? node_->op : Op::Constant; }
double ScalarExpr::constant_value() const { return node_ ? node_->value : 0.0; }
int ScalarExpr::variable_index() const { return node_ ? node_->index : 0; }
int ScalarExpr::exponent() const { return node_ ? node_->exponent : 0; }
ScalarExpr ScalarExpr::lhs() const { return node_ ? node_->a : ScalarExpr(); }
ScalarExpr ScalarExpr::rhs() const { return node_ ? node_->b : ScalarExpr(); }
int ScalarExpr::arity() const { return node_ ? node_->arity : 0; }

ScalarExpr operator-(const ScalarExpr& a) {
  if (a.is_constant()) return ScalarExpr::constant(-a.constant_value());
  if (a.op() == Op::Neg) return a.lhs();
  return Builder::unary(Op::Neg, a);
}

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.is_constant() && b.is_constant()) return ScalarExpr::constant(a.constant_value() + b.constant_value());
  if (a.is_literal(0.0)) return b;
  if (b.is_literal(0.0)) return a;
  return Builder::binary(Op::Add, a, b);
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.is_constant() && b.is_constant()) return ScalarExpr::constant(a.constant_value() - b.constant_value());
  if (b.is_literal(0.0)) return a;
  if (a.is_literal(0.0)) return -b;
  if (a.node() != nullptr && a.node() == b.node()) return ScalarExpr::constant(0.0);
  return Builder::binary(Op::Sub, a, b);
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.is_constant() && b.is_constant()) return ScalarExpr::constant(a.constant_value() * b.constant_value());
  if (a.is_literal(0.0) || b.is_literal(0.0)) return ScalarExpr::constant(0.0);
  if (a.is_literal(1.0)) return b;
  if (b.is_literal(1.0)) return a;
  if (a.is_literal(-1.0)) return -b;
  if (b.is_literal(-1.0)) return -a;
  return Builder::binary(Op::Mul, a, b);
}

ScalarExpr operator*(double a, const ScalarExpr& b) { return ScalarExpr::constant(a) * b; }

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0) {
    return ScalarExpr::constant(a.constant_value() / b.constant_value());
  }
  if (a.is_literal(0.0) && !b.is_literal(0.0)) return ScalarExpr::constant(0.0);
  if (b.is_literal(1.0)) return a;
  if (b.is_literal(-1.0)) return -a;
  return Builder::binary(Op::Div, a, b);
}

ScalarExpr pow(const ScalarExpr& base, int exponent) {
  if (exponent == 0) return ScalarExpr::constant(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) return ScalarExpr::constant(pow_int(base.constant_value(), exponent));
  return Builder::unary(Op::Pow, base, exponent);
}

ScalarExpr sin(const ScalarExpr& a) {
  if (a.is_constant()) return ScalarExpr::constant(std::sin(a.constant_value()));
  return Builder::unary(Op::Sin, a);
}

ScalarExpr cos(const ScalarExpr& a) {
  if (a.is_constant()) return ScalarExpr::constant(std::cos(a.constant_value()));
  return Builder::unary(Op::Cos, a);
}

ScalarExpr exp(const ScalarExpr& a) {
  if (a.is_constant()) return ScalarExpr::constant(std::exp(a.constant_value()));
  return Builder::unary(Op::Exp, a);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

ScalarExpr differentiate(const ScalarExpr& e, int v, std::unordered_map<const Node*, ScalarExpr>& memo) {
  if (e.node() == nullptr) return ScalarExpr::constant(0.0);
  if (auto it = memo.find(e.node()); it != memo.end()) return it->second;

  ScalarExpr d;
  const ScalarExpr a = e.lhs();
  const ScalarExpr b = e.rhs();
  switch (e.op()) {
    case Op::Constant:
      d = ScalarExpr::constant(0.0);
      break;
    case Op::Variable:
      d = ScalarExpr::constant(e.variable_index() == v ? 1.0 : 0.0);
      break;
    case Op::Neg:
      d = -differentiate(a, v, memo);
      break;
    case Op::Sin:
      d = cos(a) * differentiate(a, v, memo);
      break;
    case Op::Cos:
      d = -(sin(a) * differentiate(a, v, memo));
      break;
    case Op::Exp:
      d = e * differentiate(a, v, memo);
      break;
    case Op::Add:
      d = differentiate(a, v, memo) + differentiate(b, v, memo);
      break;
    case Op::Sub:
      d = differentiate(a, v, memo) - differentiate(b, v, memo);
      break;
    case Op::Mul:
      d = differentiate(a, v, memo) * b + a * differentiate(b, v, memo);
      break;
    case Op::Div: {
      const ScalarExpr da = differentiate(a, v, memo);
      const ScalarExpr db = differentiate(b, v, memo);
      if (db.is_literal(0.0)) {
        d = da / b;
      } else {
        d = (da * b - a * db) / pow(b, 2);
      }
      break;
    }
    case Op::Pow: {
      const int k = e.exponent();
      d = ScalarExpr::constant(static_cast<double>(k)) * pow(a, k - 1) * differentiate(a, v, memo);
      break;
    }
  }
  memo.emplace(e.node(), d);
  return d;
}

// ---------------------------------------------------------------------------
// Compilation to a register tape

struct Compiler {
  std::vector<const Node*> order;
  std::unordered_map<const Node*, int> uses;
  std::unordered_map<const Node*, std::uint32_t> reg;

  void visit(const ScalarExpr& e) {
    const Node* n = e.node();
    if (uses[n]++ > 0) return;
    const Op op = e.op();
    if (op != Op::Constant && op != Op::Variable) {
      visit(e.lhs());
      if (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div) visit(e.rhs());
    }
    order.push_back(n);
  }

  kernels::Tape compile(const ScalarExpr& root) {
    if (root.node() == nullptr) {
      return kernels::Tape({kernels::Instruction{kernels::TapeOp::Constant, 0, 0, 0, 0, 0, 0.0}}, 1, 0);
    }
    visit(root);
    // `uses` now counts parent references (+1 for the root's own visit).
    std::vector<std::uint32_t> free_regs;
    std::uint32_t next = 0;
    std::vector<kernels::Instruction> code;
    code.reserve(order.size());

    auto release = [&](const Node* child) {
      if (--uses[child] == 0) free_regs.push_back(reg[child]);
    };

    for (const Node* n : order) {
      kernels::Instruction ins;
      switch (n->op) {
        case Op::Constant:
          ins.op = kernels::TapeOp::Constant;
          ins.constant = n->value;
          break;
        case Op::Variable:
          ins.op = kernels::TapeOp::Variable;
          ins.variable = n->index;
          break;
        case Op::Neg: ins.op = kernels::TapeOp::Neg; break;
        case Op::Sin: ins.op = kernels::TapeOp::Sin; break;
        case Op::Cos: ins.op = kernels::TapeOp::Cos; break;
        case Op::Exp: ins.op = kernels::TapeOp::Exp; break;
        case Op::Add: ins.op = kernels::TapeOp::Add; break;
        case Op::Sub: ins.op = kernels::TapeOp::Sub; break;
        case Op::Mul: ins.op = kernels::TapeOp::Mul; break;
        case Op::Div: ins.op = kernels::TapeOp::Div; break;
        case Op::Pow:
          ins.op = kernels::TapeOp::PowInt;
          ins.exponent = n->exponent;
          break;
      }
      const bool has_a = n->op != Op::Constant && n->op != Op::Variable;
      const bool has_b = n->op == Op::Add || n->op == Op::Sub || n->op == Op::Mul || n->op == Op::Div;
      if (has_a) ins.lhs = reg.at(n->a.node());
      if (has_b) ins.rhs = reg.at(n->b.node());
      // Operands are read before the destination is written, element by
      // element, so a dying operand's register can be reused in place.
      if (has_a) release(n->a.node());
      if (has_b) release(n->b.node());
      std::uint32_t dst;
      if (!free_regs.empty()) {
        dst = free_regs.back();
        free_regs.pop_back();
      } else {
        dst = next++;
      }
      ins.dst = dst;
      reg[n] = dst;
      code.push_back(ins);
    }
    return kernels::Tape(std::move(code), next, reg.at(root.node()));
  }
};

}  // namespace

ScalarExpr ScalarExpr::derivative(int variable) const {
  if (variable < 0 || variable > 2) throw ValidationError("variable index out of range");
  std::unordered_map<const Node*, ScalarExpr> memo;
  return differentiate(*this, variable, memo);
}

const kernels::Tape& ScalarExpr::tape() const {
  static const kernels::Tape zero_tape(
      {kernels::Instruction{kernels::TapeOp::Constant, 0, 0, 0, 0, 0, 0.0}}, 1, 0);
  if (!node_) return zero_tape;
  std::call_once(node_->tape_once, [this] {
    Compiler c;
    node_->tape = std::make_unique<kernels::Tape>(c.compile(*this));
  });
  return *node_->tape;
}

double ScalarExpr::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) < arity()) {
    throw ValidationError("expression needs " + std::to_string(arity()) + " coordinates, got " +
                          std::to_string(point.size()));
  }
  if (!node_) return 0.0;
  if (node_->op == Op::Constant) return node_->value;
  return tape().evaluate(point);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int precedence(const ScalarExpr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Constant:
      return e.constant_value() < 0.0 || std::signbit(e.constant_value()) ? 3 : 5;
    default:
      return 5;
  }
}

void print(const ScalarExpr& e, std::string& out);

void print_wrapped(const ScalarExpr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const ScalarExpr& e, std::string& out) {
  switch (e.op()) {
    case Op::Constant:
      out += format_number(e.constant_value());
      return;
    case Op::Variable:
      out += 'x';
      out += static_cast<char>('1' + e.variable_index());
      return;
    case Op::Neg:
      out += '-';
      print_wrapped(e.lhs(), precedence(e.lhs()) < 4, out);
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      out += e.op() == Op::Sin ? "sin(" : e.op() == Op::Cos ? "cos(" : "exp(";
      print(e.lhs(), out);
      out += ')';
      return;
    case Op::Pow:
      print_wrapped(e.lhs(), precedence(e.lhs()) < 5, out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case Op::Add:
    case Op::Sub:
      print_wrapped(e.lhs(), precedence(e.lhs()) < 1, out);
      out += e.op() == Op::Add ? " + " : " - ";
      print_wrapped(e.rhs(), precedence(e.rhs()) <= (e.op() == Op::Sub ? 1 : 0), out);
      return;
    case Op::Mul:
    case Op::Div:
      print_wrapped(e.lhs(), precedence(e.lhs()) < 2, out);
      out += e.op() == Op::Mul ? "*" : "/";
      print_wrapped(e.rhs(), precedence(e.rhs()) <= (e.op() == Op::Div ? 2 : 1), out);
      return;
  }
}

}  // namespace

std::string ScalarExpr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ScalarExpr parse() {
    ScalarExpr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(ParseError::Kind::Syntax, "unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& what) const {
    throw ParseError(kind, pos_, what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ScalarExpr expr() {
    ScalarExpr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  ScalarExpr term() {
    ScalarExpr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * factor();
      } else if (accept('/')) {
        lhs = lhs / factor();
      } else {
        return lhs;
      }
    }
  }

  ScalarExpr factor() {
    const bool negate = accept('-');
    ScalarExpr base = atom();
    if (accept('^')) base = pow(base, integer_exponent());
    return negate ? -base : base;
  }

  int integer_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    const std::size_t digits_start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits_start) {
      pos_ = start;
      if (start == text_.size()) fail(ParseError::Kind::Syntax, "expected integer exponent");
      fail(ParseError::Kind::NonIntegerExponent, "exponent must be an integer literal");
    }
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      pos_ = start;
      fail(ParseError::Kind::NonIntegerExponent, "exponent must be an integer literal");
    }
    const std::string digits(text_.substr(digits_start, pos_ - digits_start));
    if (digits.size() > 6) {
      pos_ = start;
      fail(ParseError::Kind::Syntax, "exponent too large");
    }
    const int k = std::stoi(digits);
    return negative ? -k : k;
  }

  ScalarExpr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail(ParseError::Kind::Syntax, "expected operand");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == '(') {
      ++pos_;
      ScalarExpr inner = expr();
      if (!accept(')')) fail(ParseError::Kind::Syntax, "expected ')'");
      return inner;
    }
    fail(ParseError::Kind::Syntax, std::string("unexpected '") + c + "'");
  }

  ScalarExpr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) {
      pos_ = start;
      fail(ParseError::Kind::Syntax, "malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = mark;
        fail(ParseError::Kind::Syntax, "malformed exponent in number");
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return ScalarExpr::constant(std::strtod(literal.c_str(), nullptr));
  }

  ScalarExpr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x1" || name == "x2" || name == "x3") return ScalarExpr::variable(name[1] - '1');
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!accept('(')) fail(ParseError::Kind::Syntax, "expected '(' after function name");
      ScalarExpr arg = expr();
      if (!accept(')')) fail(ParseError::Kind::Syntax, "expected ')'");
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      return exp(arg);
    }
    pos_ = start;
    fail(ParseError::Kind::UnknownIdentifier, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarExpr parse_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace nonholo::field

namespace nonholo::field {

void evaluate_batch(const ScalarExpr& e, const kernels::PointBatch& points, std::span<double> out) {
  if (e.is_constant()) {
    std::fill_n(out.begin(), points.size, e.constant_value());
    return;
  }
  e.tape().evaluate_batch(points, out);
}

}  // namespace nonholo::field
