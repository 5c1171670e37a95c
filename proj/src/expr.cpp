#include "massera/expr.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "massera/errors.hpp"

namespace massera {

namespace {

enum class OpCode : std::uint8_t {
  Push,
  LoadT,
  LoadX,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Tan,
  Sqrt,
  Exp,
  Log,
  Abs,
  Floor
};

struct Instr {
  OpCode code;
  double value;
  const Node* node;
};

constexpr std::array<std::string_view, 8> kFunctionNames = {"sin", "cos", "tan", "sqrt",
                                                             "exp", "log", "abs", "floor"};

OpCode call_opcode(Function fn) {
  switch (fn) {
    case Function::Sin: return OpCode::Sin;
    case Function::Cos: return OpCode::Cos;
    case Function::Tan: return OpCode::Tan;
    case Function::Sqrt: return OpCode::Sqrt;
    case Function::Exp: return OpCode::Exp;
    case Function::Log: return OpCode::Log;
    case Function::Abs: return OpCode::Abs;
    case Function::Floor: return OpCode::Floor;
  }
  return OpCode::Sin;
}

OpCode binary_opcode(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return OpCode::Add;
    case BinaryOp::Sub: return OpCode::Sub;
    case BinaryOp::Mul: return OpCode::Mul;
    case BinaryOp::Div: return OpCode::Div;
    case BinaryOp::Pow: return OpCode::Pow;
  }
  return OpCode::Add;
}

bool find_path(const Node* current, const Node* target, std::string& path) {
  if (current == target) return true;
  const std::size_t mark = path.size();
  switch (current->kind) {
    case NodeKind::Negate:
    case NodeKind::Call:
      path += ".arg";
      if (find_path(current->lhs.get(), target, path)) return true;
      break;
    case NodeKind::Binary:
      path += ".lhs";
      if (find_path(current->lhs.get(), target, path)) return true;
      path.resize(mark);
      path += ".rhs";
      if (find_path(current->rhs.get(), target, path)) return true;
      break;
    default:
      break;
  }
  path.resize(mark);
  return false;
}

std::string describe(const Node& n) {
  switch (n.kind) {
    case NodeKind::Binary: {
      constexpr std::array<char, 5> ops = {'+', '-', '*', '/', '^'};
      return fmt::format("'{}'", ops[static_cast<int>(n.op)]);
    }
    case NodeKind::Call: return fmt::format("{}()", function_name(n.fn));
    default: return "node";
  }
}

}  // namespace

class Program {
 public:
  explicit Program(const std::shared_ptr<const Node>& root) : root_(root.get()) {
    std::size_t depth = 0;
    emit(*root, depth);
  }

  [[nodiscard]] double run(double t, double x) const {
    if (max_depth_ <= kInlineDepth) {
      std::array<double, kInlineDepth> stack{};
      return run_on(stack.data(), t, x);
    }
    std::vector<double> stack(max_depth_);
    return run_on(stack.data(), t, x);
  }

 private:
  static constexpr std::size_t kInlineDepth = 64;

  void emit(const Node& n, std::size_t& depth) {
    switch (n.kind) {
      case NodeKind::Number:
        push({OpCode::Push, n.number, &n}, depth, +1);
        break;
      case NodeKind::Constant:
        push({OpCode::Push, n.constant == Constant::Pi ? std::numbers::pi : std::numbers::e, &n},
             depth, +1);
        break;
      case NodeKind::Variable:
        push({n.variable == Variable::T ? OpCode::LoadT : OpCode::LoadX, 0.0, &n}, depth, +1);
        break;
      case NodeKind::Negate:
        emit(*n.lhs, depth);
        push({OpCode::Neg, 0.0, &n}, depth, 0);
        break;
      case NodeKind::Call:
        emit(*n.lhs, depth);
        push({call_opcode(n.fn), 0.0, &n}, depth, 0);
        break;
      case NodeKind::Binary:
        emit(*n.lhs, depth);
        emit(*n.rhs, depth);
        push({binary_opcode(n.op), 0.0, &n}, depth, -1);
        break;
    }
  }

  void push(Instr instr, std::size_t& depth, int delta) {
    code_.push_back(instr);
    depth = static_cast<std::size_t>(static_cast<long long>(depth) + delta);
    max_depth_ = std::max(max_depth_, depth);
  }

  [[noreturn]] void fail(const Instr& in, double operand, const char* what) const {
    std::string path = "root";
    find_path(root_, in.node, path);
    throw EvalError(path, operand, fmt::format("{} in {}", what, describe(*in.node)));
  }

  double run_on(double* stack, double t, double x) const {
    std::size_t sp = 0;
    for (const Instr& in : code_) {
      switch (in.code) {
        case OpCode::Push: stack[sp++] = in.value; break;
        case OpCode::LoadT: stack[sp++] = t; break;
        case OpCode::LoadX: stack[sp++] = x; break;
        case OpCode::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case OpCode::Add: --sp; stack[sp - 1] = stack[sp - 1] + stack[sp]; break;
        case OpCode::Sub: --sp; stack[sp - 1] = stack[sp - 1] - stack[sp]; break;
        case OpCode::Mul: --sp; stack[sp - 1] = stack[sp - 1] * stack[sp]; break;
        case OpCode::Div:
          --sp;
          if (stack[sp] == 0.0) fail(in, stack[sp], "division by zero");
          stack[sp - 1] = stack[sp - 1] / stack[sp];
          break;
        case OpCode::Pow: {
          --sp;
          const double base = stack[sp - 1];
          const double expo = stack[sp];
          if (base == 0.0 && expo < 0.0) fail(in, base, "zero base with negative exponent");
          const double r = std::pow(base, expo);
          if (std::isnan(r) && !std::isnan(base) && !std::isnan(expo)) {
            fail(in, base, "negative base with non-integer exponent");
          }
          stack[sp - 1] = r;
          break;
        }
        case OpCode::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
        case OpCode::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
        case OpCode::Tan: stack[sp - 1] = std::tan(stack[sp - 1]); break;
        case OpCode::Sqrt:
          if (stack[sp - 1] < 0.0) fail(in, stack[sp - 1], "negative radicand");
          stack[sp - 1] = std::sqrt(stack[sp - 1]);
          break;
        case OpCode::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
        case OpCode::Log:
          if (stack[sp - 1] <= 0.0) fail(in, stack[sp - 1], "non-positive logarithm argument");
          stack[sp - 1] = std::log(stack[sp - 1]);
          break;
        case OpCode::Abs: stack[sp - 1] = std::abs(stack[sp - 1]); break;
        case OpCode::Floor: stack[sp - 1] = std::floor(stack[sp - 1]); break;
      }
    }
    return stack[0];
  }

  const Node* root_;
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

Expr::Expr(std::shared_ptr<const Node> root)
    : root_(std::move(root)), program_(std::make_shared<const Program>(root_)) {}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->number = value;
  return Expr(std::move(n));
}

Expr Expr::constant(Constant c) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->constant = c;
  return Expr(std::move(n));
}

Expr Expr::variable(Variable v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  n->variable = v;
  return Expr(std::move(n));
}

Expr Expr::negate(const Expr& operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Negate;
  n->lhs = operand.root_;
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->lhs = lhs.root_;
  n->rhs = rhs.root_;
  return Expr(std::move(n));
}

Expr Expr::call(Function fn, const Expr& arg) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->fn = fn;
  n->lhs = arg.root_;
  return Expr(std::move(n));
}

namespace {

std::size_t count_nodes(const Node& n) {
  std::size_t c = 1;
  if (n.lhs) c += count_nodes(*n.lhs);
  if (n.rhs) c += count_nodes(*n.rhs);
  return c;
}

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number: return a.number == b.number;
    case NodeKind::Constant: return a.constant == b.constant;
    case NodeKind::Variable: return a.variable == b.variable;
    case NodeKind::Negate: return same_tree(*a.lhs, *b.lhs);
    case NodeKind::Call: return a.fn == b.fn && same_tree(*a.lhs, *b.lhs);
    case NodeKind::Binary:
      return a.op == b.op && same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
  }
  return false;
}

}  // namespace

std::size_t Expr::size() const { return count_nodes(*root_); }

double Expr::operator()(double t, double x) const { return program_->run(t, x); }

bool operator==(const Expr& a, const Expr& b) { return same_tree(*a.root_, *b.root_); }

double eval_expr(const Expr& e, double t, double x) { return e(t, x); }

std::string_view function_name(Function fn) { return kFunctionNames[static_cast<std::size_t>(fn)]; }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "empty expression", "operand");
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size()) {
      throw ParseError(pos_, fmt::format("unexpected '{}'", src_[pos_]), "operator or end of input");
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(BinaryOp::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = Expr::binary(BinaryOp::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::negate(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input", "operand");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      expect_close();
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw ParseError(pos_, fmt::format("unexpected '{}'", c), "operand");
  }

  void expect_close() {
    if (!accept(')')) {
      skip_ws();
      throw ParseError(pos_, "missing ')'", "')'");
    }
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
      return pos_ - from;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError(start, "malformed number", "digit");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      // An exponent needs digits; otherwise 'e' would be implicit multiplication.
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && src_[look] >= '0' && src_[look] <= '9') {
        pos_ = look;
        digits();
      } else {
        throw ParseError(pos_, "malformed exponent", "digit");
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(value)) {
      throw ParseError(start, "number out of range", "finite number");
    }
    return Expr::number(value);
  }

  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return Expr::variable(Variable::T);
    if (name == "x") return Expr::variable(Variable::X);
    if (name == "pi") return Expr::constant(Constant::Pi);
    if (name == "e") return Expr::constant(Constant::E);
    for (std::size_t i = 0; i < kFunctionNames.size(); ++i) {
      if (name == kFunctionNames[i]) {
        if (!accept('(')) {
          skip_ws();
          throw ParseError(pos_, fmt::format("function '{}' needs an argument", name), "'('");
        }
        Expr arg = parse_sum();
        expect_close();
        return Expr::call(static_cast<Function>(i), arg);
      }
    }
    throw ParseError(start, fmt::format("unknown identifier '{}'", name), "t, x, pi, e or a function");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void format_into(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: out += fmt::format("{}", n.number); break;
    case NodeKind::Constant: out += n.constant == Constant::Pi ? "pi" : "e"; break;
    case NodeKind::Variable: out += n.variable == Variable::T ? 't' : 'x'; break;
    case NodeKind::Negate:
      out += "(-";
      format_into(*n.lhs, out);
      out += ')';
      break;
    case NodeKind::Call:
      out += function_name(n.fn);
      out += '(';
      format_into(*n.lhs, out);
      out += ')';
      break;
    case NodeKind::Binary: {
      constexpr std::array<char, 5> ops = {'+', '-', '*', '/', '^'};
      out += '(';
      format_into(*n.lhs, out);
      out += ops[static_cast<int>(n.op)];
      format_into(*n.rhs, out);
      out += ')';
      break;
    }
  }
}

}  // namespace

Expr parse(std::string_view src) { return Parser(src).parse_all(); }

std::string format_expr(const Expr& e) {
  std::string out;
  format_into(e.root(), out);
  return out;
}

namespace {

void collect_terms(const std::shared_ptr<const Node>& n, bool negated,
                   std::vector<std::pair<std::shared_ptr<const Node>, bool>>& out) {
  if (n->kind == NodeKind::Binary && (n->op == BinaryOp::Add || n->op == BinaryOp::Sub)) {
    collect_terms(n->lhs, negated, out);
    collect_terms(n->rhs, n->op == BinaryOp::Sub ? !negated : negated, out);
    return;
  }
  out.emplace_back(n, negated);
}

}  // namespace

std::vector<Expr> additive_terms(const Expr& e) {
  std::vector<std::pair<std::shared_ptr<const Node>, bool>> nodes;
  collect_terms(e.root_, false, nodes);
  std::vector<Expr> out;
  out.reserve(nodes.size());
  for (auto& [node, negated] : nodes) {
    Expr term(node);
    out.push_back(negated ? Expr::negate(term) : term);
  }
  return out;
}

Expr sum_of(const std::vector<Expr>& terms) {
  if (terms.empty()) return Expr::number(0.0);
  Expr acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = Expr::binary(BinaryOp::Add, acc, terms[i]);
  return acc;
}

}  // namespace massera
