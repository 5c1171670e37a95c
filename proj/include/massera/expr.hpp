#pragma once
/**
 * @file expr.hpp
 * @brief Closed-form expressions in the variables t and x.
 *
 * Grammar, from loosest to tightest binding:
 *
 *     sum     := product (('+' | '-') product)*
 *     product := unary (('*' | '/') unary)*
 *     unary   := '-' unary | power
 *     power   := primary ('^' unary)?          (right-associative)
 *     primary := number | 'pi' | 'e' | 't' | 'x' | func '(' sum ')' | '(' sum ')'
 *
 * so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. Implicit multiplication is
 * not accepted. Trees are immutable and shared; evaluation runs a compiled
 * postfix program and is safe to call concurrently.
 */

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace massera {

enum class NodeKind : std::uint8_t { Number, Constant, Variable, Negate, Binary, Call };
enum class Constant : std::uint8_t { Pi, E };
enum class Variable : std::uint8_t { T, X };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
enum class Function : std::uint8_t { Sin, Cos, Tan, Sqrt, Exp, Log, Abs, Floor };

struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  Constant constant = Constant::Pi;
  Variable variable = Variable::T;
  BinaryOp op = BinaryOp::Add;
  Function fn = Function::Sin;
  /// Operand of Negate/Call, left child of Binary.
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

class Program;

class Expr {
 public:
  static Expr number(double value);
  static Expr constant(Constant c);
  static Expr variable(Variable v);
  static Expr negate(const Expr& operand);
  static Expr binary(BinaryOp op, const Expr& lhs, const Expr& rhs);
  static Expr call(Function fn, const Expr& arg);

  [[nodiscard]] const Node& root() const { return *root_; }
  [[nodiscard]] std::size_t size() const;

  /// Throws EvalError on a domain violation.
  [[nodiscard]] double operator()(double t, double x) const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend std::vector<Expr> additive_terms(const Expr& e);

 private:
  explicit Expr(std::shared_ptr<const Node> root);

  std::shared_ptr<const Node> root_;
  std::shared_ptr<const Program> program_;
};

[[nodiscard]] Expr parse(std::string_view src);
[[nodiscard]] double eval_expr(const Expr& e, double t, double x);
/// Canonical fully parenthesized form; parse(format_expr(e)) == e.
[[nodiscard]] std::string format_expr(const Expr& e);

[[nodiscard]] std::string_view function_name(Function fn);

/// Top-level additive terms with their signs folded in: a - (b + c) yields
/// {a, -(b + c)}.
[[nodiscard]] std::vector<Expr> additive_terms(const Expr& e);
/// Sum of terms; the empty sum is the literal 0.
[[nodiscard]] Expr sum_of(const std::vector<Expr>& terms);

}  // namespace massera
