#pragma once
/**
 * @file field.hpp
 * @brief Scalar right-hand sides f(t, x) for ODEs x' = f(t, x) and difference
 * equations x(t+1) = f(t, x(t)), optionally split as f = P + R with P
 * tau-periodic in t and R decaying.
 */

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "massera/expr.hpp"

namespace massera {

enum class FieldKind { Ode, Map };

[[nodiscard]] const char* to_string(FieldKind kind);

using RealFn = std::function<double(double t, double x)>;

/// f = periodic + remainder, periodic(t + tau, x) == periodic(t, x).
struct Decomposition {
  RealFn periodic;
  RealFn remainder;
  double tau = 0.0;
};

class ScalarField {
 public:
  /// `t_min` is the left end of the time domain (0 for fields given on R+).
  /// Map fields need an integer tau.
  ScalarField(FieldKind kind, RealFn f, std::optional<Decomposition> decomposition, std::string label,
              double t_min = -std::numeric_limits<double>::infinity());

  [[nodiscard]] FieldKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] double t_min() const noexcept { return t_min_; }
  [[nodiscard]] const std::optional<Decomposition>& decomposition() const noexcept { return decomposition_; }
  [[nodiscard]] const RealFn& function() const noexcept { return f_; }

  /// Raw evaluation; expression-backed fields throw EvalError on domain violations.
  [[nodiscard]] double operator()(double t, double x) const { return f_(t, x); }

 private:
  FieldKind kind_;
  RealFn f_;
  std::optional<Decomposition> decomposition_;
  std::string label_;
  double t_min_;
};

[[nodiscard]] RealFn as_function(const Expr& e);

[[nodiscard]] ScalarField make_field(FieldKind kind, const Expr& f, std::string label,
                                     double t_min = -std::numeric_limits<double>::infinity());
[[nodiscard]] ScalarField make_field(FieldKind kind, const Expr& f, const Expr& periodic, const Expr& remainder,
                                     double tau, std::string label,
                                     double t_min = -std::numeric_limits<double>::infinity());

/// f(t, x) with any failure reported as DomainError carrying (t, x).
[[nodiscard]] double evaluate_field(const ScalarField& field, double t, double x);

/// f^h(t, x) = f(t + h, x); the decomposition is shifted along.
[[nodiscard]] ScalarField shift_field(const ScalarField& field, double h);

/// The tau-periodic limiting equation x' = P(t, x) (or x(t+1) = P(t, x)).
/// A field without decomposition qualifies if it is itself tau-periodic.
/// Throws ConfigError otherwise.
[[nodiscard]] ScalarField limiting_field(const ScalarField& field, double tau);

/// ODE field s -> -f(span - s, x): integrating it over [0, span] runs the
/// original equation backward from t = span to t = 0.
[[nodiscard]] ScalarField reverse_time(const ScalarField& field, double span);

/// Spot check of g(t + tau, x) == g(t, x) on a grid of (t, x).
[[nodiscard]] bool looks_periodic(const RealFn& g, FieldKind kind, double tau, double rel_tol = 1e-10);

/// Largest violation of the decomposition invariants on a sample grid:
/// |f - (P + R)| / (1 + |f|) and |P(t + tau) - P(t)| / (1 + |P|).
struct DecompositionDefect {
  double sum_defect = 0.0;
  double period_defect = 0.0;
};
[[nodiscard]] DecompositionDefect decomposition_defect(const ScalarField& field, double t_lo, double t_hi,
                                                       double x_lo, double x_hi, int n_t = 64, int n_x = 9);

/// Splits the top-level additive terms of `f` into tau-periodic terms and
/// terms that vanish as t -> +infinity. Returns nullopt when some term is
/// neither. A heuristic: periodicity is spot-checked on a grid and decay is
/// judged from magnitudes near t = 1e8.
struct ExprDecomposition {
  Expr periodic;
  Expr remainder;
};
[[nodiscard]] std::optional<ExprDecomposition> split_asymptotic(const Expr& f, FieldKind kind, double tau);

}  // namespace massera
