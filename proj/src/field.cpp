#include "massera/field.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "massera/errors.hpp"

namespace massera {

const char* to_string(FieldKind kind) { return kind == FieldKind::Ode ? "ode" : "map"; }

namespace {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

ScalarField::ScalarField(FieldKind kind, RealFn f, std::optional<Decomposition> decomposition, std::string label,
                         double t_min)
    : kind_(kind),
      f_(std::move(f)),
      decomposition_(std::move(decomposition)),
      label_(std::move(label)),
      t_min_(t_min) {
  if (!f_) throw ConfigError("field has no right-hand side");
  if (decomposition_) {
    if (!(decomposition_->tau > 0.0)) throw ConfigError("period must be positive");
    if (kind_ == FieldKind::Map && !is_integer(decomposition_->tau)) {
      throw ConfigError("difference equations need an integer period");
    }
    if (!decomposition_->periodic || !decomposition_->remainder) {
      throw ConfigError("decomposition is missing a part");
    }
  }
}

RealFn as_function(const Expr& e) {
  return [e](double t, double x) { return e(t, x); };
}

ScalarField make_field(FieldKind kind, const Expr& f, std::string label, double t_min) {
  return ScalarField(kind, as_function(f), std::nullopt, std::move(label), t_min);
}

ScalarField make_field(FieldKind kind, const Expr& f, const Expr& periodic, const Expr& remainder, double tau,
                       std::string label, double t_min) {
  return ScalarField(kind, as_function(f), Decomposition{as_function(periodic), as_function(remainder), tau},
                     std::move(label), t_min);
}

double evaluate_field(const ScalarField& field, double t, double x) {
  if (t < field.t_min()) {
    throw DomainError(t, x, fmt::format("time below the field's domain start {}", field.t_min()));
  }
  double v = 0.0;
  try {
    v = field(t, x);
  } catch (const EvalError& e) {
    throw DomainError(t, x, e.what());
  }
  if (std::isnan(v) && !std::isnan(t) && !std::isnan(x)) throw DomainError(t, x, "right-hand side is NaN");
  return v;
}

ScalarField shift_field(const ScalarField& field, double h) {
  if (field.kind() == FieldKind::Map && !is_integer(h)) {
    throw ParameterError("difference equations can only be shifted by integers");
  }
  if (std::isfinite(field.t_min()) && h < 0.0) throw ParameterError("one-sided fields need a non-negative shift");
  if (h == 0.0) return field;
  auto shifted = [h](const RealFn& g) -> RealFn {
    return [g, h](double t, double x) { return g(t + h, x); };
  };
  std::optional<Decomposition> d;
  if (field.decomposition()) {
    const auto& src = *field.decomposition();
    d = Decomposition{shifted(src.periodic), shifted(src.remainder), src.tau};
  }
  return ScalarField(field.kind(), shifted(field.function()), std::move(d),
                     fmt::format("{} shifted by {}", field.label(), h), field.t_min() - h);
}

ScalarField limiting_field(const ScalarField& field, double tau) {
  if (const auto& d = field.decomposition()) {
    if (std::abs(d->tau - tau) > 1e-12 * std::max(1.0, tau)) {
      throw ConfigError(fmt::format("period {} does not match the decomposition period {}", tau, d->tau));
    }
    auto zero = [](double, double) { return 0.0; };
    return ScalarField(field.kind(), d->periodic, Decomposition{d->periodic, zero, d->tau},
                       fmt::format("limit of {}", field.label()), field.t_min());
  }
  if (looks_periodic(field.function(), field.kind(), tau)) {
    auto zero = [](double, double) { return 0.0; };
    return ScalarField(field.kind(), field.function(), Decomposition{field.function(), zero, tau}, field.label(),
                       field.t_min());
  }
  throw ConfigError(fmt::format("field '{}' has no periodic part and is not {}-periodic", field.label(), tau));
}

ScalarField reverse_time(const ScalarField& field, double span) {
  if (field.kind() != FieldKind::Ode) throw ParameterError("time reversal is defined for differential equations");
  const RealFn& f = field.function();
  return ScalarField(FieldKind::Ode, [f, span](double s, double x) { return -f(span - s, x); }, std::nullopt,
                     fmt::format("{} reversed", field.label()));
}

namespace {

std::vector<double> time_grid(FieldKind kind, double lo, double hi, int n) {
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = lo + (hi - lo) * i / std::max(1, n - 1);
    if (kind == FieldKind::Map) t = std::floor(t);
    ts.push_back(t);
  }
  return ts;
}

const std::vector<double>& probe_states() {
  static const std::vector<double> xs = {-3.0, -1.7, -0.6, 0.0, 0.35, 1.0, 2.2, 3.0};
  return xs;
}

/// Evaluates g, reporting failure as nullopt.
std::optional<double> try_eval(const RealFn& g, double t, double x) {
  try {
    const double v = g(t, x);
    if (std::isnan(v)) return std::nullopt;
    return v;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

bool looks_periodic(const RealFn& g, FieldKind kind, double tau, double rel_tol) {
  if (!(tau > 0.0)) return false;
  bool any = false;
  for (double t : time_grid(kind, 0.0, 37.0 * tau, 97)) {
    for (double x : probe_states()) {
      const auto a = try_eval(g, t, x);
      const auto b = try_eval(g, t + tau, x);
      if (a.has_value() != b.has_value()) return false;
      if (!a) continue;
      any = true;
      if (std::abs(*a - *b) > rel_tol * (1.0 + std::abs(*a))) return false;
    }
  }
  return any;
}

DecompositionDefect decomposition_defect(const ScalarField& field, double t_lo, double t_hi, double x_lo,
                                         double x_hi, int n_t, int n_x) {
  DecompositionDefect out;
  const auto& d = field.decomposition();
  if (!d) return out;
  for (double t : time_grid(field.kind(), t_lo, t_hi, n_t)) {
    for (int j = 0; j < n_x; ++j) {
      const double x = x_lo + (x_hi - x_lo) * j / std::max(1, n_x - 1);
      const double f = field(t, x);
      const double p = d->periodic(t, x);
      const double r = d->remainder(t, x);
      const double p_next = d->periodic(t + d->tau, x);
      out.sum_defect = std::max(out.sum_defect, std::abs(f - (p + r)) / (1.0 + std::abs(f)));
      out.period_defect = std::max(out.period_defect, std::abs(p_next - p) / (1.0 + std::abs(p)));
    }
  }
  return out;
}

namespace {

double sup_abs(const RealFn& g, FieldKind kind, double t_lo, double t_hi) {
  double m = 0.0;
  for (double t : time_grid(kind, t_lo, t_hi, 33)) {
    for (double x : probe_states()) {
      const auto v = try_eval(g, t, x);
      if (!v || !std::isfinite(*v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::abs(*v));
    }
  }
  return m;
}

bool looks_decaying(const RealFn& g, FieldKind kind, double tau) {
  constexpr double kFar = 1e8;
  const double far = sup_abs(g, kind, kFar, kFar + std::max(tau, 1.0));
  const double near = sup_abs(g, kind, 0.0, std::max(tau, 1.0));
  return far <= 1e-3 * (1.0 + near);
}

}  // namespace

std::optional<ExprDecomposition> split_asymptotic(const Expr& f, FieldKind kind, double tau) {
  std::vector<Expr> periodic;
  std::vector<Expr> decaying;
  for (const Expr& term : additive_terms(f)) {
    const RealFn g = as_function(term);
    if (looks_periodic(g, kind, tau)) {
      periodic.push_back(term);
    } else if (looks_decaying(g, kind, tau)) {
      decaying.push_back(term);
    } else {
      return std::nullopt;
    }
  }
  return ExprDecomposition{sum_of(periodic), sum_of(decaying)};
}

}  // namespace massera
