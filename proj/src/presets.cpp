#include "massera/presets.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cmath>
#include <numbers>

#include "massera/errors.hpp"
#include "massera/expr.hpp"

namespace massera {

namespace {

constexpr const char* kExP1 = "cos(sqrt(pi^2+t))/(2*sqrt(pi^2+t))";
constexpr const char* kExDP1Forcing = "sin(sqrt(pi^2+t+1))-sin(sqrt(pi^2+t))";
constexpr const char* kBevertonHoltK = "8+2*cos(pi*t)+5/(1+t)";

/// Loose residual tolerances for solutions whose residuals decay like t^(-1/2).
void slow_decay_tolerances(AnalysisOptions& o) {
  o.s.s_tol = 1e-2;
  o.s.s_fail = 1e-1;
  o.s.decay_ratio = 0.8;
}

std::string bh_formula(double mu, const std::string& K) {
  return fmt::format("{}*({})*x/(({})+({}-1)*x)", mu, K, K, mu);
}

}  // namespace

std::vector<std::string> preset_names() { return {"exP1", "exDP1", "beverton-holt", "logistic", "zero"}; }

Preset beverton_holt(double mu, const std::string& K, const std::optional<std::string>& KP, double tau) {
  if (!(mu > 1.0) || !std::isfinite(mu)) throw ParameterError(fmt::format("growth rate mu = {} must exceed 1", mu));
  std::string periodic;
  if (KP) {
    periodic = *KP;
  } else {
    const auto split = split_asymptotic(parse(K), FieldKind::Map, tau);
    if (!split) throw ConfigError(fmt::format("cannot split K = {} into periodic and vanishing parts; pass KP", K));
    periodic = format_expr(split->periodic);
  }
  Preset p;
  p.name = "beverton-holt";
  p.summary = "Beverton-Holt x(k+1) = mu K(k) x / (K(k) + (mu - 1) x)";
  p.kind = FieldKind::Map;
  p.f = bh_formula(mu, K);
  p.P = bh_formula(mu, periodic);
  p.R = fmt::format("({})-({})", p.f, p.P);
  p.tau = tau;
  p.u0 = {0.5, 5.0, 50.0};
  p.horizon = 4e6;
  p.t_min = 0.0;
  p.scan_range = {-1.0, 50.0};
  return p;
}

Preset find_preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "exP1") {
    p.summary = "x' = a(t), a(t) = cos(sqrt(pi^2 + t)) / (2 sqrt(pi^2 + t)); bounded, S-asymptotically but not asymptotically periodic";
    p.kind = FieldKind::Ode;
    p.f = kExP1;
    p.P = "0";
    p.R = kExP1;
    p.tau = 2.0 * std::numbers::pi;
    p.u0 = {0.0};
    p.horizon = 4e5;
    p.t_min = 0.0;
    p.options.integrator.rel_tol = 1e-10;
    p.options.integrator.abs_tol = 1e-12;
    slow_decay_tolerances(p.options);
    p.scan_range = {-2.0, 2.0};
  } else if (name == "exDP1") {
    p.summary = "x(k+1) = x(k) + A(k), A(k) = sin(sqrt(pi^2 + k + 1)) - sin(sqrt(pi^2 + k))";
    p.kind = FieldKind::Map;
    p.f = fmt::format("x+({})", kExDP1Forcing);
    p.P = "x";
    p.R = kExDP1Forcing;
    p.tau = 7.0;
    p.u0 = {0.0};
    p.horizon = 4e5;
    p.t_min = 0.0;
    slow_decay_tolerances(p.options);
    p.scan_range = {-2.0, 2.0};
  } else if (name == "beverton-holt") {
    return beverton_holt(2.0, kBevertonHoltK);
  } else if (name == "logistic") {
    p.summary = "x' = x (1 - x)";
    p.kind = FieldKind::Ode;
    p.f = "x*(1-x)";
    p.tau = 1.0;
    p.u0 = {0.5};
    p.horizon = 100.0;
    p.scan_range = {-0.5, 1.5};
  } else if (name == "zero") {
    p.summary = "x' = 0";
    p.kind = FieldKind::Ode;
    p.f = "0";
    p.tau = 1.0;
    p.u0 = {0.0};
    p.horizon = 100.0;
    p.scan_range = {-1.0, 1.0};
  } else {
    throw ConfigError(fmt::format("unknown preset '{}' (known: {})", name, fmt::join(preset_names(), ", ")));
  }
  return p;
}

ScalarField build_field(const Preset& p) {
  const Expr f = parse(p.f);
  if (p.P.empty()) return make_field(p.kind, f, p.name, p.t_min);
  return make_field(p.kind, f, parse(p.P), parse(p.R), p.tau, p.name, p.t_min);
}

std::optional<RealFn> closed_form(const std::string& name) {
  constexpr double pi = std::numbers::pi;
  if (name == "exP1") {
    return RealFn([](double t, double) {
      return std::cos(std::sqrt(std::pow(pi, 2.0) + t)) / (2.0 * std::sqrt(std::pow(pi, 2.0) + t));
    });
  }
  if (name == "exDP1") {
    return RealFn([](double t, double x) {
      return x + (std::sin(std::sqrt(std::pow(pi, 2.0) + t + 1.0)) - std::sin(std::sqrt(std::pow(pi, 2.0) + t)));
    });
  }
  if (name == "beverton-holt") {
    return RealFn([](double t, double x) {
      const auto K = [t] { return 8.0 + 2.0 * std::cos(pi * t) + 5.0 / (1.0 + t); };
      return 2.0 * K() * x / (K() + (2.0 - 1.0) * x);
    });
  }
  if (name == "logistic") return RealFn([](double, double x) { return x * (1.0 - x); });
  if (name == "zero") return RealFn([](double, double) { return 0.0; });
  return std::nullopt;
}

}  // namespace massera
