#pragma once
/**
 * @file presets.hpp
 * @brief Built-in equations with their default period, initial values,
 * horizon and tuned tolerances.
 *
 *   exP1           x' = cos(sqrt(pi^2 + t)) / (2 sqrt(pi^2 + t)), tau = 2 pi
 *   exDP1          x(k+1) = x(k) + sin(sqrt(pi^2 + k + 1)) - sin(sqrt(pi^2 + k)), tau = 7
 *   beverton-holt  x(k+1) = mu K(k) x / (K(k) + (mu - 1) x), tau = 2
 *   logistic       x' = x (1 - x), tau = 1
 *   zero           x' = 0, tau = 1
 */

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "massera/analysis.hpp"
#include "massera/field.hpp"

namespace massera {

struct Preset {
  std::string name;
  std::string summary;
  FieldKind kind = FieldKind::Ode;
  std::string f;
  /// Periodic part and remainder; both empty when f is itself periodic.
  std::string P;
  std::string R;
  double tau = 1.0;
  std::vector<double> u0;
  double horizon = 100.0;
  double t_min = -std::numeric_limits<double>::infinity();
  AnalysisOptions options;
  /// Default range for fixed-point scans and chain graphs.
  std::pair<double, double> scan_range{-1.0, 1.0};
};

[[nodiscard]] std::vector<std::string> preset_names();

/// Throws ConfigError for an unknown name.
[[nodiscard]] Preset find_preset(const std::string& name);

/// Beverton-Holt with growth rate mu > 1 and carrying capacity K(t). The
/// periodic part KP of K is split off automatically when not given; throws
/// ConfigError if that fails and ParameterError for mu <= 1.
[[nodiscard]] Preset beverton_holt(double mu, const std::string& K, const std::optional<std::string>& KP = {},
                                   double tau = 2.0);

/// Field built from the preset's expressions.
[[nodiscard]] ScalarField build_field(const Preset& p);

/// Hand-written evaluator of the preset's f with the parser's operation
/// order (default parameters for beverton-holt). nullopt for unknown names.
[[nodiscard]] std::optional<RealFn> closed_form(const std::string& name);

}  // namespace massera
