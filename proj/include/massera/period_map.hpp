#pragma once
/**
 * @file period_map.hpp
 * @brief The period (Poincare) map u -> phi(tau, u) of the limiting
 * tau-periodic equation, started at t = 0.
 *
 * For differential equations the map integrates x' = P(t, x) over [0, tau];
 * for difference equations it composes x -> P(t, x) for t = 0 .. tau-1, which
 * is exact. Forward values are memoized in a thread-safe cache shared by
 * copies of the map.
 */

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "massera/field.hpp"
#include "massera/trajectory.hpp"

namespace massera {

class PeriodMap {
 public:
  using Fn = std::function<double(double)>;

  /// Synthetic map, mostly for tests and chain-recurrence experiments.
  /// `inverse` may be empty.
  static PeriodMap from_function(Fn forward, std::string label, Fn inverse = {});

  [[nodiscard]] double operator()(double u) const;
  /// P^{-1}(u) via the time-reversed equation (ODE) or per-step bisection
  /// (difference equation). nullopt when unavailable or when it fails.
  [[nodiscard]] std::optional<double> inverse(double u) const;
  [[nodiscard]] bool has_inverse() const noexcept { return static_cast<bool>(backward_); }

  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  /// Limiting equation the map was built from (absent for synthetic maps).
  [[nodiscard]] const std::optional<ScalarField>& source() const noexcept { return source_; }
  [[nodiscard]] std::size_t cache_size() const;

 private:
  friend PeriodMap build_period_map(const ScalarField&, double, const IntegratorConfig&);
  struct Cache;

  PeriodMap() = default;

  Fn forward_;
  Fn backward_;
  double tau_ = 1.0;
  std::string label_;
  std::optional<ScalarField> source_;
  std::shared_ptr<Cache> cache_;
};

/// Throws ConfigError when the field has neither a periodic part nor is
/// itself tau-periodic. Evaluating the map throws BlowUpError when the
/// solution leaves |x| < cfg.x_max within one period.
[[nodiscard]] PeriodMap build_period_map(const ScalarField& field, double tau, const IntegratorConfig& cfg = {});

struct IterateList {
  std::vector<double> values;
  /// The map failed (blow-up) before k_max iterations.
  bool truncated = false;
  std::string note;
};

/// [u0, P(u0), P^2(u0), ..., P^k_max(u0)], cut short on blow-up.
[[nodiscard]] IterateList iterates(const PeriodMap& pm, double u0, int k_max);

}  // namespace massera
