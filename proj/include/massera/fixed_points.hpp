#pragma once
/**
 * @file fixed_points.hpp
 * @brief Fixed points of a period map (tau-periodic solutions), their
 * isolation and two-sided stability, and sampled monotonicity checks.
 */

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "massera/period_map.hpp"

namespace massera {

enum class Stability {
  PositivelyAsymptoticallyStable,
  NegativelyAsymptoticallyStable,
  SemiStable,
  Inconclusive
};

[[nodiscard]] const char* to_string(Stability s);

struct FixedPointRecord {
  double u_star = 0.0;
  /// |P(u*) - u*|
  double residual = 0.0;
  /// g = P - id changes sign across u*.
  bool transverse = false;
  Stability stability = Stability::Inconclusive;
  /// Distance to the nearest other fixed point or continuum found; +inf if none.
  double isolation_gap = std::numeric_limits<double>::infinity();
  /// Outcome of the iteration cross-check run by classify_stability.
  std::string cross_check;
};

struct FixedPointScan {
  std::vector<FixedPointRecord> records;
  /// Runs of >= 3 consecutive grid points with |P(u) - u| < root_tol.
  std::vector<std::pair<double, double>> continua;
  double grid_spacing = 0.0;
  double root_tol = 0.0;
  std::vector<std::string> notes;

  [[nodiscard]] bool continuum() const noexcept { return !continua.empty(); }
};

/// Scans g(u) = P(u) - u on a uniform grid over [lo, hi], brackets sign
/// changes and bisects them; near-zero grid values without a sign change
/// are tangency candidates (transverse = false).
[[nodiscard]] FixedPointScan find_fixed_points(const PeriodMap& pm, double lo, double hi, int n_grid = 4096,
                                               double root_tol = 1e-10);

/// Stability from the signs of g(u* -+ probe):
///   (+,-) positively asymptotically stable, (-,+) negatively asymptotically
///   stable (attracting for the inverse map), equal signs semi-stable.
/// Non-transverse points and |g| < root_tol at a probe give Inconclusive.
/// The tag is cross-checked by iterating P (and P^{-1} when available)
/// 50 times from u* -+ probe; a contradiction yields Inconclusive.
/// Throws ParameterError if probe >= isolation_gap / 2.
[[nodiscard]] Stability classify_stability(const PeriodMap& pm, FixedPointRecord& fp, double probe,
                                           double root_tol = 1e-10);

/// Runs classify_stability on every transverse record with
/// probe = min(gap / 4, grid spacing).
void classify_all(const PeriodMap& pm, FixedPointScan& scan);

/// Pairs (u1 < u2) for which P(u1) >= P(u2) - 1e-12.
[[nodiscard]] std::vector<std::pair<double, double>> check_monotone(const PeriodMap& pm,
                                                                    std::span<const std::pair<double, double>> pairs);

}  // namespace massera
