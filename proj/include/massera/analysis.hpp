#pragma once
/**
 * @file analysis.hpp
 * @brief Finite-horizon classification of a bounded solution phi(t, u0, f)
 * of an asymptotically tau-periodic equation.
 *
 * Two pieces of evidence are combined:
 *  - the residuals r(t) = |phi(t + tau) - phi(t)|, which decay for
 *    S-asymptotically tau-periodic solutions;
 *  - the period samples phi(k tau), which converge exactly when the solution
 *    is asymptotically tau-periodic.
 * Every verdict is three-valued; INCONCLUSIVE is reported rather than guessed.
 */

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "massera/field.hpp"
#include "massera/fixed_points.hpp"
#include "massera/trajectory.hpp"

namespace massera {

struct ResidualSample {
  double t;
  double r;
};

/// r(t) = |phi(t + tau) - phi(t)| on t = t0, t0 + grid_step, ... <= t_end - tau.
/// Throws RangeError when the trajectory is not longer than tau.
[[nodiscard]] std::vector<ResidualSample> residual_series(const Trajectory& traj, double tau, double grid_step);

enum class SVerdict { Pass, Fail, Inconclusive };
[[nodiscard]] const char* to_string(SVerdict v);

struct STolerances {
  /// Tail supremum must stay below this.
  double s_tol = 1e-4;
  /// Tail supremum at or above this is a definite failure.
  double s_fail = 1e-2;
  double tail_fraction = 0.25;
  /// Tail sup must be at most decay_ratio times the middle-third sup ...
  double decay_ratio = 0.5;
  /// ... unless the tail is already at round-off level. For differential
  /// equations full_analysis raises this to 10 (rel_tol |x| + abs_tol).
  double s_floor = 1e-10;
};

struct SClassification {
  SVerdict verdict = SVerdict::Inconclusive;
  double tail_sup = 0.0;
  double middle_sup = 0.0;
};

[[nodiscard]] SClassification classify_s_asymptotic(std::span<const ResidualSample> residuals,
                                                    const STolerances& tol = {});

enum class IterateVerdict { Converged, NotConverged, Inconclusive };
[[nodiscard]] const char* to_string(IterateVerdict v);

struct AsymptoticClassification {
  IterateVerdict verdict = IterateVerdict::Inconclusive;
  double span = 0.0;
  double first_half_span = 0.0;
  double second_half_span = 0.0;
  /// Mean of the tail when converged.
  std::optional<double> limit;
};

/// Converged when max - min over the tail < conv_tol; not converged when
/// both halves of the tail span more than div_threshold. Needs >= 10 entries.
[[nodiscard]] AsymptoticClassification classify_asymptotic(std::span<const double> tail, double conv_tol = 1e-6,
                                                           double div_threshold = 1e-2);

/// Limit of a converging sequence seq[k], k = first_index .., estimated by a
/// least-squares fit L + a/k + b/k^2 over the given entries. Exact for
/// sequences that have already settled; removes the leading algebraic
/// transient otherwise. nullopt when fewer than 6 entries or when the RMS
/// misfit exceeds 1e-3 of the span (noise rather than a trend).
[[nodiscard]] std::optional<double> extrapolate_limit(std::span<const double> seq, double first_index);

struct DeltaWindow {
  double t_start;
  double t_end;
  double min;
  double max;
};

struct LimitSetEstimate {
  /// Estimate of liminf phi (= min over the last tail).
  double alpha = 0.0;
  /// Estimate of limsup phi (= max over the last tail).
  double beta = 0.0;
  /// Nested tails [t_start, t_end], t_start increasing; min is
  /// nondecreasing and max nonincreasing along the list.
  std::vector<DeltaWindow> windows;
};

/// Tails start at t0 + H * i / (2 (n_windows - 1)), i = 0 .. n_windows-1, so
/// the last tail is the second half of the trajectory.
[[nodiscard]] LimitSetEstimate estimate_delta(const Trajectory& traj, int n_windows = 4);

enum class Verdict {
  SAsymptoticallyPeriodic,
  AsymptoticallyPeriodic,
  NotAsymptoticallyPeriodic,
  Unbounded,
  Inconclusive
};
[[nodiscard]] const char* to_string(Verdict v);

struct AnalysisOptions {
  IntegratorConfig integrator;
  STolerances s;
  double conv_tol = 1e-6;
  double div_threshold = 1e-2;
  /// Residual grid; tau / 8 for ODEs and 1 for maps when unset.
  std::optional<double> grid_step;
  int n_windows = 4;
  /// Tail values checked for |P(v) - v| when the S test passes.
  int accumulation_samples = 32;
  /// Optional fixed-point scan of the period map over [lo, hi].
  std::optional<std::pair<double, double>> scan_range;
  int scan_grid = 4096;
  double root_tol = 1e-10;

  /// Throws ParameterError for non-positive tolerances or fractions outside (0, 1).
  void validate() const;
};

struct ClassificationReport {
  Verdict verdict = Verdict::Inconclusive;
  FieldKind kind = FieldKind::Ode;
  std::string label;
  double tau = 0.0;
  double u0 = 0.0;
  double horizon = 0.0;

  SClassification s_component;
  AsymptoticClassification iterate_component;
  std::vector<ResidualSample> residuals;
  /// phi(k tau), k = 0, 1, ...
  std::vector<double> period_samples;
  double iterate_tail_span = 0.0;
  /// Extrapolated limit of phi(k tau) (falls back to the tail mean).
  std::optional<double> iterate_limit;
  std::optional<double> iterate_tail_mean;
  LimitSetEstimate delta;
  /// max |P(v) - v| over tail accumulation candidates, set when the S test passed.
  std::optional<double> fixed_point_defect;
  std::optional<FixedPointScan> fixed_points;

  AnalysisOptions options;
  std::vector<std::string> notes;
};

/// integrate/iterate -> boundedness -> residuals + S test -> period samples +
/// convergence test -> delta estimate -> verdict. Requires horizon >= 20 tau
/// and a field that has (or is) a tau-periodic limiting equation. Numerical
/// failures surface as INCONCLUSIVE with notes.
[[nodiscard]] ClassificationReport full_analysis(const ScalarField& field, double u0, double tau, double horizon,
                                                 const AnalysisOptions& options = {});

/// Evenly spaced entries of the trailing tail (at most `count`).
[[nodiscard]] std::vector<double> accumulation_candidates(std::span<const double> tail, int count);

}  // namespace massera
