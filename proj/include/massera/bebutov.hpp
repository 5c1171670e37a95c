#pragma once
/**
 * @file bebutov.hpp
 * @brief Compact-open (Bebutov) distance between sampled functions,
 *
 *   d(phi, psi) = sup_{L > 0} min{ max_{|t| <= L} |phi(t) - psi(t)|, 1/L },
 *
 * time shifts phi^h(t) = phi(t + h), and detection of the shape of tail
 * shifts of a trajectory.
 */

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "massera/trajectory.hpp"

namespace massera {

enum class DomainKind { HalfLine, FullLine, Integers };
[[nodiscard]] const char* to_string(DomainKind kind);

/// values[i] = f(offset + i * step); piecewise linear between samples on
/// continuous domains. Integer domains use step 1 and an integer offset.
struct SampledFunction {
  DomainKind domain = DomainKind::FullLine;
  double offset = 0.0;
  double step = 1.0;
  std::vector<double> values;

  [[nodiscard]] double t_at(std::size_t i) const noexcept { return offset + step * static_cast<double>(i); }
  [[nodiscard]] double t_first() const noexcept { return offset; }
  [[nodiscard]] double t_last() const noexcept { return t_at(values.empty() ? 0 : values.size() - 1); }
  /// Throws RangeError outside the sampled window (and for non-integer t on
  /// integer domains).
  [[nodiscard]] double operator()(double t) const;
  /// Throws ParameterError on an empty sample, a non-positive step, or an
  /// integer domain with step != 1 or a fractional offset.
  void validate() const;
};

/// Samples g at offset + i * step, i < n.
[[nodiscard]] SampledFunction sample_function(const std::function<double(double)>& g, DomainKind domain,
                                              double offset, double step, std::size_t n);
/// Samples a trajectory on [t_from, t_to] with the given step (1 for maps).
[[nodiscard]] SampledFunction sample_trajectory(const Trajectory& traj, double t_from, double t_to, double step);

struct BebutovDistance {
  double value = 0.0;
  /// The window ended before max |phi - psi| reached 1/L; value is a lower bound.
  bool truncated = false;
  /// Crossing point of max_{|t| <= L} |phi - psi| and 1/L (the window radius when truncated).
  double L_star = 0.0;
  double grid_step = 0.0;
};

/// Both functions must share domain kind, step and grid alignment, and their
/// common window must contain t = 0 (the left end on the half-line).
/// The search runs over L in (0, min(L_cap, window radius)].
[[nodiscard]] BebutovDistance bebutov_distance(const SampledFunction& phi, const SampledFunction& psi,
                                               double L_cap = std::numeric_limits<double>::infinity());

enum class Relation { Less, Equal, Greater };
[[nodiscard]] const char* to_string(Relation r);

struct LemmaCheck {
  /// d(phi, psi) against eps.
  Relation by_distance = Relation::Equal;
  /// max_{|t| <= 1/eps} |phi - psi| against eps.
  Relation by_window = Relation::Equal;
  bool consistent = true;
  double distance = 0.0;
  double window_max = 0.0;
};

/// Both sides of: d = eps iff max_{|t| <= 1/eps} |phi - psi| = eps (and
/// likewise for < and >). Values within 1e-9 * max(1, eps) of eps count as
/// equal. Throws RangeError if the window does not cover |t| <= 1/eps.
[[nodiscard]] LemmaCheck check_lemma_l1(const SampledFunction& phi, const SampledFunction& psi, double eps);

/// phi^h(t) = phi(t + h), resampled on the origin-aligned grid of the same
/// step. Throws RangeError when the shifted window is empty and
/// ParameterError for a fractional h on integer domains.
[[nodiscard]] SampledFunction shift_function(const SampledFunction& phi, double h);

enum class TailShape { Constant, TauPeriodic, None };
[[nodiscard]] const char* to_string(TailShape s);

struct TailShiftResult {
  TailShape shape = TailShape::None;
  /// Mean of phi over [h, h + window] for each shift that looked constant (NaN otherwise).
  std::vector<double> levels;
  std::vector<TailShape> per_shift;
};

/// For each h, phi on [h, h + window] is tested for constancy (max - min <=
/// const_tol) and for tau-periodicity (|phi(t + tau) - phi(t)| <= const_tol).
/// Constant when every shift is constant, TauPeriodic when every shift is at
/// least periodic, None otherwise. Throws RangeError if some h + window
/// exceeds the trajectory.
[[nodiscard]] TailShiftResult tail_shift_classification(const Trajectory& traj, std::span<const double> h_list,
                                                        double window, double const_tol, double tau);

/// CSV `t,value`; the grid is inferred from the t column.
void write_sampled_csv(const SampledFunction& f, std::ostream& out);
[[nodiscard]] SampledFunction read_sampled_csv(std::istream& in, DomainKind domain);

}  // namespace massera
