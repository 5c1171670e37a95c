#pragma once
/**
 * @file trajectory.hpp
 * @brief Solutions phi(t, u0, f) of scalar ODEs and difference equations.
 *
 * ODE trajectories come from an embedded Dormand-Prince 5(4) pair. Every
 * accepted step is kept as a node (t, x, f(t, x)); the quartic continuous
 * extension of a step is stored for short horizons and, past
 * `IntegratorConfig::full_dense_horizon`, only for the most recent
 * `dense_ring` steps. Older steps are rebuilt on demand by re-running the
 * step from its left node, which reproduces the original arithmetic exactly.
 */

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "massera/field.hpp"

namespace massera {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  /// |x| >= x_max stops the run and flags blow-up.
  double x_max = 1e8;
  /// Defaults to 1e-13 * (t_end - t0) when unset.
  std::optional<double> min_step;
  long long max_steps = 1'000'000'000;
  double full_dense_horizon = 1e4;
  std::size_t dense_ring = 4096;

  /// Throws ParameterError on a non-positive tolerance or threshold.
  void validate() const;
};

struct TrajectoryNode {
  double t;
  double x;
  /// f(t, x) for ODEs; the next iterate for maps (NaN on the final node).
  double rate;
};

class Trajectory {
 public:
  [[nodiscard]] FieldKind kind() const noexcept { return kind_; }
  [[nodiscard]] double t0() const noexcept { return nodes_.front().t; }
  /// Time of the final node (the blow-up time when blew_up()).
  [[nodiscard]] double t_end() const noexcept { return nodes_.back().t; }
  [[nodiscard]] const std::vector<TrajectoryNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] bool blew_up() const noexcept { return blowup_time_.has_value(); }
  [[nodiscard]] std::optional<double> blowup_time() const noexcept { return blowup_time_; }
  [[nodiscard]] double tolerance_used() const noexcept { return tolerance_used_; }
  [[nodiscard]] std::size_t retained_dense_steps() const noexcept { return dense_.size(); }

  /// Interpolated value; exact at node times. Maps accept integer times only.
  /// Throws RangeError outside [t0, t_end].
  [[nodiscard]] double sample(double t) const;

  /// Sequential sampler that memoizes the most recently rebuilt step.
  /// Not shareable across threads; the trajectory itself is.
  class Cursor {
   public:
    explicit Cursor(const Trajectory& traj) : traj_(&traj) {}
    [[nodiscard]] double operator()(double t);

    /// Extremes of the continuous extension on step i (nodes i and i+1),
    /// probed at the nodes and `interior` evenly spaced inner points.
    [[nodiscard]] std::pair<double, double> step_range(std::size_t i, int interior = 8);

   private:
    friend class Trajectory;
    const Trajectory* traj_;
    std::size_t cached_step_ = static_cast<std::size_t>(-1);
    double coeff_[4] = {0, 0, 0, 0};
    const double* coefficients(std::size_t step);
  };

  /// Step index i with nodes[i].t <= t < nodes[i+1].t (last step for t_end).
  [[nodiscard]] std::size_t locate(double t) const;

 private:
  friend Trajectory integrate(const ScalarField&, double, double, double, const IntegratorConfig&);
  friend Trajectory iterate_map(const ScalarField&, double, long long, const IntegratorConfig&, long long);

  struct DenseStep {
    double c[4];
  };

  Trajectory() = default;
  void rebuild_step(std::size_t i, double out[4]) const;

  FieldKind kind_ = FieldKind::Ode;
  std::vector<TrajectoryNode> nodes_;
  /// Continuous-extension coefficients for steps dense_first_ .. nodes_.size() - 2.
  std::vector<DenseStep> dense_;
  std::size_t dense_first_ = 0;
  RealFn f_;
  std::optional<double> blowup_time_;
  double tolerance_used_ = 0.0;
};

/// CSV with header `t,x`, 17 significant digits, one line per node.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace massera
