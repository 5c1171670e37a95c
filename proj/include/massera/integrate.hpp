#pragma once

#include "massera/field.hpp"
#include "massera/trajectory.hpp"

namespace massera {

/// Adaptive Dormand-Prince 5(4) solution of x' = f(t, x), x(t0) = u0, on
/// [t0, t_end]. Stops early with blew_up() set once |x| >= cfg.x_max.
/// Throws IntegrationError on step-size underflow or too many steps, and
/// DomainError when f cannot be evaluated.
[[nodiscard]] Trajectory integrate(const ScalarField& field, double u0, double t0, double t_end,
                                   const IntegratorConfig& cfg = {});

/// Exact forward iteration x(k+1) = f(k, x(k)) for k = t0 .. t0 + n - 1.
/// Throws IterationError carrying the step index on evaluation failure.
[[nodiscard]] Trajectory iterate_map(const ScalarField& field, double u0, long long n,
                                     const IntegratorConfig& cfg = {}, long long t0 = 0);

/// phi(t, u0, field) starting at time 0: integrate or iterate as the kind
/// dictates. `t` must be an integer for maps.
[[nodiscard]] double flow(const ScalarField& field, double u0, double t, const IntegratorConfig& cfg = {});

/// |phi(s + t, u0, f) - phi(t, phi(s, u0, f), f^s)| from two independent runs.
[[nodiscard]] double verify_cocycle(const ScalarField& field, double u0, double s, double t,
                                    const IntegratorConfig& cfg = {});

}  // namespace massera
