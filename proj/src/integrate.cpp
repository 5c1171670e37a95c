#include "massera/integrate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

#include "massera/errors.hpp"

namespace massera {

namespace {

// Dormand-Prince 5(4) tableau with Hairer's quartic continuous extension.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double rhs(const RealFn& f, double t, double x) {
  try {
    return f(t, x);
  } catch (const EvalError& e) {
    throw DomainError(t, x, e.what());
  }
}

struct Stages {
  double k2, k3, k4, k5, k6;
  double x_new;
};

/// Stages 2..6 and the 5th-order update. Stage 6 is evaluated at t_new so a
/// rebuilt step sees bit-identical abscissae.
Stages run_stages(const RealFn& f, double t, double t_new, double x, double h, double k1) {
  Stages s{};
  s.k2 = rhs(f, t + c2 * h, x + h * (a21 * k1));
  s.k3 = rhs(f, t + c3 * h, x + h * (a31 * k1 + a32 * s.k2));
  s.k4 = rhs(f, t + c4 * h, x + h * (a41 * k1 + a42 * s.k2 + a43 * s.k3));
  s.k5 = rhs(f, t + c5 * h, x + h * (a51 * k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4));
  s.k6 = rhs(f, t_new, x + h * (a61 * k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5));
  s.x_new = x + h * (a71 * k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
  return s;
}

void dense_coefficients(double x, double x_new, double h, double k1, const Stages& s, double k7, double out[4]) {
  const double ydiff = x_new - x;
  const double bspl = h * k1 - ydiff;
  out[0] = ydiff;
  out[1] = bspl;
  out[2] = ydiff - h * k7 - bspl;
  out[3] = h * (d1 * k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 + d7 * k7);
}

double dense_value(double x, const double c[4], double theta) {
  const double theta1 = 1.0 - theta;
  return x + theta * (c[0] + theta1 * (c[1] + theta * (c[2] + theta1 * c[3])));
}

double initial_step(const RealFn& f, double t0, double x0, double f0, double span, const IntegratorConfig& cfg) {
  const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(x0);
  const double dnf = std::abs(f0) / sk;
  const double dny = std::abs(x0) / sk;
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, span);
  double f1 = 0.0;
  try {
    f1 = rhs(f, t0 + h, x0 + h * f0);
  } catch (const DomainError&) {
    return std::min(span, 1e-6);
  }
  const double der2 = std::abs(f1 - f0) / sk / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 5.0);
  return std::min({100.0 * h, h1, span});
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ParameterError("integration tolerances must be positive");
  if (!(x_max > 0.0)) throw ParameterError("blow-up threshold must be positive");
  if (min_step && !(*min_step > 0.0)) throw ParameterError("minimum step must be positive");
  if (max_steps < 1) throw ParameterError("max_steps must be at least 1");
}

// ---------------------------------------------------------------------------
// Trajectory

std::size_t Trajectory::locate(double t) const {
  if (!(t >= t0() && t <= t_end())) {
    throw RangeError(fmt::format("time {} outside trajectory domain [{}, {}]", t, t0(), t_end()));
  }
  if (nodes_.size() == 1) return 0;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                             [](double v, const TrajectoryNode& n) { return v < n.t; });
  auto i = static_cast<std::size_t>(it - nodes_.begin());
  i = i == 0 ? 0 : i - 1;
  return std::min(i, nodes_.size() - 2);
}

void Trajectory::rebuild_step(std::size_t i, double out[4]) const {
  if (i >= dense_first_) {
    std::copy_n(dense_[i - dense_first_].c, 4, out);
    return;
  }
  const TrajectoryNode& a = nodes_[i];
  const TrajectoryNode& b = nodes_[i + 1];
  const double h = b.t - a.t;
  const Stages s = run_stages(f_, a.t, b.t, a.x, h, a.rate);
  dense_coefficients(a.x, b.x, h, a.rate, s, b.rate, out);
}

double Trajectory::sample(double t) const {
  Cursor cursor(*this);
  return cursor(t);
}

const double* Trajectory::Cursor::coefficients(std::size_t step) {
  if (step != cached_step_) {
    traj_->rebuild_step(step, coeff_);
    cached_step_ = step;
  }
  return coeff_;
}

double Trajectory::Cursor::operator()(double t) {
  const auto& nodes = traj_->nodes_;
  const std::size_t i = traj_->locate(t);
  if (nodes.size() == 1) return nodes.front().x;
  const TrajectoryNode& a = nodes[i];
  const TrajectoryNode& b = nodes[i + 1];
  if (t == a.t) return a.x;
  if (t == b.t) return b.x;
  if (traj_->kind_ == FieldKind::Map) {
    throw RangeError(fmt::format("difference-equation trajectories are defined at integer times only (t={})", t));
  }
  return dense_value(a.x, coefficients(i), (t - a.t) / (b.t - a.t));
}

std::pair<double, double> Trajectory::Cursor::step_range(std::size_t i, int interior) {
  const auto& nodes = traj_->nodes_;
  const TrajectoryNode& a = nodes[i];
  const TrajectoryNode& b = nodes[i + 1];
  double lo = std::min(a.x, b.x);
  double hi = std::max(a.x, b.x);
  if (traj_->kind_ == FieldKind::Ode) {
    const double* c = coefficients(i);
    for (int j = 1; j <= interior; ++j) {
      const double v = dense_value(a.x, c, static_cast<double>(j) / (interior + 1));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,x\n";
  for (const auto& n : traj.nodes()) out << fmt::format("{:.17g},{:.17g}\n", n.t, n.x);
}

// ---------------------------------------------------------------------------
// Integration

Trajectory integrate(const ScalarField& field, double u0, double t0, double t_end, const IntegratorConfig& cfg) {
  cfg.validate();
  if (field.kind() != FieldKind::Ode) throw ParameterError("integrate needs a differential equation");
  if (!(t_end > t0)) throw ParameterError(fmt::format("empty integration interval [{}, {}]", t0, t_end));
  if (t0 < field.t_min()) throw DomainError(t0, u0, "start time below the field's domain");

  const RealFn& f = field.function();
  const double span = t_end - t0;
  const double min_step = cfg.min_step.value_or(1e-13 * span);
  const bool keep_all_dense = span <= cfg.full_dense_horizon;

  Trajectory traj;
  traj.kind_ = FieldKind::Ode;
  traj.f_ = f;
  traj.tolerance_used_ = cfg.rel_tol;

  double t = t0;
  double x = u0;
  double k1 = rhs(f, t, x);
  traj.nodes_.push_back({t, x, k1});
  std::deque<Trajectory::DenseStep> dense;
  std::size_t dropped = 0;

  if (std::abs(x) >= cfg.x_max) {
    traj.blowup_time_ = t;
    return traj;
  }

  double h = initial_step(f, t, x, k1, span, cfg);
  double fac_max = 10.0;
  long long attempts = 0;

  while (t < t_end) {
    if (++attempts > cfg.max_steps) {
      throw IntegrationError(t, x, fmt::format("exceeded {} steps", cfg.max_steps));
    }
    const bool last = t + h >= t_end || t_end - (t + h) < min_step;
    const double t_new = last ? t_end : t + h;
    h = t_new - t;
    if (h < min_step && !last) throw IntegrationError(t, x, fmt::format("step size {} below minimum", h));

    Stages s{};
    double k7 = 0.0;
    double err = std::numeric_limits<double>::infinity();
    s = run_stages(f, t, t_new, x, h, k1);
    if (std::isfinite(s.x_new)) {
      k7 = rhs(f, t_new, s.x_new);
      const double est = h * (e1 * k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * k7);
      const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x), std::abs(s.x_new));
      err = std::abs(est) / scale;
      if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    }

    if (err <= 1.0) {
      Trajectory::DenseStep step{};
      dense_coefficients(x, s.x_new, h, k1, s, k7, step.c);
      dense.push_back(step);
      if (!keep_all_dense && dense.size() > cfg.dense_ring) {
        dense.pop_front();
        ++dropped;
      }
      t = t_new;
      x = s.x_new;
      k1 = k7;
      traj.nodes_.push_back({t, x, k1});
      if (std::abs(x) >= cfg.x_max) {
        traj.blowup_time_ = t;
        break;
      }
      const double fac = err == 0.0 ? fac_max : std::min(fac_max, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h *= fac;
      fac_max = 10.0;
    } else {
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
      h *= fac;
      fac_max = 1.0;
      if (h < min_step) throw IntegrationError(t, x, fmt::format("step size {} below minimum", h));
    }
  }

  traj.dense_.assign(dense.begin(), dense.end());
  traj.dense_first_ = dropped;
  return traj;
}

Trajectory iterate_map(const ScalarField& field, double u0, long long n, const IntegratorConfig& cfg, long long t0) {
  cfg.validate();
  if (field.kind() != FieldKind::Map) throw ParameterError("iterate_map needs a difference equation");
  if (n < 0) throw ParameterError("iteration count must be non-negative");

  Trajectory traj;
  traj.kind_ = FieldKind::Map;
  traj.f_ = field.function();
  traj.nodes_.reserve(static_cast<std::size_t>(n) + 1);
  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  const RealFn& f = field.function();
  double x = u0;
  traj.nodes_.push_back({static_cast<double>(t0), x, kUnset});
  if (std::abs(x) >= cfg.x_max) {
    traj.blowup_time_ = static_cast<double>(t0);
    return traj;
  }
  for (long long k = 0; k < n; ++k) {
    const double t = static_cast<double>(t0 + k);
    double next = 0.0;
    try {
      if (t < field.t_min()) throw DomainError(t, x, "time below the field's domain");
      next = f(t, x);
    } catch (const Error& e) {
      throw IterationError(t0 + k, x, e.what());
    }
    if (std::isnan(next)) throw IterationError(t0 + k, x, "map produced NaN");
    traj.nodes_.back().rate = next;
    x = next;
    traj.nodes_.push_back({t + 1.0, x, kUnset});
    if (!(std::abs(x) < cfg.x_max)) {
      traj.blowup_time_ = t + 1.0;
      break;
    }
  }
  return traj;
}

double flow(const ScalarField& field, double u0, double t, const IntegratorConfig& cfg) {
  if (t == 0.0) return u0;
  if (field.kind() == FieldKind::Map) {
    if (std::floor(t) != t || t < 0.0) throw ParameterError("difference equations flow over non-negative integers");
    const Trajectory traj = iterate_map(field, u0, static_cast<long long>(t), cfg);
    if (traj.blew_up()) throw BlowUpError(traj.t_end(), traj.nodes().back().x, "solution left the bounded region");
    return traj.nodes().back().x;
  }
  const Trajectory traj = integrate(field, u0, 0.0, t, cfg);
  if (traj.blew_up()) {
    throw BlowUpError(traj.t_end(), traj.nodes().back().x, "solution left the bounded region");
  }
  return traj.nodes().back().x;
}

double verify_cocycle(const ScalarField& field, double u0, double s, double t, const IntegratorConfig& cfg) {
  if (s < 0.0 || t < 0.0) throw ParameterError("cocycle check needs non-negative times");
  const double direct = flow(field, u0, s + t, cfg);
  const double mid = flow(field, u0, s, cfg);
  const double composed = flow(shift_field(field, s), mid, t, cfg);
  return std::abs(direct - composed);
}

}  // namespace massera
