#include "massera/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "massera/errors.hpp"
#include "massera/integrate.hpp"
#include "massera/period_map.hpp"

namespace massera {

const char* to_string(SVerdict v) {
  switch (v) {
    case SVerdict::Pass: return "PASS";
    case SVerdict::Fail: return "FAIL";
    case SVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

const char* to_string(IterateVerdict v) {
  switch (v) {
    case IterateVerdict::Converged: return "CONVERGED";
    case IterateVerdict::NotConverged: return "NOT_CONVERGED";
    case IterateVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::SAsymptoticallyPeriodic: return "S_ASYMPTOTICALLY_PERIODIC";
    case Verdict::AsymptoticallyPeriodic: return "ASYMPTOTICALLY_PERIODIC";
    case Verdict::NotAsymptoticallyPeriodic: return "NOT_ASYMPTOTICALLY_PERIODIC";
    case Verdict::Unbounded: return "UNBOUNDED";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::vector<ResidualSample> residual_series(const Trajectory& traj, double tau, double grid_step) {
  if (!(tau > 0.0) || !(grid_step > 0.0)) throw ParameterError("period and grid step must be positive");
  const double t0 = traj.t0();
  const double t_last = traj.t_end() - tau;
  if (!(t_last > t0)) {
    throw RangeError(fmt::format("trajectory over [{}, {}] is too short for period {}", t0, traj.t_end(), tau));
  }
  if (traj.kind() == FieldKind::Map && (std::floor(tau) != tau || std::floor(grid_step) != grid_step)) {
    throw ParameterError("difference equations need an integer period and grid step");
  }
  std::vector<ResidualSample> out;
  out.reserve(static_cast<std::size_t>((t_last - t0) / grid_step) + 1);
  Trajectory::Cursor here(traj);
  Trajectory::Cursor ahead(traj);
  for (std::size_t i = 0;; ++i) {
    const double t = t0 + grid_step * static_cast<double>(i);
    if (t > t_last) break;
    out.push_back({t, std::abs(ahead(t + tau) - here(t))});
  }
  return out;
}

SClassification classify_s_asymptotic(std::span<const ResidualSample> residuals, const STolerances& tol) {
  if (residuals.empty()) throw ParameterError("residual series is empty");
  const std::size_t n = residuals.size();
  const auto tail_count =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(tol.tail_fraction * static_cast<double>(n))), 1, n);
  auto sup = [&](std::size_t from, std::size_t to) {
    double m = 0.0;
    for (std::size_t i = from; i < to; ++i) m = std::max(m, residuals[i].r);
    return m;
  };
  SClassification out;
  out.tail_sup = sup(n - tail_count, n);
  const std::size_t mid_from = n / 3;
  const std::size_t mid_to = std::max(mid_from + 1, 2 * n / 3);
  out.middle_sup = sup(mid_from, std::min(mid_to, n));

  const bool small = out.tail_sup < tol.s_tol;
  const bool decaying = out.tail_sup <= tol.s_floor || out.tail_sup <= tol.decay_ratio * out.middle_sup;
  if (small && decaying) {
    out.verdict = SVerdict::Pass;
  } else if (out.tail_sup >= tol.s_fail) {
    out.verdict = SVerdict::Fail;
  } else {
    out.verdict = SVerdict::Inconclusive;
  }
  return out;
}

AsymptoticClassification classify_asymptotic(std::span<const double> tail, double conv_tol, double div_threshold) {
  if (tail.size() < 10) throw ParameterError("iterate tail needs at least 10 entries");
  auto span_of = [](std::span<const double> s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *hi - *lo;
  };
  AsymptoticClassification out;
  out.span = span_of(tail);
  const std::size_t half = tail.size() / 2;
  out.first_half_span = span_of(tail.first(half));
  out.second_half_span = span_of(tail.subspan(half));
  if (out.span < conv_tol) {
    out.verdict = IterateVerdict::Converged;
    out.limit = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
  } else if (out.first_half_span > div_threshold && out.second_half_span > div_threshold) {
    out.verdict = IterateVerdict::NotConverged;
  }
  return out;
}

std::optional<double> extrapolate_limit(std::span<const double> seq, double first_index) {
  if (seq.size() < 6 || !(first_index > 0.0)) return std::nullopt;
  // Fit in z, an affine image of s = k0 / k onto [-1, 1]; the limit is the
  // fitted value at s = 0.
  const double k0 = first_index;
  const double s_min = k0 / (k0 + static_cast<double>(seq.size() - 1));
  const double mid = 0.5 * (1.0 + s_min);
  const double half = 0.5 * (1.0 - s_min);
  const double ref = seq.back();
  long double m[3][3] = {};
  long double rhs[3] = {};
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const long double s = k0 / (k0 + static_cast<long double>(j));
    const long double z = (s - mid) / half;
    const long double basis[3] = {1.0L, z, z * z};
    const long double y = static_cast<long double>(seq[j]) - ref;
    for (int a = 0; a < 3; ++a) {
      rhs[a] += basis[a] * y;
      for (int b = 0; b < 3; ++b) m[a][b] += basis[a] * basis[b];
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    }
    if (m[p][c] == 0.0L) return std::nullopt;
    std::swap(m[p], m[c]);
    std::swap(rhs[p], rhs[c]);
    for (int r = c + 1; r < 3; ++r) {
      const long double f = m[r][c] / m[c][c];
      for (int q = c; q < 3; ++q) m[r][q] -= f * m[c][q];
      rhs[r] -= f * rhs[c];
    }
  }
  long double coef[3];
  for (int r = 2; r >= 0; --r) {
    long double v = rhs[r];
    for (int q = r + 1; q < 3; ++q) v -= m[r][q] * coef[q];
    coef[r] = v / m[r][r];
  }
  long double misfit = 0.0L;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const long double z = (k0 / (k0 + static_cast<long double>(j)) - mid) / half;
    const long double e = static_cast<long double>(seq[j]) - ref - (coef[0] + coef[1] * z + coef[2] * z * z);
    misfit += e * e;
  }
  const auto [lo, hi] = std::minmax_element(seq.begin(), seq.end());
  if (std::sqrt(static_cast<double>(misfit / seq.size())) > 1e-3 * (*hi - *lo)) return std::nullopt;
  const long double z0 = -mid / half;
  const long double limit = static_cast<long double>(ref) + coef[0] + coef[1] * z0 + coef[2] * z0 * z0;
  if (!std::isfinite(static_cast<double>(limit))) return std::nullopt;
  return static_cast<double>(limit);
}

LimitSetEstimate estimate_delta(const Trajectory& traj, int n_windows) {
  if (n_windows < 2) throw ParameterError("delta estimate needs at least 2 nested windows");
  const double t0 = traj.t0();
  const double t_end = traj.t_end();
  const bool is_map = traj.kind() == FieldKind::Map;

  std::vector<double> starts;
  for (int i = 0; i < n_windows; ++i) {
    double s = t0 + (t_end - t0) * i / (2.0 * (n_windows - 1));
    if (is_map) s = std::ceil(s);
    starts.push_back(std::min(s, t_end));
  }

  Trajectory::Cursor cursor(traj);
  auto segment_range = [&](double a, double b) {
    double lo = cursor(a);
    double hi = lo;
    auto take = [&](double v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    };
    take(cursor(b));
    const auto& nodes = traj.nodes();
    if (nodes.size() < 2 || !(b > a)) return std::pair{lo, hi};
    const std::size_t first = traj.locate(a);
    const std::size_t last = traj.locate(b);
    for (std::size_t s = first; s <= last; ++s) {
      const double ta = nodes[s].t;
      const double tb = nodes[s + 1].t;
      if (ta >= a && tb <= b) {
        const auto [slo, shi] = cursor.step_range(s);
        take(slo);
        take(shi);
        continue;
      }
      if (is_map) continue;
      for (int j = 0; j <= 9; ++j) {
        const double t = ta + (tb - ta) * j / 9.0;
        if (t >= a && t <= b) take(cursor(t));
      }
    }
    return std::pair{lo, hi};
  };

  LimitSetEstimate out;
  out.windows.resize(starts.size());
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = starts.size(); i-- > 0;) {
    const double seg_end = i + 1 < starts.size() ? starts[i + 1] : t_end;
    const auto [slo, shi] = segment_range(starts[i], seg_end);
    if (i + 1 == starts.size()) {
      lo = slo;
      hi = shi;
    } else {
      lo = std::min(lo, slo);
      hi = std::max(hi, shi);
    }
    out.windows[i] = {starts[i], t_end, lo, hi};
  }
  out.alpha = std::min(out.windows.back().min, out.windows.back().max);
  out.beta = std::max(out.windows.back().min, out.windows.back().max);
  return out;
}

std::vector<double> accumulation_candidates(std::span<const double> tail, int count) {
  std::vector<double> out;
  if (tail.empty() || count <= 0) return out;
  const std::size_t n = std::min<std::size_t>(tail.size(), static_cast<std::size_t>(count));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t idx = n == 1 ? tail.size() - 1 : j * (tail.size() - 1) / (n - 1);
    out.push_back(tail[idx]);
  }
  return out;
}

void AnalysisOptions::validate() const {
  integrator.validate();
  if (!(s.s_tol > 0.0) || !(s.s_fail > 0.0) || !(s.s_floor >= 0.0) || !(conv_tol > 0.0) || !(div_threshold > 0.0)) {
    throw ParameterError("tolerances must be positive");
  }
  if (!(s.tail_fraction > 0.0 && s.tail_fraction < 1.0)) throw ParameterError("tail fraction must lie in (0, 1)");
  if (!(s.decay_ratio > 0.0 && s.decay_ratio <= 1.0)) throw ParameterError("decay ratio must lie in (0, 1]");
  if (grid_step && !(*grid_step > 0.0)) throw ParameterError("grid step must be positive");
  if (n_windows < 2) throw ParameterError("need at least 2 delta windows");
  if (scan_range && !(scan_range->first < scan_range->second)) throw ParameterError("scan range needs lo < hi");
}

ClassificationReport full_analysis(const ScalarField& field, double u0, double tau, double horizon,
                                   const AnalysisOptions& options) {
  options.validate();
  if (!(tau > 0.0)) throw ParameterError("period must be positive");
  if (!(horizon >= 20.0 * tau)) throw ParameterError(fmt::format("horizon {} is shorter than 20 periods", horizon));
  const bool is_map = field.kind() == FieldKind::Map;
  if (is_map && (std::floor(tau) != tau || std::floor(horizon) != horizon)) {
    throw ParameterError("difference equations need integer period and horizon");
  }

  ClassificationReport rep;
  rep.kind = field.kind();
  rep.label = field.label();
  rep.tau = tau;
  rep.u0 = u0;
  rep.horizon = horizon;
  rep.options = options;

  const PeriodMap pm = build_period_map(field, tau, options.integrator);

  std::optional<Trajectory> traj;
  try {
    traj = is_map ? iterate_map(field, u0, static_cast<long long>(horizon), options.integrator)
                  : integrate(field, u0, 0.0, horizon, options.integrator);
  } catch (const Error& e) {
    rep.notes.push_back(fmt::format("trajectory failed: {}", e.what()));
    return rep;
  }
  if (traj->blew_up()) {
    rep.verdict = Verdict::Unbounded;
    rep.notes.push_back(
        fmt::format("|x| reached {} at t = {}", options.integrator.x_max, traj->blowup_time().value_or(0.0)));
    return rep;
  }

  rep.delta = estimate_delta(*traj, options.n_windows);

  const double grid = options.grid_step.value_or(is_map ? 1.0 : tau / 8.0);
  try {
    rep.residuals = residual_series(*traj, tau, grid);
  } catch (const Error& e) {
    rep.notes.push_back(fmt::format("residual series failed: {}", e.what()));
    return rep;
  }
  STolerances s_tol = options.s;
  if (!is_map) {
    const double scale = std::max({1.0, std::abs(rep.delta.alpha), std::abs(rep.delta.beta)});
    s_tol.s_floor = std::max(s_tol.s_floor, 10.0 * (options.integrator.rel_tol * scale + options.integrator.abs_tol));
  }
  rep.s_component = classify_s_asymptotic(rep.residuals, s_tol);

  Trajectory::Cursor cursor(*traj);
  const auto periods = static_cast<std::size_t>(std::floor(horizon / tau + 1e-9));
  rep.period_samples.reserve(periods + 1);
  for (std::size_t k = 0; k <= periods; ++k) {
    rep.period_samples.push_back(cursor(std::min(static_cast<double>(k) * tau, traj->t_end())));
  }
  const std::size_t n = rep.period_samples.size();
  const std::size_t tail_count = std::min(
      n, std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(options.s.tail_fraction * static_cast<double>(n)))));
  const std::span<const double> tail(rep.period_samples.data() + (n - tail_count), tail_count);
  rep.iterate_component = classify_asymptotic(tail, options.conv_tol, options.div_threshold);
  rep.iterate_tail_span = rep.iterate_component.span;
  if (rep.iterate_component.verdict == IterateVerdict::Converged) {
    rep.iterate_tail_mean = rep.iterate_component.limit;
    const auto extrapolated = extrapolate_limit(tail, static_cast<double>(n - tail_count));
    const bool plausible =
        extrapolated && std::abs(*extrapolated - *rep.iterate_tail_mean) <= 10.0 * rep.iterate_tail_span + 10.0 * options.conv_tol;
    rep.iterate_limit = plausible ? extrapolated : rep.iterate_tail_mean;
    if (extrapolated && !plausible) rep.notes.push_back("limit extrapolation rejected; using the tail mean");
  }

  if (rep.s_component.verdict == SVerdict::Pass) {
    double defect = 0.0;
    try {
      for (double v : accumulation_candidates(tail, options.accumulation_samples)) {
        defect = std::max(defect, std::abs(pm(v) - v));
      }
      rep.fixed_point_defect = defect;
      if (defect > 10.0 * options.conv_tol) {
        rep.notes.push_back(fmt::format("tail values are not fixed points of the period map (defect {})", defect));
      }
    } catch (const Error& e) {
      rep.notes.push_back(fmt::format("period map failed on tail values: {}", e.what()));
    }
  }

  const bool s_pass = rep.s_component.verdict == SVerdict::Pass;
  if (s_pass && rep.iterate_component.verdict == IterateVerdict::Converged) {
    rep.verdict = Verdict::AsymptoticallyPeriodic;
    const double p = *rep.iterate_limit;
    try {
      const double defect = std::abs(pm(p) - p);
      if (defect > 10.0 * options.conv_tol) {
        rep.verdict = Verdict::Inconclusive;
        rep.notes.push_back(fmt::format("limit {} is not a fixed point of the period map (|P(p)-p| = {})", p, defect));
      }
    } catch (const Error& e) {
      rep.verdict = Verdict::Inconclusive;
      rep.notes.push_back(fmt::format("period map failed at the limit: {}", e.what()));
    }
    const double last_step = std::abs(cursor(traj->t_end()) - cursor(traj->t_end() - tau));
    if (last_step > options.s.s_tol) {
      rep.verdict = Verdict::Inconclusive;
      rep.notes.push_back(fmt::format("|phi(T) - phi(T - tau)| = {} exceeds s_tol", last_step));
    }
  } else if (s_pass && rep.iterate_component.verdict == IterateVerdict::NotConverged) {
    rep.verdict = Verdict::NotAsymptoticallyPeriodic;
    rep.notes.push_back("S-asymptotically periodic but the period samples do not converge");
  } else if (s_pass) {
    rep.verdict = Verdict::SAsymptoticallyPeriodic;
    rep.notes.push_back("residuals decay; convergence of the period samples is undecided");
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push_back(fmt::format("residual test: {}; period samples: {}", to_string(rep.s_component.verdict),
                                    to_string(rep.iterate_component.verdict)));
  }

  if (options.scan_range) {
    try {
      FixedPointScan scan =
          find_fixed_points(pm, options.scan_range->first, options.scan_range->second, options.scan_grid, options.root_tol);
      classify_all(pm, scan);
      rep.fixed_points = std::move(scan);
    } catch (const Error& e) {
      rep.notes.push_back(fmt::format("fixed-point scan failed: {}", e.what()));
    }
  }
  return rep;
}

}  // namespace massera
