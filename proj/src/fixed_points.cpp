#include "massera/fixed_points.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "massera/errors.hpp"
#include "massera/parallel.hpp"

namespace massera {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::PositivelyAsymptoticallyStable: return "positively_asymptotically_stable";
    case Stability::NegativelyAsymptoticallyStable: return "negatively_asymptotically_stable";
    case Stability::SemiStable: return "semi_stable";
    case Stability::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

std::optional<double> displacement(const PeriodMap& pm, double u) {
  try {
    const double v = pm(u) - u;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// Bisection of g on [a, b] with g(a), g(b) of opposite sign.
std::optional<double> bisect(const PeriodMap& pm, double a, double b, double ga) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const auto gm = displacement(pm, mid);
    if (!gm) return std::nullopt;
    if (*gm == 0.0) return mid;
    if (std::signbit(*gm) == std::signbit(ga)) {
      a = mid;
      ga = *gm;
    } else {
      b = mid;
    }
  }
  const auto ga_final = displacement(pm, a);
  const auto gb_final = displacement(pm, b);
  if (!ga_final || !gb_final) return std::nullopt;
  return std::abs(*ga_final) <= std::abs(*gb_final) ? a : b;
}

double distance_to_interval(double u, const std::pair<double, double>& iv) {
  if (u < iv.first) return iv.first - u;
  if (u > iv.second) return u - iv.second;
  return 0.0;
}

}  // namespace

FixedPointScan find_fixed_points(const PeriodMap& pm, double lo, double hi, int n_grid, double root_tol) {
  if (!(lo < hi)) throw ParameterError("fixed-point scan needs lo < hi");
  if (n_grid < 2) throw ParameterError("fixed-point scan needs at least 2 grid points");
  if (!(root_tol > 0.0)) throw ParameterError("root tolerance must be positive");

  FixedPointScan scan;
  scan.root_tol = root_tol;
  scan.grid_spacing = (hi - lo) / (n_grid - 1);
  const auto n = static_cast<std::size_t>(n_grid);

  std::vector<double> u(n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / (n_grid - 1);
  parallel_for(n, [&](std::size_t i) { g[i] = displacement(pm, u[i]).value_or(std::nan("")); });

  const auto failed = static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](double v) { return std::isnan(v); }));
  if (failed > 0) scan.notes.push_back(fmt::format("{} of {} grid points could not be mapped", failed, n));

  auto near_zero = [&](std::size_t i) { return !std::isnan(g[i]) && std::abs(g[i]) < root_tol; };
  auto definite = [&](std::size_t i) { return !std::isnan(g[i]) && !near_zero(i); };

  auto refine = [&](std::size_t a, std::size_t b) {
    if (auto root = bisect(pm, u[a], u[b], g[a])) {
      const double res = std::abs(*displacement(pm, *root));
      if (res <= root_tol) {
        scan.records.push_back({*root, res, true, Stability::Inconclusive,
                                std::numeric_limits<double>::infinity(), ""});
      } else {
        scan.notes.push_back(
            fmt::format("sign change in [{}, {}] is not a root (|g| = {}); discontinuity?", u[a], u[b], res));
      }
    }
  };

  std::size_t i = 0;
  while (i < n) {
    if (near_zero(i)) {
      std::size_t j = i;
      while (j + 1 < n && near_zero(j + 1)) ++j;
      if (j - i + 1 >= 3) {
        scan.continua.emplace_back(u[i], u[j]);
      } else {
        const bool left = i > 0 && definite(i - 1);
        const bool right = j + 1 < n && definite(j + 1);
        if (left && right && std::signbit(g[i - 1]) != std::signbit(g[j + 1])) {
          refine(i - 1, j + 1);
        } else {
          std::size_t best = i;
          for (std::size_t k = i; k <= j; ++k) {
            if (std::abs(g[k]) < std::abs(g[best])) best = k;
          }
          scan.records.push_back({u[best], std::abs(g[best]), false, Stability::Inconclusive,
                                  std::numeric_limits<double>::infinity(), "tangency candidate"});
        }
      }
      i = j + 1;
      continue;
    }
    if (i + 1 < n && definite(i) && definite(i + 1) && std::signbit(g[i]) != std::signbit(g[i + 1])) {
      refine(i, i + 1);
    }
    ++i;
  }

  std::sort(scan.records.begin(), scan.records.end(),
            [](const FixedPointRecord& a, const FixedPointRecord& b) { return a.u_star < b.u_star; });
  for (std::size_t a = 0; a < scan.records.size(); ++a) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < scan.records.size(); ++b) {
      if (a != b) gap = std::min(gap, std::abs(scan.records[a].u_star - scan.records[b].u_star));
    }
    for (const auto& iv : scan.continua) gap = std::min(gap, distance_to_interval(scan.records[a].u_star, iv));
    scan.records[a].isolation_gap = gap;
  }
  if (scan.continuum()) {
    scan.notes.push_back(fmt::format("{} non-transverse continuum segment(s) of fixed points", scan.continua.size()));
  }
  return scan;
}

namespace {

enum class Approach { Closer, Farther, Unavailable };

Approach run_orbit(const PeriodMap& pm, double start, double target, double probe, int steps, bool backward) {
  double x = start;
  for (int k = 0; k < steps; ++k) {
    if (backward) {
      const auto prev = pm.inverse(x);
      if (!prev) return k == 0 ? Approach::Unavailable : Approach::Farther;
      x = *prev;
    } else {
      try {
        x = pm(x);
      } catch (const Error&) {
        return Approach::Farther;
      }
    }
    if (!std::isfinite(x)) return Approach::Farther;
  }
  return std::abs(x - target) < probe ? Approach::Closer : Approach::Farther;
}

}  // namespace

Stability classify_stability(const PeriodMap& pm, FixedPointRecord& fp, double probe, double root_tol) {
  if (!(probe > 0.0)) throw ParameterError("probe must be positive");
  if (!(probe < 0.5 * fp.isolation_gap)) {
    throw ParameterError(fmt::format("probe {} is not below half the isolation gap {}", probe, fp.isolation_gap));
  }
  fp.stability = Stability::Inconclusive;
  if (!fp.transverse) {
    fp.cross_check = "not transverse";
    return fp.stability;
  }
  const double u = fp.u_star;
  const auto g_left = displacement(pm, u - probe);
  const auto g_right = displacement(pm, u + probe);
  if (!g_left || !g_right) {
    fp.cross_check = "probe points could not be mapped";
    return fp.stability;
  }
  if (std::abs(*g_left) < root_tol || std::abs(*g_right) < root_tol) {
    fp.cross_check = "displacement at probe below root tolerance";
    return fp.stability;
  }
  const bool left_up = *g_left > 0.0;
  const bool right_up = *g_right > 0.0;

  Stability tag = Stability::SemiStable;
  if (left_up && !right_up) tag = Stability::PositivelyAsymptoticallyStable;
  if (!left_up && right_up) tag = Stability::NegativelyAsymptoticallyStable;

  constexpr int kSteps = 50;
  // Forward orbits from a side where g points toward u* must approach it;
  // backward orbits from a side where g points away must approach it.
  std::vector<std::string> checks;
  bool contradiction = false;
  for (const double side : {-1.0, 1.0}) {
    const bool toward = side < 0.0 ? left_up : !right_up;
    const double start = u + side * probe;
    const Approach a = run_orbit(pm, start, u, probe, kSteps, !toward);
    const char* dir = toward ? "forward" : "backward";
    const char* where = side < 0.0 ? "left" : "right";
    if (a == Approach::Unavailable) {
      checks.push_back(fmt::format("{} {} unavailable", where, dir));
    } else if (a == Approach::Farther) {
      contradiction = true;
      checks.push_back(fmt::format("{} {} orbit did not approach", where, dir));
    } else {
      checks.push_back(fmt::format("{} {} ok", where, dir));
    }
  }
  fp.cross_check = fmt::format("{}", fmt::join(checks, "; "));
  if (contradiction) return fp.stability;
  fp.stability = tag;
  return tag;
}

void classify_all(const PeriodMap& pm, FixedPointScan& scan) {
  for (auto& fp : scan.records) {
    if (!fp.transverse) {
      fp.stability = Stability::Inconclusive;
      continue;
    }
    double probe = std::min(0.25 * fp.isolation_gap, scan.grid_spacing);
    if (!(probe > 0.0) || !std::isfinite(probe)) probe = scan.grid_spacing;
    (void)classify_stability(pm, fp, probe, scan.root_tol);
  }
}

std::vector<std::pair<double, double>> check_monotone(const PeriodMap& pm,
                                                      std::span<const std::pair<double, double>> pairs) {
  std::vector<std::pair<double, double>> violations;
  for (const auto& [u1, u2] : pairs) {
    if (!(u1 < u2)) throw ParameterError("monotonicity pairs must satisfy u1 < u2");
    bool violated = true;
    try {
      violated = pm(u1) >= pm(u2) - 1e-12;
    } catch (const Error&) {
    }
    if (violated) violations.emplace_back(u1, u2);
  }
  return violations;
}

}  // namespace massera
