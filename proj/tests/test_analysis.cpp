#include <doctest.h>

#include <cmath>
#include <numbers>

#include "massera/analysis.hpp"
#include "massera/errors.hpp"
#include "massera/integrate.hpp"
#include "massera/period_map.hpp"
#include "massera/presets.hpp"

using namespace massera;

namespace {

std::vector<ResidualSample> series(std::size_t n, double (*r)(double)) {
  std::vector<ResidualSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<double>(i), r(static_cast<double>(i))});
  return out;
}

}  // namespace

TEST_CASE("exP1 residuals obey the mean-value bound") {
  const Preset p = find_preset("exP1");
  const Trajectory traj = integrate(build_field(p), 0.0, 0.0, 2e4, p.options.integrator);
  const auto r = residual_series(traj, p.tau, 0.5);
  REQUIRE(!r.empty());
  CHECK(r.back().t <= 2e4 - p.tau);
  for (const auto& s : r) {
    if (s.t >= 100.0) REQUIRE(s.r <= p.tau / (2.0 * std::sqrt(s.t)) + 1e-6);
  }
}

TEST_CASE("periodic solution has vanishing residuals") {
  const Preset p = find_preset("beverton-holt");
  const ScalarField f = build_field(p);
  const PeriodMap pm = build_period_map(f, p.tau);
  double u = 5.0;
  for (int k = 0; k < 200; ++k) u = pm(u);
  const Trajectory cycle = iterate_map(limiting_field(f, p.tau), u, 400);
  for (const auto& s : residual_series(cycle, p.tau, 1.0)) REQUIRE(s.r <= 1e-8);
  CHECK_THROWS_AS((void)residual_series(cycle, 400.0, 1.0), RangeError);
  CHECK_THROWS_AS((void)residual_series(cycle, 2.0, 0.5), ParameterError);
}

TEST_CASE("S test on synthetic residuals") {
  CHECK(classify_s_asymptotic(series(1000, [](double t) { return 1.0 / (1.0 + t * t); })).verdict == SVerdict::Pass);
  CHECK(classify_s_asymptotic(series(1000, [](double) { return 0.0; })).verdict == SVerdict::Pass);
  CHECK(classify_s_asymptotic(series(1000, [](double) { return 0.5; })).verdict == SVerdict::Fail);
  const auto flat = classify_s_asymptotic(series(1000, [](double) { return 1e-3; }));
  CHECK(flat.verdict == SVerdict::Inconclusive);
  CHECK(flat.tail_sup == 1e-3);
  CHECK(flat.middle_sup == 1e-3);
  CHECK_THROWS_AS((void)classify_s_asymptotic({}), ParameterError);
}

TEST_CASE("convergence test on period samples") {
  std::vector<double> c(40, 3.0);
  auto conv = classify_asymptotic(c);
  CHECK(conv.verdict == IterateVerdict::Converged);
  CHECK(*conv.limit == 3.0);

  std::vector<double> alt;
  for (int k = 0; k < 40; ++k) alt.push_back(k % 2 ? 1.0 : -1.0);
  conv = classify_asymptotic(alt);
  CHECK(conv.verdict == IterateVerdict::NotConverged);
  CHECK(conv.span == 2.0);
  CHECK_FALSE(conv.limit);

  std::vector<double> settling;
  for (int k = 0; k < 40; ++k) settling.push_back(k < 20 ? 0.1 * (k % 2) : 1e-4 * (k % 2));
  CHECK(classify_asymptotic(settling).verdict == IterateVerdict::Inconclusive);

  CHECK_THROWS_AS((void)classify_asymptotic(std::vector<double>(9, 0.0)), ParameterError);
}

TEST_CASE("limit extrapolation") {
  std::vector<double> seq;
  const double k0 = 1000.0;
  for (int j = 0; j < 500; ++j) {
    const double k = k0 + j;
    seq.push_back(7.0 + 3.0 / k - 20.0 / (k * k));
  }
  const auto L = extrapolate_limit(seq, k0);
  REQUIRE(L);
  CHECK(std::abs(*L - 7.0) < 1e-12);

  std::vector<double> noisy;
  for (int j = 0; j < 500; ++j) noisy.push_back(1.0 + 1e-12 * ((j * 7919) % 13 - 6));
  CHECK_FALSE(extrapolate_limit(noisy, k0));
  CHECK_FALSE(extrapolate_limit(std::vector<double>(5, 1.0), k0));
}

TEST_CASE("delta estimate windows are nested") {
  const Preset p = find_preset("exP1");
  const Trajectory traj = integrate(build_field(p), 0.0, 0.0, 4e5, p.options.integrator);
  const LimitSetEstimate d = estimate_delta(traj, 6);
  REQUIRE(d.windows.size() == 6);
  for (std::size_t i = 1; i < d.windows.size(); ++i) {
    CHECK(d.windows[i].t_start > d.windows[i - 1].t_start);
    CHECK(d.windows[i].min >= d.windows[i - 1].min);
    CHECK(d.windows[i].max <= d.windows[i - 1].max);
  }
  CHECK(d.windows.back().t_start == 2e5);
  CHECK(d.alpha <= d.beta);
  CHECK(std::abs(d.alpha + 1.0) < 1e-3);
  CHECK(std::abs(d.beta - 1.0) < 1e-3);
  CHECK_THROWS_AS((void)estimate_delta(traj, 1), ParameterError);
}

TEST_CASE("full analysis verdicts") {
  SUBCASE("zero field keeps its initial value") {
    const Preset p = find_preset("zero");
    const auto rep = full_analysis(build_field(p), 2.0, 1.0, 100.0, p.options);
    CHECK(rep.verdict == Verdict::AsymptoticallyPeriodic);
    CHECK(*rep.iterate_limit == 2.0);
  }
  SUBCASE("logistic solutions approach 1") {
    const Preset p = find_preset("logistic");
    const auto rep = full_analysis(build_field(p), 0.5, 1.0, 100.0, p.options);
    CHECK(rep.verdict == Verdict::AsymptoticallyPeriodic);
    CHECK(std::abs(*rep.iterate_limit - 1.0) < 1e-8);
  }
  SUBCASE("exP1 is S-asymptotically but not asymptotically periodic") {
    const Preset p = find_preset("exP1");
    const auto rep = full_analysis(build_field(p), 0.0, p.tau, p.horizon, p.options);
    CHECK(rep.verdict == Verdict::NotAsymptoticallyPeriodic);
    CHECK(rep.s_component.verdict == SVerdict::Pass);
    CHECK(rep.iterate_component.verdict == IterateVerdict::NotConverged);
    CHECK(rep.iterate_tail_span > 1.9);
    REQUIRE(rep.fixed_point_defect);
    CHECK(*rep.fixed_point_defect < 1e-9);
  }
  SUBCASE("exP1 under default tolerances is undecided") {
    const Preset p = find_preset("exP1");
    AnalysisOptions o;
    o.integrator = p.options.integrator;
    const auto rep = full_analysis(build_field(p), 0.0, p.tau, p.horizon, o);
    CHECK(rep.verdict == Verdict::Inconclusive);
    CHECK(rep.s_component.verdict == SVerdict::Inconclusive);
  }
  SUBCASE("exDP1") {
    const Preset p = find_preset("exDP1");
    const auto rep = full_analysis(build_field(p), 0.0, p.tau, p.horizon, p.options);
    CHECK(rep.verdict == Verdict::NotAsymptoticallyPeriodic);
    CHECK(rep.iterate_tail_span > 1.5);
  }
  SUBCASE("blow-up") {
    const ScalarField sq = make_field(FieldKind::Ode, parse("x^2"), "square");
    const auto rep = full_analysis(sq, 1.0, 1.0, 50.0);
    CHECK(rep.verdict == Verdict::Unbounded);
    CHECK_FALSE(rep.notes.empty());
  }
  SUBCASE("fixed-point scan on request") {
    Preset p = find_preset("logistic");
    p.options.scan_range = std::pair{-0.5, 1.5};
    const auto rep = full_analysis(build_field(p), 0.5, 1.0, 100.0, p.options);
    REQUIRE(rep.fixed_points);
    CHECK(rep.fixed_points->records.size() == 2);
  }
  SUBCASE("preconditions") {
    const Preset p = find_preset("logistic");
    CHECK_THROWS_AS((void)full_analysis(build_field(p), 0.5, 1.0, 10.0), ParameterError);
    const ScalarField drift = make_field(FieldKind::Ode, parse("1/(1+t)"), "drift");
    CHECK_THROWS_AS((void)full_analysis(drift, 0.0, 1.0, 100.0), ConfigError);
    AnalysisOptions bad;
    bad.s.tail_fraction = 1.5;
    CHECK_THROWS_AS((void)full_analysis(build_field(p), 0.5, 1.0, 100.0, bad), ParameterError);
  }
}

TEST_CASE("accumulation candidates") {
  const std::vector<double> tail{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto c = accumulation_candidates(tail, 4);
  REQUIRE(c.size() == 4);
  CHECK(c.front() == 0.0);
  CHECK(c.back() == 9.0);
  CHECK(accumulation_candidates(tail, 50).size() == 10);
  CHECK(accumulation_candidates({}, 3).empty());
}
