#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "massera/bebutov.hpp"
#include "massera/errors.hpp"
#include "massera/integrate.hpp"
#include "massera/presets.hpp"

using namespace massera;

namespace {

SampledFunction on_window(const std::function<double(double)>& g, double radius, double step = 0.01) {
  const auto n = static_cast<std::size_t>(std::llround(radius / step));
  return sample_function(g, DomainKind::FullLine, -radius, radius / n, 2 * n + 1);
}

SampledFunction constant(double c, double radius = 8.0) {
  return on_window([c](double) { return c; }, radius);
}

/// Random piecewise-linear function with nodes every `knot` units, sampled on the grid.
SampledFunction random_pl(std::mt19937_64& rng, double radius, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> knots(static_cast<std::size_t>(2 * radius) + 2);
  for (double& k : knots) k = u(rng);
  return on_window(
      [&](double t) {
        const double s = t + radius;
        const auto i = static_cast<std::size_t>(std::floor(s));
        const double w = s - std::floor(s);
        return knots[i] + w * (knots[i + 1] - knots[i]);
      },
      radius, 0.05);
}

}  // namespace

TEST_CASE("distance examples") {
  CHECK(bebutov_distance(constant(0.3), constant(0.3)).value == 0.0);
  const auto d = bebutov_distance(constant(0.0), constant(0.25));
  CHECK(d.value == 0.25);
  CHECK_FALSE(d.truncated);
  CHECK(d.L_star == doctest::Approx(4.0));
  CHECK(d.grid_step == doctest::Approx(0.01));
  CHECK(bebutov_distance(constant(0.0), constant(0.5)).value == 0.5);
  CHECK(bebutov_distance(constant(0.0), constant(3.0)).value == 3.0);

  const auto id = on_window([](double t) { return t; }, 2.0);
  const auto zero = on_window([](double) { return 0.0; }, 2.0);
  CHECK(std::abs(bebutov_distance(id, zero).value - 1.0) < 1e-12);

  const auto far = bebutov_distance(constant(0.0, 8.0), constant(0.05, 8.0));
  CHECK(far.truncated);
  CHECK(far.value == 0.05);
}

TEST_CASE("distance on half-line and integers") {
  const auto id = sample_function([](double t) { return t; }, DomainKind::HalfLine, 0.0, 0.01, 301);
  const auto zero = sample_function([](double) { return 0.0; }, DomainKind::HalfLine, 0.0, 0.01, 301);
  CHECK(std::abs(bebutov_distance(id, zero).value - 1.0) < 1e-12);

  const auto n = sample_function([](double t) { return 0.3 * t; }, DomainKind::Integers, -5.0, 1.0, 11);
  const auto z = sample_function([](double) { return 0.0; }, DomainKind::Integers, -5.0, 1.0, 11);
  // max_n min(0.3 n, 1/n): 0.3 at n = 1, 0.5 at n = 2, 1/3 at n = 3
  CHECK(bebutov_distance(n, z).value == 0.5);

  const auto off = sample_function([](double) { return 0.0; }, DomainKind::HalfLine, 1.0, 0.01, 10);
  CHECK_THROWS_AS((void)bebutov_distance(off, off), RangeError);
  CHECK_THROWS_AS((void)bebutov_distance(id, n), ParameterError);
}

TEST_CASE("metric axioms on random samples") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_pl(rng, 6.0, 1.0);
    const auto b = random_pl(rng, 6.0, 1.0);
    const auto c = random_pl(rng, 6.0, 1.0);
    const double ab = bebutov_distance(a, b).value;
    const double ba = bebutov_distance(b, a).value;
    const double bc = bebutov_distance(b, c).value;
    const double ac = bebutov_distance(a, c).value;
    REQUIRE(ab == ba);
    REQUIRE(bebutov_distance(a, a).value == 0.0);
    REQUIRE(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("d = eps criterion examples") {
  auto same = check_lemma_l1(constant(0.0), constant(0.0), 0.5);
  CHECK(same.by_distance == Relation::Less);
  CHECK(same.by_window == Relation::Less);
  CHECK(same.consistent);

  auto eq = check_lemma_l1(constant(0.0), constant(0.25), 0.25);
  CHECK(eq.by_distance == Relation::Equal);
  CHECK(eq.by_window == Relation::Equal);

  const auto id = on_window([](double t) { return t; }, 2.0);
  const auto zero = on_window([](double) { return 0.0; }, 2.0);
  auto gt = check_lemma_l1(id, zero, 0.5);
  CHECK(gt.by_distance == Relation::Greater);
  CHECK(gt.by_window == Relation::Greater);
  CHECK(gt.window_max == doctest::Approx(2.0));

  CHECK_THROWS_AS((void)check_lemma_l1(id, zero, 0.1), RangeError);
}

TEST_CASE("d = eps criterion on random pairs") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> e(0.1, 1.5);
  std::uniform_real_distribution<double> s(0.05, 2.0);
  int agreed = 0;
  for (int i = 0; i < 200; ++i) {
    const double scale = s(rng);
    const auto a = random_pl(rng, 10.0, scale);
    const auto b = random_pl(rng, 10.0, scale);
    const auto c = check_lemma_l1(a, b, e(rng));
    agreed += c.consistent ? 1 : 0;
  }
  CHECK(agreed == 200);
}

TEST_CASE("shifts") {
  const auto f = on_window([](double t) { return std::sin(2.0 * std::numbers::pi * t); }, 4.0);
  const auto same = shift_function(f, 0.0);
  CHECK(same.values == f.values);
  CHECK(same.offset == f.offset);
  const auto shifted = shift_function(f, 1.0);
  CHECK(shifted.offset == doctest::Approx(-5.0));
  for (std::size_t i = 0; i < shifted.values.size(); ++i) {
    const double t = shifted.t_at(i);
    if (t >= -4.0 && t <= 3.0) REQUIRE(std::abs(shifted.values[i] - f(t)) < 1e-9);
  }
  const auto half = sample_function([](double t) { return t; }, DomainKind::HalfLine, 0.0, 0.5, 11);
  const auto hs = shift_function(half, 1.25);
  CHECK(hs.offset == 0.0);
  CHECK(hs.values.front() == 1.25);
  CHECK_THROWS_AS((void)shift_function(half, 10.0), RangeError);
  const auto ints = sample_function([](double t) { return t; }, DomainKind::Integers, 0.0, 1.0, 5);
  CHECK_THROWS_AS((void)shift_function(ints, 0.5), ParameterError);
  CHECK(shift_function(ints, 2.0).offset == -2.0);
}

TEST_CASE("exP1 tail shifts") {
  const Preset p = find_preset("exP1");
  const Trajectory traj = integrate(build_field(p), 0.0, 0.0, 2e5, p.options.integrator);

  SUBCASE("far shifts are nearly constant") {
    const auto w = sample_trajectory(traj, 1e5, 1e5 + 100.0, 0.05);
    const auto [lo, hi] = std::minmax_element(w.values.begin(), w.values.end());
    CHECK(*hi - *lo <= 100.0 / (2.0 * std::sqrt(1e5)));
  }
  SUBCASE("constants at different levels") {
    // sin(sqrt(pi^2 + h)) = +-0.5 where sqrt(pi^2 + h) = 2 pi m + pi/6 or 2 pi m - pi/6.
    const double pi = std::numbers::pi;
    const double m = 60.0;
    const double up = std::pow(2.0 * pi * m + pi / 6.0, 2) - pi * pi;
    const double down = std::pow(2.0 * pi * m - pi / 6.0, 2) - pi * pi;
    const std::vector<double> hs{up, down};
    const auto r = tail_shift_classification(traj, hs, 50.0, 0.2, p.tau);
    CHECK(r.shape == TailShape::Constant);
    REQUIRE(r.levels.size() == 2);
    CHECK(std::abs(r.levels[0] - 0.5) < 0.1);
    CHECK(std::abs(r.levels[1] + 0.5) < 0.1);
    CHECK_THROWS_AS((void)tail_shift_classification(traj, std::vector<double>{2e5}, 50.0, 0.2, p.tau), RangeError);
  }
  SUBCASE("function-space residual") {
    const double t = 1.5e5;
    const double W = 50.0;
    auto a = sample_trajectory(traj, t + p.tau, t + p.tau + W, 0.01);
    auto b = sample_trajectory(traj, t, t + W, 0.01);
    a.offset = 0.0;
    b.offset = 0.0;
    const double d = bebutov_distance(a, b).value;
    const double pointwise = p.tau / (2.0 * std::sqrt(t));
    CHECK(d <= 2.0 * pointwise + 1e-6);
  }
}

TEST_CASE("tail shape of constant and periodic solutions") {
  const Trajectory flat = integrate(build_field(find_preset("zero")), 0.7, 0.0, 100.0);
  const std::vector<double> hs{10.0, 40.0};
  const auto c = tail_shift_classification(flat, hs, 20.0, 1e-9, 1.0);
  CHECK(c.shape == TailShape::Constant);
  CHECK(c.levels[0] == 0.7);

  const ScalarField cosine = make_field(FieldKind::Ode, parse("cos(t)"), "cos");
  IntegratorConfig tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-13;
  const Trajectory wave = integrate(cosine, 0.0, 0.0, 200.0, tight);
  const auto w = tail_shift_classification(wave, hs, 30.0, 1e-6, 2.0 * std::numbers::pi);
  CHECK(w.shape == TailShape::TauPeriodic);
  CHECK(std::isnan(w.levels[0]));
  CHECK(tail_shift_classification(wave, hs, 30.0, 1e-6, 3.0).shape == TailShape::None);
}

TEST_CASE("CSV round trip") {
  const auto f = sample_function([](double t) { return t * t; }, DomainKind::FullLine, -1.0, 0.25, 9);
  std::stringstream io;
  write_sampled_csv(f, io);
  const auto g = read_sampled_csv(io, DomainKind::FullLine);
  CHECK(g.values == f.values);
  CHECK(g.offset == f.offset);
  CHECK(g.step == f.step);

  std::stringstream bad("t,value\n0,1\n1,2\n3,4\n");
  CHECK_THROWS_AS((void)read_sampled_csv(bad, DomainKind::FullLine), ParseError);
  std::stringstream header("time,v\n0,1\n");
  CHECK_THROWS_AS((void)read_sampled_csv(header, DomainKind::FullLine), ParseError);
}
