#include <doctest.h>

#include <cmath>
#include <numbers>

#include "massera/errors.hpp"
#include "massera/parallel.hpp"
#include "massera/period_map.hpp"
#include "massera/presets.hpp"

using namespace massera;

TEST_CASE("logistic period map against the closed form") {
  const PeriodMap pm = build_period_map(build_field(find_preset("logistic")), 1.0);
  const double e = std::numbers::e;
  CHECK(std::abs(pm(0.5) - e / (1.0 + e)) < 1e-7);
  CHECK(pm(0.0) == 0.0);
  CHECK(std::abs(pm(1.0) - 1.0) < 1e-12);
  const auto back = pm.inverse(pm(0.3));
  REQUIRE(back);
  CHECK(std::abs(*back - 0.3) < 1e-8);
}

TEST_CASE("Beverton-Holt limiting map") {
  const Preset p = beverton_holt(2.0, "100", std::string("100"), 1.0);
  const PeriodMap pm = build_period_map(build_field(p), 1.0);
  CHECK(pm(100.0) == 100.0);
  CHECK(pm(50.0) == doctest::Approx(2.0 * 100.0 * 50.0 / 150.0));
  const auto back = pm.inverse(pm(37.0));
  REQUIRE(back);
  CHECK(std::abs(*back - 37.0) < 1e-7);
}

TEST_CASE("period map requires a periodic limit") {
  const ScalarField drift = make_field(FieldKind::Ode, parse("1/(1+t)"), "drift");
  CHECK_THROWS_AS((void)build_period_map(drift, 1.0), ConfigError);
  CHECK_THROWS_AS((void)build_period_map(build_field(find_preset("logistic")), -1.0), ParameterError);
}

TEST_CASE("iterates of the logistic period map") {
  const PeriodMap pm = build_period_map(build_field(find_preset("logistic")), 1.0);
  const IterateList up = iterates(pm, 0.5, 30);
  REQUIRE(up.values.size() == 31);
  for (std::size_t k = 1; k < up.values.size(); ++k) CHECK(up.values[k] > up.values[k - 1]);
  CHECK(std::abs(up.values.back() - 1.0) < 1e-9);
  const IterateList fixed = iterates(pm, 1.0, 5);
  for (double v : fixed.values) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("iterates stop at blow-up") {
  const ScalarField sq = make_field(FieldKind::Ode, parse("x^2"), "square");
  const PeriodMap pm = build_period_map(sq, 1.0);
  const IterateList l = iterates(pm, 0.4, 10);
  CHECK(l.truncated);
  CHECK(l.values.size() == 3);
  CHECK_FALSE(l.note.empty());
}

TEST_CASE("cache is shared and thread-safe") {
  const PeriodMap pm = build_period_map(build_field(find_preset("logistic")), 1.0);
  std::vector<double> out(256);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = pm(0.001 * static_cast<double>(i % 64)); });
  CHECK(pm.cache_size() == 64);
  const PeriodMap copy = pm;
  CHECK(copy(0.01) == out[10]);
  CHECK(copy.cache_size() == 64);
}

TEST_CASE("synthetic maps") {
  const PeriodMap half = PeriodMap::from_function([](double u) { return u / 2.0; }, "half");
  CHECK(half(1.0) == 0.5);
  CHECK_FALSE(half.has_inverse());
  CHECK_FALSE(half.inverse(1.0));
  CHECK_FALSE(half.source());
}
