#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "massera/errors.hpp"
#include "massera/integrate.hpp"
#include "massera/presets.hpp"

using namespace massera;

namespace {

double exp1_exact(double t) { return std::sin(std::sqrt(std::numbers::pi * std::numbers::pi + t)); }

double logistic_exact(double x0, double t) { return x0 * std::exp(t) / (1.0 - x0 + x0 * std::exp(t)); }

}  // namespace

TEST_CASE("exP1 solution matches sin(sqrt(pi^2 + t)) - sin(pi)") {
  const Preset p = find_preset("exP1");
  const Trajectory traj = integrate(build_field(p), 0.0, 0.0, 1e4, p.options.integrator);
  CHECK_FALSE(traj.blew_up());
  CHECK(traj.t_end() == 1e4);
  double worst = 0.0;
  Trajectory::Cursor c(traj);
  for (int i = 0; i <= 20000; ++i) {
    const double t = 0.5 * i;
    worst = std::max(worst, std::abs(c(t) - exp1_exact(t)));
  }
  CHECK(worst < 1e-6);
  CHECK(std::abs(traj.sample(1e3) - exp1_exact(1e3)) < 1e-6);
}

TEST_CASE("exDP1 iteration telescopes") {
  const Preset p = find_preset("exDP1");
  const Trajectory traj = iterate_map(build_field(p), 0.0, 10000);
  REQUIRE(traj.nodes().size() == 10001);
  double worst = 0.0;
  for (const auto& n : traj.nodes()) worst = std::max(worst, std::abs(n.x - exp1_exact(n.t)));
  CHECK(worst < 1e-12);
  CHECK(std::isnan(traj.nodes().back().rate));
  CHECK_THROWS_AS((void)traj.sample(2.5), RangeError);
  CHECK_THROWS_AS((void)traj.sample(10001.0), RangeError);
}

TEST_CASE("logistic flow against the closed form") {
  const ScalarField f = build_field(find_preset("logistic"));
  for (double x0 : {0.1, 0.5, 0.9, 1.5}) {
    const Trajectory traj = integrate(f, x0, 0.0, 10.0);
    for (double t : {0.25, 1.0, 3.3, 10.0}) CHECK(std::abs(traj.sample(t) - logistic_exact(x0, t)) < 1e-8);
  }
}

TEST_CASE("order preservation of scalar flows") {
  const ScalarField f = build_field(find_preset("logistic"));
  double prev = -1e300;
  for (int i = 0; i < 50; ++i) {
    const double v = flow(f, -0.2 + 0.03 * i, 1.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("cocycle identity") {
  const Preset p = find_preset("exP1");
  CHECK(verify_cocycle(build_field(p), 0.0, 100.0, 100.0, p.options.integrator) <= 1e-6);
  const ScalarField bh = build_field(find_preset("beverton-holt"));
  CHECK(verify_cocycle(bh, 5.0, 17.0, 40.0) == 0.0);
  CHECK_THROWS_AS((void)verify_cocycle(bh, 5.0, -1.0, 4.0), ParameterError);
}

TEST_CASE("blow-up is detected") {
  const ScalarField f = make_field(FieldKind::Ode, parse("x^2"), "square");
  const Trajectory traj = integrate(f, 1.0, 0.0, 2.0);
  REQUIRE(traj.blew_up());
  CHECK(*traj.blowup_time() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS((void)flow(f, 1.0, 2.0), BlowUpError);
  CHECK(flow(f, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("map evaluation failure reports the step") {
  const ScalarField f = make_field(FieldKind::Map, parse("log(x)"), "log");
  try {
    (void)iterate_map(f, 0.5, 10);
    FAIL("expected IterationError");
  } catch (const IterationError& e) {
    CHECK(e.step() == 1);
    CHECK(e.x() == doctest::Approx(std::log(0.5)));
  }
}

TEST_CASE("rebuilt dense steps reproduce stored ones exactly") {
  const ScalarField f = make_field(FieldKind::Ode, parse("sin(t)*cos(x)-0.1*x"), "forced");
  IntegratorConfig ring;
  ring.full_dense_horizon = 10.0;
  ring.dense_ring = 16;
  IntegratorConfig full;
  full.full_dense_horizon = 1e9;
  const Trajectory a = integrate(f, 0.3, 0.0, 500.0, ring);
  const Trajectory b = integrate(f, 0.3, 0.0, 500.0, full);
  CHECK(a.retained_dense_steps() < b.retained_dense_steps());
  REQUIRE(a.nodes().size() == b.nodes().size());
  Trajectory::Cursor ca(a);
  Trajectory::Cursor cb(b);
  for (int i = 0; i <= 5000; ++i) {
    const double t = 0.1 * i;
    REQUIRE(ca(t) == cb(t));
  }
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig cfg;
  cfg.rel_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  const ScalarField f = build_field(find_preset("zero"));
  CHECK_THROWS_AS((void)integrate(f, 0.0, 0.0, 1.0, cfg), ParameterError);
}

TEST_CASE("trajectory CSV") {
  const Trajectory traj = iterate_map(build_field(find_preset("exDP1")), 0.0, 2);
  std::ostringstream out;
  write_csv(traj, out);
  const std::string s = out.str();
  CHECK(s.rfind("t,x\n0,0\n1,", 0) == 0);
}
