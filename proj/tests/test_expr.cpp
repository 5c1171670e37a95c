#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "massera/errors.hpp"
#include "massera/expr.hpp"
#include "massera/presets.hpp"

using namespace massera;

namespace {

double ev(const char* src, double t = 0.0, double x = 0.0) { return parse(src)(t, x); }

Expr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 5);
  switch (pick(rng)) {
    case 0: {
      std::uniform_real_distribution<double> u(0.0, 10.0);
      const double v = std::uniform_int_distribution<int>(0, 1)(rng) ? u(rng) : std::floor(u(rng));
      return Expr::number(v);
    }
    case 1: return Expr::constant(std::uniform_int_distribution<int>(0, 1)(rng) ? Constant::Pi : Constant::E);
    case 2: return Expr::variable(std::uniform_int_distribution<int>(0, 1)(rng) ? Variable::T : Variable::X);
    case 3: return Expr::negate(random_tree(rng, depth - 1));
    case 4: {
      const auto op = static_cast<BinaryOp>(std::uniform_int_distribution<int>(0, 4)(rng));
      return Expr::binary(op, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    }
    default: {
      const auto fn = static_cast<Function>(std::uniform_int_distribution<int>(0, 7)(rng));
      return Expr::call(fn, random_tree(rng, depth - 1));
    }
  }
}

std::optional<double> try_eval(const Expr& e, double t, double x) {
  try {
    return e(t, x);
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

}  // namespace

TEST_CASE("operator precedence and associativity") {
  CHECK(ev("2+3*4") == 14.0);
  CHECK(ev("2*3+4") == 10.0);
  CHECK(ev("2-3-4") == -5.0);
  CHECK(ev("8/4/2") == 1.0);
  CHECK(ev("2^3^2") == 512.0);
  CHECK(ev("-x^2", 0.0, 3.0) == -9.0);
  CHECK(ev("(-x)^2", 0.0, 3.0) == 9.0);
  CHECK(ev("2^-1") == 0.5);
  CHECK(ev("--2") == 2.0);
  CHECK(ev(" 1.5e2 + 2E-1 ") == doctest::Approx(150.2));
}

TEST_CASE("constants, variables and functions") {
  CHECK(ev("pi") == std::numbers::pi);
  CHECK(ev("e") == std::numbers::e);
  CHECK(ev("t*x", 3.0, 4.0) == 12.0);
  CHECK(ev("sin(0)+cos(0)+tan(0)+exp(0)+log(1)+abs(-2)+floor(2.5)+sqrt(9)") == 9.0);
}

TEST_CASE("exP1 forcing at t = 0") {
  const double v = ev("cos(sqrt(pi^2+t))/(2*sqrt(pi^2+t))", 0.0, 123.0);
  CHECK(std::abs(v + 1.0 / (2.0 * std::numbers::pi)) < 1e-15);
}

TEST_CASE("Beverton-Holt map fixes K") {
  CHECK(ev("2*100*x/(100+(2-1)*x)", 0.0, 100.0) == 100.0);
}

TEST_CASE("parse errors carry the offset") {
  auto offset = [](const char* src) -> long {
    try {
      (void)parse(src);
    } catch (const ParseError& e) {
      return static_cast<long>(e.position());
    }
    return -1;
  };
  CHECK(offset("2x") == 1);
  CHECK(offset("sin(") == 4);
  CHECK(offset("1e") == 1);
  CHECK(offset("foo(1)") == 0);
  CHECK(offset("") == 0);
  CHECK(offset("(1") == 2);
  CHECK(offset("1)") == 1);
  CHECK(offset("2 pi") == 2);
}

TEST_CASE("evaluation errors name the node and operand") {
  try {
    (void)ev("1+log(x)", 0.0, -2.0);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.node_path() == "root.rhs");
    CHECK(e.operand() == -2.0);
  }
  CHECK_THROWS_AS((void)ev("1/(x-1)", 0.0, 1.0), EvalError);
  CHECK_THROWS_AS((void)ev("sqrt(x)", 0.0, -1.0), EvalError);
  CHECK_THROWS_AS((void)ev("x^(-1)"), EvalError);
  CHECK_THROWS_AS((void)ev("(-8)^(1/3)"), EvalError);
  CHECK(ev("sqrt(x)", 0.0, 0.0) == 0.0);
}

TEST_CASE("canonical form round-trips random trees") {
  std::mt19937_64 rng(20240611);
  const double ts[] = {0.0, 0.3, 2.0, -1.7};
  const double xs[] = {0.0, 1.1, -0.4};
  for (int i = 0; i < 500; ++i) {
    const Expr e = random_tree(rng, 5);
    const std::string text = format_expr(e);
    const Expr back = parse(text);
    REQUIRE_MESSAGE(back == e, text);
    CHECK(format_expr(back) == text);
    for (double t : ts) {
      for (double x : xs) {
        const auto a = try_eval(e, t, x);
        const auto b = try_eval(back, t, x);
        REQUIRE(a.has_value() == b.has_value());
        if (a && !std::isnan(*a)) CHECK(*a == *b);
      }
    }
  }
}

TEST_CASE("additive terms fold signs") {
  const Expr e = parse("x-(t+1)+2*t");
  const auto terms = additive_terms(e);
  REQUIRE(terms.size() == 4);
  CHECK(format_expr(terms[0]) == "x");
  CHECK(terms[1](2.0, 0.0) == -2.0);
  CHECK(terms[2](2.0, 0.0) == -1.0);
  CHECK(format_expr(terms[3]) == "(2*t)");
  CHECK(sum_of({}) == Expr::number(0.0));
  CHECK(sum_of(terms)(1.5, 2.0) == e(1.5, 2.0));
}

TEST_CASE("preset formulas agree with hand-written evaluators") {
  for (const auto& name : preset_names()) {
    const Preset p = find_preset(name);
    const Expr f = parse(p.f);
    const RealFn ref = *closed_form(name);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = 1000.0 * i / 999.0;
      const double x = -2.0 + 4.0 * i / 999.0 + 0.1;
      const double a = f(t, x);
      const double b = ref(t, x);
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
    }
    CHECK_MESSAGE(worst <= 4e-16, name);
  }
}

TEST_CASE("concurrent evaluation is consistent") {
  const Expr e = parse("sin(t)*x+exp(-t)");
  std::vector<double> a(4000);
  std::vector<double> b(4000);
  auto fill = [&](std::vector<double>& out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = e(0.01 * i, 1.0 + 0.001 * i);
  };
  std::thread th1(fill, std::ref(a));
  std::thread th2(fill, std::ref(b));
  th1.join();
  th2.join();
  CHECK(a == b);
}
