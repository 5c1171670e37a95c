#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "massera/chain.hpp"
#include "massera/errors.hpp"
#include "massera/presets.hpp"

using namespace massera;

namespace {

/// Edge set and recurrent nodes by direct enumeration and transitive closure.
struct BruteForce {
  std::vector<std::vector<bool>> edge;
  std::vector<std::size_t> recurrent;
};

BruteForce brute_force(const std::function<double(double)>& P, const std::vector<double>& pts, double eps, int n_min,
                       int n_max) {
  const std::size_t n = pts.size();
  BruteForce bf;
  bf.edge.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    double x = pts[i];
    for (int k = 1; k <= n_max; ++k) {
      x = P(x);
      if (k < n_min) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(x - pts[j]) < eps) bf.edge[i][j] = true;
      }
    }
  }
  auto reach = bf.edge;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][m]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[m][j]) reach[i][j] = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (reach[i][i]) bf.recurrent.push_back(i);
  }
  return bf;
}

PeriodMap synthetic(std::function<double(double)> f) { return PeriodMap::from_function(std::move(f), "synthetic"); }

}  // namespace

TEST_CASE("identity map: every node is recurrent") {
  const PeriodMap id = synthetic([](double u) { return u; });
  const auto pts = uniform_points(0.0, 1.0, 101);
  const ChainGraph g = build_chain_graph(id, pts, 0.05, 1, 3);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.has_edge(i, i));
  const CRReport cr = chain_recurrent_set(g);
  CHECK(cr.recurrent_indices.size() == 101);
  std::vector<std::size_t> all(101);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  CHECK(is_internally_chain_transitive(g, all));
}

TEST_CASE("halving map matches brute force") {
  const auto half = [](double u) { return u / 2.0; };
  const PeriodMap pm = synthetic(half);
  const auto pts = uniform_points(0.0, 1.0, 101);
  for (double eps : {0.005, 0.01, 0.05}) {
    const ChainGraph g = build_chain_graph(pm, pts, eps, 1, 20);
    const BruteForce bf = brute_force(half, pts, eps, 1, 20);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) REQUIRE(g.has_edge(i, j) == bf.edge[i][j]);
    }
    CHECK(chain_recurrent_set(g).recurrent_indices == bf.recurrent);
  }
  // With the strict edge rule, u = 0.01 maps to 0.005, which is within 0.01
  // of itself, so it joins u = 0 in the recurrent set; at eps = 0.005 only 0
  // remains.
  const ChainGraph g = build_chain_graph(pm, pts, 0.01, 1, 20);
  CHECK(g.has_edge(0, 0));
  CHECK(g.has_edge(1, 1));
  CHECK(chain_recurrent_set(g).recurrent_indices == std::vector<std::size_t>{0, 1});
  CHECK(chain_recurrent_set(build_chain_graph(pm, pts, 0.005, 1, 20)).recurrent_indices ==
        std::vector<std::size_t>{0});

  const std::vector<std::size_t> zero_one{0, 100};
  CHECK_FALSE(is_internally_chain_transitive(g, zero_one));
  const std::vector<std::size_t> zero{0};
  CHECK(is_internally_chain_transitive(g, zero));
  CHECK_THROWS_AS((void)is_internally_chain_transitive(g, std::vector<std::size_t>{}), ParameterError);
  CHECK_THROWS_AS((void)is_internally_chain_transitive(g, std::vector<std::size_t>{500}), ParameterError);
}

TEST_CASE("recurrent sets grow with epsilon") {
  const auto f = [](double u) { return 3.2 * u * (1.0 - u); };
  const PeriodMap pm = synthetic(f);
  const auto pts = uniform_points(0.0, 1.0, 201);
  std::vector<std::size_t> prev;
  for (double eps : {0.005, 0.01, 0.05}) {
    const auto rec = chain_recurrent_set(build_chain_graph(pm, pts, eps, 1, 20)).recurrent_indices;
    CHECK(std::includes(rec.begin(), rec.end(), prev.begin(), prev.end()));
    prev = rec;
  }
}

TEST_CASE("random maps agree with brute force") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> a(0.5, 4.0);
  std::uniform_real_distribution<double> e(0.002, 0.08);
  std::uniform_int_distribution<int> nm(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    const double r = a(rng);
    const auto f = [r](double u) { return r * u * (1.0 - u); };
    const auto pts = uniform_points(0.0, 1.0, 61);
    const double eps = e(rng);
    const int n_min = nm(rng);
    const int n_max = n_min + nm(rng);
    const ChainGraph g = build_chain_graph(synthetic(f), pts, eps, n_min, n_max);
    const BruteForce bf = brute_force(f, pts, eps, n_min, n_max);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) REQUIRE(g.has_edge(i, j) == bf.edge[i][j]);
    }
    REQUIRE(chain_recurrent_set(g).recurrent_indices == bf.recurrent);
  }
}

TEST_CASE("points off a monotone orbit are not chain recurrent") {
  const auto f = [](double u) { return 0.5 * u + 0.25; };
  std::vector<double> orbit{1.0};
  for (int k = 0; k < 12; ++k) orbit.push_back(f(orbit.back()));
  std::vector<double> pts(orbit.begin(), orbit.end());
  pts.push_back(0.5);
  std::sort(pts.begin(), pts.end());
  double threshold = 1.0;
  for (double x : orbit) threshold = std::min(threshold, x - f(x));
  const ChainGraph g = build_chain_graph(synthetic(f), pts, 0.5 * threshold, 1, 30);
  const CRReport cr = chain_recurrent_set(g);
  REQUIRE(cr.recurrent_indices.size() == 1);
  CHECK(g.points[cr.recurrent_indices[0]] == 0.5);
}

TEST_CASE("logistic period map: recurrence near the equilibria") {
  const PeriodMap pm = build_period_map(build_field(find_preset("logistic")), 1.0);
  const auto pts = uniform_points(0.0, 1.0, 101);
  const double eps = 1e-3;
  const ChainGraph g = build_chain_graph(pm, pts, eps, 5, 10);
  const CRReport cr = chain_recurrent_set(g);
  for (std::size_t i : cr.recurrent_indices) {
    const double u = g.points[i];
    CHECK((u < eps || 1.0 - u < eps));
  }
  CHECK(g.has_edge(0, 0));
  CHECK(g.has_edge(100, 100));
}

TEST_CASE("map failures isolate points") {
  const PeriodMap pm = synthetic([](double u) {
    if (u > 0.9) throw DomainError(0.0, u, "outside");
    return u;
  });
  const ChainGraph g = build_chain_graph(pm, uniform_points(0.0, 1.0, 11), 0.01, 1, 1);
  CHECK(g.isolated[10]);
  CHECK(g.edges[10].empty());
  CHECK_FALSE(g.isolated[9]);
  CHECK(g.notes.size() == 1);
}

TEST_CASE("preconditions and export") {
  const PeriodMap id = synthetic([](double u) { return u; });
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  CHECK_THROWS_AS((void)build_chain_graph(id, unsorted, 0.1, 1, 2), ParameterError);
  CHECK_THROWS_AS((void)build_chain_graph(id, std::vector<double>{}, 0.1, 1, 2), ParameterError);
  const std::vector<double> ok{0.0, 1.0};
  CHECK_THROWS_AS((void)build_chain_graph(id, ok, 0.0, 1, 2), ParameterError);
  CHECK_THROWS_AS((void)build_chain_graph(id, ok, 0.1, 3, 2), ParameterError);
  CHECK_THROWS_AS((void)build_chain_graph(id, ok, 0.1, 0, 2), ParameterError);

  const ChainGraph g = build_chain_graph(id, ok, 0.1, 2, 4);
  CHECK(g.edges[0][0].k_witness == 2);
  std::ostringstream out;
  write_edges_csv(g, out);
  CHECK(out.str() == "i,j,k_witness\n0,0,2\n1,1,2\n");
}
