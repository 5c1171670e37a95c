#include "massera/chain.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "massera/errors.hpp"
#include "massera/parallel.hpp"

namespace massera {

std::size_t ChainGraph::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& out : edges) n += out.size();
  return n;
}

bool ChainGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto& out = edges.at(i);
  return std::binary_search(out.begin(), out.end(), ChainEdge{j, 0},
                            [](const ChainEdge& a, const ChainEdge& b) { return a.target < b.target; });
}

std::vector<double> uniform_points(double lo, double hi, int n) {
  if (n < 1) throw ParameterError("need at least one point");
  if (n == 1) return {lo};
  if (!(lo < hi)) throw ParameterError("need lo < hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

ChainGraph build_chain_graph(const PeriodMap& pm, std::span<const double> points, double epsilon, int n_min,
                             int n_max) {
  if (points.empty()) throw ParameterError("chain graph needs at least one point");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (n_min < 1 || n_max < n_min) throw ParameterError("need 1 <= n_min <= n_max");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw ParameterError("sample points must be finite");
    if (i > 0 && !(points[i - 1] < points[i])) {
      throw ParameterError("sample points must be strictly increasing");
    }
  }

  ChainGraph g;
  g.points.assign(points.begin(), points.end());
  g.epsilon = epsilon;
  g.n_min = n_min;
  g.n_max = n_max;
  const std::size_t n = g.points.size();
  g.edges.resize(n);
  g.map_values.assign(n, std::vector<double>(static_cast<std::size_t>(n_max - n_min + 1),
                                             std::numeric_limits<double>::quiet_NaN()));
  g.isolated.assign(n, false);
  for (std::size_t i = 1; i < n; ++i) g.grid_spacing = std::max(g.grid_spacing, g.points[i] - g.points[i - 1]);

  std::vector<std::string> failures(n);
  parallel_for(n, [&](std::size_t i) {
    double x = g.points[i];
    for (int k = 1; k <= n_max; ++k) {
      try {
        x = pm(x);
      } catch (const Error& e) {
        failures[i] = e.what();
        break;
      }
      if (!std::isfinite(x)) {
        failures[i] = "non-finite iterate";
        break;
      }
      if (k >= n_min) g.map_values[i][static_cast<std::size_t>(k - n_min)] = x;
    }
    if (!failures[i].empty()) {
      g.isolated[i] = true;
      return;
    }
    auto& out = g.edges[i];
    for (int k = n_min; k <= n_max; ++k) {
      const double v = g.map_values[i][static_cast<std::size_t>(k - n_min)];
      auto it = std::lower_bound(g.points.begin(), g.points.end(), v - epsilon);
      // v - epsilon is rounded; step back over points the exact test still admits
      while (it != g.points.begin() && std::abs(v - *std::prev(it)) < epsilon) --it;
      for (; it != g.points.end() && !(*it - v >= epsilon); ++it) {
        if (!(std::abs(v - *it) < epsilon)) continue;
        const auto j = static_cast<std::size_t>(it - g.points.begin());
        auto pos = std::lower_bound(out.begin(), out.end(), j,
                                    [](const ChainEdge& e, std::size_t t) { return e.target < t; });
        if (pos == out.end() || pos->target != j) out.insert(pos, ChainEdge{j, k});
      }
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) g.notes.push_back(fmt::format("point {} ({}) isolated: {}", i, g.points[i], failures[i]));
  }
  return g;
}

namespace {

/// Iterative Tarjan over the nodes flagged in `active` (all when empty).
std::vector<std::vector<std::size_t>> strongly_connected(const ChainGraph& g, const std::vector<bool>& active) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  auto on = [&](std::size_t v) { return active.empty() || active[v]; };
  std::vector<std::size_t> index(n, kUnset);
  std::vector<std::size_t> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (!on(root) || index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      const auto& out = g.edges[fr.v];
      if (fr.next_edge < out.size()) {
        const std::size_t w = out[fr.next_edge++].target;
        if (!on(w)) continue;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
        continue;
      }
      const std::size_t v = fr.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return components;
}

bool has_internal_edge(const ChainGraph& g, const std::vector<std::size_t>& comp) {
  if (comp.size() > 1) return true;
  return g.has_edge(comp.front(), comp.front());
}

}  // namespace

CRReport chain_recurrent_set(const ChainGraph& g) {
  CRReport rep;
  rep.scc_partition = strongly_connected(g, {});
  for (const auto& comp : rep.scc_partition) {
    if (has_internal_edge(g, comp)) rep.recurrent_indices.insert(rep.recurrent_indices.end(), comp.begin(), comp.end());
  }
  std::sort(rep.recurrent_indices.begin(), rep.recurrent_indices.end());
  return rep;
}

bool is_internally_chain_transitive(const ChainGraph& g, std::span<const std::size_t> subset) {
  if (subset.empty()) throw ParameterError("subset must not be empty");
  std::vector<bool> active(g.size(), false);
  for (std::size_t i : subset) {
    if (i >= g.size()) throw ParameterError(fmt::format("node {} is out of range", i));
    active[i] = true;
  }
  const auto comps = strongly_connected(g, active);
  return comps.size() == 1 && has_internal_edge(g, comps.front());
}

void write_edges_csv(const ChainGraph& g, std::ostream& out) {
  out << "i,j,k_witness\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const auto& e : g.edges[i]) fmt::print(out, "{},{},{}\n", i, e.target, e.k_witness);
  }
}

}  // namespace massera
