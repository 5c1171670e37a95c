#pragma once
/**
 * @file chain.hpp
 * @brief (eps, n)-chain reachability on a finite sample of the period map's
 * domain: chain-recurrent points and internal chain transitivity.
 *
 * Chains jump between sample points only. A step from point i to point j
 * exists when some iterate P^k(points[i]), n_min <= k <= n_max, lies
 * strictly within eps of points[j].
 */

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "massera/period_map.hpp"

namespace massera {

struct ChainEdge {
  std::size_t target;
  /// Smallest k in [n_min, n_max] realizing the edge.
  int k_witness;
};

struct ChainGraph {
  std::vector<double> points;
  double epsilon = 0.0;
  int n_min = 1;
  int n_max = 1;
  /// Outgoing edges per node, sorted by target.
  std::vector<std::vector<ChainEdge>> edges;
  /// map_values[i][k - n_min] = P^k(points[i]); NaN where the map failed.
  std::vector<std::vector<double>> map_values;
  /// Nodes whose orbit could not be computed; they have no outgoing edges.
  std::vector<bool> isolated;
  /// Largest gap between consecutive sample points.
  double grid_spacing = 0.0;
  std::vector<std::string> notes;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] std::size_t edge_count() const noexcept;
  [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const;
};

/// Throws ParameterError unless points are non-empty, finite, strictly
/// increasing, epsilon > 0 and 1 <= n_min <= n_max.
[[nodiscard]] ChainGraph build_chain_graph(const PeriodMap& pm, std::span<const double> points, double epsilon,
                                           int n_min, int n_max);

/// n points evenly spaced on [lo, hi] (both ends included).
[[nodiscard]] std::vector<double> uniform_points(double lo, double hi, int n);

struct CRReport {
  /// Nodes on a directed cycle, self-loops included. Sorted.
  std::vector<std::size_t> recurrent_indices;
  /// Strongly connected components, each sorted; components ordered by first node.
  std::vector<std::vector<std::size_t>> scc_partition;
  /// Filled by the caller when a subset was queried.
  std::optional<bool> internally_transitive;
};

[[nodiscard]] CRReport chain_recurrent_set(const ChainGraph& g);

/// Induced subgraph on `subset` strongly connected with every node on a
/// cycle inside it. Throws ParameterError for an empty subset or an index
/// out of range.
[[nodiscard]] bool is_internally_chain_transitive(const ChainGraph& g, std::span<const std::size_t> subset);

/// Edge list with header `i,j,k_witness`.
void write_edges_csv(const ChainGraph& g, std::ostream& out);

}  // namespace massera
