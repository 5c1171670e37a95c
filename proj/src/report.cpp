#include "massera/report.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <ostream>

namespace massera {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

json tolerances(const AnalysisOptions& o) {
  return {
      {"rel_tol", o.integrator.rel_tol},
      {"abs_tol", o.integrator.abs_tol},
      {"x_max", o.integrator.x_max},
      {"s_tol", o.s.s_tol},
      {"s_fail", o.s.s_fail},
      {"s_floor", o.s.s_floor},
      {"decay_ratio", o.s.decay_ratio},
      {"tail_fraction", o.s.tail_fraction},
      {"conv_tol", o.conv_tol},
      {"div_threshold", o.div_threshold},
      {"root_tol", o.root_tol},
  };
}

json fixed_point_json(const FixedPointRecord& fp) {
  return {
      {"u", num(fp.u_star)},
      {"residual", num(fp.residual)},
      {"transverse", fp.transverse},
      {"stability", to_string(fp.stability)},
      {"isolation_gap", num(fp.isolation_gap)},
      {"cross_check", fp.cross_check},
  };
}

}  // namespace

json to_json(const ClassificationReport& rep) {
  json windows = json::array();
  for (const auto& w : rep.delta.windows) {
    windows.push_back({{"t_start", num(w.t_start)}, {"t_end", num(w.t_end)}, {"min", num(w.min)}, {"max", num(w.max)}});
  }
  json out = {
      {"verdict", to_string(rep.verdict)},
      {"kind", to_string(rep.kind)},
      {"label", rep.label},
      {"tau", num(rep.tau)},
      {"u0", num(rep.u0)},
      {"horizon", num(rep.horizon)},
      {"s_verdict", to_string(rep.s_component.verdict)},
      {"residual_tail_sup", num(rep.s_component.tail_sup)},
      {"residual_middle_sup", num(rep.s_component.middle_sup)},
      {"residual_samples", rep.residuals.size()},
      {"iterate_verdict", to_string(rep.iterate_component.verdict)},
      {"iterate_tail_span", num(rep.iterate_tail_span)},
      {"iterate_limit", num(rep.iterate_limit)},
      {"iterate_tail_mean", num(rep.iterate_tail_mean)},
      {"period_samples", rep.period_samples.size()},
      {"delta", {{"alpha", num(rep.delta.alpha)}, {"beta", num(rep.delta.beta)}, {"windows", windows}}},
      {"fixed_point_defect", num(rep.fixed_point_defect)},
      {"tolerances", tolerances(rep.options)},
      {"notes", rep.notes},
  };
  if (rep.fixed_points) out["fixed_points"] = to_json(*rep.fixed_points);
  return out;
}

json to_json(const FixedPointScan& scan) {
  json records = json::array();
  for (const auto& fp : scan.records) records.push_back(fixed_point_json(fp));
  json continua = json::array();
  for (const auto& [a, b] : scan.continua) continua.push_back({num(a), num(b)});
  return {
      {"fixed_points", records},
      {"continua", continua},
      {"continuum", scan.continuum()},
      {"grid_spacing", num(scan.grid_spacing)},
      {"root_tol", num(scan.root_tol)},
      {"notes", scan.notes},
  };
}

json to_json(const ChainGraph& g, const CRReport& cr) {
  json points = json::array();
  for (std::size_t i : cr.recurrent_indices) points.push_back(num(g.points[i]));
  std::size_t cyclic = 0;
  for (const auto& comp : cr.scc_partition) {
    if (comp.size() > 1 || g.has_edge(comp.front(), comp.front())) ++cyclic;
  }
  return {
      {"points", g.size()},
      {"epsilon", num(g.epsilon)},
      {"grid_spacing", num(g.grid_spacing)},
      {"n_min", g.n_min},
      {"n_max", g.n_max},
      {"edge_count", g.edge_count()},
      {"recurrent_indices", cr.recurrent_indices},
      {"recurrent_points", points},
      {"scc_count", cr.scc_partition.size()},
      {"recurrent_scc_count", cyclic},
      {"internally_transitive", cr.internally_transitive ? json(*cr.internally_transitive) : json(nullptr)},
      {"notes", g.notes},
  };
}

json to_json(const BebutovDistance& d) {
  return {
      {"distance", num(d.value)},
      {"truncated", d.truncated},
      {"L_star", num(d.L_star)},
      {"grid_step", num(d.grid_step)},
  };
}

json to_json(const LemmaCheck& c) {
  return {
      {"by_distance", to_string(c.by_distance)},
      {"by_window", to_string(c.by_window)},
      {"consistent", c.consistent},
      {"distance", num(c.distance)},
      {"window_max", num(c.window_max)},
  };
}

json make_document(const char* command, json body) {
  body["schema"] = kSchemaVersion;
  body["command"] = command;
  return body;
}

void write_json(const json& doc, std::ostream& out) { out << doc.dump(2) << '\n'; }

void write_residuals_csv(std::span<const ResidualSample> residuals, std::ostream& out) {
  out << "t,r\n";
  for (const auto& s : residuals) fmt::print(out, "{:.17g},{:.17g}\n", s.t, s.r);
}

void write_iterates_csv(std::span<const double> values, std::ostream& out) {
  out << "k,u\n";
  for (std::size_t k = 0; k < values.size(); ++k) fmt::print(out, "{},{:.17g}\n", k, values[k]);
}

}  // namespace massera
