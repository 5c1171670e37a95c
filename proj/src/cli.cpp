#include "massera/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "massera/analysis.hpp"
#include "massera/bebutov.hpp"
#include "massera/chain.hpp"
#include "massera/errors.hpp"
#include "massera/expr.hpp"
#include "massera/fixed_points.hpp"
#include "massera/integrate.hpp"
#include "massera/period_map.hpp"
#include "massera/presets.hpp"
#include "massera/report.hpp"

namespace massera {

namespace {

using nlohmann::json;

/// Equation selection shared by analyze, fixed-points and chain.
struct FieldArgs {
  std::string mode;
  std::string preset;
  std::string f, P, R, K, KP;
  std::optional<double> mu;
  std::optional<double> tau;
  std::vector<double> u0;
  std::optional<double> horizon;
  std::string config;

  std::optional<double> rel_tol, abs_tol, x_max, s_tol, s_fail, s_floor, decay_ratio, conv_tol, div_threshold;
};

void add_field_options(CLI::App* app, FieldArgs& a, bool with_run_options) {
  app->add_option("--preset", a.preset, "Built-in equation (see `preset list`)");
  app->add_option("--f", a.f, "Right-hand side f(t, x)");
  app->add_option("--P", a.P, "Periodic part of f");
  app->add_option("--R", a.R, "Vanishing remainder f - P");
  app->add_option("--K", a.K, "Beverton-Holt carrying capacity K(t)");
  app->add_option("--KP", a.KP, "Periodic part of K");
  app->add_option("--mu", a.mu, "Beverton-Holt growth rate");
  app->add_option("--tau", a.tau, "Period");
  app->add_option("--config", a.config, "JSON file with keys f, P, R, K, KP, mu, tau, u0, horizon, preset");
  app->add_option("--tol-rel", a.rel_tol, "Integrator relative tolerance");
  app->add_option("--tol-abs", a.abs_tol, "Integrator absolute tolerance");
  app->add_option("--x-max", a.x_max, "Blow-up threshold on |x|");
  if (!with_run_options) return;
  app->add_option("--u0", a.u0, "Initial value(s), comma separated")->delimiter(',');
  app->add_option("--horizon", a.horizon, "Time horizon (steps for maps)");
  app->add_option("--tol-s", a.s_tol, "Residual tail bound for the S test");
  app->add_option("--tol-s-fail", a.s_fail, "Residual tail level that fails the S test");
  app->add_option("--tol-s-floor", a.s_floor, "Residual level treated as round-off");
  app->add_option("--tol-decay", a.decay_ratio, "Required tail/middle residual ratio");
  app->add_option("--tol-conv", a.conv_tol, "Span below which period samples converge");
  app->add_option("--tol-div", a.div_threshold, "Span above which period samples diverge");
}

void load_config(FieldArgs& a) {
  if (a.config.empty()) return;
  std::ifstream in(a.config);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", a.config));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config file {}: {}", a.config, e.what()));
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  try {
    auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key) && dst.empty()) dst = j[key].get<std::string>();
    };
    auto real = [&](const char* key, std::optional<double>& dst) {
      if (j.contains(key) && !dst) dst = j[key].get<double>();
    };
    for (const auto& [key, value] : j.items()) {
      static const std::vector<std::string> known{"f", "P", "R", "K", "KP", "mu", "tau", "u0", "horizon", "preset"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
      }
    }
    str("f", a.f);
    str("P", a.P);
    str("R", a.R);
    str("K", a.K);
    str("KP", a.KP);
    str("preset", a.preset);
    real("mu", a.mu);
    real("tau", a.tau);
    real("horizon", a.horizon);
    if (j.contains("u0") && a.u0.empty()) {
      a.u0 = j["u0"].is_array() ? j["u0"].get<std::vector<double>>() : std::vector<double>{j["u0"].get<double>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config file {}: {}", a.config, e.what()));
  }
}

struct Resolved {
  ScalarField field;
  std::string label;
  double tau;
  std::vector<double> u0;
  double horizon;
  AnalysisOptions options;
  std::optional<std::pair<double, double>> scan_range;
};

void positive(const std::optional<double>& v, const char* flag) {
  if (v && !(*v > 0.0)) throw ParameterError(fmt::format("{} must be positive", flag));
}

Resolved resolve(FieldArgs a) {
  load_config(a);
  const FieldKind kind = a.mode == "map" ? FieldKind::Map : FieldKind::Ode;
  const bool explicit_expr = !a.f.empty() || !a.P.empty() || !a.R.empty();
  const bool bh_params = a.mu || !a.K.empty() || !a.KP.empty();

  Preset p;
  if (!a.preset.empty()) {
    if (explicit_expr) throw ConfigError("--preset cannot be combined with --f/--P/--R");
    if (bh_params) {
      if (a.preset != "beverton-holt") throw ConfigError("--mu/--K/--KP apply to the beverton-holt preset only");
      p = find_preset("beverton-holt");
      const std::string K = a.K.empty() ? "8+2*cos(pi*t)+5/(1+t)" : a.K;
      const double tau = a.tau.value_or(p.tau);
      const auto KP = a.KP.empty() ? std::optional<std::string>{} : std::optional<std::string>{a.KP};
      const auto defaults = p;
      p = beverton_holt(a.mu.value_or(2.0), K, KP, tau);
      p.u0 = defaults.u0;
    } else {
      p = find_preset(a.preset);
    }
    if (p.kind != kind) {
      throw ConfigError(fmt::format("preset {} is a {} equation, not {}", p.name, to_string(p.kind), a.mode));
    }
  } else {
    if (bh_params) throw ConfigError("--mu/--K/--KP need --preset beverton-holt");
    if (a.f.empty()) throw ConfigError("either --preset or --f is required");
    if (!a.tau) throw ConfigError("--tau is required with --f");
    p.name = a.f;
    p.kind = kind;
    p.f = a.f;
    p.tau = *a.tau;
    p.u0 = {0.0};
    p.horizon = 1000.0 * p.tau;
    if (!a.P.empty() || !a.R.empty()) {
      p.P = a.P.empty() ? fmt::format("({})-({})", a.f, a.R) : a.P;
      p.R = a.R.empty() ? fmt::format("({})-({})", a.f, a.P) : a.R;
    } else if (const auto split = split_asymptotic(parse(a.f), kind, p.tau)) {
      const std::string rest = format_expr(split->remainder);
      if (rest != "0") {
        p.P = format_expr(split->periodic);
        p.R = rest;
      }
    }
  }
  if (a.tau) p.tau = *a.tau;
  if (!a.u0.empty()) p.u0 = a.u0;
  if (a.horizon) p.horizon = *a.horizon;

  for (const auto& [v, flag] : std::initializer_list<std::pair<const std::optional<double>*, const char*>>{
           {&a.rel_tol, "--tol-rel"}, {&a.abs_tol, "--tol-abs"}, {&a.x_max, "--x-max"}, {&a.s_tol, "--tol-s"},
           {&a.s_fail, "--tol-s-fail"}, {&a.decay_ratio, "--tol-decay"}, {&a.conv_tol, "--tol-conv"},
           {&a.div_threshold, "--tol-div"}, {&a.tau, "--tau"}, {&a.horizon, "--horizon"}}) {
    positive(*v, flag);
  }
  if (a.s_floor && !(*a.s_floor >= 0.0)) throw ParameterError("--tol-s-floor must be non-negative");
  AnalysisOptions& o = p.options;
  if (a.rel_tol) o.integrator.rel_tol = *a.rel_tol;
  if (a.abs_tol) o.integrator.abs_tol = *a.abs_tol;
  if (a.x_max) o.integrator.x_max = *a.x_max;
  if (a.s_tol) o.s.s_tol = *a.s_tol;
  if (a.s_fail) o.s.s_fail = *a.s_fail;
  if (a.s_floor) o.s.s_floor = *a.s_floor;
  if (a.decay_ratio) o.s.decay_ratio = *a.decay_ratio;
  if (a.conv_tol) o.conv_tol = *a.conv_tol;
  if (a.div_threshold) o.div_threshold = *a.div_threshold;
  o.validate();

  return Resolved{build_field(p), p.name, p.tau, p.u0, p.horizon, o,
                  a.preset.empty() ? std::nullopt : std::optional{p.scan_range}};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path));
  return out;
}

/// "dir/name.ext" -> "dir/name-<i>.ext" when several runs share one path.
std::string indexed_path(const std::string& path, std::size_t i, std::size_t n) {
  if (n <= 1) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / fmt::format("{}-{}{}", p.stem().string(), i, p.extension().string())).string();
}

void emit(const json& doc, const std::string& report_path, std::ostream& out) {
  if (report_path.empty()) {
    write_json(doc, out);
  } else {
    auto file = open_output(report_path);
    write_json(doc, file);
  }
}

struct AnalyzeArgs {
  FieldArgs field;
  std::string report, series, iterates, trajectory;
  std::vector<double> range;
  int grid = 4096;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  Resolved r = resolve(args.field);
  if (!args.range.empty()) r.options.scan_range = std::pair{args.range[0], args.range[1]};
  r.options.scan_grid = args.grid;
  json runs = json::array();
  bool inconclusive = false;
  for (std::size_t i = 0; i < r.u0.size(); ++i) {
    const ClassificationReport rep = full_analysis(r.field, r.u0[i], r.tau, r.horizon, r.options);
    inconclusive = inconclusive || rep.verdict == Verdict::Inconclusive;
    runs.push_back(to_json(rep));
    if (!args.series.empty()) {
      auto f = open_output(indexed_path(args.series, i, r.u0.size()));
      write_residuals_csv(rep.residuals, f);
    }
    if (!args.iterates.empty()) {
      auto f = open_output(indexed_path(args.iterates, i, r.u0.size()));
      write_iterates_csv(rep.period_samples, f);
    }
    if (!args.trajectory.empty()) {
      const Trajectory traj = r.field.kind() == FieldKind::Map
                                  ? iterate_map(r.field, r.u0[i], static_cast<long long>(r.horizon), r.options.integrator)
                                  : integrate(r.field, r.u0[i], 0.0, r.horizon, r.options.integrator);
      auto f = open_output(indexed_path(args.trajectory, i, r.u0.size()));
      write_csv(traj, f);
    }
    if (!args.report.empty()) {
      fmt::print(out, "u0 = {}: {}", r.u0[i], to_string(rep.verdict));
      if (rep.iterate_limit) fmt::print(out, ", limit {:.12g}", *rep.iterate_limit);
      fmt::print(out, ", delta [{:.9g}, {:.9g}]\n", rep.delta.alpha, rep.delta.beta);
    }
  }
  emit(make_document("analyze", {{"label", r.label}, {"runs", runs}}), args.report, out);
  return inconclusive ? kExitInconclusive : kExitOk;
}

struct FixedPointArgs {
  FieldArgs field;
  std::string report;
  std::vector<double> range;
  int grid = 4096;
  double root_tol = 1e-10;
};

int cmd_fixed_points(const FixedPointArgs& args, std::ostream& out) {
  const Resolved r = resolve(args.field);
  std::pair<double, double> range;
  if (!args.range.empty()) {
    range = {args.range[0], args.range[1]};
  } else if (r.scan_range) {
    range = *r.scan_range;
  } else {
    throw ConfigError("--range is required without a preset");
  }
  const PeriodMap pm = build_period_map(r.field, r.tau, r.options.integrator);
  FixedPointScan scan = find_fixed_points(pm, range.first, range.second, args.grid, args.root_tol);
  classify_all(pm, scan);
  json body = to_json(scan);
  body["label"] = r.label;
  body["tau"] = r.tau;
  body["range"] = {range.first, range.second};
  emit(make_document("fixed-points", body), args.report, out);
  if (!args.report.empty()) {
    for (const auto& fp : scan.records) fmt::print(out, "u* = {:.12g}: {}\n", fp.u_star, to_string(fp.stability));
    if (scan.continuum()) fmt::print(out, "continuum of fixed points detected\n");
  }
  return kExitOk;
}

struct ChainArgs {
  FieldArgs field;
  std::string report, edges;
  std::vector<double> range;
  int grid = 101;
  double eps = 0.01;
  int n_min = 1;
  int n_max = 20;
  std::vector<double> subset;
};

int cmd_chain(ChainArgs args, std::ostream& out) {
  if (args.field.mode.empty()) args.field.mode = "map";
  if (!args.field.tau && args.field.preset.empty()) args.field.tau = 1.0;
  const Resolved r = resolve(args.field);
  std::pair<double, double> range;
  if (!args.range.empty()) {
    range = {args.range[0], args.range[1]};
  } else if (r.scan_range) {
    range = *r.scan_range;
  } else {
    throw ConfigError("--range is required without a preset");
  }
  const PeriodMap pm = build_period_map(r.field, r.tau, r.options.integrator);
  const std::vector<double> points = uniform_points(range.first, range.second, args.grid);
  const ChainGraph g = build_chain_graph(pm, points, args.eps, args.n_min, args.n_max);
  CRReport cr = chain_recurrent_set(g);
  if (!args.subset.empty()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.points[i] >= args.subset[0] && g.points[i] <= args.subset[1]) idx.push_back(i);
    }
    if (idx.empty()) throw ParameterError("--subset contains no sample points");
    cr.internally_transitive = is_internally_chain_transitive(g, idx);
  }
  if (!args.edges.empty()) {
    auto f = open_output(args.edges);
    write_edges_csv(g, f);
  }
  json body = {{"label", r.label}, {"tau", r.tau}, {"range", {range.first, range.second}}, {"chain", to_json(g, cr)}};
  emit(make_document("chain", body), args.report, out);
  if (!args.report.empty()) {
    fmt::print(out, "{} of {} sample points are chain recurrent\n", cr.recurrent_indices.size(), g.size());
  }
  return kExitOk;
}

struct BebutovArgs {
  std::string phi, psi, report, domain = "full";
  double window = 8.0;
  double step = 0.01;
  std::optional<double> eps;
  std::optional<double> L_cap;
};

DomainKind parse_domain(const std::string& s) {
  if (s == "full") return DomainKind::FullLine;
  if (s == "half") return DomainKind::HalfLine;
  if (s == "integers") return DomainKind::Integers;
  throw ConfigError(fmt::format("unknown domain '{}'", s));
}

SampledFunction load_function(const std::string& spec, DomainKind domain, const std::optional<SampledFunction>& grid,
                              double window, double step) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError(fmt::format("function spec '{}' needs const:, expr: or csv:", spec));
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  if (kind == "csv") {
    std::ifstream in(body);
    if (!in) throw ConfigError(fmt::format("cannot open {}", body));
    return read_sampled_csv(in, domain);
  }
  std::function<double(double)> g;
  if (kind == "const") {
    const Expr c = parse(body);
    g = [c](double) { return c(0.0, 0.0); };
  } else if (kind == "expr") {
    const Expr e = parse(body);
    g = [e](double t) { return e(t, 0.0); };
  } else {
    throw ConfigError(fmt::format("unknown function kind '{}'", kind));
  }
  if (grid) return sample_function(g, domain, grid->offset, grid->step, grid->values.size());
  if (domain == DomainKind::Integers) {
    const double w = std::floor(window);
    return sample_function(g, domain, -w, 1.0, static_cast<std::size_t>(2.0 * w) + 1);
  }
  const auto half_count = static_cast<std::size_t>(std::llround(window / step));
  if (domain == DomainKind::HalfLine) return sample_function(g, domain, 0.0, window / half_count, half_count + 1);
  return sample_function(g, domain, -window, window / half_count, 2 * half_count + 1);
}

int cmd_bebutov(const BebutovArgs& args, std::ostream& out) {
  if (!(args.window > 0.0) || !(args.step > 0.0)) throw ParameterError("--window and --step must be positive");
  const DomainKind domain = parse_domain(args.domain);
  const bool phi_csv = args.phi.rfind("csv:", 0) == 0;
  const bool psi_csv = args.psi.rfind("csv:", 0) == 0;
  std::optional<SampledFunction> phi;
  std::optional<SampledFunction> psi;
  if (phi_csv) phi = load_function(args.phi, domain, std::nullopt, args.window, args.step);
  if (psi_csv) psi = load_function(args.psi, domain, std::nullopt, args.window, args.step);
  if (!phi) phi = load_function(args.phi, domain, psi, args.window, args.step);
  if (!psi) psi = load_function(args.psi, domain, phi, args.window, args.step);

  const BebutovDistance d =
      bebutov_distance(*phi, *psi, args.L_cap.value_or(std::numeric_limits<double>::infinity()));
  json body = to_json(d);
  body["domain"] = to_string(domain);
  if (args.eps) body["lemma"] = to_json(check_lemma_l1(*phi, *psi, *args.eps));
  emit(make_document("bebutov", body), args.report, out);
  if (!args.report.empty()) fmt::print(out, "d = {:.17g}{}\n", d.value, d.truncated ? " (lower bound)" : "");
  return kExitOk;
}

int cmd_preset_list(const std::string& report, std::ostream& out) {
  json presets = json::array();
  for (const auto& name : preset_names()) {
    const Preset p = find_preset(name);
    fmt::print(out, "{}\n", name);
    presets.push_back({{"name", p.name},
                       {"kind", to_string(p.kind)},
                       {"summary", p.summary},
                       {"f", p.f},
                       {"tau", p.tau},
                       {"u0", p.u0},
                       {"horizon", p.horizon}});
  }
  if (!report.empty()) {
    auto f = open_output(report);
    write_json(make_document("preset-list", {{"presets", presets}}), f);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymptotically periodic scalar equations: period maps, fixed points, chain recurrence", "massera"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "massera 1.0.0");

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "Classify solutions of x' = f(t, x) or x(t+1) = f(t, x)");
  a->add_option("mode", analyze.field.mode, "ode or map")->required()->check(CLI::IsMember({"ode", "map"}));
  add_field_options(a, analyze.field, true);
  a->add_option("--report", analyze.report, "JSON report path (stdout when omitted)");
  a->add_option("--series", analyze.series, "Residual series CSV (t,r)");
  a->add_option("--iterates", analyze.iterates, "Period samples CSV (k,u)");
  a->add_option("--trajectory", analyze.trajectory, "Trajectory CSV (t,x)");
  a->add_option("--range", analyze.range, "Also scan fixed points on [a, b]")->expected(2);
  a->add_option("--grid", analyze.grid, "Fixed-point scan grid size")->check(CLI::Range(2, 100'000'000));

  FixedPointArgs fixed;
  auto* fp = app.add_subcommand("fixed-points", "Fixed points of the period map and their stability");
  fp->add_option("mode", fixed.field.mode, "ode or map")->required()->check(CLI::IsMember({"ode", "map"}));
  add_field_options(fp, fixed.field, false);
  fp->add_option("--report", fixed.report, "JSON report path (stdout when omitted)");
  fp->add_option("--range", fixed.range, "Scan interval a b")->expected(2);
  fp->add_option("--grid", fixed.grid, "Grid size")->check(CLI::Range(2, 100'000'000));
  fp->add_option("--root-tol", fixed.root_tol, "Root tolerance")->check(CLI::PositiveNumber);

  ChainArgs chain;
  auto* ch = app.add_subcommand("chain", "Chain-recurrent points of the period map on a sample grid");
  ch->add_option("mode", chain.field.mode, "ode or map (default map)")->check(CLI::IsMember({"ode", "map"}));
  add_field_options(ch, chain.field, false);
  ch->add_option("--report", chain.report, "JSON report path (stdout when omitted)");
  ch->add_option("--edges", chain.edges, "Edge list CSV (i,j,k_witness)");
  ch->add_option("--range", chain.range, "Sample interval a b")->expected(2);
  ch->add_option("--grid", chain.grid, "Number of sample points")->check(CLI::Range(1, 10'000'000));
  ch->add_option("--eps", chain.eps, "Jump size epsilon")->check(CLI::PositiveNumber);
  ch->add_option("--n-min", chain.n_min, "Minimum iterations per chain step")->check(CLI::PositiveNumber);
  ch->add_option("--n-max", chain.n_max, "Maximum iterations per chain step")->check(CLI::PositiveNumber);
  ch->add_option("--subset", chain.subset, "Test internal chain transitivity of the points in [a, b]")->expected(2);

  BebutovArgs beb;
  auto* bb = app.add_subcommand("bebutov", "Compact-open distance of two functions");
  bb->add_option("--phi", beb.phi, "const:<c>, expr:<g(t)> or csv:<path>")->required();
  bb->add_option("--psi", beb.psi, "const:<c>, expr:<g(t)> or csv:<path>")->required();
  bb->add_option("--window", beb.window, "Sample window radius");
  bb->add_option("--step", beb.step, "Sample step");
  bb->add_option("--domain", beb.domain, "full, half or integers")->check(CLI::IsMember({"full", "half", "integers"}));
  bb->add_option("--eps", beb.eps, "Also compare both sides of the d = eps criterion");
  bb->add_option("--L-cap", beb.L_cap, "Upper bound for the search over L");
  bb->add_option("--report", beb.report, "JSON report path (stdout when omitted)");

  std::string preset_report;
  auto* pr = app.add_subcommand("preset", "Built-in equations");
  pr->require_subcommand(1);
  auto* pl = pr->add_subcommand("list", "List preset names");
  pl->add_option("--report", preset_report, "JSON description path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (a->parsed()) return cmd_analyze(analyze, out);
    if (fp->parsed()) return cmd_fixed_points(fixed, out);
    if (ch->parsed()) return cmd_chain(chain, out);
    if (bb->parsed()) return cmd_bebutov(beb, out);
    if (pl->parsed()) return cmd_preset_list(preset_report, out);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitError;
  }
  return kExitError;
}

}  // namespace massera
