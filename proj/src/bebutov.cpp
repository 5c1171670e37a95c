#include "massera/bebutov.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "massera/errors.hpp"

namespace massera {

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::HalfLine: return "half_line";
    case DomainKind::FullLine: return "full_line";
    case DomainKind::Integers: return "integers";
  }
  return "full_line";
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::Less: return "less";
    case Relation::Equal: return "equal";
    case Relation::Greater: return "greater";
  }
  return "equal";
}

const char* to_string(TailShape s) {
  switch (s) {
    case TailShape::Constant: return "constant";
    case TailShape::TauPeriodic: return "tau_periodic";
    case TailShape::None: return "none";
  }
  return "none";
}

void SampledFunction::validate() const {
  if (values.empty()) throw ParameterError("sampled function has no values");
  if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("sample step must be positive");
  if (!std::isfinite(offset)) throw ParameterError("sample offset must be finite");
  if (domain == DomainKind::Integers && (step != 1.0 || std::floor(offset) != offset)) {
    throw ParameterError("integer domains need step 1 and an integer offset");
  }
}

double SampledFunction::operator()(double t) const {
  const double a = t_first();
  const double b = t_last();
  const double slack = 1e-12 * step;
  if (!(t >= a - slack && t <= b + slack)) {
    throw RangeError(fmt::format("t = {} is outside the sampled window [{}, {}]", t, a, b));
  }
  const double pos = std::clamp((t - offset) / step, 0.0, static_cast<double>(values.size() - 1));
  if (domain == DomainKind::Integers) {
    if (std::floor(t) != t) throw RangeError(fmt::format("t = {} is not an integer", t));
    return values[static_cast<std::size_t>(std::llround(pos))];
  }
  const auto i = std::min(static_cast<std::size_t>(pos), values.size() - 1);
  if (i + 1 == values.size()) return values[i];
  const double w = pos - static_cast<double>(i);
  if (w == 0.0) return values[i];
  return values[i] + w * (values[i + 1] - values[i]);
}

SampledFunction sample_function(const std::function<double(double)>& g, DomainKind domain, double offset,
                                double step, std::size_t n) {
  SampledFunction f{domain, offset, step, {}};
  f.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) f.values.push_back(g(f.t_at(i)));
  f.validate();
  return f;
}

SampledFunction sample_trajectory(const Trajectory& traj, double t_from, double t_to, double step) {
  if (!(t_from <= t_to)) throw ParameterError("need t_from <= t_to");
  if (!(step > 0.0)) throw ParameterError("sample step must be positive");
  if (t_from < traj.t0() || t_to > traj.t_end()) {
    throw RangeError(fmt::format("[{}, {}] is outside the trajectory [{}, {}]", t_from, t_to, traj.t0(), traj.t_end()));
  }
  const bool is_map = traj.kind() == FieldKind::Map;
  if (is_map && (step != 1.0 || std::floor(t_from) != t_from)) {
    throw ParameterError("map trajectories are sampled at integer times");
  }
  const auto n = static_cast<std::size_t>(std::floor((t_to - t_from) / step + 1e-9)) + 1;
  Trajectory::Cursor cursor(traj);
  SampledFunction f{is_map ? DomainKind::Integers : (t_from >= 0.0 ? DomainKind::HalfLine : DomainKind::FullLine),
                    t_from, step, {}};
  f.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) f.values.push_back(cursor(std::min(f.t_at(i), traj.t_end())));
  return f;
}

namespace {

/// |phi - psi| on the common window, with M(L) by prefix maxima in |t|.
class Difference {
 public:
  Difference(const SampledFunction& phi, const SampledFunction& psi) : domain_(phi.domain), step_(phi.step) {
    phi.validate();
    psi.validate();
    if (phi.domain != psi.domain) throw ParameterError("functions live on different domains");
    if (phi.step != psi.step) throw ParameterError("functions are sampled with different steps");
    const double shift = (psi.offset - phi.offset) / phi.step;
    const double k = std::round(shift);
    if (std::abs(shift - k) > 1e-9) throw ParameterError("sample grids are not aligned");
    const auto kk = static_cast<long long>(k);
    // psi index j matches phi index j + kk.
    const long long i_from = std::max(0LL, kk);
    const long long i_to = std::min(static_cast<long long>(phi.values.size()) - 1,
                                    static_cast<long long>(psi.values.size()) - 1 + kk);
    if (i_from > i_to) throw RangeError("sampled windows do not overlap");
    for (long long i = i_from; i <= i_to; ++i) {
      const auto pi = static_cast<std::size_t>(i);
      t_.push_back(phi.t_at(pi));
      d_.push_back(std::abs(phi.values[pi] - psi.values[static_cast<std::size_t>(i - kk)]));
      signed_.push_back(phi.values[pi] - psi.values[static_cast<std::size_t>(i - kk)]);
    }
    const double a = t_.front();
    const double b = t_.back();
    const double slack = 1e-9 * step_;
    if (domain_ == DomainKind::FullLine || (domain_ == DomainKind::Integers && a < 0.0)) {
      if (a > slack || b < -slack) throw RangeError(fmt::format("window [{}, {}] does not contain t = 0", a, b));
      radius_ = std::max(0.0, std::min(-a, b));
    } else {
      if (std::abs(a) > slack) throw RangeError(fmt::format("one-sided window must start at 0, not {}", a));
      radius_ = b;
    }
    // Nodes ordered by |t|, then running maxima.
    std::vector<std::size_t> order(t_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::abs(t_[x]) < std::abs(t_[y]); });
    double run = 0.0;
    for (std::size_t i : order) {
      run = std::max(run, d_[i]);
      abs_t_.push_back(std::abs(t_[i]));
      run_max_.push_back(run);
    }
  }

  [[nodiscard]] double radius() const noexcept { return radius_; }

  /// max over the window part with |t| <= L.
  [[nodiscard]] double M(double L) const {
    auto it = std::upper_bound(abs_t_.begin(), abs_t_.end(), L);
    double m = it == abs_t_.begin() ? 0.0 : run_max_[static_cast<std::size_t>(it - abs_t_.begin()) - 1];
    if (domain_ == DomainKind::Integers) return m;
    m = std::max(m, at(0.0));
    m = std::max(m, at(std::min(L, t_.back())));
    if (domain_ == DomainKind::FullLine) m = std::max(m, at(std::max(-L, t_.front())));
    return m;
  }

 private:
  [[nodiscard]] double at(double t) const {
    const double pos = std::clamp((t - t_.front()) / step_, 0.0, static_cast<double>(t_.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(pos), t_.size() - 1);
    if (i + 1 == t_.size()) return d_[i];
    const double w = pos - static_cast<double>(i);
    return std::abs(signed_[i] + w * (signed_[i + 1] - signed_[i]));
  }

  DomainKind domain_;
  double step_;
  double radius_ = 0.0;
  std::vector<double> t_;
  std::vector<double> d_;
  std::vector<double> signed_;
  std::vector<double> abs_t_;
  std::vector<double> run_max_;
};

Relation relate(double value, double eps) {
  const double tol = 1e-9 * std::max(1.0, eps);
  if (std::abs(value - eps) <= tol) return Relation::Equal;
  return value < eps ? Relation::Less : Relation::Greater;
}

}  // namespace

BebutovDistance bebutov_distance(const SampledFunction& phi, const SampledFunction& psi, double L_cap) {
  if (!(L_cap > 0.0)) throw ParameterError("L_cap must be positive");
  const Difference diff(phi, psi);
  BebutovDistance out;
  out.grid_step = phi.step;
  const double L_max = std::min(L_cap, diff.radius());

  if (phi.domain == DomainKind::Integers) {
    out.value = diff.M(0.0);
    out.L_star = 0.0;
    const auto n_max = static_cast<long long>(std::floor(L_max));
    for (long long n = 1; n <= n_max; ++n) {
      const double L = static_cast<double>(n);
      const double v = std::min(diff.M(L), 1.0 / L);
      if (v > out.value) {
        out.value = v;
        out.L_star = L;
      }
      if (diff.M(L) >= 1.0 / L) return out;
    }
    out.truncated = true;
    if (out.L_star == 0.0) out.L_star = static_cast<double>(std::max(0LL, n_max));
    return out;
  }

  if (!(L_max > 0.0) || diff.M(L_max) < 1.0 / L_max) {
    out.value = L_max > 0.0 ? diff.M(L_max) : diff.M(0.0);
    out.truncated = true;
    out.L_star = L_max;
    return out;
  }
  double lo = 0.0;
  double hi = L_max;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (diff.M(mid) < 1.0 / mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.value = std::min(diff.M(hi), 1.0 / hi);
  if (lo > 0.0) out.value = std::max(out.value, std::min(diff.M(lo), 1.0 / lo));
  out.L_star = hi;
  return out;
}

LemmaCheck check_lemma_l1(const SampledFunction& phi, const SampledFunction& psi, double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  const Difference diff(phi, psi);
  const double L = 1.0 / eps;
  if (diff.radius() < L * (1.0 - 1e-12)) {
    throw RangeError(fmt::format("window radius {} does not cover |t| <= 1/eps = {}", diff.radius(), L));
  }
  LemmaCheck out;
  out.distance = bebutov_distance(phi, psi).value;
  out.window_max = diff.M(std::min(L, diff.radius()));
  out.by_distance = relate(out.distance, eps);
  out.by_window = relate(out.window_max, eps);
  out.consistent = out.by_distance == out.by_window;
  return out;
}

SampledFunction shift_function(const SampledFunction& phi, double h) {
  phi.validate();
  if (!std::isfinite(h)) throw ParameterError("shift must be finite");
  SampledFunction out{phi.domain, 0.0, phi.step, {}};
  const double a = phi.t_first() - h;
  const double b = phi.t_last() - h;
  if (phi.domain == DomainKind::Integers) {
    if (std::floor(h) != h) throw ParameterError("integer domains need an integer shift");
    out.offset = a;
    out.values = phi.values;
    return out;
  }
  double first = std::ceil(a / phi.step - 1e-9);
  if (phi.domain == DomainKind::HalfLine) first = std::max(first, 0.0);
  const double last = std::floor(b / phi.step + 1e-9);
  if (first > last) throw RangeError(fmt::format("shift by {} leaves no samples", h));
  out.offset = first * phi.step;
  const auto n = static_cast<std::size_t>(last - first) + 1;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::clamp(out.t_at(i) + h, phi.t_first(), phi.t_last());
    const double s = (t - phi.offset) / phi.step;
    const double r = std::round(s);
    // on-grid targets copy the sample
    if (std::abs(s - r) < 1e-9 && r >= 0.0 && r < static_cast<double>(phi.values.size())) {
      out.values.push_back(phi.values[static_cast<std::size_t>(r)]);
    } else {
      out.values.push_back(phi(t));
    }
  }
  return out;
}

TailShiftResult tail_shift_classification(const Trajectory& traj, std::span<const double> h_list, double window,
                                          double const_tol, double tau) {
  if (!(window > 0.0) || !(const_tol > 0.0) || !(tau > 0.0)) {
    throw ParameterError("window, tolerance and period must be positive");
  }
  if (h_list.empty()) throw ParameterError("need at least one shift");
  const bool is_map = traj.kind() == FieldKind::Map;
  const double step = is_map ? 1.0 : std::min(window / 2000.0, tau / 32.0);
  TailShiftResult out;
  bool all_constant = true;
  bool all_periodic = true;
  Trajectory::Cursor cursor(traj);
  for (double h : h_list) {
    if (h < traj.t0() || h + window > traj.t_end()) {
      throw RangeError(fmt::format("[{}, {}] is outside the trajectory", h, h + window));
    }
    const auto n = static_cast<std::size_t>(std::floor(window / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = cursor(h + step * static_cast<double>(i));
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const bool constant = *hi - *lo <= const_tol;
    bool periodic = constant;
    if (!constant && tau < window) {
      periodic = true;
      for (std::size_t i = 0; i < n && periodic; ++i) {
        const double t = h + step * static_cast<double>(i);
        if (t + tau > h + window) break;
        periodic = std::abs(cursor(t + tau) - v[i]) <= const_tol;
      }
    }
    TailShape shape = constant ? TailShape::Constant : (periodic ? TailShape::TauPeriodic : TailShape::None);
    out.per_shift.push_back(shape);
    out.levels.push_back(constant ? 0.5 * (*lo + *hi) : std::numeric_limits<double>::quiet_NaN());
    all_constant = all_constant && constant;
    all_periodic = all_periodic && periodic;
  }
  out.shape = all_constant ? TailShape::Constant : (all_periodic ? TailShape::TauPeriodic : TailShape::None);
  return out;
}

void write_sampled_csv(const SampledFunction& f, std::ostream& out) {
  out << "t,value\n";
  for (std::size_t i = 0; i < f.values.size(); ++i) fmt::print(out, "{:.17g},{:.17g}\n", f.t_at(i), f.values[i]);
}

SampledFunction read_sampled_csv(std::istream& in, DomainKind domain) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "empty CSV input", "header t,value");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,value") throw ParseError(0, fmt::format("unexpected header '{}'", line), "t,value");
  std::vector<double> ts;
  std::vector<double> vs;
  auto parse_number = [](std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(line_no, fmt::format("'{}' is not a number", s), "number");
    }
    return v;
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(line_no, "missing comma", "t,value");
    const std::string_view sv(line);
    ts.push_back(parse_number(sv.substr(0, comma), line_no));
    vs.push_back(parse_number(sv.substr(comma + 1), line_no));
  }
  if (ts.empty()) throw ParseError(line_no, "no samples", "t,value rows");
  SampledFunction f{domain, ts.front(), 1.0, std::move(vs)};
  if (ts.size() > 1) {
    f.step = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (std::abs(ts[i] - f.t_at(i)) > 1e-9 * std::max(1.0, std::abs(ts[i]))) {
        throw ParseError(i + 2, "t column is not uniformly spaced", "uniform grid");
      }
    }
  }
  f.validate();
  return f;
}

}  // namespace massera
