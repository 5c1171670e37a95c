#include "massera/period_map.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "massera/errors.hpp"
#include "massera/integrate.hpp"

namespace massera {

struct PeriodMap::Cache {
  static constexpr std::size_t kMaxEntries = 1u << 20;

  std::optional<double> find(double u) const {
    std::shared_lock lock(mutex);
    auto it = values.find(std::bit_cast<std::uint64_t>(u));
    if (it == values.end()) return std::nullopt;
    return it->second;
  }

  void store(double u, double pu) {
    std::unique_lock lock(mutex);
    if (values.size() >= kMaxEntries) values.clear();
    values[std::bit_cast<std::uint64_t>(u)] = pu;
  }

  mutable std::shared_mutex mutex;
  std::unordered_map<std::uint64_t, double> values;
};

PeriodMap PeriodMap::from_function(Fn forward, std::string label, Fn inverse) {
  PeriodMap pm;
  pm.forward_ = std::move(forward);
  pm.backward_ = std::move(inverse);
  pm.label_ = std::move(label);
  pm.cache_ = std::make_shared<Cache>();
  return pm;
}

double PeriodMap::operator()(double u) const {
  if (auto hit = cache_->find(u)) return *hit;
  const double pu = forward_(u);
  cache_->store(u, pu);
  return pu;
}

std::optional<double> PeriodMap::inverse(double u) const {
  if (!backward_) return std::nullopt;
  try {
    const double v = backward_(u);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::size_t PeriodMap::cache_size() const {
  std::shared_lock lock(cache_->mutex);
  return cache_->values.size();
}

namespace {

/// Solves step(y) = target for y by expanding a bracket around `target` and
/// bisecting. Rejects brackets that straddle a pole.
std::optional<double> invert_step(const std::function<double(double)>& step, double target) {
  auto g = [&](double y) -> std::optional<double> {
    try {
      const double v = step(y) - target;
      if (std::isnan(v)) return std::nullopt;
      return v;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const auto g0 = g(target);
  if (!g0) return std::nullopt;
  if (*g0 == 0.0) return target;

  double lo = 0.0;
  double hi = 0.0;
  bool found = false;
  for (double w = 1e-9 * (1.0 + std::abs(target)); w < 1e12 && !found; w *= 2.0) {
    for (double side : {-1.0, 1.0}) {
      const double y = target + side * w;
      const auto gy = g(y);
      if (gy && std::signbit(*gy) != std::signbit(*g0)) {
        lo = std::min(y, target);
        hi = std::max(y, target);
        found = true;
        break;
      }
    }
  }
  if (!found) return std::nullopt;
  auto glo = g(lo);
  for (int i = 0; i < 200 && glo; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const auto gm = g(mid);
    if (!gm) return std::nullopt;
    if (std::signbit(*gm) == std::signbit(*glo)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  const double root = 0.5 * (lo + hi);
  const auto gr = g(root);
  if (!gr || std::abs(*gr) > 1e-9 * (1.0 + std::abs(target))) return std::nullopt;
  return root;
}

}  // namespace

PeriodMap build_period_map(const ScalarField& field, double tau, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(tau > 0.0)) throw ParameterError("period must be positive");
  ScalarField limit = limiting_field(field, tau);

  PeriodMap pm;
  pm.tau_ = tau;
  pm.label_ = fmt::format("period map of {}", limit.label());
  pm.cache_ = std::make_shared<PeriodMap::Cache>();

  if (limit.kind() == FieldKind::Ode) {
    ScalarField reversed = reverse_time(limit, tau);
    pm.forward_ = [limit, tau, cfg](double u) { return flow(limit, u, tau, cfg); };
    pm.backward_ = [reversed, tau, cfg](double u) { return flow(reversed, u, tau, cfg); };
  } else {
    if (std::floor(tau) != tau) throw ConfigError("difference equations need an integer period");
    const auto steps = static_cast<long long>(tau);
    const RealFn f = limit.function();
    const double x_max = cfg.x_max;
    pm.forward_ = [f, steps, x_max](double u) {
      double x = u;
      for (long long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k);
        try {
          x = f(t, x);
        } catch (const EvalError& e) {
          throw DomainError(t, x, e.what());
        }
        if (!(std::abs(x) < x_max)) throw BlowUpError(t + 1.0, x, "iterate left the bounded region");
      }
      return x;
    };
    pm.backward_ = [f, steps](double u) {
      double x = u;
      for (long long k = steps - 1; k >= 0; --k) {
        const double t = static_cast<double>(k);
        const auto prev = invert_step([&f, t](double y) { return f(t, y); }, x);
        if (!prev) throw IterationError(k, x, "step is not invertible near this state");
        x = *prev;
      }
      return x;
    };
  }
  pm.source_ = std::move(limit);
  return pm;
}

IterateList iterates(const PeriodMap& pm, double u0, int k_max) {
  if (k_max < 1) throw ParameterError("k_max must be at least 1");
  IterateList out;
  out.values.reserve(static_cast<std::size_t>(k_max) + 1);
  out.values.push_back(u0);
  double u = u0;
  for (int k = 0; k < k_max; ++k) {
    try {
      u = pm(u);
    } catch (const BlowUpError& e) {
      out.truncated = true;
      out.note = fmt::format("blow-up after {} iterates: {}", k, e.what());
      break;
    }
    out.values.push_back(u);
  }
  return out;
}

}  // namespace massera
