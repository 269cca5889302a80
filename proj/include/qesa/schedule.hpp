#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "qesa/error.hpp"
#include "qesa/rng.hpp"

namespace qesa {

enum class Cooling { Exponential, Linear };

inline const char* to_string(Cooling c) noexcept { return c == Cooling::Linear ? "linear" : "exponential"; }

inline Cooling cooling_from_string(const std::string& s) {
  if (s == "exponential") return Cooling::Exponential;
  if (s == "linear") return Cooling::Linear;
  throw InvalidArgument("unknown cooling form '" + s + "' (expected exponential or linear)");
}

/// Outer-loop schedule. Temperature is interpolated between t_max and t_min
/// over `steps` points; the step size starts at k0 and is multiplied by alpha
/// after every step.
struct ScheduleConfig {
  double t_max = 1000.0;
  double t_min = 0.1;
  std::size_t steps = 100;
  double k0 = 0.1;
  double alpha = 0.95;
  Cooling cooling = Cooling::Exponential;

  void validate() const {
    // t_max == t_min is allowed: a constant-temperature run.
    if (!(t_min > 0.0) || !(t_max >= t_min)) throw InvalidArgument("ScheduleConfig: need t_max >= t_min > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("ScheduleConfig: alpha must lie in (0, 1)");
    if (!(k0 > 0.0)) throw InvalidArgument("ScheduleConfig: k0 must be positive");
    if (steps < 1) throw InvalidArgument("ScheduleConfig: steps must be at least 1");
  }
};

/// Temperature at `step`. Endpoints are returned exactly: T(0) = t_max and
/// T(steps - 1) = t_min (a one-step schedule runs at t_max).
inline double temperature(const ScheduleConfig& cfg, std::size_t step) {
  if (step >= cfg.steps)
    throw InvalidArgument("temperature: step " + std::to_string(step) + " outside [0, " + std::to_string(cfg.steps) + ")");
  if (step == 0) return cfg.t_max;
  if (step == cfg.steps - 1) return cfg.t_min;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.steps - 1);
  if (cfg.cooling == Cooling::Linear) return cfg.t_max + (cfg.t_min - cfg.t_max) * frac;
  return cfg.t_max * std::pow(cfg.t_min / cfg.t_max, frac);
}

/// Step size used at `step`: k0 * alpha^step, accumulated by repeated
/// multiplication exactly as the loop does.
inline double step_size(const ScheduleConfig& cfg, std::size_t step) noexcept {
  double k = cfg.k0;
  for (std::size_t t = 0; t < step; ++t) k *= cfg.alpha;
  return k;
}

/// Metropolis rule: accept with probability min(1, exp(-delta_f / T)).
/// Non-positive deltas are accepted without consuming randomness.
inline bool metropolis_accept(double delta_f, double temperature, Rng& rng) {
  if (!(temperature > 0.0)) throw InvalidArgument("metropolis_accept: temperature must be positive");
  if (delta_f <= 0.0) return true;
  return rng.uniform01() < std::exp(-delta_f / temperature);
}

}  // namespace qesa
