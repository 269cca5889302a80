#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qesa/error.hpp"
#include "qesa/ising.hpp"
#include "qesa/mapping.hpp"
#include "qesa/qp.hpp"
#include "qesa/report.hpp"
#include "qesa/rng.hpp"
#include "qesa/samplers.hpp"
#include "qesa/schedule.hpp"

namespace qesa {

/// Controls how much of the sampled direction survives. Each component is
/// kept with probability retain_probability and otherwise replaced by a
/// uniform draw from [-1, 1]. At 1.0 the sampled direction is used as is.
struct DirectionPolicy {
  double retain_probability = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(retain_probability >= 0.0 && retain_probability <= 1.0))
      throw InvalidArgument("DirectionPolicy: retain probability must lie in [0, 1]");
  }
};

inline std::vector<double> perturb_direction(const SpinVector& s, const DirectionPolicy& policy, Rng& rng) {
  policy.validate();
  std::vector<double> d = s.to_doubles();
  if (policy.retain_probability >= 1.0) return d;
  for (double& v : d)
    if (!(rng.uniform01() < policy.retain_probability)) v = rng.uniform(-1.0, 1.0);
  return d;
}

struct SolveOptions {
  bool record_trajectory = false;
  std::string solver_name = "qesa";
};

/// The annealing loop.
///
/// The start point is the ground state of init_ising, accepted
/// unconditionally. Each step builds direction_ising at the current point and
/// step size, samples a direction, applies the direction policy, proposes
/// clip(x + k d), and runs the Metropolis test on the true objective change of
/// the clipped proposal. k is multiplied by alpha after every step; the
/// temperature follows the configured schedule indexed by step.
///
/// Deterministic given `seed` and the sampler's own seeding.
template <IsingSampler Sampler>
SolveReport qesa_solve(const QpInstance& inst, const ScheduleConfig& cfg, const Sampler& sampler,
                       const DirectionPolicy& policy = {}, std::uint64_t seed = 0, const SolveOptions& options = {}) {
  cfg.validate();
  policy.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = inst.n();

  Rng accept_rng(mix_seed(seed, 0xACCE97));
  Rng perturb_rng(mix_seed(seed ^ policy.seed, 0x9E47));
  std::chrono::duration<double> sampler_time{0.0};

  const auto sample = [&](const IsingModel& model, std::uint64_t call, std::optional<std::size_t> step) {
    SampleResult r;
    try {
      r = sampler(model, call);
    } catch (const std::exception& e) {
      std::throw_with_nested(SolveError(step, e.what()));
    }
    if (r.best.size() != n) throw SolveError(step, "sampler returned a spin vector of wrong length");
    sampler_time += r.sampler_time;
    return r;
  };

  SolveReport report;
  report.solver = options.solver_name;
  if (options.record_trajectory) report.trajectory.emplace().reserve(cfg.steps);

  std::vector<double> x = sample(init_ising(inst), 0, std::nullopt).best.to_doubles();
  double f = objective(inst, x);
  report.eval_count = 1;
  std::vector<double> best_x = x;
  double best_f = f;

  std::vector<double> proposal(n);
  double k = cfg.k0;
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    const double temp = temperature(cfg, t);
    const SampleResult r = sample(direction_ising(inst, x, k), t + 1, t);
    const std::vector<double> dir = perturb_direction(r.best, policy, perturb_rng);
    for (std::size_t i = 0; i < n; ++i) proposal[i] = std::clamp(x[i] + k * dir[i], -1.0, 1.0);
    const double proposed_f = objective(inst, proposal);
    ++report.eval_count;

    const bool accepted = metropolis_accept(proposed_f - f, temp, accept_rng);
    if (accepted) {
      x.swap(proposal);
      f = proposed_f;
      ++report.accepted_count;
      if (f < best_f) {
        best_f = f;
        best_x = x;
      }
    }
    if (report.trajectory) report.trajectory->push_back({t, temp, k, proposed_f, f, best_f, accepted});
    k *= cfg.alpha;
  }

  report.final_x = Point(std::move(x));
  report.best_x = Point(std::move(best_x));
  report.best_f = best_f;
  report.steps = cfg.steps;
  report.sampler_time_s = sampler_time.count();
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace qesa
