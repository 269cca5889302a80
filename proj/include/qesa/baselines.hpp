#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qesa/error.hpp"
#include "qesa/mapping.hpp"
#include "qesa/qesa.hpp"
#include "qesa/qp.hpp"
#include "qesa/report.hpp"
#include "qesa/rng.hpp"
#include "qesa/samplers.hpp"

namespace qesa {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Cholesky solve of the SPD system A y = b (A row-major, m x m).
/// Returns nullopt when A is not numerically positive definite.
inline std::optional<std::vector<double>> cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = a[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * m + k] * a[j * m + k];
    if (!(d > 1e-12)) return std::nullopt;
    const double l = std::sqrt(d);
    a[j * m + j] = l;
    for (std::size_t i = j + 1; i < m; ++i) {
      double v = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * m + k] * a[j * m + k];
      a[i * m + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * m + k] * b[k];
    b[i] = v / a[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double v = b[i];
    for (std::size_t k = i + 1; k < m; ++k) v -= a[k * m + i] * b[k];
    b[i] = v / a[i * m + i];
  }
  return b;
}

inline SolveReport point_report(std::string solver, std::vector<double> final_x, std::vector<double> best_x, double best_f) {
  SolveReport r;
  r.solver = std::move(solver);
  r.final_x = Point(std::move(final_x));
  r.best_x = Point(std::move(best_x));
  r.best_f = best_f;
  return r;
}

}  // namespace detail

/// Classical counterpart of QESA: the same loop with the classical annealing
/// sampler used for both the corner and the direction subproblems.
inline SolveReport solve_sa_baseline(const QpInstance& inst, const ScheduleConfig& cfg, std::uint64_t seed,
                                     SamplerConfig sampler_cfg = {}, const SolveOptions& options = {false, "sa"}) {
  sampler_cfg.seed = mix_seed(seed, 0x5A);
  SolveOptions opts = options;
  if (opts.solver_name.empty()) opts.solver_name = "sa";
  return qesa_solve(inst, cfg, ClassicalSaSampler{sampler_cfg}, DirectionPolicy{}, seed, opts);
}

struct ProjectedGradientOptions {
  double step_size = 0.1;
  std::size_t iters = 200;
  /// Start point; uniform random in the box when unset.
  std::optional<std::vector<double>> x0;
};

/// x <- clip(x - eta (Qx + c)) for a fixed number of iterations. Not monotone
/// for indefinite Q with a large step; the report carries the best iterate.
inline SolveReport solve_projected_gradient(const QpInstance& inst, const ProjectedGradientOptions& opt, std::uint64_t seed) {
  if (!(opt.step_size > 0.0)) throw InvalidArgument("projected gradient: step size must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = inst.n();
  std::vector<double> x(n);
  if (opt.x0) {
    require_dim(n, opt.x0->size(), "projected gradient start point");
    x = Point::clipped(*opt.x0).values();
  } else {
    Rng rng(seed);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
  }
  double best_f = objective(inst, x);
  std::vector<double> best_x = x;
  for (std::size_t it = 0; it < opt.iters; ++it) {
    const auto g = gradient(inst, x);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i] - opt.step_size * g[i], -1.0, 1.0);
    const double f = objective(inst, x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  auto r = detail::point_report("projected_gradient", std::move(x), std::move(best_x), best_f);
  r.steps = opt.iters;
  r.accepted_count = opt.iters;
  r.eval_count = opt.iters + 1;
  r.wall_time_s = detail::seconds_since(t0);
  return r;
}

/// Exact best corner of the box via init_ising and exhaustive enumeration.
/// The report is flagged corner_restricted: the continuous optimum may be lower.
inline SolveReport solve_corner_exact(const QpInstance& inst, std::size_t cap = 24) {
  const auto t0 = std::chrono::steady_clock::now();
  const SampleResult s = solve_exact(init_ising(inst), cap);
  std::vector<double> x = s.best.to_doubles();
  const double f = objective(inst, x);
  auto r = detail::point_report("corner_exact", x, x, f);
  r.corner_restricted = true;
  r.eval_count = s.num_samples;
  r.sampler_time_s = s.sampler_time.count();
  r.wall_time_s = detail::seconds_since(t0);
  return r;
}

/// Best of `budget` uniform points of the box.
inline SolveReport solve_random_search(const QpInstance& inst, std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw InvalidArgument("random search: budget must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  std::vector<double> x(inst.n());
  std::vector<double> best_x;
  double best_f = 0.0;
  for (std::size_t b = 0; b < budget; ++b) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const double f = objective(inst, x);
    if (b == 0 || f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  auto r = detail::point_report("random_search", x, std::move(best_x), best_f);
  r.steps = budget;
  r.eval_count = budget;
  r.wall_time_s = detail::seconds_since(t0);
  return r;
}

/// Active-set refinement of a point produced by projected descent.
///
/// Coordinates at a bound whose gradient pushes outward stay fixed; the rest
/// are set to the stationary point of the restricted problem when that
/// restriction is strictly convex, the solution lies in the box, and the
/// objective does not increase. Repeats until the active set settles.
inline std::vector<double> polish_active_set(const QpInstance& inst, std::vector<double> x, std::size_t max_rounds = 8) {
  const std::size_t n = inst.n();
  double f = objective(inst, x);
  for (std::size_t round = 0; round < max_rounds; ++round) {
    const auto g = gradient(inst, x);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pinned = (x[i] == 1.0 && g[i] <= 0.0) || (x[i] == -1.0 && g[i] >= 0.0);
      if (!pinned) free.push_back(i);
    }
    if (free.empty()) break;
    const std::size_t m = free.size();
    std::vector<double> a(m * m);
    std::vector<double> b(m);
    for (std::size_t p = 0; p < m; ++p) {
      const std::size_t i = free[p];
      double rhs = -inst.c()[i];
      for (std::size_t j = 0; j < n; ++j)
        if (std::find(free.begin(), free.end(), j) == free.end()) rhs -= inst.Q(i, j) * x[j];
      b[p] = rhs;
      for (std::size_t q = 0; q < m; ++q) a[p * m + q] = inst.Q(i, free[q]);
    }
    const auto y = detail::cholesky_solve(std::move(a), std::move(b), m);
    if (!y) break;
    std::vector<double> candidate = x;
    bool inside = true;
    for (std::size_t p = 0; p < m; ++p) {
      if (!((*y)[p] >= -1.0 && (*y)[p] <= 1.0)) inside = false;
      candidate[free[p]] = (*y)[p];
    }
    if (!inside) break;
    const double fc = objective(inst, candidate);
    if (!(fc <= f)) break;
    const bool moved = candidate != x;
    x = std::move(candidate);
    f = fc;
    if (!moved) break;
  }
  return x;
}

struct MultistartOptions {
  std::size_t starts = 100;
  std::size_t max_iters = 5000;
  double tolerance = 1e-13;
};

/// Projected gradient from many random starts, each run to a fixed point
/// with step 1 / ||Q||_F (a lower bound on 1 / Lipschitz constant, so every
/// run descends monotonically), followed by active-set polishing.
inline SolveReport solve_multistart_descent(const QpInstance& inst, const MultistartOptions& opt, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = inst.n();
  double frob = 0.0;
  for (double v : inst.Q().data()) frob += v * v;
  frob = std::sqrt(frob);
  const double eta = frob > 0.0 ? 1.0 / frob : 1.0;

  Rng rng(seed);
  std::vector<double> best_x;
  double best_f = 0.0;
  std::size_t evals = 0;
  std::vector<double> x(n);
  for (std::size_t s = 0; s < std::max<std::size_t>(opt.starts, 1); ++s) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
      const auto g = gradient(inst, x);
      double moved = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double next = std::clamp(x[i] - eta * g[i], -1.0, 1.0);
        moved = std::max(moved, std::abs(next - x[i]));
        x[i] = next;
      }
      ++evals;
      if (moved < opt.tolerance) break;
    }
    std::vector<double> polished = polish_active_set(inst, x);
    const double f = objective(inst, polished);
    ++evals;
    if (s == 0 || f < best_f) {
      best_f = f;
      best_x = std::move(polished);
    }
  }
  auto r = detail::point_report("multistart_descent", best_x, best_x, best_f);
  r.steps = opt.starts;
  r.eval_count = evals;
  r.wall_time_s = detail::seconds_since(t0);
  return r;
}

}  // namespace qesa
