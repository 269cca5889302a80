#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qesa/error.hpp"
#include "qesa/ising.hpp"
#include "qesa/rng.hpp"

namespace qesa {

namespace detail {

using Clock = std::chrono::steady_clock;

inline std::chrono::duration<double> since(Clock::time_point start) { return Clock::now() - start; }

}  // namespace detail

/// Exact ground state by enumerating all 2^n spin vectors.
///
/// States are visited in Gray-code order with incremental energy updates.
/// Any state whose running energy is within a small tolerance of the best is
/// re-evaluated with energy(), and the winner is chosen on the recomputed
/// value, ties going to the lexicographically smallest vector (-1 < +1).
inline SampleResult solve_exact(const IsingModel& m, std::size_t cap = 24) {
  const auto start = detail::Clock::now();
  const std::size_t n = m.n();
  if (cap > 40) cap = 40;
  if (n > cap)
    throw SizeCapError("solve_exact: n = " + std::to_string(n) + " exceeds enumeration cap " + std::to_string(cap));

  const std::vector<double> dense = m.dense_couplings();
  double scale = 1.0 + std::abs(m.offset());
  for (const auto& c : m.couplings()) scale += std::abs(c.value);
  for (double v : m.h()) scale += std::abs(v);
  const double tol = 1e-10 * scale;

  // Spin i corresponds to bit (n - 1 - i), so comparing integer codes
  // compares spin vectors lexicographically.
  SpinVector s(n, -1);
  std::uint64_t code = 0;
  std::vector<double> local(n);
  for (std::size_t i = 0; i < n; ++i) {
    double l = m.h(i);
    for (std::size_t j = 0; j < n; ++j) l += dense[i * n + j] * s[j];
    local[i] = l;
  }
  double running = energy(m, s);
  double best_energy = running;
  std::uint64_t best_code = 0;
  SpinVector best = s;

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(k));
    const std::size_t i = n - 1 - bit;
    const int old = s[i];
    running += -2.0 * old * local[i];
    s.flip(i);
    code ^= std::uint64_t{1} << bit;
    const double delta = 2.0 * static_cast<double>(s[i]);
    const double* row = dense.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) local[j] += delta * row[j];

    if (running <= best_energy + tol) {
      const double exact = energy(m, s);
      if (exact < best_energy || (exact == best_energy && code < best_code)) {
        best_energy = exact;
        best_code = code;
        best = s;
      }
    }
  }
  return {std::move(best), best_energy, static_cast<std::size_t>(total), detail::since(start)};
}

/// Best of cfg.num_samples independent single-spin-flip Metropolis anneals.
///
/// Each restart starts from a uniformly random state and performs
/// cfg.inner_sweeps sequential sweeps while the temperature decays
/// geometrically from 10 * max|coef| to 0.01 * max|coef|. The final state of
/// each restart is scored with energy(); the first strictly best one wins.
inline SampleResult solve_classical_sa(const IsingModel& m, const SamplerConfig& cfg) {
  cfg.validate();
  const auto start = detail::Clock::now();
  const std::size_t n = m.n();
  Rng rng(cfg.seed);
  const std::vector<double> dense = m.dense_couplings();
  const double mag = m.max_abs_coefficient();
  const double t_hot = 10.0 * mag;
  const double t_cold = 0.01 * mag;
  const std::size_t sweeps = cfg.inner_sweeps;

  std::vector<double> temps(sweeps);
  for (std::size_t t = 0; t < sweeps; ++t) {
    const double frac = sweeps == 1 ? 1.0 : static_cast<double>(t) / static_cast<double>(sweeps - 1);
    temps[t] = t_hot * std::pow(t_cold / t_hot, frac);
  }

  SpinVector best;
  double best_energy = 0.0;
  SpinVector s(n, -1);
  std::vector<double> local(n);
  for (std::size_t r = 0; r < cfg.num_samples; ++r) {
    for (std::size_t i = 0; i < n; ++i) s.set(i, rng.spin());
    if (mag > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        double l = m.h(i);
        for (std::size_t j = 0; j < n; ++j) l += dense[i * n + j] * s[j];
        local[i] = l;
      }
      for (std::size_t t = 0; t < sweeps; ++t) {
        const double beta = 1.0 / temps[t];
        for (std::size_t i = 0; i < n; ++i) {
          const double d_e = -2.0 * s[i] * local[i];
          if (d_e > 0.0 && rng.uniform01() >= std::exp(-d_e * beta)) continue;
          s.flip(i);
          const double delta = 2.0 * static_cast<double>(s[i]);
          const double* row = dense.data() + i * n;
          for (std::size_t j = 0; j < n; ++j) local[j] += delta * row[j];
        }
      }
    }
    const double e = energy(m, s);
    if (r == 0 || e < best_energy) {
      best_energy = e;
      best = s;
    }
  }
  return {std::move(best), best_energy, cfg.num_samples, detail::since(start)};
}

/// Best of cfg.num_samples uniformly random spin vectors (first found wins ties).
inline SampleResult solve_random(const IsingModel& m, const SamplerConfig& cfg) {
  cfg.validate();
  const auto start = detail::Clock::now();
  Rng rng(cfg.seed);
  SpinVector s(m.n(), -1);
  SpinVector best;
  double best_energy = 0.0;
  for (std::size_t r = 0; r < cfg.num_samples; ++r) {
    for (std::size_t i = 0; i < m.n(); ++i) s.set(i, rng.spin());
    const double e = energy(m, s);
    if (r == 0 || e < best_energy) {
      best_energy = e;
      best = s;
    }
  }
  return {std::move(best), best_energy, cfg.num_samples, detail::since(start)};
}

/// A sampler backend as seen by the annealing loop. call_index distinguishes
/// successive calls within one solve (0 for the initial corner, t + 1 for
/// step t) so stochastic backends can derive a fresh stream per call.
template <class S>
concept IsingSampler = requires(const S& s, const IsingModel& m, std::uint64_t call_index) {
  { s(m, call_index) } -> std::convertible_to<SampleResult>;
};

struct ExactSampler {
  std::size_t cap = 24;
  SampleResult operator()(const IsingModel& m, std::uint64_t /*call_index*/) const { return solve_exact(m, cap); }
};

struct ClassicalSaSampler {
  SamplerConfig config;
  SampleResult operator()(const IsingModel& m, std::uint64_t call_index) const {
    SamplerConfig c = config;
    c.seed = mix_seed(config.seed, call_index);
    return solve_classical_sa(m, c);
  }
};

struct RandomSampler {
  SamplerConfig config;
  SampleResult operator()(const IsingModel& m, std::uint64_t call_index) const {
    SamplerConfig c = config;
    c.seed = mix_seed(config.seed, call_index);
    return solve_random(m, c);
  }
};

/// Type-erased sampler for runtime backend selection.
class AnySampler {
public:
  AnySampler() = default;
  template <IsingSampler S>
    requires(!std::same_as<std::remove_cvref_t<S>, AnySampler>)
  AnySampler(S sampler, std::string name = "custom")  // NOLINT(google-explicit-constructor)
      : fn_(std::move(sampler)), name_(std::move(name)) {}

  SampleResult operator()(const IsingModel& m, std::uint64_t call_index) const { return fn_(m, call_index); }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  explicit operator bool() const noexcept { return static_cast<bool>(fn_); }

private:
  std::function<SampleResult(const IsingModel&, std::uint64_t)> fn_;
  std::string name_;
};

}  // namespace qesa
