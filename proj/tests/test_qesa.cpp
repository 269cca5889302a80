#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qesa/baselines.hpp"
#include "qesa/mapping.hpp"
#include "qesa/qesa.hpp"

using namespace qesa;

namespace {

QpInstance make(std::size_t n, std::vector<double> q, std::vector<double> c) {
  return QpInstance(Matrix(n, std::move(q)), std::move(c));
}

QpInstance identity(std::size_t n, double sign) {
  Matrix q(n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = sign;
  return QpInstance(q, std::vector<double>(n, 0.0));
}

std::vector<double> step(const std::vector<double>& x, double k, const std::vector<int>& s) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + k * s[i];
  return y;
}

void check_report_invariants(const QpInstance& inst, const SolveReport& r) {
  for (double v : r.best_x.values()) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
  for (double v : r.final_x.values()) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
  EXPECT_NEAR(r.best_f, objective(inst, r.best_x), 1e-9);
  EXPECT_LE(r.best_f, objective(inst, r.final_x) + 1e-9);
}

}  // namespace

// ---- direction_ising -------------------------------------------------------

TEST(DirectionIsing, OffDiagonalHandCase) {
  const auto inst = make(2, {0, 2, 2, 0}, {0, 0});
  const auto m = direction_ising(inst, std::vector{0.0, 0.0}, 1.0);
  ASSERT_EQ(m.couplings().size(), 1u);
  EXPECT_EQ(m.couplings()[0], (Coupling{0, 1, 2.0}));
  EXPECT_EQ(m.h(), (std::vector{0.0, 0.0}));
  EXPECT_EQ(m.offset(), 0.0);
  const auto r = solve_exact(m);
  EXPECT_EQ(r.best_energy, -2.0);
  EXPECT_EQ(r.best, (SpinVector{-1, 1}));
  EXPECT_EQ(objective(inst, std::vector{-1.0, 1.0}) - objective(inst, std::vector{0.0, 0.0}), -2.0);
}

TEST(DirectionIsing, PureDiagonalHandCase) {
  const auto inst = make(2, {2, 0, 0, 2}, {0, 0});
  const auto m = direction_ising(inst, std::vector{0.0, 0.0}, 0.5);
  EXPECT_TRUE(m.couplings().empty());
  EXPECT_EQ(m.offset(), 0.5);
  oracle::for_each_spin_vector(2, [&](const std::vector<int>& s) {
    EXPECT_EQ(energy(m, SpinVector(std::span<const int>(s))), 0.5);
    EXPECT_EQ(objective(inst, step({0.0, 0.0}, 0.5, s)), 0.5);
  });
}

TEST(DirectionIsing, EnergyEqualsObjectiveDeltaAndArgminTransfers) {
  std::mt19937_64 eng(21);
  const auto inst = oracle::random_instance(10, 8);
  const auto x = oracle::random_box_point(10, eng);
  const double k = 0.1;
  const auto m = direction_ising(inst, x, k);
  const double fx = oracle::objective(inst, x);
  for (int t = 0; t < 1000; ++t) {
    const auto s = oracle::random_spins(10, eng);
    EXPECT_NEAR(energy(m, SpinVector(std::span<const int>(s))), oracle::objective(inst, step(x, k, s)) - fx, 1e-9);
  }
  const double brute = oracle::min_over_spins(10, [&](const std::vector<int>& s) {
    return oracle::objective(inst, step(x, k, s)) - fx;
  });
  const auto r = solve_exact(m);
  EXPECT_NEAR(oracle::objective(inst, step(x, k, r.best.to_ints())) - fx, brute, 1e-9);
}

TEST(DirectionIsing, RejectsBadArguments) {
  const auto inst = identity(2, 1.0);
  EXPECT_THROW(direction_ising(inst, std::vector{0.0, 0.0}, 0.0), InvalidArgument);
  EXPECT_THROW(direction_ising(inst, std::vector{0.0, 0.0}, -1.0), InvalidArgument);
  EXPECT_THROW(direction_ising(inst, std::vector{0.0}, 1.0), DimensionError);
}

TEST(DirectionIsing, ScalesLinearlyWithProblem) {
  std::mt19937_64 eng(5);
  const auto inst = oracle::random_instance(7, 31);
  const double lambda = 3.5;
  Matrix q = inst.Q();
  std::vector<double> c = inst.c();
  for (std::size_t i = 0; i < 7; ++i) {
    c[i] *= lambda;
    for (std::size_t j = 0; j < 7; ++j) q(i, j) *= lambda;
  }
  const QpInstance scaled(q, c);
  const auto x = oracle::random_box_point(7, eng);
  const auto a = direction_ising(inst, x, 0.2);
  const auto b = direction_ising(scaled, x, 0.2);
  ASSERT_EQ(a.couplings().size(), b.couplings().size());
  for (std::size_t p = 0; p < a.couplings().size(); ++p)
    EXPECT_NEAR(b.couplings()[p].value, lambda * a.couplings()[p].value, 1e-12);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(b.h(i), lambda * a.h(i), 1e-12);
  EXPECT_NEAR(b.offset(), lambda * a.offset(), 1e-12);
  EXPECT_EQ(solve_exact(a).best, solve_exact(b).best);
}

// ---- init_ising ------------------------------------------------------------

TEST(InitIsing, HandCase) {
  const auto inst = make(2, {2, 1, 1, 2}, {0, 0});
  const auto m = init_ising(inst);
  ASSERT_EQ(m.couplings().size(), 1u);
  EXPECT_EQ(m.couplings()[0].value, 1.0);
  EXPECT_EQ(m.offset(), 2.0);
  EXPECT_EQ(energy(m, SpinVector{1, -1}), 1.0);
  EXPECT_EQ(energy(m, SpinVector{-1, 1}), 1.0);
  EXPECT_EQ(objective(inst, std::vector{1.0, -1.0}), 1.0);
}

TEST(InitIsing, DiagonalOnlyFollowsLinearSign) {
  const auto inst = make(3, {4, 0, 0, 0, -1, 0, 0, 0, 2}, {0.5, -2, 0.1});
  const auto m = init_ising(inst);
  EXPECT_TRUE(m.couplings().empty());
  EXPECT_EQ(solve_exact(m).best, (SpinVector{-1, 1, -1}));
}

TEST(InitIsing, GroundStateIsBestCorner) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = oracle::random_instance(12, 70 + seed, 3.0);
    const auto m = init_ising(inst);
    oracle::for_each_spin_vector(5, [&](const std::vector<int>& head) {
      std::vector<int> s(12, 1);
      std::copy(head.begin(), head.end(), s.begin());
      const std::vector<double> x(s.begin(), s.end());
      EXPECT_NEAR(energy(m, SpinVector(std::span<const int>(s))), oracle::objective(inst, x), 1e-9);
    });
    const double best_corner = oracle::min_over_spins(12, [&](const std::vector<int>& s) {
      return oracle::objective(inst, std::vector<double>(s.begin(), s.end()));
    });
    EXPECT_NEAR(solve_exact(m).best_energy, best_corner, 1e-9);
  }
}

// ---- acceptance rule and schedule ---------------------------------------

TEST(Metropolis, ImprovementsAndTiesAlwaysAccepted) {
  Rng rng(1);
  for (double t : {1e-9, 1.0, 1e6}) {
    EXPECT_TRUE(metropolis_accept(-5.0, t, rng));
    EXPECT_TRUE(metropolis_accept(0.0, t, rng));
  }
}

TEST(Metropolis, AcceptanceRateMatchesBoltzmannFactor) {
  Rng rng(2024);
  int accepted = 0;
  for (int i = 0; i < 100000; ++i) accepted += metropolis_accept(1.0, 1.0, rng);
  const double rate = accepted / 100000.0;
  EXPECT_GE(rate, 0.36);
  EXPECT_LE(rate, 0.38);
}

TEST(Metropolis, RejectsNonPositiveTemperature) {
  Rng rng(0);
  EXPECT_THROW(metropolis_accept(1.0, 0.0, rng), InvalidArgument);
  EXPECT_THROW(metropolis_accept(1.0, -2.0, rng), InvalidArgument);
}

TEST(Schedule, EndpointsAndMonotonicity) {
  const ScheduleConfig cfg;
  EXPECT_EQ(temperature(cfg, 0), 1000.0);
  EXPECT_EQ(temperature(cfg, 99), 0.1);
  EXPECT_GT(temperature(cfg, 49), temperature(cfg, 50));
  for (std::size_t t = 1; t < cfg.steps; ++t) EXPECT_LT(temperature(cfg, t), temperature(cfg, t - 1));
  EXPECT_THROW(temperature(cfg, 100), InvalidArgument);

  ScheduleConfig lin = cfg;
  lin.cooling = Cooling::Linear;
  EXPECT_EQ(temperature(lin, 0), 1000.0);
  EXPECT_EQ(temperature(lin, 99), 0.1);
  for (std::size_t t = 1; t < lin.steps; ++t) EXPECT_LT(temperature(lin, t), temperature(lin, t - 1));
}

TEST(Schedule, StepSizeDecay) {
  const ScheduleConfig cfg;
  EXPECT_EQ(step_size(cfg, 0), 0.1);
  EXPECT_NEAR(step_size(cfg, 100), 0.1 * std::pow(0.95, 100), 1e-15);
}

TEST(Schedule, Validation) {
  ScheduleConfig c;
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.t_min = 2000;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.k0 = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.steps = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.t_max = c.t_min = 1e-12;
  EXPECT_NO_THROW(c.validate());
}

// ---- direction perturbation --------------------------------------------

TEST(PerturbDirection, KeepAllAtOne) {
  Rng rng(3);
  const SpinVector s{1, -1, 1};
  EXPECT_EQ(perturb_direction(s, {1.0, 0}, rng), (std::vector{1.0, -1.0, 1.0}));
}

TEST(PerturbDirection, RetainedFraction) {
  Rng rng(4);
  const SpinVector s(10000, 1);
  const auto none = perturb_direction(s, {0.0, 0}, rng);
  EXPECT_EQ(std::count_if(none.begin(), none.end(), [](double v) { return std::abs(v) == 1.0; }), 0);
  for (double v : none) EXPECT_TRUE(v >= -1.0 && v <= 1.0);
  const auto half = perturb_direction(s, {0.5, 0}, rng);
  const double kept = std::count(half.begin(), half.end(), 1.0) / 10000.0;
  EXPECT_GE(kept, 0.48);
  EXPECT_LE(kept, 0.52);
  EXPECT_THROW(perturb_direction(s, {1.5, 0}, rng), InvalidArgument);
}

// ---- the annealing loop -----------------------------------------------

TEST(QesaSolve, ConcaveCornersAreOptimal) {
  const auto inst = identity(2, -1.0);
  const auto r = qesa_solve(inst, ScheduleConfig{}, ExactSampler{});
  EXPECT_EQ(r.best_f, -1.0);
  check_report_invariants(inst, r);
}

TEST(QesaSolve, ConvexInteriorOptimumReached) {
  const auto inst = identity(2, 1.0);
  SolveOptions opts;
  opts.record_trajectory = true;
  const auto r = qesa_solve(inst, ScheduleConfig{}, ExactSampler{}, {}, 0, opts);
  // Starts at the corner (f = 1) and walks in with shrinking steps.
  ASSERT_TRUE(r.trajectory);
  EXPECT_EQ(r.trajectory->size(), 100u);
  EXPECT_LE(r.best_f, 0.05);
  EXPECT_LE(r.best_f, 1e-9);  // reference run reaches 1.06e-10
  check_report_invariants(inst, r);
}

TEST(QesaSolve, BeatsBestCornerAndMatchedRandomSearch) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = generate(10, 5.0, static_cast<std::int64_t>(seed));
    const auto r = qesa_solve(inst, ScheduleConfig{}, ExactSampler{}, {}, seed);
    const auto corner = solve_corner_exact(inst);
    const auto rs = solve_random_search(inst, r.eval_count, seed);
    EXPECT_LE(r.best_f, corner.best_f + 1e-12);
    if (r.best_f <= rs.best_f) ++wins;
  }
  EXPECT_GE(wins, 90);
}

TEST(QesaSolve, ReportShapeAndInvariants) {
  const auto inst = generate(8, 1.0, 3);
  SolveOptions opts;
  opts.record_trajectory = true;
  ScheduleConfig cfg;
  cfg.steps = 40;
  const auto r = qesa_solve(inst, cfg, ExactSampler{}, {}, 9, opts);
  EXPECT_EQ(r.steps, 40u);
  EXPECT_EQ(r.eval_count, 41u);
  EXPECT_LE(r.accepted_count, 40u);
  EXPECT_GE(r.sampler_time_s, 0.0);
  EXPECT_GE(r.wall_time_s, r.sampler_time_s);
  check_report_invariants(inst, r);
  double prev = INFINITY;
  std::size_t accepted = 0;
  double k = cfg.k0;
  for (const auto& p : *r.trajectory) {
    EXPECT_LE(p.best_f, prev);
    EXPECT_LE(p.best_f, p.f);
    EXPECT_EQ(p.step_size, k);
    EXPECT_EQ(p.temperature, temperature(cfg, p.step));
    prev = p.best_f;
    accepted += p.accepted;
    k *= cfg.alpha;
  }
  EXPECT_EQ(accepted, r.accepted_count);
  EXPECT_EQ(prev, r.best_f);
}

TEST(QesaSolve, DeterministicGivenSeeds) {
  const auto inst = generate(10, 10.0, 4);
  SamplerConfig sc;
  sc.num_samples = 20;
  sc.inner_sweeps = 20;
  sc.seed = 5;
  SolveOptions opts;
  opts.record_trajectory = true;
  const auto a = qesa_solve(inst, ScheduleConfig{}, ClassicalSaSampler{sc}, {0.7, 1}, 11, opts);
  const auto b = qesa_solve(inst, ScheduleConfig{}, ClassicalSaSampler{sc}, {0.7, 1}, 11, opts);
  EXPECT_TRUE(a.same_result(b));
}

TEST(QesaSolve, FullRetentionEqualsDefaultPolicy) {
  const auto inst = generate(9, 1.0, 2);
  const auto a = qesa_solve(inst, ScheduleConfig{}, ExactSampler{}, {1.0, 77}, 3);
  const auto b = qesa_solve(inst, ScheduleConfig{}, ExactSampler{}, {}, 3);
  EXPECT_TRUE(a.same_result(b));
}

TEST(QesaSolve, ZeroTemperatureNeverAcceptsWorseningMoves) {
  ScheduleConfig cfg;
  cfg.t_max = cfg.t_min = 1e-12;
  cfg.steps = 1000;
  cfg.alpha = 0.999;  // keeps k well above the scale where deltas vanish
  SolveOptions opts;
  opts.record_trajectory = true;
  const DirectionPolicy noisy{0.5, 3};  // makes worsening proposals common
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = generate(8, 5.0, static_cast<std::int64_t>(seed));
    const auto r = qesa_solve(inst, cfg, ExactSampler{}, noisy, seed, opts);
    double f = INFINITY;
    for (const auto& p : *r.trajectory) {
      if (p.accepted) {
        EXPECT_LE(p.proposed_f, f);
      } else {
        EXPECT_GT(p.proposed_f, p.f);
      }
      f = p.f;
    }
  }
}

TEST(QesaSolve, BoundaryPushesAreClippedNoOps) {
  // Concave along both axes: the sampler keeps pushing outward from a corner.
  const auto inst = identity(3, -1.0);
  SolveOptions opts;
  opts.record_trajectory = true;
  const auto r = qesa_solve(inst, ScheduleConfig{}, ExactSampler{}, {}, 0, opts);
  for (const auto& p : *r.trajectory) EXPECT_EQ(p.proposed_f, -1.5);
  EXPECT_EQ(r.final_x.values(), (std::vector{-1.0, -1.0, -1.0}));
}

TEST(QesaSolve, SamplerFailureCarriesStepContext) {
  const auto inst = generate(4, 1.0, 0);
  const auto failing = [](const IsingModel&, std::uint64_t call) -> SampleResult {
    if (call == 3) throw std::runtime_error("backend down");
    return solve_exact(IsingModel(4));
  };
  try {
    qesa_solve(inst, ScheduleConfig{}, failing);
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    ASSERT_TRUE(e.step());
    EXPECT_EQ(*e.step(), 2u);
    EXPECT_NE(std::string(e.what()).find("backend down"), std::string::npos);
    try {
      std::rethrow_if_nested(e);
      FAIL() << "expected nested exception";
    } catch (const std::runtime_error& inner) {
      EXPECT_STREQ(inner.what(), "backend down");
    }
  }
  const auto fail_init = [](const IsingModel&, std::uint64_t) -> SampleResult { throw std::runtime_error("x"); };
  try {
    qesa_solve(inst, ScheduleConfig{}, fail_init);
    FAIL();
  } catch (const SolveError& e) {
    EXPECT_FALSE(e.step());
  }
}

TEST(QesaSolve, ReportJsonRoundTrip) {
  const auto inst = generate(5, 1.0, 1);
  SolveOptions opts;
  opts.record_trajectory = true;
  ScheduleConfig cfg;
  cfg.steps = 5;
  const auto r = qesa_solve(inst, cfg, ExactSampler{}, {}, 0, opts);
  const auto j = report_to_json(r);
  for (const char* key : {"final_x", "best_x", "best_f", "steps", "accepted_count", "wall_time_s", "sampler_time_s", "trajectory"})
    EXPECT_TRUE(j.contains(key)) << key;
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(back.same_result(r));
}
