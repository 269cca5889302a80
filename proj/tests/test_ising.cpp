#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qesa/ising.hpp"
#include "qesa/samplers.hpp"

using namespace qesa;

TEST(IsingModel, CouplingKeysNormalized) {
  IsingModel m(4);
  m.add_coupling(3, 1, 2.0);
  m.add_coupling(0, 2, 1.0);
  m.add_coupling(1, 3, 0.5);
  ASSERT_EQ(m.couplings().size(), 2u);
  EXPECT_EQ(m.couplings()[0], (Coupling{0, 2, 1.0}));
  EXPECT_EQ(m.couplings()[1], (Coupling{1, 3, 2.5}));
  for (const auto& c : m.couplings()) EXPECT_LT(c.i, c.j);
  EXPECT_THROW(m.add_coupling(2, 2, 1.0), InvalidArgument);
  EXPECT_THROW(m.add_coupling(0, 4, 1.0), DimensionError);
}

TEST(SpinVector, RejectsNonSpinValues) {
  EXPECT_THROW((SpinVector{1, 0, -1}), InvalidArgument);
  EXPECT_THROW(SpinVector(3, 2), InvalidArgument);
  const SpinVector s{1, -1};
  EXPECT_EQ(s.flipped(), (SpinVector{-1, 1}));
  EXPECT_LT((SpinVector{-1, 1}), (SpinVector{1, -1}));
}

TEST(Energy, HandValues) {
  EXPECT_EQ(energy(IsingModel({0, 0}, {}), SpinVector{1, -1}), 0.0);
  EXPECT_EQ(energy(IsingModel({0, 0}, {{0, 1, 1.0}}), SpinVector{1, -1}), -1.0);
  EXPECT_EQ(energy(IsingModel({2, -3}, {}, 0.5), SpinVector{1, 1}), -0.5);
}

TEST(Energy, MatchesDoubleLoop) {
  std::mt19937_64 eng(1);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = oracle::random_ising(10, seed);
    const auto s = oracle::random_spins(10, eng);
    EXPECT_NEAR(energy(m, SpinVector(std::span<const int>(s))), oracle::ising_energy(m, s), 1e-12);
  }
}

TEST(Energy, DimensionMismatch) {
  EXPECT_THROW(energy(IsingModel(3), SpinVector{1, 1}), DimensionError);
}

TEST(Energy, GlobalFlipSymmetryWithoutFields) {
  std::mt19937_64 eng(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = oracle::random_ising(9, seed, false);
    const SpinVector s(std::span<const int>(oracle::random_spins(9, eng)));
    EXPECT_EQ(energy(m, s), energy(m, s.flipped()));
  }
}

TEST(Energy, OffsetShiftsEveryEnergy) {
  auto m = oracle::random_ising(8, 4);
  const auto before = solve_exact(m);
  std::mt19937_64 eng(3);
  const SpinVector s(std::span<const int>(oracle::random_spins(8, eng)));
  const double e0 = energy(m, s);
  m.set_offset(m.offset() + 0.75);
  EXPECT_DOUBLE_EQ(energy(m, s), e0 + 0.75);
  const auto after = solve_exact(m);
  EXPECT_EQ(after.best, before.best);
  EXPECT_DOUBLE_EQ(after.best_energy, before.best_energy + 0.75);
}
