#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "qesa/qp.hpp"
#include "qesa/qp_io.hpp"

using namespace qesa;

namespace {

QpInstance make(std::size_t n, std::vector<double> q, std::vector<double> c) {
  return QpInstance(Matrix(n, std::move(q)), std::move(c));
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qesa_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Objective, HandValues) {
  EXPECT_DOUBLE_EQ(objective(make(2, {2, 0, 0, 2}, {0, 0}), std::vector{1.0, 1.0}), 2.0);
  EXPECT_DOUBLE_EQ(objective(make(2, {0, 1, 1, 0}, {1, -1}), std::vector{1.0, -1.0}), 1.0);
}

TEST(Objective, MatchesTermByTermSum) {
  std::mt19937_64 eng(11);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = oracle::random_instance(8, seed);
    const auto x = oracle::random_box_point(8, eng);
    EXPECT_NEAR(objective(inst, x), oracle::objective(inst, x), 1e-12);
  }
}

TEST(Objective, DimensionMismatchThrows) {
  const auto inst = make(2, {1, 0, 0, 1}, {0, 0});
  EXPECT_THROW(objective(inst, std::vector{1.0}), DimensionError);
  EXPECT_THROW(gradient(inst, std::vector{1.0, 0.0, 0.0}), DimensionError);
}

TEST(Objective, InvariantUnderTranspose) {
  const auto inst = oracle::random_instance(6, 3);
  Matrix asym = inst.Q();
  asym(0, 1) += 0.5;
  asym(1, 0) -= 0.5;
  const QpInstance a(asym, inst.c());
  const QpInstance b(asym.transposed(), inst.c());
  EXPECT_FALSE(a.was_symmetric());
  std::mt19937_64 eng(5);
  for (int t = 0; t < 10; ++t) {
    const auto x = oracle::random_box_point(6, eng);
    EXPECT_EQ(objective(a, x), objective(b, x));
  }
}

TEST(Gradient, HandValues) {
  EXPECT_EQ(gradient(make(2, {2, 0, 0, 2}, {1, 1}), std::vector{0.0, 0.0}), (std::vector{1.0, 1.0}));
  EXPECT_EQ(gradient(make(2, {0, 1, 1, 0}, {0, 0}), std::vector{1.0, -1.0}), (std::vector{-1.0, 1.0}));
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 eng(7);
  const auto inst = oracle::random_instance(6, 42);
  const auto x = oracle::random_box_point(6, eng);
  const auto g = gradient(inst, x);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 6; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (oracle::objective(inst, xp) - oracle::objective(inst, xm)) / (2 * h);
    EXPECT_NEAR(g[i], fd, 1e-6) << "coordinate " << i;
  }
}

TEST(Instance, SymmetrizesAndRecordsIt) {
  const auto inst = make(2, {1, 3, 1, 1}, {0, 0});
  EXPECT_FALSE(inst.was_symmetric());
  EXPECT_EQ(inst.Q(0, 1), 2.0);
  EXPECT_EQ(inst.Q(1, 0), 2.0);
  EXPECT_TRUE(make(2, {1, 2, 2, 1}, {0, 0}).was_symmetric());
}

TEST(Instance, BilinearFormSymmetry) {
  std::mt19937_64 eng(9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate(7, 5.0, static_cast<std::int64_t>(seed));
    const auto u = oracle::random_box_point(7, eng);
    const auto v = oracle::random_box_point(7, eng);
    double uqv = 0, vqu = 0;
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        uqv += u[i] * inst.Q(i, j) * v[j];
        vqu += v[i] * inst.Q(i, j) * u[j];
      }
    EXPECT_NEAR(uqv, vqu, 1e-12);
  }
}

TEST(Instance, RejectsBadShapes) {
  EXPECT_THROW(QpInstance(Matrix(0), {}), InvalidArgument);
  EXPECT_THROW(QpInstance(Matrix(2), {1.0}), DimensionError);
}

TEST(Point, RejectsInfeasibleAndClips) {
  EXPECT_THROW(Point({0.0, 1.5}), InvalidArgument);
  EXPECT_THROW(Point({std::nan("")}), InvalidArgument);
  EXPECT_EQ(Point::clipped({-3.0, 0.25, 2.0}).values(), (std::vector{-1.0, 0.25, 1.0}));
}

TEST(Generate, EntryBounds) {
  const auto a = generate(50, 1.0, 0);
  for (double v : a.Q().data()) EXPECT_LE(std::abs(v), 1.0);

  const auto b = generate(100, 10.0, 1);
  double max_diag = 0, max_off = 0;
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = 0; j < 100; ++j) {
      double& slot = i == j ? max_diag : max_off;
      slot = std::max(slot, std::abs(b.Q(i, j)));
    }
  EXPECT_LE(max_diag, 10.0);
  EXPECT_LE(max_off, 1.0);
  EXPECT_GT(max_diag, 1.0);  // scaling actually applied
  EXPECT_TRUE(b.was_symmetric());
  ASSERT_TRUE(b.meta());
  EXPECT_EQ(b.meta()->diag_scale, 10.0);
  EXPECT_EQ(b.meta()->seed, 1);
  EXPECT_EQ(b.meta()->density, 1.0);
}

TEST(Generate, Deterministic) {
  EXPECT_EQ(generate(3, 20.0, 7), generate(3, 20.0, 7));
  EXPECT_FALSE(generate(3, 20.0, 7) == generate(3, 20.0, 8));
}

TEST(Generate, UniformMarginals) {
  // 10,000+ off-diagonal entries from a batch of instances.
  double sum = 0;
  std::size_t count = 0;
  for (std::int64_t seed = 0; count < 10000; ++seed) {
    const auto inst = generate(40, 1.0, seed);
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t j = i + 1; j < 40; ++j) {
        const double v = inst.Q(i, j);
        ASSERT_GE(v, -1.0);
        ASSERT_LE(v, 1.0);
        sum += v;
        ++count;
      }
  }
  EXPECT_LE(std::abs(sum / static_cast<double>(count)), 0.05);
}

TEST(Generate, RejectsBadArguments) {
  EXPECT_THROW(generate(0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(generate(3, 0.0, 0), InvalidArgument);
  EXPECT_THROW(generate(3, -1.0, 0), InvalidArgument);
}

TEST(InstanceFile, RoundTripIsExact) {
  const auto path = temp_file("roundtrip.json");
  // Irrational-looking values exercise full precision.
  const auto inst = generate(10, 5.0, 123);
  save(inst, path);
  const auto back = load(path);
  EXPECT_EQ(back, inst);
  for (std::size_t k = 0; k < inst.Q().data().size(); ++k) EXPECT_EQ(back.Q().data()[k], inst.Q().data()[k]);

  const auto no_meta = oracle::random_instance(4, 9);
  save(no_meta, path);
  EXPECT_EQ(load(path), no_meta);
  std::filesystem::remove(path);
}

TEST(InstanceFile, SchemaErrors) {
  const auto path = temp_file("bad.json");
  auto write = [&](const std::string& text) {
    std::ofstream(path) << text;
  };
  write(R"({"version":1,"n":2,"Q":[[1,0],[0,1]],"c":[1,2,3],"meta":null})");
  EXPECT_THROW(load(path), ParseError);
  write(R"({"version":1,"n":2,"Q":[[1,0.5],[0.25,1]],"c":[1,2],"meta":null})");
  try {
    load(path);
    FAIL() << "expected symmetry error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("symmetric"), std::string::npos);
  }
  write(R"({"version":1,"n":2,"c":[1,2]})");
  EXPECT_THROW(load(path), ParseError);
  write(R"({"version":1,"n":2,"Q":[[1,0],[0]],"c":[1,2]})");
  EXPECT_THROW(load(path), ParseError);
  write(R"({"version":7,"n":1,"Q":[[1]],"c":[1]})");
  EXPECT_THROW(load(path), ParseError);
  write("not json");
  EXPECT_THROW(load(path), ParseError);
  std::filesystem::remove(path);
  EXPECT_THROW(load(path), Error);
}

TEST(BoxRescaling, ObjectiveMatchesUpToConstant) {
  const auto orig = oracle::random_instance(5, 17);
  const BoxRescaling box({-2, 0, 1, -5, -1}, {2, 3, 4, 0, 1});
  const auto scaled = box.apply(orig.Q(), orig.c());
  std::mt19937_64 eng(3);
  for (int t = 0; t < 20; ++t) {
    const auto y = oracle::random_box_point(5, eng);
    const auto x = box.to_original(y);
    EXPECT_NEAR(objective(scaled.instance, y) + scaled.constant, objective(orig, x), 1e-10);
    const auto y2 = box.to_unit(x);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(y2[i], y[i], 1e-14);
  }
  EXPECT_THROW(BoxRescaling({1.0}, {1.0}), InvalidArgument);
}
