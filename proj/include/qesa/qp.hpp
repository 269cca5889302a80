#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qesa/error.hpp"
#include "qesa/rng.hpp"

namespace qesa {

/// Dense row-major square matrix.
class Matrix {
public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  Matrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major)) {
    require_dim(n * n, data_.size(), "Matrix storage");
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * n_, n_};
  }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

  [[nodiscard]] Matrix transposed() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  [[nodiscard]] bool is_symmetric() const noexcept {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Generation parameters recorded alongside generated instances.
struct InstanceMeta {
  double diag_scale = 1.0;
  std::int64_t seed = 0;
  double density = 1.0;

  friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

/// Box-constrained QP: minimize 0.5 x'Qx + c'x over x in [-1, 1]^n.
///
/// Q is symmetrized on construction as (Q + Q')/2, which reproduces an
/// already-symmetric input bit for bit. Instances are immutable.
class QpInstance {
public:
  QpInstance(Matrix q, std::vector<double> c, std::optional<InstanceMeta> meta = std::nullopt)
      : q_(std::move(q)), c_(std::move(c)), meta_(meta) {
    if (q_.size() == 0) throw InvalidArgument("QpInstance: dimension must be at least 1");
    require_dim(q_.size(), c_.size(), "QpInstance linear term");
    was_symmetric_ = q_.is_symmetric();
    if (!was_symmetric_) {
      const std::size_t n = q_.size();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double avg = 0.5 * (q_(i, j) + q_(j, i));
          q_(i, j) = avg;
          q_(j, i) = avg;
        }
    }
  }

  [[nodiscard]] std::size_t n() const noexcept { return q_.size(); }
  [[nodiscard]] const Matrix& Q() const noexcept { return q_; }
  [[nodiscard]] double Q(std::size_t i, std::size_t j) const noexcept { return q_(i, j); }
  [[nodiscard]] const std::vector<double>& c() const noexcept { return c_; }
  [[nodiscard]] const std::optional<InstanceMeta>& meta() const noexcept { return meta_; }
  /// False if the constructor had to symmetrize its input.
  [[nodiscard]] bool was_symmetric() const noexcept { return was_symmetric_; }

  friend bool operator==(const QpInstance& a, const QpInstance& b) {
    return a.q_ == b.q_ && a.c_ == b.c_ && a.meta_ == b.meta_;
  }

private:
  Matrix q_;
  std::vector<double> c_;
  std::optional<InstanceMeta> meta_;
  bool was_symmetric_ = true;
};

/// A point of the box [-1, 1]^n. Construction rejects infeasible input;
/// use Point::clipped to project.
class Point {
public:
  Point() = default;
  explicit Point(std::vector<double> x) : x_(std::move(x)) {
    for (std::size_t i = 0; i < x_.size(); ++i)
      if (!(x_[i] >= -1.0 && x_[i] <= 1.0))
        throw InvalidArgument("Point: coordinate " + std::to_string(i) + " outside [-1, 1]");
  }

  static Point clipped(std::vector<double> x) {
    for (double& v : x) v = std::clamp(v, -1.0, 1.0);
    return Point(std::move(x));
  }

  [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t i) const noexcept { return x_[i]; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return x_; }
  operator std::span<const double>() const noexcept { return x_; }

  friend bool operator==(const Point&, const Point&) = default;

private:
  std::vector<double> x_;
};

/// f(x) = 0.5 x'Qx + c'x. Accepts any vector of the right length, feasible or not.
inline double objective(const QpInstance& inst, std::span<const double> x) {
  require_dim(inst.n(), x.size(), "objective");
  const std::size_t n = inst.n();
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = inst.Q().row(i);
    double qx = 0.0;
    for (std::size_t j = 0; j < n; ++j) qx += row[j] * x[j];
    f += x[i] * (0.5 * qx + inst.c()[i]);
  }
  return f;
}

/// Qx + c.
inline std::vector<double> gradient(const QpInstance& inst, std::span<const double> x) {
  require_dim(inst.n(), x.size(), "gradient");
  const std::size_t n = inst.n();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = inst.Q().row(i);
    double qx = 0.0;
    for (std::size_t j = 0; j < n; ++j) qx += row[j] * x[j];
    g[i] = qx + inst.c()[i];
  }
  return g;
}

/// Random dense instance. Upper triangle (diagonal included) and c are drawn
/// uniformly from [-1, 1) in row-major order, the diagonal is then multiplied
/// by diag_scale and the upper triangle mirrored.
inline QpInstance generate(std::size_t n, double diag_scale, std::int64_t seed) {
  if (n == 0) throw InvalidArgument("generate: n must be at least 1");
  if (!(diag_scale > 0.0)) throw InvalidArgument("generate: diag_scale must be positive");
  Rng rng(static_cast<std::uint64_t>(seed));
  Matrix q(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = rng.uniform(-1.0, 1.0);
      if (i == j) v *= diag_scale;
      q(i, j) = v;
      q(j, i) = v;
    }
  std::vector<double> c(n);
  for (double& v : c) v = rng.uniform(-1.0, 1.0);
  return QpInstance(std::move(q), std::move(c), InstanceMeta{diag_scale, seed, 1.0});
}

/// Affine map between a general box [lower, upper] and [-1, 1]^n.
///
/// With x = mid + half * y the objective becomes
/// 0.5 y'(D Q D) y + (D (Q mid + c))' y + constant, D = diag(half).
class BoxRescaling {
public:
  BoxRescaling(std::vector<double> lower, std::vector<double> upper)
      : mid_(lower.size()), half_(lower.size()) {
    require_dim(lower.size(), upper.size(), "BoxRescaling bounds");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(upper[i] > lower[i])) throw InvalidArgument("BoxRescaling: empty box in coordinate " + std::to_string(i));
      mid_[i] = 0.5 * (lower[i] + upper[i]);
      half_[i] = 0.5 * (upper[i] - lower[i]);
    }
  }

  struct Scaled {
    QpInstance instance;
    double constant;  // f_original(x) == objective(instance, y) + constant
  };

  [[nodiscard]] Scaled apply(const Matrix& q, std::span<const double> c) const {
    const std::size_t n = mid_.size();
    require_dim(n, q.size(), "BoxRescaling matrix");
    require_dim(n, c.size(), "BoxRescaling linear term");
    const QpInstance original(q, std::vector<double>(c.begin(), c.end()));
    Matrix qs(n);
    std::vector<double> cs = gradient(original, mid_);
    for (std::size_t i = 0; i < n; ++i) {
      cs[i] *= half_[i];
      for (std::size_t j = 0; j < n; ++j) qs(i, j) = half_[i] * original.Q(i, j) * half_[j];
    }
    const double constant = objective(original, mid_);
    return {QpInstance(std::move(qs), std::move(cs)), constant};
  }

  [[nodiscard]] std::vector<double> to_original(std::span<const double> y) const {
    require_dim(mid_.size(), y.size(), "BoxRescaling::to_original");
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = mid_[i] + half_[i] * y[i];
    return x;
  }

  [[nodiscard]] std::vector<double> to_unit(std::span<const double> x) const {
    require_dim(mid_.size(), x.size(), "BoxRescaling::to_unit");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mid_[i]) / half_[i];
    return y;
  }

private:
  std::vector<double> mid_;
  std::vector<double> half_;
};

}  // namespace qesa
