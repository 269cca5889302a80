#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qesa/error.hpp"

namespace qesa {

/// One coupling term J * s_i * s_j with i < j.
struct Coupling {
  std::size_t i;
  std::size_t j;
  double value;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// Ising energy E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset.
///
/// Couplings are kept sorted by (i, j) with unique keys. The offset carries
/// constants dropped by the QP-to-Ising reductions so that energies equal
/// objective values (or objective deltas) exactly.
class IsingModel {
public:
  IsingModel() = default;
  explicit IsingModel(std::size_t n) : h_(n, 0.0) {
    if (n == 0) throw InvalidArgument("IsingModel: n must be at least 1");
  }
  IsingModel(std::vector<double> h, std::initializer_list<Coupling> couplings, double offset = 0.0)
      : h_(std::move(h)), offset_(offset) {
    if (h_.empty()) throw InvalidArgument("IsingModel: n must be at least 1");
    for (const auto& c : couplings) add_coupling(c.i, c.j, c.value);
  }

  [[nodiscard]] std::size_t n() const noexcept { return h_.size(); }
  [[nodiscard]] const std::vector<Coupling>& couplings() const noexcept { return couplings_; }
  [[nodiscard]] const std::vector<double>& h() const noexcept { return h_; }
  [[nodiscard]] double h(std::size_t i) const noexcept { return h_[i]; }
  [[nodiscard]] double offset() const noexcept { return offset_; }

  void set_field(std::size_t i, double value) {
    check_index(i);
    h_[i] = value;
  }
  void set_offset(double value) noexcept { offset_ = value; }

  /// Adds value to J_ij. Index order is normalized; i == j is rejected
  /// because s_i^2 = 1 makes a self-coupling a constant (put it in the offset).
  void add_coupling(std::size_t i, std::size_t j, double value) {
    check_index(i);
    check_index(j);
    if (i == j) throw InvalidArgument("IsingModel: self-coupling (" + std::to_string(i) + ", " + std::to_string(i) + ")");
    if (i > j) std::swap(i, j);
    const auto key_less = [](const Coupling& c, std::pair<std::size_t, std::size_t> k) {
      return c.i < k.first || (c.i == k.first && c.j < k.second);
    };
    if (couplings_.empty() || key_less(couplings_.back(), {i, j})) {
      couplings_.push_back({i, j, value});
      return;
    }
    auto it = std::lower_bound(couplings_.begin(), couplings_.end(), std::pair{i, j}, key_less);
    if (it != couplings_.end() && it->i == i && it->j == j)
      it->value += value;
    else
      couplings_.insert(it, {i, j, value});
  }

  [[nodiscard]] double coupling(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    for (const auto& c : couplings_)
      if (c.i == i && c.j == j) return c.value;
    return 0.0;
  }

  /// Largest |J_ij| or |h_i|; zero for an all-zero model.
  [[nodiscard]] double max_abs_coefficient() const noexcept {
    double m = 0.0;
    for (const auto& c : couplings_) m = std::max(m, std::abs(c.value));
    for (double v : h_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Symmetric n x n row-major coupling matrix with zero diagonal.
  [[nodiscard]] std::vector<double> dense_couplings() const {
    const std::size_t n = h_.size();
    std::vector<double> d(n * n, 0.0);
    for (const auto& c : couplings_) {
      d[c.i * n + c.j] = c.value;
      d[c.j * n + c.i] = c.value;
    }
    return d;
  }

  friend bool operator==(const IsingModel&, const IsingModel&) = default;

private:
  void check_index(std::size_t i) const {
    if (i >= h_.size())
      throw DimensionError("IsingModel: spin index " + std::to_string(i) + " out of range for n = " + std::to_string(h_.size()));
  }

  std::vector<Coupling> couplings_;
  std::vector<double> h_;
  double offset_ = 0.0;
};

/// Element of {-1, +1}^n.
class SpinVector {
public:
  SpinVector() = default;
  explicit SpinVector(std::size_t n, int value = -1) : s_(n, static_cast<std::int8_t>(value)) {
    if (value != 1 && value != -1) throw InvalidArgument("SpinVector: spin value must be -1 or +1");
  }
  SpinVector(std::initializer_list<int> values) : SpinVector(std::span<const int>(values.begin(), values.size())) {}
  explicit SpinVector(std::span<const int> values) {
    s_.reserve(values.size());
    for (int v : values) {
      if (v != 1 && v != -1) throw InvalidArgument("SpinVector: spin value " + std::to_string(v) + " is not -1 or +1");
      s_.push_back(static_cast<std::int8_t>(v));
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return s_.size(); }
  int operator[](std::size_t i) const noexcept { return s_[i]; }
  void flip(std::size_t i) noexcept { s_[i] = static_cast<std::int8_t>(-s_[i]); }
  void set(std::size_t i, int v) {
    if (v != 1 && v != -1) throw InvalidArgument("SpinVector: spin value must be -1 or +1");
    s_[i] = static_cast<std::int8_t>(v);
  }

  [[nodiscard]] std::vector<double> to_doubles() const { return {s_.begin(), s_.end()}; }
  [[nodiscard]] std::vector<int> to_ints() const { return {s_.begin(), s_.end()}; }

  [[nodiscard]] SpinVector flipped() const {
    SpinVector r = *this;
    for (auto& v : r.s_) v = static_cast<std::int8_t>(-v);
    return r;
  }

  friend bool operator==(const SpinVector&, const SpinVector&) = default;
  /// Lexicographic with -1 < +1.
  friend auto operator<=>(const SpinVector& a, const SpinVector& b) { return a.s_ <=> b.s_; }

private:
  std::vector<std::int8_t> s_;
};

inline double energy(const IsingModel& m, const SpinVector& s) {
  require_dim(m.n(), s.size(), "energy");
  double e = 0.0;
  for (const auto& c : m.couplings()) e += c.value * static_cast<double>(s[c.i] * s[c.j]);
  for (std::size_t i = 0; i < m.n(); ++i) e += m.h(i) * static_cast<double>(s[i]);
  return e + m.offset();
}

/// Output of any sampler backend. best_energy always includes the offset and
/// is recomputed with energy(), never taken from the backend.
struct SampleResult {
  SpinVector best;
  double best_energy = 0.0;
  std::size_t num_samples = 0;
  std::chrono::duration<double> sampler_time{0.0};
};

/// Sampler settings shared by all backends.
///
/// inner_sweeps replaces the hardware annealing time for the classical
/// backend; the two are not equivalent. The classical defaults are our own.
struct SamplerConfig {
  std::size_t num_samples = 1000;
  std::size_t inner_sweeps = 100;
  std::uint64_t seed = 0;
  std::size_t exact_cap = 24;
  /// Shell command for the external backend. Falls back to the
  /// QESA_EXTERNAL_SAMPLER environment variable when unset.
  std::optional<std::string> external_command;
  std::chrono::duration<double> external_timeout{60.0};

  void validate() const {
    if (num_samples < 1) throw InvalidArgument("SamplerConfig: num_samples must be at least 1");
    if (inner_sweeps < 1) throw InvalidArgument("SamplerConfig: inner_sweeps must be at least 1");
  }
};

}  // namespace qesa
