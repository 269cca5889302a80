#pragma once

#include <cmath>
#include <span>

#include "qesa/error.hpp"
#include "qesa/ising.hpp"
#include "qesa/qp.hpp"

namespace qesa {

// Both reductions convert the quadratic form 0.5 s'As into the i<j storage
// convention: 0.5 s'As = sum_{i<j} A_ij s_i s_j + 0.5 * trace(A), since s_i^2 = 1.
// The trace term goes into the offset.

/// Direction subproblem at x with step k. For every s in {-1, +1}^n,
/// energy(model, s) == objective(x + k s) - objective(x).
inline IsingModel direction_ising(const QpInstance& inst, std::span<const double> x, double k) {
  require_dim(inst.n(), x.size(), "direction_ising");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("direction_ising: step size must be positive and finite");
  const std::size_t n = inst.n();
  const double kk = k * k;
  IsingModel m(n);
  const auto g = gradient(inst, x);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m.set_field(i, k * g[i]);
    trace += inst.Q(i, i);
    for (std::size_t j = i + 1; j < n; ++j)
      if (const double q = inst.Q(i, j); q != 0.0) m.add_coupling(i, j, kk * q);
  }
  m.set_offset(0.5 * kk * trace);
  return m;
}

/// Corner subproblem. For every corner x in {-1, +1}^n,
/// energy(model, x) == objective(x), so the ground state is the best corner.
inline IsingModel init_ising(const QpInstance& inst) {
  const std::size_t n = inst.n();
  IsingModel m(n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m.set_field(i, inst.c()[i]);
    trace += inst.Q(i, i);
    for (std::size_t j = i + 1; j < n; ++j)
      if (const double q = inst.Q(i, j); q != 0.0) m.add_coupling(i, j, q);
  }
  m.set_offset(0.5 * trace);
  return m;
}

}  // namespace qesa
