// Generate a small random instance and compare QESA against the baselines.
//
//   demo_solve_random_instance [n] [diag_scale] [seed]

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "qesa.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 12;
  const double scale = argc > 2 ? std::strtod(argv[2], nullptr) : 1.0;
  const std::int64_t seed = argc > 3 ? std::strtoll(argv[3], nullptr, 10) : 0;

  const auto inst = qesa::generate(n, scale, seed);
  const qesa::ScheduleConfig schedule;  // t_max 1000, t_min 0.1, 100 steps, k0 0.1, alpha 0.95

  qesa::SamplerConfig sa_cfg;
  sa_cfg.num_samples = 200;
  sa_cfg.inner_sweeps = 50;

  std::vector<qesa::SolveReport> reports;
  reports.push_back(qesa::qesa_solve(inst, schedule, qesa::ExactSampler{}, {}, 1));
  reports.push_back(qesa::solve_sa_baseline(inst, schedule, 1, sa_cfg));
  reports.push_back(qesa::solve_random_search(inst, schedule.steps + 1, 1));
  reports.push_back(qesa::solve_projected_gradient(inst, {0.05, 1000, std::nullopt}, 1));
  const auto ref = qesa::bench::reference_solution(inst);

  std::cout << "n=" << n << " scale=" << scale << " seed=" << seed << "  reference f=" << ref.best_f << "\n\n";
  std::cout << std::left << std::setw(20) << "solver" << std::setw(16) << "best_f" << std::setw(12) << "gap"
            << "boundary\n";
  for (const auto& r : reports)
    std::cout << std::setw(20) << r.solver << std::setw(16) << r.best_f << std::setw(12) << r.best_f - ref.best_f
              << qesa::bench::boundary_fraction(r) << '\n';
}
