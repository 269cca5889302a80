// qesa: generate instances, solve them, and run the benchmark grid.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qesa.hpp"

namespace fs = std::filesystem;
using namespace qesa;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

/// Thrown for bad flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScheduleFlags {
  ScheduleConfig cfg;
  std::string cooling = "exponential";

  void add(CLI::App& app) {
    app.add_option("--t-max", cfg.t_max, "Initial temperature")->capture_default_str();
    app.add_option("--t-min", cfg.t_min, "Final temperature")->capture_default_str();
    app.add_option("--steps", cfg.steps, "Outer-loop steps")->capture_default_str();
    app.add_option("--k0", cfg.k0, "Initial step size")->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "Step-size decay per step")->capture_default_str();
    app.add_option("--cooling", cooling, "Cooling form")
        ->check(CLI::IsMember({"exponential", "linear"}))
        ->capture_default_str();
  }

  ScheduleConfig get() {
    cfg.cooling = cooling_from_string(cooling);
    cfg.validate();
    return cfg;
  }
};

struct SamplerFlags {
  SamplerConfig cfg;
  std::string tag;
  double timeout_s = 60.0;

  explicit SamplerFlags(std::string default_tag) : tag(std::move(default_tag)) {}

  void add(CLI::App& app) {
    app.add_option("--sampler", tag, "Ising sampler: auto, exact, classical, random or external")
        ->check(CLI::IsMember({"auto", "exact", "classical", "random", "external"}))
        ->capture_default_str();
    app.add_option("--num-samples", cfg.num_samples, "Samples (restarts) per subproblem")->capture_default_str();
    app.add_option("--sweeps", cfg.inner_sweeps, "Sweeps per classical-annealing restart")->capture_default_str();
    app.add_option("--sampler-seed", cfg.seed, "Base seed of the sampler")->capture_default_str();
    app.add_option("--exact-cap", cfg.exact_cap, "Largest n for exact enumeration")->capture_default_str();
    app.add_option("--external-timeout", timeout_s, "Seconds to wait for the external sampler")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  SamplerConfig get(bool external_used) {
    cfg.external_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    cfg.validate();
    if (external_used && !external_sampler_command(cfg))
      throw UsageError(std::string("the external sampler needs a command: set ") + kExternalSamplerEnv +
                       ", e.g. " + kExternalSamplerEnv + "=\"python3 my_sampler.py\"");
    return cfg;
  }
};

struct GridFlags {
  std::vector<std::size_t> dims{50, 100, 150};
  std::vector<double> scales{1.0, 5.0, 10.0, 20.0};
  std::vector<std::int64_t> seeds{0, 1, 2, 3, 4};
  std::size_t jobs = 1;
  std::size_t reference_max_n = 12;
  std::string out = "results";
  bool plot = false;

  void add(CLI::App& app) {
    app.add_option("--dims", dims, "Problem sizes")->delimiter(',')->capture_default_str();
    app.add_option("--scales", scales, "Diagonal scales")->delimiter(',')->capture_default_str();
    app.add_option("--seeds", seeds, "Instance seeds")->delimiter(',')->capture_default_str();
    app.add_option("--jobs,-j", jobs, "Parallel grid cells")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--reference-max-n", reference_max_n, "Largest n with an independent reference")
        ->capture_default_str();
    app.add_option("-o,--out", out, "Output directory")->capture_default_str();
    app.add_flag("--plot", plot, "Also write plot-data TSV");
  }

  void fill(bench::ExperimentGrid& g) const {
    g.dims = dims;
    g.diag_scales = scales;
    g.seeds = seeds;
    g.jobs = jobs;
    g.reference_max_n = reference_max_n;
  }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

void write_text(const fs::path& path, const std::string& text) {
  auto os = open_output(path);
  os << text;
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

std::string summarize_failures(std::size_t failures, std::size_t rows) {
  return failures ? " (" + std::to_string(failures) + " of " + std::to_string(rows) + " rows failed)" : "";
}

int cmd_generate(std::size_t n, double scale, std::int64_t seed, const std::string& out) {
  const QpInstance inst = generate(n, scale, seed);
  save(inst, out);
  std::cout << "wrote " << out << " (n=" << n << ", scale=" << bench::format_double(scale) << ", seed=" << seed
            << ")\n";
  return kOk;
}

struct SolveFlags {
  std::string instance;
  std::string solver = "qesa";
  std::uint64_t seed = 0;
  double p = 1.0;
  std::size_t budget = 0;
  std::size_t pg_iters = 1000;
  double pg_step = 0.0;
  bool json = false;
  bool trajectory = false;
  std::string out;
};

int cmd_solve(SolveFlags& f, ScheduleFlags& sf, SamplerFlags& smp) {
  static const std::vector<std::string> tags{"qesa",         "qesa_exact",   "qesa_random",   "qesa_external", "sa",
                                             "projected_gradient", "corner_exact", "random_search", "reference"};
  if (std::find(tags.begin(), tags.end(), f.solver) == tags.end()) throw UsageError("unknown solver '" + f.solver + "'");
  const bool external = f.solver == "qesa_external" || (f.solver == "qesa" && smp.tag == "external");
  const ScheduleConfig schedule = sf.get();
  const SamplerConfig sampler = smp.get(external);
  const DirectionPolicy policy{f.p, 0};
  policy.validate();

  const QpInstance inst = load(f.instance);
  bench::ExperimentGrid g;
  g.schedule = schedule;
  g.sampler = sampler;
  g.sampler_tag = smp.tag;
  g.random_search_budget = f.budget;
  g.pg_iters = f.pg_iters;
  g.pg_step = f.pg_step;
  const auto seed = static_cast<std::int64_t>(f.seed);

  SolveReport r;
  std::string backend;
  if (f.solver.starts_with("qesa")) {
    backend = f.solver == "qesa" ? resolve_sampler_tag(smp.tag, inst.n(), sampler) : f.solver.substr(5);
    const auto sc = bench::detail::cell_sampler(g, seed);
    const AnySampler s = make_sampler(backend, sc, inst.n());
    r = qesa_solve(inst, schedule, s, policy, f.seed, SolveOptions{f.trajectory, f.solver});
  } else if (f.solver == "reference") {
    r = bench::reference_solution(inst, {}, f.seed, sampler.exact_cap);
  } else {
    r = bench::run_solver(f.solver, inst, g, seed);
  }

  const double frac = bench::boundary_fraction(r);
  if (f.json) {
    auto j = report_to_json(r);
    j["n"] = inst.n();
    j["boundary_fraction"] = frac;
    if (!backend.empty()) j["sampler"] = backend;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "solver          " << r.solver << (backend.empty() ? "" : " (sampler " + backend + ")") << '\n'
              << "n               " << inst.n() << '\n'
              << "best_f          " << bench::format_double(r.best_f) << '\n'
              << "boundary        " << frac << '\n'
              << "accepted        " << r.accepted_count << " of " << r.steps << '\n'
              << "evaluations     " << r.eval_count << '\n'
              << "wall time       " << r.wall_time_s << " s\n"
              << "sampler time    " << r.sampler_time_s << " s\n";
    if (r.corner_restricted) std::cout << "note            optimal among corners only\n";
  }
  if (!f.out.empty()) write_text(f.out, report_to_json(r).dump(2) + "\n");
  return kOk;
}

int cmd_bench(GridFlags& gf, ScheduleFlags& sf, SamplerFlags& smp, const std::vector<std::string>& solvers,
              std::size_t budget) {
  bench::ExperimentGrid g;
  gf.fill(g);
  g.solvers = solvers;
  g.sampler_tag = smp.tag;
  g.random_search_budget = budget;
  for (const auto& s : solvers)
    if (!bench::is_solver_tag(s)) throw UsageError("unknown solver '" + s + "'");
  const bool external =
      std::ranges::find(solvers, "qesa_external") != solvers.end() ||
      (smp.tag == "external" && std::ranges::find(solvers, "qesa") != solvers.end());
  g.schedule = sf.get();
  g.sampler = smp.get(external);
  g.validate();

  const auto rows = bench::run_grid(g);
  const fs::path dir(gf.out);
  bench::write_grid_csv(dir / "grid.csv", rows);
  if (gf.plot) {
    auto os = open_output(dir / "grid.tsv");
    bench::write_grid_tsv(os, rows);
  }
  std::size_t failures = 0;
  for (const auto& r : rows) failures += r.failed();
  const auto problems = bench::audit(rows);
  std::cout << "wrote " << (dir / "grid.csv").string() << ": " << rows.size() << " rows"
            << summarize_failures(failures, rows.size()) << '\n';
  for (const auto& p : problems) std::cerr << "audit: " << p << '\n';
  return problems.empty() ? kOk : kRuntime;
}

template <class Sweep>
int cmd_sweep(GridFlags& gf, ScheduleFlags& sf, SamplerFlags& smp, const std::string& name, Sweep&& sweep) {
  bench::ExperimentGrid g;
  gf.fill(g);
  g.sampler_tag = smp.tag;
  g.schedule = sf.get();
  g.sampler = smp.get(smp.tag == "external");
  g.validate(false);

  const auto rows = sweep(g);
  const fs::path dir(gf.out);
  bench::write_sweep_csv(dir / (name + ".csv"), rows);
  if (gf.plot) {
    auto os = open_output(dir / (name + ".tsv"));
    bench::write_sweep_tsv(os, rows);
  }
  std::size_t failures = 0;
  for (const auto& r : rows) failures += !r.error.empty();
  std::cout << "wrote " << (dir / (name + ".csv")).string() << ": " << rows.size() << " rows"
            << summarize_failures(failures, rows.size()) << '\n';
  return kOk;
}

int cmd_boundary(GridFlags& gf, double tol) {
  bench::ExperimentGrid g;
  gf.fill(g);
  g.validate(false);
  const auto rows = bench::boundary_study(g, tol);
  const fs::path dir(gf.out);
  {
    auto os = open_output(dir / "boundary.csv");
    bench::write_boundary_csv(os, rows);
  }
  if (gf.plot) {
    auto os = open_output(dir / "boundary.tsv");
    bench::write_boundary_tsv(os, rows);
  }
  std::map<std::pair<std::size_t, double>, std::pair<double, std::size_t>> mean;
  for (const auto& r : rows) {
    auto& m = mean[{r.n, r.diag_scale}];
    m.first += r.fraction;
    ++m.second;
  }
  std::cout << "n\tscale\tmean boundary fraction\n";
  for (const auto& [k, m] : mean)
    std::cout << k.first << '\t' << bench::format_double(k.second) << '\t' << m.first / static_cast<double>(m.second)
              << '\n';
  return kOk;
}

int cmd_audit(const std::string& path) {
  const auto rows = bench::read_grid_csv(path);
  const auto problems = bench::audit(rows);
  for (const auto& p : problems) std::cerr << p << '\n';
  std::cout << rows.size() << " rows, " << problems.size() << " mismatches\n";
  return problems.empty() ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-enhanced simulated annealing for box-constrained quadratic programs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a TOML/INI file");

  // generate
  std::size_t gen_n = 10;
  double gen_scale = 1.0;
  std::int64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a random instance file");
  gen->add_option("-n", gen_n, "Dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--scale", gen_scale, "Diagonal scale")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed", gen_seed, "Instance seed")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output file")->required();

  // solve
  SolveFlags solve_flags;
  ScheduleFlags solve_schedule;
  SamplerFlags solve_sampler("classical");
  auto* solve = app.add_subcommand("solve", "Solve one instance file");
  solve->add_option("instance", solve_flags.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  solve->add_option("--solver", solve_flags.solver,
                    "qesa, qesa_exact, qesa_random, qesa_external, sa, projected_gradient, corner_exact, "
                    "random_search or reference")
      ->capture_default_str();
  solve->add_option("--seed", solve_flags.seed, "Solver seed")->capture_default_str();
  solve->add_option("--p", solve_flags.p, "Probability of keeping each direction entry")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  solve->add_option("--budget", solve_flags.budget, "Random-search points (0 = steps + 1)")->capture_default_str();
  solve->add_option("--pg-iters", solve_flags.pg_iters, "Projected-gradient iterations")->capture_default_str();
  solve->add_option("--pg-step", solve_flags.pg_step, "Projected-gradient step (0 = 1/||Q||_F)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  solve->add_flag("--json", solve_flags.json, "Print the report as JSON");
  solve->add_flag("--trajectory", solve_flags.trajectory, "Record the per-step trajectory");
  solve->add_option("-o,--out", solve_flags.out, "Also write the JSON report to this file");
  solve_schedule.add(*solve);
  solve_sampler.add(*solve);

  // bench
  GridFlags bench_grid;
  ScheduleFlags bench_schedule;
  SamplerFlags bench_sampler("auto");
  std::vector<std::string> bench_solvers{"qesa", "sa", "projected_gradient", "random_search", "reference"};
  std::size_t bench_budget = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Run the solver-comparison grid");
  bench_grid.add(*bench_cmd);
  bench_schedule.add(*bench_cmd);
  bench_sampler.add(*bench_cmd);
  bench_cmd->add_option("--solvers", bench_solvers, "Solver tags")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--budget", bench_budget, "Random-search points (0 = steps + 1)")->capture_default_str();

  // sweep-steps
  GridFlags steps_grid;
  ScheduleFlags steps_schedule;
  SamplerFlags steps_sampler("auto");
  std::vector<std::size_t> steps_list{5, 10, 20, 40, 60, 80, 100};
  auto* steps_cmd = app.add_subcommand("sweep-steps", "QESA final energy against the number of steps");
  steps_grid.add(*steps_cmd);
  steps_schedule.add(*steps_cmd);
  steps_sampler.add(*steps_cmd);
  steps_cmd->add_option("--steps-list", steps_list, "Step counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // sweep-p
  GridFlags p_grid;
  ScheduleFlags p_schedule;
  SamplerFlags p_sampler("auto");
  std::vector<double> p_list{0.0, 0.25, 0.5, 0.75, 1.0};
  auto* p_cmd = app.add_subcommand("sweep-p", "QESA final energy against the direction retain probability");
  p_grid.add(*p_cmd);
  p_schedule.add(*p_cmd);
  p_sampler.add(*p_cmd);
  p_cmd->add_option("--p-list", p_list, "Retain probabilities")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  // boundary
  GridFlags boundary_grid;
  double boundary_tol = 1e-6;
  auto* boundary_cmd = app.add_subcommand("boundary", "Boundary fraction of reference solutions");
  boundary_grid.add(*boundary_cmd);
  boundary_cmd->add_option("--tol", boundary_tol, "Distance from +-1 counted as boundary")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  // audit
  std::string audit_path;
  auto* audit_cmd = app.add_subcommand("audit", "Recompute best_f at every best_x of a grid CSV");
  audit_cmd->add_option("csv", audit_path, "grid.csv")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_n, gen_scale, gen_seed, gen_out);
    if (solve->parsed()) return cmd_solve(solve_flags, solve_schedule, solve_sampler);
    if (bench_cmd->parsed()) return cmd_bench(bench_grid, bench_schedule, bench_sampler, bench_solvers, bench_budget);
    if (steps_cmd->parsed())
      return cmd_sweep(steps_grid, steps_schedule, steps_sampler, "sweep_steps",
                       [&](const bench::ExperimentGrid& g) { return bench::sweep_steps(g, steps_list); });
    if (p_cmd->parsed())
      return cmd_sweep(p_grid, p_schedule, p_sampler, "sweep_p",
                       [&](const bench::ExperimentGrid& g) { return bench::sweep_p(g, p_list); });
    if (boundary_cmd->parsed()) return cmd_boundary(boundary_grid, boundary_tol);
    if (audit_cmd->parsed()) return cmd_audit(audit_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << bench::detail::describe(e) << '\n';
    return kRuntime;
  }
  return kUsage;
}
