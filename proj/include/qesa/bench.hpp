#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "qesa/backends.hpp"
#include "qesa/baselines.hpp"
#include "qesa/error.hpp"
#include "qesa/qesa.hpp"
#include "qesa/qp.hpp"
#include "qesa/report.hpp"
#include "qesa/schedule.hpp"

namespace qesa::bench {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Solver tags understood by run_grid.
///   qesa           QESA with the grid's sampler backend
///   qesa_exact     QESA with exact enumeration
///   qesa_random    QESA with uniformly random directions
///   qesa_external  QESA with the external sampler process
///   sa             the classical annealing baseline
///   projected_gradient, corner_exact, random_search
///   reference      the per-instance reference energy itself
inline const std::vector<std::string>& solver_tags() {
  static const std::vector<std::string> tags{"qesa",        "qesa_exact", "qesa_random",   "qesa_external",
                                             "sa",          "projected_gradient", "corner_exact", "random_search",
                                             "reference"};
  return tags;
}

inline bool is_solver_tag(const std::string& tag) {
  const auto& t = solver_tags();
  return std::find(t.begin(), t.end(), tag) != t.end();
}

struct ExperimentGrid {
  std::vector<std::size_t> dims{50, 100, 150};
  std::vector<double> diag_scales{1.0, 5.0, 10.0, 20.0};
  std::vector<std::int64_t> seeds{0, 1, 2, 3, 4};
  std::vector<std::string> solvers{"qesa", "sa", "projected_gradient", "random_search", "reference"};
  ScheduleConfig schedule{};
  SamplerConfig sampler{};
  std::string sampler_tag = "auto";  // backend of the plain "qesa" tag
  /// Instances with n up to this size get an independent reference
  /// (corner enumeration plus multistart descent); larger ones use the best
  /// value over the grid's solvers.
  std::size_t reference_max_n = 12;
  MultistartOptions reference_descent{};
  /// 0 matches the QESA evaluation count, steps + 1.
  std::size_t random_search_budget = 0;
  /// 0 picks 1 / ||Q||_F per instance.
  double pg_step = 0.0;
  std::size_t pg_iters = 1000;
  std::size_t jobs = 1;

  void validate(bool need_solvers = true) const {
    if (dims.empty() || diag_scales.empty() || seeds.empty() || (need_solvers && solvers.empty()))
      throw InvalidArgument("ExperimentGrid: dims, scales, seeds and solvers must be non-empty");
    for (std::size_t n : dims)
      if (n < 1) throw InvalidArgument("ExperimentGrid: dimensions must be at least 1");
    for (double s : diag_scales)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("ExperimentGrid: diagonal scales must be positive");
    for (const auto& s : solvers)
      if (!is_solver_tag(s)) throw InvalidArgument("ExperimentGrid: unknown solver '" + s + "'");
    if (!is_sampler_tag(sampler_tag)) throw InvalidArgument("ExperimentGrid: unknown sampler '" + sampler_tag + "'");
    if (jobs < 1) throw InvalidArgument("ExperimentGrid: jobs must be at least 1");
    if (pg_step < 0.0 || pg_iters < 1) throw InvalidArgument("ExperimentGrid: bad projected-gradient settings");
    schedule.validate();
    sampler.validate();
  }
};

struct ExperimentRecord {
  std::string solver;
  std::size_t n = 0;
  double diag_scale = 0.0;
  std::int64_t seed = 0;
  double best_f = kNaN;
  double normalized_f = kNaN;
  double wall_time_s = 0.0;
  double sampler_time_s = 0.0;
  std::size_t eval_count = 0;
  double abs_gap = kNaN;
  std::string error;
  std::vector<double> best_x;

  [[nodiscard]] bool failed() const noexcept { return !error.empty(); }
  /// Equality ignoring the two timing columns.
  [[nodiscard]] bool same_result(const ExperimentRecord& o) const;
};

/// Value relative to the reference energy, oriented so that 1 means "equals
/// the reference" and larger is better whatever the reference's sign:
/// best/ref for ref < 0, 2 - best/ref for ref > 0. Equal values give exactly 1;
/// a zero or missing reference gives NaN. abs_gap is the unambiguous metric.
inline double normalize(double best_f, double reference_f) {
  if (!std::isfinite(best_f) || !std::isfinite(reference_f)) return kNaN;
  if (best_f == reference_f) return 1.0;
  if (reference_f < 0.0) return best_f / reference_f;
  if (reference_f > 0.0) return 2.0 - best_f / reference_f;
  return kNaN;
}

/// Fraction of coordinates with |x_i| >= 1 - tol.
inline double boundary_fraction(std::span<const double> x, double tol = 1e-6) {
  if (x.empty()) return 0.0;
  std::size_t at = 0;
  for (double v : x)
    if (std::abs(v) >= 1.0 - tol) ++at;
  return static_cast<double>(at) / static_cast<double>(x.size());
}

inline double boundary_fraction(const SolveReport& r, double tol = 1e-6) { return boundary_fraction(r.best_x, tol); }

/// Reference solution: the better of exact corner enumeration (where it fits)
/// and multistart projected descent with active-set polishing.
inline SolveReport reference_solution(const QpInstance& inst, const MultistartOptions& descent = {},
                                      std::uint64_t seed = 0, std::size_t corner_cap = 24) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport best = solve_multistart_descent(inst, descent, mix_seed(seed, 0x4EF));
  std::size_t evals = best.eval_count;
  if (inst.n() <= corner_cap) {
    SolveReport corner = solve_corner_exact(inst, corner_cap);
    evals += corner.eval_count;
    if (corner.best_f < best.best_f) best = std::move(corner);
  }
  best.solver = "reference";
  best.eval_count = evals;
  best.wall_time_s = detail::seconds_since(t0);
  return best;
}

namespace detail {

inline std::uint64_t solve_seed(std::int64_t instance_seed) { return static_cast<std::uint64_t>(instance_seed); }

inline SamplerConfig cell_sampler(const ExperimentGrid& g, std::int64_t instance_seed) {
  SamplerConfig sc = g.sampler;
  sc.seed = mix_seed(g.sampler.seed, solve_seed(instance_seed));
  return sc;
}

inline SolveReport run_qesa(const QpInstance& inst, const ExperimentGrid& g, const std::string& sampler_tag,
                            std::int64_t seed, const std::string& name, const ScheduleConfig& schedule,
                            const DirectionPolicy& policy = {}) {
  const auto sc = cell_sampler(g, seed);
  const AnySampler sampler = make_sampler(sampler_tag, sc, inst.n());
  return qesa_solve(inst, schedule, sampler, policy, solve_seed(seed), SolveOptions{false, name});
}

inline double frobenius(const QpInstance& inst) {
  double s = 0.0;
  for (double v : inst.Q().data()) s += v * v;
  return std::sqrt(s);
}

}  // namespace detail

/// Run one solver tag on one instance. "reference" is handled by run_grid.
inline SolveReport run_solver(const std::string& tag, const QpInstance& inst, const ExperimentGrid& g,
                              std::int64_t seed) {
  if (tag == "qesa") return detail::run_qesa(inst, g, g.sampler_tag, seed, tag, g.schedule);
  if (tag == "qesa_exact") return detail::run_qesa(inst, g, "exact", seed, tag, g.schedule);
  if (tag == "qesa_random") return detail::run_qesa(inst, g, "random", seed, tag, g.schedule);
  if (tag == "qesa_external") return detail::run_qesa(inst, g, "external", seed, tag, g.schedule);
  if (tag == "sa")
    return solve_sa_baseline(inst, g.schedule, detail::solve_seed(seed), detail::cell_sampler(g, seed));
  if (tag == "projected_gradient") {
    const double frob = detail::frobenius(inst);
    const double eta = g.pg_step > 0.0 ? g.pg_step : (frob > 0.0 ? 1.0 / frob : 1.0);
    return solve_projected_gradient(inst, {eta, g.pg_iters, std::nullopt}, detail::solve_seed(seed));
  }
  if (tag == "corner_exact") return solve_corner_exact(inst, g.sampler.exact_cap);
  if (tag == "random_search") {
    const std::size_t budget = g.random_search_budget ? g.random_search_budget : g.schedule.steps + 1;
    return solve_random_search(inst, budget, detail::solve_seed(seed));
  }
  throw InvalidArgument("unknown solver '" + tag + "'");
}

namespace detail {

template <class Task>
void parallel_for(std::size_t count, std::size_t jobs, Task&& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) task(i);
    });
  for (auto& t : pool) t.join();
}

struct InstanceKey {
  std::size_t n;
  double scale;
  std::int64_t seed;
};

inline std::vector<InstanceKey> instance_keys(const ExperimentGrid& g) {
  std::vector<InstanceKey> keys;
  for (std::size_t n : g.dims)
    for (double s : g.diag_scales)
      for (std::int64_t seed : g.seeds) keys.push_back({n, s, seed});
  return keys;
}

inline ExperimentRecord record_from(const std::string& solver, const InstanceKey& key, const SolveReport& r) {
  ExperimentRecord rec;
  rec.solver = solver;
  rec.n = key.n;
  rec.diag_scale = key.scale;
  rec.seed = key.seed;
  rec.best_f = r.best_f;
  rec.wall_time_s = r.wall_time_s;
  rec.sampler_time_s = r.sampler_time_s;
  rec.eval_count = r.eval_count;
  rec.best_x = r.best_x.values();
  return rec;
}

inline ExperimentRecord failed_record(const std::string& solver, const InstanceKey& key, std::string what) {
  ExperimentRecord rec;
  rec.solver = solver;
  rec.n = key.n;
  rec.diag_scale = key.scale;
  rec.seed = key.seed;
  rec.error = what.empty() ? "error" : std::move(what);
  return rec;
}

/// Message of an exception including nested causes.
inline std::string describe(const std::exception& e) {
  std::string out = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    out += ": " + describe(inner);
  } catch (...) {
  }
  return out;
}

inline std::optional<SolveReport> instance_reference(const QpInstance& inst, const ExperimentGrid& g,
                                                     std::int64_t seed) {
  if (inst.n() > g.reference_max_n) return std::nullopt;
  return reference_solution(inst, g.reference_descent, solve_seed(seed), g.sampler.exact_cap);
}

/// Fills normalized_f and abs_gap. Without an independent reference the best
/// successful row of the instance becomes the reference.
inline ExperimentRecord finish_instance(std::vector<ExperimentRecord>& rows, const InstanceKey& key,
                                        const std::optional<SolveReport>& ref) {
  ExperimentRecord ref_row;
  if (ref) {
    ref_row = record_from("reference", key, *ref);
  } else {
    const ExperimentRecord* best = nullptr;
    for (const auto& r : rows)
      if (!r.failed() && std::isfinite(r.best_f) && (!best || r.best_f < best->best_f)) best = &r;
    if (best) {
      ref_row = *best;
      ref_row.solver = "reference";
      ref_row.wall_time_s = 0.0;
      ref_row.sampler_time_s = 0.0;
      ref_row.eval_count = 0;
    } else {
      ref_row = failed_record("reference", key, "no successful solver on this instance");
    }
  }
  const double ref_f = ref_row.failed() ? kNaN : ref_row.best_f;
  for (auto& r : rows) {
    if (r.failed()) continue;
    r.normalized_f = normalize(r.best_f, ref_f);
    r.abs_gap = std::isfinite(ref_f) ? r.best_f - ref_f : kNaN;
  }
  if (!ref_row.failed()) {
    ref_row.normalized_f = 1.0;
    ref_row.abs_gap = 0.0;
  }
  return ref_row;
}

inline bool record_less(const ExperimentRecord& a, const ExperimentRecord& b) {
  return std::tie(a.solver, a.n, a.diag_scale, a.seed) < std::tie(b.solver, b.n, b.diag_scale, b.seed);
}

}  // namespace detail

/// Runs every (solver, n, scale, seed) cell. Solver failures become rows with
/// the error column set; rows are sorted by (solver, n, scale, seed).
inline std::vector<ExperimentRecord> run_grid(const ExperimentGrid& g) {
  g.validate();
  const auto keys = detail::instance_keys(g);
  std::vector<std::vector<ExperimentRecord>> per_instance(keys.size());
  const bool want_reference_row = std::ranges::find(g.solvers, "reference") != g.solvers.end();

  detail::parallel_for(keys.size(), g.jobs, [&](std::size_t i) {
    const auto& key = keys[i];
    auto& rows = per_instance[i];
    try {
      const QpInstance inst = generate(key.n, key.scale, key.seed);
      for (const auto& tag : g.solvers) {
        if (tag == "reference") continue;
        try {
          rows.push_back(detail::record_from(tag, key, run_solver(tag, inst, g, key.seed)));
        } catch (const std::exception& e) {
          rows.push_back(detail::failed_record(tag, key, detail::describe(e)));
        }
      }
      std::optional<SolveReport> ref;
      std::string ref_error;
      try {
        ref = detail::instance_reference(inst, g, key.seed);
      } catch (const std::exception& e) {
        ref_error = detail::describe(e);
      }
      ExperimentRecord ref_row = ref_error.empty() ? detail::finish_instance(rows, key, ref)
                                                   : detail::failed_record("reference", key, ref_error);
      if (want_reference_row) rows.push_back(std::move(ref_row));
    } catch (const std::exception& e) {
      rows.clear();
      for (const auto& tag : g.solvers) rows.push_back(detail::failed_record(tag, key, detail::describe(e)));
    }
  });

  std::vector<ExperimentRecord> out;
  for (auto& rows : per_instance)
    for (auto& r : rows) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(), detail::record_less);
  return out;
}

// CSV ------------------------------------------------------------------------

inline const std::vector<std::string>& grid_csv_header() {
  static const std::vector<std::string> h{"solver",      "n",          "diag_scale",     "seed",
                                          "best_f",      "normalized_f", "wall_time_s",  "sampler_time_s",
                                          "eval_count",  "abs_gap",    "error",          "best_x"};
  return h;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("csv: bad number '" + std::string(s) + "'");
  return v;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::string format_vector(std::span<const double> x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ' ';
    out += format_double(x[i]);
  }
  return out;
}

inline std::vector<double> parse_vector(std::string_view s) {
  std::vector<double> x;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = std::min(s.find(' ', i), s.size());
    if (j > i) x.push_back(parse_double(s.substr(i, j - i)));
    i = j + 1;
  }
  return x;
}

/// Splits CSV text into rows of fields (RFC 4180 quoting).
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw ParseError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_grid_csv(std::ostream& os, const std::vector<ExperimentRecord>& rows) {
  const auto& h = grid_csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  for (const auto& r : rows)
    os << csv_field(r.solver) << ',' << r.n << ',' << format_double(r.diag_scale) << ',' << r.seed << ','
       << format_double(r.best_f) << ',' << format_double(r.normalized_f) << ',' << format_double(r.wall_time_s)
       << ',' << format_double(r.sampler_time_s) << ',' << r.eval_count << ',' << format_double(r.abs_gap) << ','
       << csv_field(r.error) << ',' << format_vector(r.best_x) << '\n';
}

namespace detail {

inline void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void check_header(const std::vector<std::string>& got, const std::vector<std::string>& want) {
  if (got != want) throw ParseError("csv: unexpected header");
}

inline std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("csv: bad integer '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("csv: bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_grid_csv(const std::filesystem::path& path, const std::vector<ExperimentRecord>& rows) {
  auto os = detail::open_out(path);
  write_grid_csv(os, rows);
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

inline std::vector<ExperimentRecord> read_grid_csv_text(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("csv: missing header");
  detail::check_header(rows[0], grid_csv_header());
  std::vector<ExperimentRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != grid_csv_header().size()) throw ParseError("csv: row " + std::to_string(i) + " has wrong width");
    ExperimentRecord r;
    r.solver = f[0];
    r.n = detail::parse_size(f[1]);
    r.diag_scale = parse_double(f[2]);
    r.seed = detail::parse_int(f[3]);
    r.best_f = parse_double(f[4]);
    r.normalized_f = parse_double(f[5]);
    r.wall_time_s = parse_double(f[6]);
    r.sampler_time_s = parse_double(f[7]);
    r.eval_count = detail::parse_size(f[8]);
    r.abs_gap = parse_double(f[9]);
    r.error = f[10];
    r.best_x = parse_vector(f[11]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ExperimentRecord> read_grid_csv(const std::filesystem::path& path) {
  return read_grid_csv_text(detail::read_file(path));
}

inline bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

inline bool ExperimentRecord::same_result(const ExperimentRecord& o) const {
  return solver == o.solver && n == o.n && same_double(diag_scale, o.diag_scale) && seed == o.seed &&
         same_double(best_f, o.best_f) && same_double(normalized_f, o.normalized_f) && eval_count == o.eval_count &&
         same_double(abs_gap, o.abs_gap) && error == o.error && best_x == o.best_x;
}

/// Recomputes the objective at every recorded best_x (instances are
/// regenerated from n, scale and seed). Returns one message per mismatch.
inline std::vector<std::string> audit(const std::vector<ExperimentRecord>& rows, double tol = 1e-9) {
  std::vector<std::string> problems;
  std::map<std::tuple<std::size_t, double, std::int64_t>, QpInstance> cache;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.failed()) continue;
    const auto key = std::make_tuple(r.n, r.diag_scale, r.seed);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, generate(r.n, r.diag_scale, r.seed)).first;
    const std::string where = "row " + std::to_string(i + 1) + " (" + r.solver + ")";
    if (r.best_x.size() != r.n) {
      problems.push_back(where + ": best_x has " + std::to_string(r.best_x.size()) + " entries");
      continue;
    }
    const double f = objective(it->second, r.best_x);
    if (!(std::abs(f - r.best_f) <= tol))
      problems.push_back(where + ": recorded " + format_double(r.best_f) + ", recomputed " + format_double(f));
  }
  return problems;
}

// Sweeps ---------------------------------------------------------------------

struct SweepRecord {
  std::string parameter;  // "steps" or "p"
  double value = 0.0;
  std::size_t n = 0;
  double diag_scale = 0.0;
  std::int64_t seed = 0;
  double best_f = kNaN;
  double normalized_f = kNaN;
  double abs_gap = kNaN;
  double wall_time_s = 0.0;
  double sampler_time_s = 0.0;
  std::size_t eval_count = 0;
  std::string error;
  std::vector<double> best_x;
};

inline const std::vector<std::string>& sweep_csv_header() {
  static const std::vector<std::string> h{"parameter",      "value",      "n",     "diag_scale", "seed",
                                          "best_f",         "normalized_f", "abs_gap", "wall_time_s",
                                          "sampler_time_s", "eval_count", "error", "best_x"};
  return h;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows) {
  const auto& h = sweep_csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  for (const auto& r : rows)
    os << r.parameter << ',' << format_double(r.value) << ',' << r.n << ',' << format_double(r.diag_scale) << ','
       << r.seed << ',' << format_double(r.best_f) << ',' << format_double(r.normalized_f) << ','
       << format_double(r.abs_gap) << ',' << format_double(r.wall_time_s) << ',' << format_double(r.sampler_time_s)
       << ',' << r.eval_count << ',' << csv_field(r.error) << ',' << format_vector(r.best_x) << '\n';
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& rows) {
  auto os = detail::open_out(path);
  write_sweep_csv(os, rows);
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

inline std::vector<SweepRecord> read_sweep_csv_text(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("csv: missing header");
  detail::check_header(rows[0], sweep_csv_header());
  std::vector<SweepRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != sweep_csv_header().size()) throw ParseError("csv: row " + std::to_string(i) + " has wrong width");
    SweepRecord r;
    r.parameter = f[0];
    r.value = parse_double(f[1]);
    r.n = detail::parse_size(f[2]);
    r.diag_scale = parse_double(f[3]);
    r.seed = detail::parse_int(f[4]);
    r.best_f = parse_double(f[5]);
    r.normalized_f = parse_double(f[6]);
    r.abs_gap = parse_double(f[7]);
    r.wall_time_s = parse_double(f[8]);
    r.sampler_time_s = parse_double(f[9]);
    r.eval_count = detail::parse_size(f[10]);
    r.error = f[11];
    r.best_x = parse_vector(f[12]);
    out.push_back(std::move(r));
  }
  return out;
}

namespace detail {

/// Shared driver: one QESA run per (instance, value) with the schedule and
/// policy produced by `configure`.
template <class Configure>
std::vector<SweepRecord> run_sweep(const ExperimentGrid& g, const std::string& parameter,
                                   const std::vector<double>& values, Configure&& configure) {
  const auto keys = instance_keys(g);
  std::vector<std::vector<SweepRecord>> per_instance(keys.size());
  parallel_for(keys.size(), g.jobs, [&](std::size_t i) {
    const auto& key = keys[i];
    auto& rows = per_instance[i];
    std::optional<QpInstance> inst;
    std::string inst_error;
    try {
      inst.emplace(generate(key.n, key.scale, key.seed));
    } catch (const std::exception& e) {
      inst_error = describe(e);
    }
    for (double v : values) {
      SweepRecord rec;
      rec.parameter = parameter;
      rec.value = v;
      rec.n = key.n;
      rec.diag_scale = key.scale;
      rec.seed = key.seed;
      if (!inst) {
        rec.error = inst_error;
      } else {
        try {
          ScheduleConfig schedule = g.schedule;
          DirectionPolicy policy;
          configure(v, schedule, policy);
          const SolveReport r = run_qesa(*inst, g, g.sampler_tag, key.seed, "qesa", schedule, policy);
          rec.best_f = r.best_f;
          rec.wall_time_s = r.wall_time_s;
          rec.sampler_time_s = r.sampler_time_s;
          rec.eval_count = r.eval_count;
          rec.best_x = r.best_x.values();
        } catch (const std::exception& e) {
          rec.error = describe(e);
        }
      }
      rows.push_back(std::move(rec));
    }
    if (!inst) return;
    double ref_f = kNaN;
    try {
      if (auto ref = instance_reference(*inst, g, key.seed)) ref_f = ref->best_f;
    } catch (const std::exception&) {
    }
    if (std::isnan(ref_f))
      for (const auto& r : rows)
        if (r.error.empty() && (std::isnan(ref_f) || r.best_f < ref_f)) ref_f = r.best_f;
    for (auto& r : rows) {
      if (!r.error.empty()) continue;
      r.normalized_f = normalize(r.best_f, ref_f);
      r.abs_gap = std::isfinite(ref_f) ? r.best_f - ref_f : kNaN;
    }
  });
  std::vector<SweepRecord> out;
  for (auto& rows : per_instance)
    for (auto& r : rows) out.push_back(std::move(r));
  return out;
}

}  // namespace detail

/// One complete QESA run per step count. t_max, t_min, k0 and alpha stay fixed;
/// the temperature schedule is re-interpolated over each count.
inline std::vector<SweepRecord> sweep_steps(const ExperimentGrid& g, const std::vector<std::size_t>& steps) {
  g.validate(false);
  if (steps.empty()) throw InvalidArgument("sweep_steps: empty step list");
  std::vector<double> values;
  for (std::size_t s : steps) {
    if (s < 1) throw InvalidArgument("sweep_steps: step counts must be at least 1");
    values.push_back(static_cast<double>(s));
  }
  return detail::run_sweep(g, "steps", values, [](double v, ScheduleConfig& sc, DirectionPolicy&) {
    sc.steps = static_cast<std::size_t>(v);
  });
}

/// One complete QESA run per retain probability.
inline std::vector<SweepRecord> sweep_p(const ExperimentGrid& g, const std::vector<double>& ps) {
  g.validate(false);
  if (ps.empty()) throw InvalidArgument("sweep_p: empty probability list");
  for (double p : ps)
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("sweep_p: probabilities must lie in [0, 1]");
  return detail::run_sweep(g, "p", ps, [](double v, ScheduleConfig&, DirectionPolicy& pol) {
    pol.retain_probability = v;
  });
}

// Boundary analysis ----------------------------------------------------------

struct BoundaryRecord {
  std::size_t n = 0;
  double diag_scale = 0.0;
  std::int64_t seed = 0;
  double reference_f = 0.0;
  double fraction = 0.0;
  std::vector<double> x;
};

/// Boundary fraction of the reference solution of every grid instance.
inline std::vector<BoundaryRecord> boundary_study(const ExperimentGrid& g, double tol = 1e-6) {
  g.validate(false);
  if (tol < 0.0) throw InvalidArgument("boundary_study: tol must be non-negative");
  const auto keys = detail::instance_keys(g);
  std::vector<BoundaryRecord> out(keys.size());
  detail::parallel_for(keys.size(), g.jobs, [&](std::size_t i) {
    const auto& key = keys[i];
    const auto r = reference_solution(generate(key.n, key.scale, key.seed), g.reference_descent,
                                      detail::solve_seed(key.seed), g.sampler.exact_cap);
    out[i] = {key.n, key.scale, key.seed, r.best_f, boundary_fraction(r, tol), r.best_x.values()};
  });
  return out;
}

inline void write_boundary_csv(std::ostream& os, const std::vector<BoundaryRecord>& rows) {
  os << "n,diag_scale,seed,reference_f,boundary_fraction,x\n";
  for (const auto& r : rows)
    os << r.n << ',' << format_double(r.diag_scale) << ',' << r.seed << ',' << format_double(r.reference_f) << ','
       << format_double(r.fraction) << ',' << format_vector(r.x) << '\n';
}

// Plot data ------------------------------------------------------------------

namespace detail {

inline double median_of(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t k = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++k;
    }
  return k ? s / static_cast<double>(k) : kNaN;
}

}  // namespace detail

/// Coordinate histogram of reference solutions per diagonal scale, 20 bins
/// over [-1, 1], plus the mean boundary fraction of each scale.
inline void write_boundary_tsv(std::ostream& os, const std::vector<BoundaryRecord>& rows, std::size_t bins = 20) {
  std::map<double, std::vector<std::size_t>> hist;
  std::map<double, std::vector<double>> fractions;
  for (const auto& r : rows) {
    auto& h = hist.try_emplace(r.diag_scale, bins, 0).first->second;
    for (double v : r.x) {
      auto b = static_cast<std::size_t>((v + 1.0) / 2.0 * static_cast<double>(bins));
      ++h[std::min(b, bins - 1)];
    }
    fractions[r.diag_scale].push_back(r.fraction);
  }
  os << "diag_scale\tbin_lo\tbin_hi\tcount\tmean_boundary_fraction\n";
  for (const auto& [scale, h] : hist) {
    const double mean = detail::mean_of(fractions[scale]);
    for (std::size_t b = 0; b < bins; ++b) {
      const double lo = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins);
      const double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / static_cast<double>(bins);
      os << format_double(scale) << '\t' << format_double(lo) << '\t' << format_double(hi) << '\t' << h[b] << '\t'
         << format_double(mean) << '\n';
    }
  }
}

/// Solver comparison grouped by (solver, n, scale).
inline void write_grid_tsv(std::ostream& os, const std::vector<ExperimentRecord>& rows) {
  std::map<std::tuple<std::string, std::size_t, double>, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : rows) groups[{r.solver, r.n, r.diag_scale}].push_back(&r);
  os << "solver\tn\tdiag_scale\truns\tfailures\tmedian_normalized_f\tmean_normalized_f\tmedian_abs_gap\t"
        "median_best_f\tmean_wall_time_s\n";
  for (const auto& [key, group] : groups) {
    std::vector<double> norm, gap, best, wall;
    std::size_t failures = 0;
    for (const auto* r : group) {
      if (r->failed()) {
        ++failures;
        continue;
      }
      norm.push_back(r->normalized_f);
      gap.push_back(r->abs_gap);
      best.push_back(r->best_f);
      wall.push_back(r->wall_time_s);
    }
    os << std::get<0>(key) << '\t' << std::get<1>(key) << '\t' << format_double(std::get<2>(key)) << '\t'
       << group.size() << '\t' << failures << '\t' << format_double(detail::median_of(norm)) << '\t'
       << format_double(detail::mean_of(norm)) << '\t' << format_double(detail::median_of(gap)) << '\t'
       << format_double(detail::median_of(best)) << '\t' << format_double(detail::mean_of(wall)) << '\n';
  }
}

/// Sweep results grouped by (n, scale, value).
inline void write_sweep_tsv(std::ostream& os, const std::vector<SweepRecord>& rows) {
  std::map<std::tuple<std::size_t, double, double>, std::vector<const SweepRecord*>> groups;
  std::string parameter = rows.empty() ? "value" : rows.front().parameter;
  for (const auto& r : rows) groups[{r.n, r.diag_scale, r.value}].push_back(&r);
  os << "n\tdiag_scale\t" << parameter << "\truns\tfailures\tmedian_normalized_f\tmean_normalized_f\tmedian_abs_gap\t"
     << "median_best_f\n";
  for (const auto& [key, group] : groups) {
    std::vector<double> norm, gap, best;
    std::size_t failures = 0;
    for (const auto* r : group) {
      if (!r->error.empty()) {
        ++failures;
        continue;
      }
      norm.push_back(r->normalized_f);
      gap.push_back(r->abs_gap);
      best.push_back(r->best_f);
    }
    os << std::get<0>(key) << '\t' << format_double(std::get<1>(key)) << '\t' << format_double(std::get<2>(key))
       << '\t' << group.size() << '\t' << failures << '\t' << format_double(detail::median_of(norm)) << '\t'
       << format_double(detail::mean_of(norm)) << '\t' << format_double(detail::median_of(gap)) << '\t'
       << format_double(detail::median_of(best)) << '\n';
  }
}

}  // namespace qesa::bench
