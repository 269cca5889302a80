#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qesa/error.hpp"
#include "qesa/qp.hpp"

namespace qesa {

struct TrajectoryPoint {
  std::size_t step = 0;
  double temperature = 0.0;
  double step_size = 0.0;
  double proposed_f = 0.0;
  double f = 0.0;       // objective at the current point after the decision
  double best_f = 0.0;
  bool accepted = false;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Result of any solver in the toolkit.
struct SolveReport {
  std::string solver;
  Point final_x;
  Point best_x;
  double best_f = 0.0;
  std::size_t steps = 0;
  std::size_t accepted_count = 0;
  std::size_t eval_count = 0;
  double wall_time_s = 0.0;
  double sampler_time_s = 0.0;
  /// True when best_x is only optimal among the corners of the box.
  bool corner_restricted = false;
  std::optional<std::vector<TrajectoryPoint>> trajectory;

  /// Equality on everything except timing fields.
  [[nodiscard]] bool same_result(const SolveReport& o) const {
    return solver == o.solver && final_x == o.final_x && best_x == o.best_x && best_f == o.best_f &&
           steps == o.steps && accepted_count == o.accepted_count && eval_count == o.eval_count &&
           corner_restricted == o.corner_restricted && trajectory == o.trajectory;
  }
};

inline void to_json(nlohmann::json& j, const TrajectoryPoint& t) {
  j = {{"step", t.step}, {"T", t.temperature}, {"k", t.step_size}, {"proposed_f", t.proposed_f},
       {"f", t.f},       {"best_f", t.best_f},  {"accepted", t.accepted}};
}

inline void from_json(const nlohmann::json& j, TrajectoryPoint& t) {
  t.step = j.at("step").get<std::size_t>();
  t.temperature = j.at("T").get<double>();
  t.step_size = j.at("k").get<double>();
  t.proposed_f = j.at("proposed_f").get<double>();
  t.f = j.at("f").get<double>();
  t.best_f = j.at("best_f").get<double>();
  t.accepted = j.at("accepted").get<bool>();
}

inline nlohmann::json report_to_json(const SolveReport& r) {
  nlohmann::json j = {{"solver", r.solver},
                      {"final_x", r.final_x.values()},
                      {"best_x", r.best_x.values()},
                      {"best_f", r.best_f},
                      {"steps", r.steps},
                      {"accepted_count", r.accepted_count},
                      {"eval_count", r.eval_count},
                      {"wall_time_s", r.wall_time_s},
                      {"sampler_time_s", r.sampler_time_s},
                      {"corner_restricted", r.corner_restricted}};
  if (r.trajectory) j["trajectory"] = *r.trajectory;
  return j;
}

inline SolveReport report_from_json(const nlohmann::json& j) {
  try {
    SolveReport r;
    r.solver = j.at("solver").get<std::string>();
    r.final_x = Point(j.at("final_x").get<std::vector<double>>());
    r.best_x = Point(j.at("best_x").get<std::vector<double>>());
    r.best_f = j.at("best_f").get<double>();
    r.steps = j.at("steps").get<std::size_t>();
    r.accepted_count = j.at("accepted_count").get<std::size_t>();
    r.eval_count = j.value("eval_count", std::size_t{0});
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.sampler_time_s = j.at("sampler_time_s").get<double>();
    r.corner_restricted = j.value("corner_restricted", false);
    if (j.contains("trajectory")) r.trajectory = j["trajectory"].get<std::vector<TrajectoryPoint>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

}  // namespace qesa
