#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qesa/error.hpp"
#include "qesa/qp.hpp"

namespace qesa {

// Instance file layout (JSON text, one object):
//
//   {"format": "qesa-qp", "version": 1, "n": 3,
//    "Q": [[...row 0...], [...row 1...], [...row 2...]],
//    "c": [...],
//    "meta": {"diag_scale": 5.0, "seed": 3, "density": 1.0}}   // or null
//
// Numbers are written in shortest round-trip form, so load(save(x)) == x.

inline constexpr int kInstanceFormatVersion = 1;

inline nlohmann::json instance_to_json(const QpInstance& inst) {
  using nlohmann::json;
  const std::size_t n = inst.n();
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(inst.Q(i, j))) throw InvalidArgument("save: non-finite entry in Q");
      row.push_back(inst.Q(i, j));
    }
    rows.push_back(std::move(row));
  }
  for (double v : inst.c())
    if (!std::isfinite(v)) throw InvalidArgument("save: non-finite entry in c");
  json j = {{"format", "qesa-qp"}, {"version", kInstanceFormatVersion}, {"n", n}, {"Q", std::move(rows)}, {"c", inst.c()}};
  if (const auto& m = inst.meta()) {
    j["meta"] = {{"diag_scale", m->diag_scale}, {"seed", m->seed}, {"density", m->density}};
  } else {
    j["meta"] = nullptr;
  }
  return j;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("instance: missing field '") + key + "'");
  return *it;
}

inline double number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError("instance: " + where + " is not a number");
  return j.get<double>();
}

}  // namespace detail

inline QpInstance instance_from_json(const nlohmann::json& j) {
  using detail::field;
  using detail::number;
  if (!j.is_object()) throw ParseError("instance: top level must be an object");
  const auto& version = field(j, "version");
  if (!version.is_number_integer() || version.get<int>() != kInstanceFormatVersion)
    throw ParseError("instance: unsupported version " + version.dump());
  const auto& jn = field(j, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 1) throw ParseError("instance: 'n' must be a positive integer");
  const auto n = jn.get<std::size_t>();

  const auto& jq = field(j, "Q");
  if (!jq.is_array() || jq.size() != n)
    throw ParseError("instance: 'Q' must have n = " + std::to_string(n) + " rows");
  Matrix q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = jq[i];
    if (!row.is_array() || row.size() != n)
      throw ParseError("instance: row " + std::to_string(i) + " of 'Q' must have " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k)
      q(i, k) = number(row[k], "Q[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      if (q(i, k) != q(k, i))
        throw ParseError("instance: 'Q' is not symmetric at (" + std::to_string(i) + ", " + std::to_string(k) + ")");

  const auto& jc = field(j, "c");
  if (!jc.is_array() || jc.size() != n)
    throw ParseError("instance: 'c' has length " + std::to_string(jc.is_array() ? jc.size() : 0) + ", expected " + std::to_string(n));
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = number(jc[i], "c[" + std::to_string(i) + "]");

  std::optional<InstanceMeta> meta;
  if (const auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("instance: 'meta' must be an object or null");
    InstanceMeta m;
    m.diag_scale = number(field(*it, "diag_scale"), "meta.diag_scale");
    const auto& seed = field(*it, "seed");
    if (!seed.is_number_integer()) throw ParseError("instance: meta.seed must be an integer");
    m.seed = seed.get<std::int64_t>();
    m.density = number(field(*it, "density"), "meta.density");
    meta = m;
  }
  return QpInstance(std::move(q), std::move(c), meta);
}

inline void save(const QpInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("save: cannot open " + path.string() + " for writing");
  out << instance_to_json(inst).dump() << '\n';
  if (!out) throw Error("save: write failed for " + path.string());
}

inline QpInstance load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("instance: " + path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace qesa
