#pragma once

#include <string>

#include "qesa/error.hpp"
#include "qesa/external_sampler.hpp"
#include "qesa/samplers.hpp"

namespace qesa {

/// Sampler tags accepted on the command line and in benchmark grids.
/// "auto" resolves to exact enumeration when n fits under the enumeration
/// cap and to classical annealing otherwise.
inline bool is_sampler_tag(const std::string& tag) {
  return tag == "auto" || tag == "exact" || tag == "classical" || tag == "random" || tag == "external";
}

inline std::string resolve_sampler_tag(const std::string& tag, std::size_t n, const SamplerConfig& cfg) {
  if (tag == "auto") return n <= cfg.exact_cap ? "exact" : "classical";
  return tag;
}

inline AnySampler make_sampler(const std::string& tag, const SamplerConfig& cfg, std::size_t n = 0) {
  const std::string t = resolve_sampler_tag(tag, n, cfg);
  if (t == "exact") return {ExactSampler{cfg.exact_cap}, t};
  if (t == "classical") return {ClassicalSaSampler{cfg}, t};
  if (t == "random") return {RandomSampler{cfg}, t};
  if (t == "external") return {ExternalSampler{cfg}, t};
  throw InvalidArgument("unknown sampler '" + tag + "' (expected auto, exact, classical, random or external)");
}

}  // namespace qesa
