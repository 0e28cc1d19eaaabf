#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "qsl/optimize.hpp"

// JSON wire formats: spin-graph model files, schedules, QAOA angle lists,
// optimizer configuration and results.

namespace qsl {

using nlohmann::json;

namespace detail {

inline const json& require_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw std::invalid_argument(where + ": missing field \"" + key + "\"");
  return j.at(key);
}

inline double number_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number())
    throw std::invalid_argument(where + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

inline int int_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number_integer())
    throw std::invalid_argument(where + ": field \"" + key + "\" must be an integer");
  return v.get<int>();
}

inline Axis axis_field(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_string() || v.get<std::string>().size() != 1 ||
      std::string("xyz").find(v.get<std::string>()[0]) == std::string::npos)
    throw std::invalid_argument(where + ": field \"" + key + "\" must be one of \"x\",\"y\",\"z\"");
  return axis_from_char(v.get<std::string>()[0]);
}

}  // namespace detail

// {"n": int, "edges": [{"i","j","a","b","h"}...], "normalization": float | "auto"}
struct SpinGraphFile {
  SpinGraph graph;
  std::optional<double> normalization;  // nullopt = auto (|V|/|E|)
};

inline SpinGraphFile spin_graph_from_json(const json& j) {
  const int n = detail::int_field(j, "n", "spin graph");
  const json& edges = detail::require_field(j, "edges", "spin graph");
  if (!edges.is_array()) throw std::invalid_argument("spin graph: \"edges\" must be an array");
  std::vector<Coupling> cs;
  cs.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "spin graph edge #" + std::to_string(k);
    const json& e = edges[k];
    cs.push_back({detail::int_field(e, "i", where), detail::int_field(e, "j", where),
                  detail::axis_field(e, "a", where), detail::axis_field(e, "b", where),
                  detail::number_field(e, "h", where)});
  }
  std::optional<double> norm;
  if (j.contains("normalization")) {
    const json& v = j.at("normalization");
    if (v.is_string()) {
      if (v.get<std::string>() != "auto")
        throw std::invalid_argument("spin graph: \"normalization\" must be a number or \"auto\"");
    } else if (v.is_number()) {
      norm = v.get<double>();
    } else {
      throw std::invalid_argument("spin graph: \"normalization\" must be a number or \"auto\"");
    }
  }
  return {SpinGraph(n, std::move(cs)), norm};
}

inline json spin_graph_to_json(const SpinGraph& g, std::optional<double> normalization) {
  json edges = json::array();
  for (const auto& c : g.couplings())
    edges.push_back({{"i", c.i},
                     {"j", c.j},
                     {"a", std::string(1, axis_name(c.a))},
                     {"b", std::string(1, axis_name(c.b))},
                     {"h", c.h}});
  json j{{"n", g.n_vertices()}, {"edges", std::move(edges)}};
  if (normalization.has_value())
    j["normalization"] = *normalization;
  else
    j["normalization"] = "auto";
  return j;
}

// {"segments": [{"dt","f","g"}...], "f_cap": float, "g_cap": float}
inline Schedule schedule_from_json(const json& j) {
  const json& segs = detail::require_field(j, "segments", "schedule");
  if (!segs.is_array() || segs.empty())
    throw std::invalid_argument("schedule: \"segments\" must be a nonempty array");
  std::vector<Segment> out;
  out.reserve(segs.size());
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::string where = "schedule segment #" + std::to_string(k);
    const json& s = segs[k];
    out.push_back({detail::number_field(s, "dt", where), detail::number_field(s, "f", where),
                   detail::number_field(s, "g", where)});
  }
  return Schedule(std::move(out), detail::number_field(j, "f_cap", "schedule"),
                  detail::number_field(j, "g_cap", "schedule"));
}

inline json schedule_to_json(const Schedule& s) {
  json segs = json::array();
  for (const auto& seg : s.segments())
    segs.push_back({{"dt", seg.dt}, {"f", seg.f}, {"g", seg.g}});
  return {{"segments", std::move(segs)}, {"f_cap", s.f_cap()}, {"g_cap", s.g_cap()}};
}

// {"layers": [{"beta","gamma"}...]}
inline QaoaAngles qaoa_angles_from_json(const json& j, bool enforce_periodic = false) {
  const json& layers = detail::require_field(j, "layers", "qaoa angles");
  if (!layers.is_array() || layers.empty())
    throw std::invalid_argument("qaoa angles: \"layers\" must be a nonempty array");
  std::vector<Layer> out;
  out.reserve(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string where = "qaoa layer #" + std::to_string(k);
    const json& l = layers[k];
    out.push_back(
        {detail::number_field(l, "beta", where), detail::number_field(l, "gamma", where)});
  }
  return QaoaAngles(std::move(out), enforce_periodic);
}

inline json qaoa_angles_to_json(const QaoaAngles& a) {
  json layers = json::array();
  for (const auto& l : a.layers()) layers.push_back({{"beta", l.beta}, {"gamma", l.gamma}});
  return {{"layers", std::move(layers)}};
}

inline json optimizer_config_to_json(const OptimizerConfig& cfg) {
  return {{"max_iterations", cfg.max_iterations},
          {"gradient_tolerance", cfg.gradient_tolerance},
          {"finite_difference_step", cfg.finite_difference_step},
          {"restarts", cfg.restarts},
          {"seed", cfg.seed},
          {"n_segments", cfg.n_segments},
          {"init_amplitude_scale", cfg.init_amplitude_scale},
          {"threads", cfg.threads}};
}

inline OptimizerConfig optimizer_config_from_json(const json& j) {
  OptimizerConfig cfg;
  if (j.contains("max_iterations")) cfg.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("gradient_tolerance"))
    cfg.gradient_tolerance = j.at("gradient_tolerance").get<double>();
  if (j.contains("finite_difference_step"))
    cfg.finite_difference_step = j.at("finite_difference_step").get<double>();
  if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("n_segments")) cfg.n_segments = j.at("n_segments").get<int>();
  if (j.contains("init_amplitude_scale"))
    cfg.init_amplitude_scale = j.at("init_amplitude_scale").get<double>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  cfg.validate();
  return cfg;
}

// Full record for exact reproduction: the config (with seed) plus outcomes.
inline json optimization_result_to_json(const OptimizationResult& r, const OptimizerConfig& cfg) {
  json j{{"best_objective", r.best_objective},
         {"best_fidelity", r.best_fidelity()},
         {"per_restart_values", r.per_restart_values},
         {"iterations_used", r.iterations_used},
         {"converged", r.converged},
         {"best_restart", r.best_restart},
         {"aborted_restarts", r.aborted_restarts},
         {"config", optimizer_config_to_json(cfg)}};
  if (r.schedule.has_value()) j["schedule"] = schedule_to_json(*r.schedule);
  if (r.angles.has_value()) {
    j["angles"] = qaoa_angles_to_json(*r.angles);
    j["runtime"] = qaoa_runtime(*r.angles);
    j["per_restart_runtimes"] = r.per_restart_runtimes;
  }
  if (r.f_cap_binding) j["f_cap_binding"] = true;
  return j;
}

}  // namespace qsl
