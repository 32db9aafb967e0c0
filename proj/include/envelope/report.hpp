#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "envelope/deviation.hpp"
#include "envelope/lts.hpp"
#include "envelope/pipeline.hpp"

namespace envelope {

using Json = nlohmann::ordered_json;

inline Json deviation_json(const Deviation& d, const Lts& e) {
  Json arr = Json::array();
  for (const auto& t : d)
    arr.push_back({{"from", e.state_name(t.from)},
                   {"action", e.alphabet().name(t.action)},
                   {"to", e.state_name(t.to)}});
  return arr;
}

/// Inverse of deviation_json; names are resolved against `e`.
inline Deviation deviation_from_json(const Json& arr, const Lts& e) {
  std::vector<Transition> ts;
  for (const auto& item : arr) {
    auto from = e.find_state(item.at("from").get<std::string>());
    auto action = e.alphabet().find(item.at("action").get<std::string>());
    auto to = e.find_state(item.at("to").get<std::string>());
    if (!from || !action || !to) throw LtsError("deviation JSON names unknown states or actions");
    ts.push_back({*from, *action, *to});
  }
  return canonicalize(ts, e);
}

struct JsonOptions {
  /// Emit measured wall time; off keeps output byte-stable across runs.
  bool timing = false;
};

inline Json stats_json(const DeltaStats& s, const JsonOptions& opts) {
  return {{"meta_states", s.meta_states},
          {"winning_set", s.winning_set},
          {"subsets_examined", s.subsets_examined},
          {"wall_ms", opts.timing ? s.wall.count() : 0}};
}

inline Json delta_json(const std::vector<Deviation>& ds, const Lts& e) {
  Json arr = Json::array();
  for (const auto& d : ds) arr.push_back({{"transitions", deviation_json(d, e)}});
  return arr;
}

inline Json report_json(const RobustnessReport& r, const Lts& e, const JsonOptions& opts = {}) {
  Json j;
  j["model"] = r.model;
  j["algorithm"] = std::string(to_string(r.algorithm));
  j["stats"] = stats_json(r.delta.stats, opts);
  j["delta"] = delta_json(r.delta.deviations, e);
  Json decl = {{"environment", r.environment}, {"controller", r.controller}, {"property", r.property}};
  if (r.constraint) decl["constraint"] = *r.constraint;
  j["declarations"] = decl;
  if (r.environment_stage || !r.envelope_stage.empty()) {
    Json stages;
    if (r.environment_stage) {
      stages["environment"] = stats_json(*r.environment_stage, opts);
      stages["envelopes"] = delta_json(r.envelopes, e);
    }
    Json per = Json::array();
    for (const auto& s : r.envelope_stage) per.push_back(stats_json(s, opts));
    stages["synthesis"] = per;
    j["stages"] = stages;
  }
  return j;
}

inline Json verdict_json(const Verdict& v) {
  Json j;
  j["satisfied"] = v.satisfied;
  if (v.counterexample) j["counterexample"] = *v.counterexample;
  if (v.warning) j["warning"] = *v.warning;
  return j;
}

inline Json comparison_json(const ComparisonResult& r, const Lts& e, const JsonOptions& opts = {}) {
  Json j;
  j["verdict"] = std::string(to_string(r.verdict));
  Json w = Json::object();
  if (r.left_witness) w["left"] = deviation_json(*r.left_witness, e);
  if (r.right_witness) w["right"] = deviation_json(*r.right_witness, e);
  j["witnesses"] = w;
  j["left"] = report_json(r.left, e, opts);
  j["right"] = report_json(r.right, e, opts);
  return j;
}

}  // namespace envelope
