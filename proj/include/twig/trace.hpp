// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Replayable event log of one trajectory and its JSON Lines encoding.
//
// Line 1 is a header {"t":"header","schema":"twig-trace/1",...} carrying the
// resolved engine config; every following line is one event keyed by "t":
//   schedule   {"k", "mode", "rows":[[s,e],...], "ratios", "fallback", "note", "proposal"}
//   thought    {"k", "text", "seed"}
//   region     {"k", "attempt", "tokens":[...], "seed"}
//   reflection {"k", "score", "revised", "triggered", "seed"}
//   replace    {"k", "revised"}
//   canvas     {"height", "width", "cells":[...], "hash"}
//   reward     {"scores":{...}, "order":[...], "ensemble"}

#ifndef TWIG_TRACE_HPP_
#define TWIG_TRACE_HPP_

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "twig/error.hpp"
#include "twig/rewards.hpp"
#include "twig/schedule.hpp"
#include "twig/sequence.hpp"

namespace twig {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kTraceSchema = "twig-trace/1";

struct ScheduleEvent {
  Schedule schedule;
};

struct ThoughtEvent {
  int k = 0;
  std::string text;
  std::uint64_t seed = 0;
};

struct RegionEvent {
  int k = 0;
  int attempt = 0;
  std::vector<Token> tokens;
  std::uint64_t seed = 0;
};

struct ReflectionEvent {
  int k = 0;
  int score = 0;
  std::string revised;
  bool triggered = false;
  std::uint64_t seed = 0;
};

struct ReplaceEvent {
  int k = 0;
  std::string revised;
};

using TraceEvent = std::variant<ScheduleEvent, ThoughtEvent, RegionEvent, ReflectionEvent, ReplaceEvent>;

struct Trace {
  EngineConfig config;
  std::string prompt;
  std::vector<TraceEvent> events;
  std::optional<Canvas> canvas;
  std::optional<RewardBundle> reward;

  template <typename E>
  std::vector<const E*> events_of() const {
    std::vector<const E*> out;
    for (const auto& e : events) {
      if (const E* p = std::get_if<E>(&e)) out.push_back(p);
    }
    return out;
  }

  const Schedule* schedule() const {
    auto s = events_of<ScheduleEvent>();
    return s.empty() ? nullptr : &s.front()->schedule;
  }
};

using nlohmann::json;

inline json config_to_json(const EngineConfig& c) {
  return json{{"K", c.K},
              {"theta", c.theta},
              {"max_reflection_rounds", c.max_reflection_rounds},
              {"mode", to_string(c.mode)},
              {"schedule_mode", to_string(c.schedule_mode)},
              {"seed", c.seed},
              {"height", c.geometry.height},
              {"width", c.geometry.width},
              {"vocab_size", c.geometry.vocab_size},
              {"expose_reflections", c.expose_reflections}};
}

inline EngineConfig config_from_json(const json& j) {
  EngineConfig c;
  c.K = j.at("K").get<int>();
  c.theta = j.at("theta").get<int>();
  c.max_reflection_rounds = j.at("max_reflection_rounds").get<int>();
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.schedule_mode = parse_schedule_mode(j.at("schedule_mode").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.geometry.height = j.at("height").get<int>();
  c.geometry.width = j.at("width").get<int>();
  c.geometry.vocab_size = j.at("vocab_size").get<int>();
  c.expose_reflections = j.value("expose_reflections", true);
  return c;
}

inline json event_to_json(const TraceEvent& event) {
  return std::visit(
      [](const auto& e) -> json {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, ScheduleEvent>) {
          const Schedule& s = e.schedule;
          json rows = json::array();
          for (const auto& d : s.descriptors) rows.push_back({d.start_row, d.end_row});
          json j{{"t", "schedule"}, {"k", s.K},           {"mode", to_string(s.mode)}, {"rows", rows},
                 {"ratios", s.ratios}, {"fallback", s.fallback}, {"note", s.note}};
          if (s.proposal) j["proposal"] = {{"k", s.proposal->k}, {"ratios", s.proposal->ratios}};
          return j;
        } else if constexpr (std::is_same_v<E, ThoughtEvent>) {
          return {{"t", "thought"}, {"k", e.k}, {"text", e.text}, {"seed", e.seed}};
        } else if constexpr (std::is_same_v<E, RegionEvent>) {
          return {{"t", "region"}, {"k", e.k}, {"attempt", e.attempt}, {"tokens", e.tokens}, {"seed", e.seed}};
        } else if constexpr (std::is_same_v<E, ReflectionEvent>) {
          return {{"t", "reflection"}, {"k", e.k},         {"score", e.score},
                  {"revised", e.revised}, {"triggered", e.triggered}, {"seed", e.seed}};
        } else {
          return {{"t", "replace"}, {"k", e.k}, {"revised", e.revised}};
        }
      },
      event);
}

inline TraceEvent event_from_json(const json& j, const Geometry& geometry) {
  const std::string t = j.at("t").get<std::string>();
  if (t == "schedule") {
    Schedule s;
    s.K = j.at("k").get<int>();
    s.mode = parse_schedule_mode(j.at("mode").get<std::string>());
    int index = 1;
    for (const auto& r : j.at("rows")) {
      s.descriptors.push_back({index++, r.at(0).get<int>(), r.at(1).get<int>(), geometry.width});
    }
    s.ratios = j.at("ratios").get<std::vector<double>>();
    s.fallback = j.at("fallback").get<bool>();
    s.note = j.at("note").get<std::string>();
    if (j.contains("proposal")) {
      s.proposal = ScheduleProposal{j["proposal"].at("k").get<int>(),
                                    j["proposal"].at("ratios").get<std::vector<double>>()};
    }
    return ScheduleEvent{std::move(s)};
  }
  if (t == "thought") {
    return ThoughtEvent{j.at("k").get<int>(), j.at("text").get<std::string>(), j.at("seed").get<std::uint64_t>()};
  }
  if (t == "region") {
    return RegionEvent{j.at("k").get<int>(), j.at("attempt").get<int>(),
                       j.at("tokens").get<std::vector<Token>>(), j.at("seed").get<std::uint64_t>()};
  }
  if (t == "reflection") {
    return ReflectionEvent{j.at("k").get<int>(), j.at("score").get<int>(), j.at("revised").get<std::string>(),
                           j.at("triggered").get<bool>(), j.at("seed").get<std::uint64_t>()};
  }
  if (t == "replace") return ReplaceEvent{j.at("k").get<int>(), j.at("revised").get<std::string>()};
  fail(ErrorKind::kInvalidInput, "unknown trace event type '" + t + "'");
}

inline void write_trace(std::ostream& out, const Trace& trace, const json& extra_header = json::object()) {
  json header{{"t", "header"},
              {"schema", kTraceSchema},
              {"tool_version", kToolVersion},
              {"prompt", trace.prompt},
              {"config", config_to_json(trace.config)}};
  for (auto it = extra_header.begin(); it != extra_header.end(); ++it) header[it.key()] = it.value();
  out << header.dump() << '\n';
  for (const auto& e : trace.events) out << event_to_json(e).dump() << '\n';
  if (trace.canvas) {
    out << json{{"t", "canvas"},
                {"height", trace.canvas->height},
                {"width", trace.canvas->width},
                {"cells", trace.canvas->cells},
                {"hash", trace.canvas->hash()}}
               .dump()
        << '\n';
  }
  if (trace.reward) {
    json scores = json::object();
    json order = json::array();
    for (const auto& [name, v] : trace.reward->scores) {
      scores[name] = v;
      order.push_back(name);
    }
    out << json{{"t", "reward"}, {"scores", scores}, {"order", order}, {"ensemble", trace.reward->ensemble}}.dump()
        << '\n';
  }
}

inline std::string trace_to_string(const Trace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

// Parses a trace file. The recorded canvas hash, when present, must match the
// recorded cells.
inline Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorKind::kInvalidInput, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string t = j.value("t", "");
    try {
      if (t == "header") {
        require(j.at("schema").get<std::string>() == kTraceSchema, ErrorKind::kInvalidInput,
                "unsupported trace schema");
        trace.prompt = j.at("prompt").get<std::string>();
        trace.config = config_from_json(j.at("config"));
        have_header = true;
      } else if (t == "canvas") {
        Canvas c;
        c.height = j.at("height").get<int>();
        c.width = j.at("width").get<int>();
        c.cells = j.at("cells").get<std::vector<Token>>();
        if (const Schedule* s = trace.schedule()) c.bands = s->descriptors;
        require(c.cells.size() == static_cast<std::size_t>(c.height) * c.width, ErrorKind::kInvalidInput,
                "canvas cell count mismatch");
        require(c.hash() == j.at("hash").get<std::string>(), ErrorKind::kInvalidInput,
                "recorded canvas hash does not match its cells");
        trace.canvas = std::move(c);
      } else if (t == "reward") {
        RewardBundle b;
        for (const auto& name : j.at("order")) {
          b.scores.emplace_back(name.get<std::string>(), j.at("scores").at(name.get<std::string>()).get<double>());
        }
        b.ensemble = j.at("ensemble").get<double>();
        trace.reward = std::move(b);
      } else {
        require(have_header, ErrorKind::kInvalidInput, "trace event before header");
        trace.events.push_back(event_from_json(j, trace.config.geometry));
      }
    } catch (const json::exception& e) {
      fail(ErrorKind::kInvalidInput, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  require(have_header, ErrorKind::kIncompleteTrajectory, "trace has no header");
  return trace;
}

inline Trace trace_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_trace(in);
}

inline void save_trace(const std::string& path, const Trace& trace, const json& extra_header = json::object()) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kInvalidInput, "cannot write " + path);
  write_trace(out, trace, extra_header);
}

inline Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kInvalidInput, "cannot read " + path);
  return read_trace(in);
}

}  // namespace twig

#endif  // TWIG_TRACE_HPP_
