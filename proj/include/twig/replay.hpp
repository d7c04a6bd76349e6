// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef TWIG_REPLAY_HPP_
#define TWIG_REPLAY_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "twig/backend.hpp"
#include "twig/engine.hpp"
#include "twig/error.hpp"
#include "twig/trace.hpp"

namespace twig {

// Answers every forward pass from a recorded trace, in order. Any request
// the recording cannot answer (different band, attempt or seed, or a pass of
// the wrong kind) is a ReplayDivergence naming the event position.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(Trace trace) : trace_(std::move(trace)) {
    require(!trace_.events.empty(), ErrorKind::kIncompleteTrajectory, "trace has no events");
  }

  ScheduleProposal schedule(std::string_view, int) override {
    const Schedule* s = trace_.schedule();
    if (s == nullptr) throw ReplayDivergence(0, "trace has no schedule event");
    if (s->proposal) return *s->proposal;
    fail(ErrorKind::kTransport, "recorded schedule request failed: " + s->note);
  }

  std::string think(const BackendContext& ctx) override {
    const auto& e = expect<ThoughtEvent>(ctx, "thought");
    return e.text;
  }

  RegionTokens generate_region(const BackendContext& ctx) override {
    const auto& e = expect<RegionEvent>(ctx, "region");
    if (e.attempt != ctx.attempt) {
      throw ReplayDivergence(cursor_ - 1, "recorded attempt " + std::to_string(e.attempt) + ", engine asked for " +
                                              std::to_string(ctx.attempt));
    }
    return RegionTokens{e.tokens};
  }

  ReflectionTuple reflect(const BackendContext& ctx) override {
    const auto& e = expect<ReflectionEvent>(ctx, "reflection");
    return {e.score, e.revised};
  }

  // Answer events not yet consumed.
  std::size_t remaining() const {
    std::size_t n = 0;
    for (std::size_t i = cursor_; i < trace_.events.size(); ++i) n += is_answer(trace_.events[i]);
    return n;
  }

  std::size_t cursor() const { return cursor_; }

 private:
  static bool is_answer(const TraceEvent& e) {
    return std::holds_alternative<ThoughtEvent>(e) || std::holds_alternative<RegionEvent>(e) ||
           std::holds_alternative<ReflectionEvent>(e);
  }

  template <typename E>
  const E& expect(const BackendContext& ctx, std::string_view what) {
    while (cursor_ < trace_.events.size() && !is_answer(trace_.events[cursor_])) ++cursor_;
    if (cursor_ >= trace_.events.size()) {
      throw ReplayDivergence(cursor_, "engine asked for a " + std::string(what) + " past the end of the trace");
    }
    const std::size_t at = cursor_++;
    const E* e = std::get_if<E>(&trace_.events[at]);
    if (e == nullptr) {
      throw ReplayDivergence(at, "engine asked for a " + std::string(what) + " but the trace recorded " +
                                     event_to_json(trace_.events[at]).at("t").get<std::string>());
    }
    if (e->k != ctx.k) {
      throw ReplayDivergence(at, "recorded band " + std::to_string(e->k) + ", engine asked for band " +
                                     std::to_string(ctx.k));
    }
    if (e->seed != ctx.seed) throw ReplayDivergence(at, "seed mismatch");
    return *e;
  }

  Trace trace_;
  std::size_t cursor_ = 0;
};

inline ReplayBackend replay_trace(const Trace& trace) { return ReplayBackend(trace); }

// Re-runs the engine against a recording and checks that every recorded
// answer was consumed and the canvas hash is unchanged. `config` defaults to
// the recorded one.
inline Trace replay(const Trace& recorded, std::optional<EngineConfig> config = std::nullopt) {
  ReplayBackend backend(recorded);
  Trace out;
  try {
    out = run(recorded.prompt, backend, config.value_or(recorded.config));
  } catch (const TrajectoryAbort& abort) {
    if (abort.cause()) std::rethrow_exception(abort.cause());
    throw;
  }
  if (backend.remaining() != 0) {
    throw ReplayDivergence(backend.cursor(),
                           std::to_string(backend.remaining()) + " recorded events were never requested");
  }
  if (recorded.canvas && out.canvas && recorded.canvas->hash() != out.canvas->hash()) {
    throw ReplayDivergence(recorded.events.size(), "canvas hash mismatch");
  }
  out.reward = recorded.reward;
  return out;
}

}  // namespace twig

#endif  // TWIG_REPLAY_HPP_
