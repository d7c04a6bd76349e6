// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// The generation loop. In twig mode, for each scheduled band k:
//   thought   tau_k = think(T, tau_<k, V_<k)
//   region    V_k   = generate(tau_<=k, V_<k)
//   critique  (r_k, revised) = reflect(T, tau_<=k, V_<=k)
// and while r_k < theta (up to max_reflection_rounds times) the thought slot
// is swapped for the revision and only V_k is regenerated and re-scored.
// Baseline modes (plan once up front, critique once at the end, or no text at
// all) share the schedule, seeding and trace format.

#ifndef TWIG_ENGINE_HPP_
#define TWIG_ENGINE_HPP_

#include <cstdint>
#include <exception>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "twig/backend.hpp"
#include "twig/error.hpp"
#include "twig/hash.hpp"
#include "twig/schedule.hpp"
#include "twig/sequence.hpp"
#include "twig/trace.hpp"

namespace twig {

// A backend call failed mid-trajectory. Carries everything recorded so far.
class TrajectoryAbort : public Error {
 public:
  TrajectoryAbort(Trace partial, std::exception_ptr cause, const std::string& message)
      : Error(ErrorKind::kTrajectoryAbort, message), partial_(std::move(partial)), cause_(std::move(cause)) {}

  const Trace& partial() const { return partial_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  Trace partial_;
  std::exception_ptr cause_;
};

enum class Pass : std::uint64_t { kSchedule = 0, kThink = 1, kGenerate = 2, kReflect = 3 };

// Seed handed to the backend for one forward pass. Independent of the mode,
// so equal passes in different modes see equal seeds.
inline std::uint64_t pass_seed(std::uint64_t base, Pass pass, int k, int attempt) {
  return derive_seed(base, {static_cast<std::uint64_t>(pass), static_cast<std::uint64_t>(k),
                            static_cast<std::uint64_t>(attempt)});
}

namespace detail {

class Runner {
 public:
  Runner(std::string_view prompt, Backend& backend, const EngineConfig& config)
      : backend_(backend), config_(config) {
    config_.validate();
    trace_.config = config_;
    trace_.prompt = std::string(prompt);
  }

  Trace run() {
    schedule_ = make_schedule(trace_.prompt, backend_, config_);
    trace_.events.push_back(ScheduleEvent{schedule_});
    switch (config_.mode) {
      case Mode::kTwig: run_twig(); break;
      case Mode::kNone: run_flat({}, 0); break;
      case Mode::kThinkBefore: run_think_before(); break;
      case Mode::kThinkAfter: run_think_after(); break;
    }
    return std::move(trace_);
  }

 private:
  template <typename F>
  auto guarded(std::string_view what, F&& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      throw TrajectoryAbort(trace_, std::current_exception(), std::string(what) + " failed: " + e.what());
    }
  }

  BackendContext context(int k, std::vector<std::string> thoughts, std::vector<RegionTokens> regions) const {
    BackendContext ctx;
    ctx.prompt = trace_.prompt;
    ctx.thoughts = std::move(thoughts);
    ctx.regions = std::move(regions);
    if (config_.expose_reflections) ctx.reflections = reflections_;
    ctx.k = k;
    ctx.num_bands = schedule_.K;
    if (k >= 1) ctx.band = schedule_.descriptors[k - 1];
    ctx.geometry = config_.geometry;
    return ctx;
  }

  std::string think(BackendContext ctx) {
    ctx.seed = pass_seed(config_.seed, Pass::kThink, ctx.k, 0);
    std::string text = guarded("think", [&] {
      std::string t = backend_.think(ctx);
      check_thought(t);
      return t;
    });
    trace_.events.push_back(ThoughtEvent{ctx.k, text, ctx.seed});
    return text;
  }

  RegionTokens generate(BackendContext ctx, int attempt) {
    ctx.attempt = attempt;
    ctx.seed = pass_seed(config_.seed, Pass::kGenerate, ctx.k, attempt);
    RegionTokens tokens = guarded("generate", [&] {
      RegionTokens r = backend_.generate_region(ctx);
      check_region(r, ctx.band, config_.geometry.vocab_size);
      return r;
    });
    trace_.events.push_back(RegionEvent{ctx.k, attempt, tokens.tokens, ctx.seed});
    return tokens;
  }

  ReflectionTuple reflect(BackendContext ctx, int attempt, bool may_trigger) {
    ctx.attempt = attempt;
    ctx.seed = pass_seed(config_.seed, Pass::kReflect, ctx.k, attempt);
    ReflectionTuple r = guarded("reflect", [&] {
      ReflectionTuple t = backend_.reflect(ctx);
      check_reflection(t);
      return t;
    });
    const bool triggered = may_trigger && r.score < config_.theta;
    trace_.events.push_back(ReflectionEvent{ctx.k, r.score, r.revised_thought, triggered, ctx.seed});
    reflections_.push_back({ctx.k, r.score, r.revised_thought});
    last_triggered_ = triggered;
    return r;
  }

  static std::vector<std::string> texts(const InterleavedSequence& seq) {
    std::vector<std::string> out;
    for (const Thought& t : seq.thoughts()) out.push_back(t.text);
    return out;
  }

  void run_twig() {
    InterleavedSequence seq = new_sequence(trace_.prompt, config_.geometry);
    for (int k = 1; k <= schedule_.K; ++k) {
      std::string thought = think(context(k, texts(seq), seq.regions()));
      seq = seq.append_thought({k, std::move(thought), false});
      int rounds = 0;
      while (true) {
        RegionTokens tokens = generate(context(k, texts(seq), seq.regions()), rounds);
        seq = seq.append_region(std::move(tokens), schedule_.descriptors[k - 1]);
        ReflectionTuple r = reflect(context(k, texts(seq), seq.regions()), rounds,
                                    rounds < config_.max_reflection_rounds);
        if (!last_triggered_) break;
        seq = seq.reflect_replace(k, {k, r.revised_thought, true});
        trace_.events.push_back(ReplaceEvent{k, r.revised_thought});
        ++rounds;
      }
    }
    trace_.canvas = seq.completed_canvas();
  }

  // Every band generated under the same (possibly empty) text context.
  std::vector<RegionTokens> run_flat(const std::vector<std::string>& thoughts, int attempt) {
    std::vector<RegionTokens> regions;
    for (int k = 1; k <= schedule_.K; ++k) {
      regions.push_back(generate(context(k, thoughts, regions), attempt));
    }
    trace_.canvas = assemble_canvas(config_.geometry, schedule_.descriptors, regions);
    return regions;
  }

  void run_think_before() {
    std::string plan = think(context(0, {}, {}));
    run_flat({plan}, 0);
  }

  void run_think_after() {
    std::vector<RegionTokens> regions = run_flat({}, 0);
    ReflectionTuple r = reflect(context(0, {}, regions), 0, config_.max_reflection_rounds > 0);
    if (!last_triggered_) return;
    trace_.events.push_back(ReplaceEvent{0, r.revised_thought});
    run_flat({r.revised_thought}, 1);
  }

  Backend& backend_;
  EngineConfig config_;
  Trace trace_;
  Schedule schedule_;
  std::vector<ReflectionRecord> reflections_;
  bool last_triggered_ = false;
};

}  // namespace detail

// Interleaved thinking-while-generating trajectory.
inline Trace run_trajectory(std::string_view prompt, Backend& backend, const EngineConfig& config) {
  require(config.mode == Mode::kTwig, ErrorKind::kInvalidInput, "run_trajectory needs mode twig");
  return detail::Runner(prompt, backend, config).run();
}

// think_before, think_after or none.
inline Trace run_baseline(std::string_view prompt, Backend& backend, const EngineConfig& config) {
  require(config.mode != Mode::kTwig, ErrorKind::kInvalidInput, "run_baseline needs a baseline mode");
  return detail::Runner(prompt, backend, config).run();
}

inline Trace run(std::string_view prompt, Backend& backend, const EngineConfig& config) {
  return detail::Runner(prompt, backend, config).run();
}

}  // namespace twig

#endif  // TWIG_ENGINE_HPP_
