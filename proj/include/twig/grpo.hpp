// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Group-relative policy optimization of the toy policies. Every pass of a
// rollout is credited with the rollout's final ensemble reward.

#ifndef TWIG_GRPO_HPP_
#define TWIG_GRPO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "twig/bench.hpp"
#include "twig/engine.hpp"
#include "twig/parallel.hpp"
#include "twig/policy.hpp"
#include "twig/rewards.hpp"
#include "twig/toysim.hpp"

namespace twig {

enum class TrainMode { kJoint, kUOnly, kGOnly };

inline std::string_view to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kJoint: return "joint";
    case TrainMode::kUOnly: return "u_only";
    case TrainMode::kGOnly: return "g_only";
  }
  return "?";
}

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "joint") return TrainMode::kJoint;
  if (s == "u_only") return TrainMode::kUOnly;
  if (s == "g_only") return TrainMode::kGOnly;
  throw Error(ErrorKind::kInvalidInput, "unknown train mode '" + std::string(s) + "'");
}

// Which pass kinds a mode trains.
inline bool contributes(TrainMode mode, PassKind kind) {
  switch (mode) {
    case TrainMode::kJoint: return true;
    case TrainMode::kUOnly: return kind != PassKind::kGenerate;
    case TrainMode::kGOnly: return kind == PassKind::kGenerate;
  }
  return false;
}

struct TrainConfig {
  int group_size = 8;
  double learning_rate = 5.0;
  double clip = 0.2;
  double kl_coef = 0.0;
  int iterations = 200;
  TrainMode mode = TrainMode::kJoint;
  std::uint64_t seed = 0;
  int prompts_per_iteration = 4;
  int epochs = 1;  // surrogate steps per collected batch

  void validate() const {
    require(group_size >= 2, ErrorKind::kInvalidInput, "group size must be at least 2");
    require(clip > 0.0, ErrorKind::kInvalidInput, "clip ratio must be positive");
    require(kl_coef >= 0.0, ErrorKind::kInvalidInput, "KL coefficient must be non-negative");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::kInvalidInput, "bad learning rate");
    require(iterations >= 0, ErrorKind::kInvalidInput, "iterations must be non-negative");
    require(prompts_per_iteration >= 1, ErrorKind::kInvalidInput, "prompts_per_iteration must be at least 1");
    require(epochs >= 1, ErrorKind::kInvalidInput, "epochs must be at least 1");
  }
};

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"group_size", c.group_size}, {"learning_rate", c.learning_rate}, {"clip", c.clip},
          {"kl_coef", c.kl_coef},       {"iterations", c.iterations},       {"mode", to_string(c.mode)},
          {"seed", c.seed},             {"prompts_per_iteration", c.prompts_per_iteration},
          {"epochs", c.epochs}};
}

struct Trajectory {
  std::uint64_t seed = 0;
  Trace trace;
  std::vector<PassRecord> passes;
  double reward = 0.0;
};

struct RolloutGroup {
  std::string prompt;
  std::vector<Trajectory> trajectories;
  double mean = 0.0;
  double std = 0.0;  // population
};

namespace detail {

inline std::pair<double, double> mean_std(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

}  // namespace detail

// Samples G trajectories of `prompt`; trajectory i runs with seed
// derive_seed(group_seed, {i}). Any trajectory failure aborts the group.
inline RolloutGroup collect_group(const std::string& prompt, const ToyPolicy& policy, const EngineConfig& engine,
                                  const ToyConfig& toy, const TrainConfig& train, std::uint64_t group_seed,
                                  const std::vector<std::string>& rewards = default_reward_names(), int threads = 1) {
  train.validate();
  require(policy.temperature() > 0.0, ErrorKind::kInvalidInput, "sampling needs temperature > 0");
  RolloutGroup group;
  group.prompt = prompt;
  group.trajectories.resize(static_cast<std::size_t>(train.group_size));
  parallel_for(
      group.trajectories.size(),
      [&](std::size_t i) {
        Trajectory& t = group.trajectories[i];
        t.seed = derive_seed(group_seed, {static_cast<std::uint64_t>(i)});
        ToyConfig c = toy;
        c.seed = t.seed;
        ToyBackend backend(c, &policy, &t.passes);
        EngineConfig e = engine;
        e.seed = t.seed;
        t.trace = run(prompt, backend, e);
        t.reward = score_trace(t.trace, rewards).ensemble;
        for (PassRecord& p : t.passes) p.reward = t.reward;
      },
      threads);
  std::vector<double> r;
  for (const Trajectory& t : group.trajectories) r.push_back(t.reward);
  std::tie(group.mean, group.std) = detail::mean_std(r);
  return group;
}

// (r - mean) / (std + 1e-8) with the population std; all zero when the
// rewards are identical. Equality is tested directly since the computed std
// of equal values can round to a few ulps.
inline std::vector<double> compute_advantages(std::span<const double> rewards) {
  require(rewards.size() >= 2, ErrorKind::kInvalidInput, "advantages need at least two rewards");
  std::vector<double> a(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) return a;
  const auto [m, s] = detail::mean_std(rewards);
  for (std::size_t i = 0; i < rewards.size(); ++i) a[i] = (rewards[i] - m) / (s + 1e-8);
  return a;
}

inline std::vector<double> compute_advantages(const RolloutGroup& g) {
  std::vector<double> r;
  for (const Trajectory& t : g.trajectories) r.push_back(t.reward);
  return compute_advantages(r);
}

// Objective value and its analytic gradient (same layout as the policy tables).
struct Surrogate {
  double objective = 0.0;
  double kl = 0.0;             // mean k3 estimate over contributing decisions
  double clip_fraction = 0.0;  // share of decisions whose clipped term is active
  int decisions = 0;
  std::vector<double> grad_generation;
  std::vector<double> grad_understanding;
};

// J = mean over trajectories of the per-trajectory mean over contributing
// decisions of min(rho A, clip(rho) A) - beta * k3(pi, ref).
inline Surrogate surrogate(const ToyPolicy& policy, const ToyPolicy& reference, std::span<const RolloutGroup> groups,
                           std::span<const std::vector<double>> advantages, const TrainConfig& cfg) {
  require(groups.size() == advantages.size(), ErrorKind::kInvalidInput, "one advantage vector per group");
  require(policy.temperature() > 0.0, ErrorKind::kInvalidInput, "surrogate needs temperature > 0");
  Surrogate s;
  s.grad_generation.assign(policy.params(Table::kGeneration).size(), 0.0);
  s.grad_understanding.assign(policy.params(Table::kUnderstanding).size(), 0.0);
  const double T = policy.temperature();
  int trajectories = 0;
  int clipped = 0;
  double kl_sum = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    require(advantages[g].size() == groups[g].trajectories.size(), ErrorKind::kInvalidInput,
            "advantage count differs from group size");
    for (std::size_t i = 0; i < groups[g].trajectories.size(); ++i) {
      ++trajectories;
      const double A = advantages[g][i];
      require(std::isfinite(A), ErrorKind::kNumeric, "non-finite advantage");
      std::vector<const Decision*> mine;
      for (const PassRecord& p : groups[g].trajectories[i].passes) {
        if (!contributes(cfg.mode, p.kind)) continue;
        for (const Decision& d : p.decisions) mine.push_back(&d);
      }
      if (mine.empty()) continue;
      const double w = 1.0 / static_cast<double>(mine.size());
      for (const Decision* d : mine) {
        const double logp = policy.log_prob(*d);
        const double rho = std::exp(logp - d->logp_old);
        const double clipped_rho = std::clamp(rho, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const double unclipped = rho * A;
        const double term = std::min(unclipped, clipped_rho * A);
        const bool flows = unclipped <= clipped_rho * A;
        clipped += !flows;
        double coef = flows ? A * rho : 0.0;  // d term / d logp
        double k3 = 0.0;
        if (cfg.kl_coef > 0.0) {
          const double x = reference.log_prob(*d) - logp;
          k3 = std::exp(x) - x - 1.0;
          coef -= cfg.kl_coef * (1.0 - std::exp(x));
        }
        kl_sum += k3;
        ++s.decisions;
        s.objective += w * (term - cfg.kl_coef * k3);
        if (coef == 0.0) continue;
        std::vector<double>& grad = d->table == Table::kGeneration ? s.grad_generation : s.grad_understanding;
        const std::vector<double> p = policy.probs(d->table, d->row, d->allowed);
        const std::size_t base = static_cast<std::size_t>(d->row) * policy.num_actions(d->table);
        for (int a = 0; a < policy.num_actions(d->table); ++a) {
          if (p[a] == 0.0 && a != d->action) continue;
          grad[base + a] += w * coef * ((a == d->action ? 1.0 : 0.0) - p[a]) / T;
        }
      }
    }
  }
  if (trajectories > 0) {
    const double n = static_cast<double>(trajectories);
    s.objective /= n;
    for (double& v : s.grad_generation) v /= n;
    for (double& v : s.grad_understanding) v /= n;
  }
  if (s.decisions > 0) {
    s.kl = kl_sum / s.decisions;
    s.clip_fraction = static_cast<double>(clipped) / s.decisions;
  }
  return s;
}

struct UpdateStats {
  double loss = 0.0;  // negative surrogate before the last step
  double mean_reward = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;
};

// Gradient ascent on the surrogate, `cfg.epochs` steps over one batch.
// Parameters whose gradient is exactly zero are left untouched.
inline UpdateStats update_policy(ToyPolicy& policy, const ToyPolicy& reference, std::span<const RolloutGroup> groups,
                                 const TrainConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<double>> adv;
  UpdateStats stats;
  int n = 0;
  for (const RolloutGroup& g : groups) {
    adv.push_back(compute_advantages(g));
    for (const Trajectory& t : g.trajectories) {
      stats.mean_reward += t.reward;
      ++n;
    }
  }
  if (n > 0) stats.mean_reward /= n;
  for (int e = 0; e < cfg.epochs; ++e) {
    const Surrogate s = surrogate(policy, reference, groups, adv, cfg);
    for (double v : s.grad_generation) require(std::isfinite(v), ErrorKind::kNumeric, "non-finite gradient");
    for (double v : s.grad_understanding) require(std::isfinite(v), ErrorKind::kNumeric, "non-finite gradient");
    stats.loss = -s.objective;
    stats.clip_fraction = s.clip_fraction;
    stats.kl = s.kl;
    auto step = [&](std::vector<double>& params, const std::vector<double>& grad) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (grad[i] != 0.0) params[i] += cfg.learning_rate * grad[i];
      }
    };
    step(policy.params(Table::kGeneration), s.grad_generation);
    step(policy.params(Table::kUnderstanding), s.grad_understanding);
  }
  require(policy.all_finite(), ErrorKind::kNumeric, "policy update produced non-finite logits");
  return stats;
}

inline UpdateStats update_policy(ToyPolicy& policy, const ToyPolicy& reference, const RolloutGroup& group,
                                 const TrainConfig& cfg) {
  return update_policy(policy, reference, std::span<const RolloutGroup>(&group, 1), cfg);
}

// Adds N(0, scale^2)-ish noise (uniform, same variance) to every logit.
inline ToyPolicy perturbed(const ToyPolicy& policy, double scale, std::uint64_t seed) {
  ToyPolicy out = policy;
  std::uint64_t i = 0;
  for (Table t : {Table::kGeneration, Table::kUnderstanding}) {
    for (double& v : out.params(t)) {
      v += scale * std::sqrt(12.0) * (unit_interval(derive_seed(seed, {i++})) - 0.5);
    }
  }
  return out;
}

// Largest relative error between the analytic surrogate gradient and a
// central finite difference (step 1e-5) over `count` parameters drawn from
// the rows the batch touches.
inline double grad_check(const ToyPolicy& policy, const ToyPolicy& reference, std::span<const RolloutGroup> groups,
                         const TrainConfig& cfg, int count = 50, std::uint64_t seed = 0) {
  require(policy.temperature() > 0.0, ErrorKind::kInvalidInput, "gradient check needs temperature > 0");
  std::vector<std::vector<double>> adv;
  for (const RolloutGroup& g : groups) adv.push_back(compute_advantages(g));
  const Surrogate analytic = surrogate(policy, reference, groups, adv, cfg);

  std::vector<std::pair<Table, std::size_t>> candidates;
  for (const RolloutGroup& g : groups) {
    for (const Trajectory& t : g.trajectories) {
      for (const PassRecord& p : t.passes) {
        if (!contributes(cfg.mode, p.kind)) continue;
        for (const Decision& d : p.decisions) {
          const std::size_t base = static_cast<std::size_t>(d.row) * policy.num_actions(d.table);
          for (int a = 0; a < policy.num_actions(d.table); ++a) candidates.emplace_back(d.table, base + a);
        }
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return 0.0;

  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (int c = 0; c < count; ++c) {
    const auto [table, idx] =
        candidates[derive_seed(seed, {static_cast<std::uint64_t>(c)}) % candidates.size()];
    ToyPolicy plus = policy, minus = policy;
    plus.params(table)[idx] += kStep;
    minus.params(table)[idx] -= kStep;
    const double numeric = (surrogate(plus, reference, groups, adv, cfg).objective -
                            surrogate(minus, reference, groups, adv, cfg).objective) /
                           (2 * kStep);
    const double a =
        (table == Table::kGeneration ? analytic.grad_generation : analytic.grad_understanding)[idx];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

// Seeded factory for policy-driven sessions (no pass logging).
inline SeededFactory policy_seeded_factory(ToyConfig toy, const ToyPolicy& policy) {
  return [toy, &policy](std::uint64_t seed) {
    ToyConfig c = toy;
    c.seed = seed;
    return std::make_unique<ToyBackend>(c, &policy);
  };
}

// Mean ensemble reward of the stochastic policy over prompts x seeds.
inline EvalResult evaluate_policy(const ToyPolicy& policy, const EngineConfig& engine, const ToyConfig& toy,
                                  const BenchSuite& suite, const std::vector<std::uint64_t>& seeds,
                                  const std::vector<std::string>& rewards = default_reward_names(),
                                  int threads = 1) {
  return evaluate(engine, policy_seeded_factory(toy, policy), suite, seeds, rewards, threads);
}

struct CurvePoint {
  int iteration = 0;
  double mean_reward = 0.0;  // on the evaluation set
  double clip_fraction = 0.0;
  double kl = 0.0;
};

struct TrainResult {
  ToyPolicy policy;
  std::vector<CurvePoint> curve;  // curve[0] is the untrained evaluation
};

inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "iteration,mean_reward,clip_fraction,kl\n";
  for (const CurvePoint& p : curve) {
    out << p.iteration << ',' << std::setprecision(10) << p.mean_reward << ',' << p.clip_fraction << ',' << p.kl
        << '\n';
  }
}

struct TrainSetup {
  EngineConfig engine;
  ToyConfig toy;
  BenchSuite train_suite;
  BenchSuite eval_suite;
  std::vector<std::uint64_t> eval_seeds = {0, 1, 2, 3, 4};
  std::vector<std::string> rewards = default_reward_names();
  int threads = 1;
};

// Each iteration draws prompts_per_iteration training prompts, collects a
// group for each, updates, and evaluates. Deterministic given cfg.seed.
template <typename OnPoint = std::nullptr_t>
TrainResult train(ToyPolicy policy, const TrainSetup& setup, const TrainConfig& cfg, OnPoint&& on_point = nullptr) {
  cfg.validate();
  require(!setup.train_suite.prompts.empty(), ErrorKind::kInvalidInput, "empty training suite");
  const ToyPolicy reference = policy;
  TrainResult res{policy, {}};
  auto record = [&](CurvePoint p) {
    p.mean_reward =
        evaluate_policy(res.policy, setup.engine, setup.toy, setup.eval_suite, setup.eval_seeds, setup.rewards,
                        setup.threads)
            .mean;
    res.curve.push_back(p);
    if constexpr (!std::is_same_v<std::decay_t<OnPoint>, std::nullptr_t>) on_point(res.curve.back());
  };
  record({0, 0.0, 0.0, 0.0});
  const std::size_t n = setup.train_suite.prompts.size();
  for (int it = 1; it <= cfg.iterations; ++it) {
    std::vector<RolloutGroup> groups;
    for (int j = 0; j < cfg.prompts_per_iteration; ++j) {
      const std::uint64_t h = derive_seed(cfg.seed, {static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(j)});
      groups.push_back(collect_group(setup.train_suite.prompts[h % n], res.policy, setup.engine, setup.toy, cfg,
                                     derive_seed(h, {0x6e0}), setup.rewards, setup.threads));
    }
    const UpdateStats st = update_policy(res.policy, reference, groups, cfg);
    record({it, 0.0, st.clip_fraction, st.kl});
  }
  return res;
}

}  // namespace twig

#endif  // TWIG_GRPO_HPP_
