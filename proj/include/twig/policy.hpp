// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Tabular stand-ins for the understanding and generation passes.
//
// Generation table: one row per (object kind, band), 21 logits over the
// visual vocabulary; the sampled token is what the object's cell receives.
// Understanding table: one row per relation role, K logits over bands; the
// planner samples each object's band from it, masked to what stays feasible.

#ifndef TWIG_POLICY_HPP_
#define TWIG_POLICY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twig/bands.hpp"
#include "twig/error.hpp"
#include "twig/hash.hpp"
#include "twig/scene.hpp"

namespace twig {

inline constexpr std::string_view kPolicySchema = "twig-policy/1";

enum class Table { kGeneration, kUnderstanding };
enum class PassKind { kThink, kGenerate, kReflect };

inline std::string_view to_string(PassKind p) {
  switch (p) {
    case PassKind::kThink: return "think";
    case PassKind::kGenerate: return "generate";
    case PassKind::kReflect: return "reflect";
  }
  return "?";
}

// One sampled categorical choice.
struct Decision {
  Table table = Table::kGeneration;
  int row = 0;
  std::vector<int> allowed;  // empty means every action
  int action = 0;
  double logp_old = 0.0;
};

class ToyPolicy {
 public:
  ToyPolicy(int num_bands = 3, int vocab_size = 21, double temperature = 1.0)
      : num_bands_(num_bands),
        vocab_size_(vocab_size),
        temperature_(temperature),
        generation_(static_cast<std::size_t>(kNumObjectKinds) * num_bands * vocab_size, 0.0),
        understanding_(static_cast<std::size_t>(kNumRoles) * num_bands, 0.0) {
    require(num_bands >= 1 && vocab_size == kNumObjectKinds + 1, ErrorKind::kInvalidInput, "bad policy shape");
  }

  // Generation puts p_correct on the right token and spreads the rest evenly;
  // the planner is uniform over bands.
  static ToyPolicy untrained(double p_correct = 0.5, int num_bands = 3, double temperature = 1.0) {
    require(p_correct > 0.0 && p_correct < 1.0, ErrorKind::kInvalidInput, "p_correct must be in (0, 1)");
    ToyPolicy p(num_bands, kNumObjectKinds + 1, temperature);
    const double margin = temperature * std::log(p_correct * kNumObjectKinds / (1.0 - p_correct));
    for (int o = 0; o < kNumObjectKinds; ++o) {
      for (int b = 0; b < num_bands; ++b) {
        p.logit(Table::kGeneration, p.generation_row(o, b), ObjectId::from_ordinal(o).token()) = margin;
      }
    }
    return p;
  }

  // Effectively deterministic rule behaviour: always the right token, and the
  // band closest to the role's preferred band among the feasible ones.
  static ToyPolicy rule(int num_bands = 3, double margin = 50.0) {
    ToyPolicy p(num_bands);
    for (int o = 0; o < kNumObjectKinds; ++o) {
      for (int b = 0; b < num_bands; ++b) {
        p.logit(Table::kGeneration, p.generation_row(o, b), ObjectId::from_ordinal(o).token()) = margin;
      }
    }
    for (int r = 0; r < kNumRoles; ++r) {
      const int pref = preferred_band(static_cast<Role>(r), num_bands);
      for (int b = 0; b < num_bands; ++b) p.logit(Table::kUnderstanding, r, b) = -margin * std::abs(b - pref);
    }
    return p;
  }

  int num_bands() const { return num_bands_; }
  int vocab_size() const { return vocab_size_; }
  double temperature() const { return temperature_; }
  void set_temperature(double t) { temperature_ = t; }

  int generation_row(int object_ordinal, int band) const { return object_ordinal * num_bands_ + band; }
  int num_actions(Table t) const { return t == Table::kGeneration ? vocab_size_ : num_bands_; }
  int num_rows(Table t) const { return t == Table::kGeneration ? kNumObjectKinds * num_bands_ : kNumRoles; }

  std::vector<double>& params(Table t) { return t == Table::kGeneration ? generation_ : understanding_; }
  const std::vector<double>& params(Table t) const { return t == Table::kGeneration ? generation_ : understanding_; }

  double& logit(Table t, int row, int action) { return params(t)[static_cast<std::size_t>(row) * num_actions(t) + action]; }
  double logit(Table t, int row, int action) const {
    return params(t)[static_cast<std::size_t>(row) * num_actions(t) + action];
  }

  // Temperature softmax over `allowed` (all actions if empty); zero elsewhere.
  std::vector<double> probs(Table t, int row, std::span<const int> allowed) const {
    require(temperature_ > 0.0, ErrorKind::kInvalidInput, "temperature must be positive to sample");
    const int n = num_actions(t);
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    std::vector<int> all;
    if (allowed.empty()) {
      all.resize(static_cast<std::size_t>(n));
      for (int a = 0; a < n; ++a) all[a] = a;
      allowed = all;
    }
    double mx = -INFINITY;
    for (int a : allowed) mx = std::max(mx, logit(t, row, a) / temperature_);
    double z = 0.0;
    for (int a : allowed) z += (p[a] = std::exp(logit(t, row, a) / temperature_ - mx));
    for (int a : allowed) p[a] /= z;
    return p;
  }

  double log_prob(const Decision& d) const {
    require(temperature_ > 0.0, ErrorKind::kInvalidInput, "temperature must be positive");
    const int n = num_actions(d.table);
    double mx = -INFINITY;
    auto each = [&](auto&& f) {
      if (d.allowed.empty()) {
        for (int a = 0; a < n; ++a) f(a);
      } else {
        for (int a : d.allowed) f(a);
      }
    };
    each([&](int a) { mx = std::max(mx, logit(d.table, d.row, a) / temperature_); });
    double z = 0.0;
    each([&](int a) { z += std::exp(logit(d.table, d.row, a) / temperature_ - mx); });
    return logit(d.table, d.row, d.action) / temperature_ - mx - std::log(z);
  }

  // Inverse-CDF draw with uniform u in [0, 1).
  Decision sample(Table t, int row, std::vector<int> allowed, double u) const {
    std::vector<double> p = probs(t, row, allowed);
    int action = -1;
    double cdf = 0.0;
    for (int a = 0; a < static_cast<int>(p.size()); ++a) {
      if (p[a] == 0.0) continue;
      action = a;
      cdf += p[a];
      if (u < cdf) break;
    }
    Decision d{t, row, std::move(allowed), action, 0.0};
    d.logp_old = log_prob(d);
    return d;
  }

  bool all_finite() const {
    for (double v : generation_) if (!std::isfinite(v)) return false;
    for (double v : understanding_) if (!std::isfinite(v)) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json gen = nlohmann::json::array();
    for (int r = 0; r < num_rows(Table::kGeneration); ++r) {
      std::vector<double> row(generation_.begin() + static_cast<std::ptrdiff_t>(r) * vocab_size_,
                              generation_.begin() + static_cast<std::ptrdiff_t>(r + 1) * vocab_size_);
      gen.push_back(row);
    }
    nlohmann::json und = nlohmann::json::array();
    for (int r = 0; r < kNumRoles; ++r) {
      std::vector<double> row(understanding_.begin() + static_cast<std::ptrdiff_t>(r) * num_bands_,
                              understanding_.begin() + static_cast<std::ptrdiff_t>(r + 1) * num_bands_);
      und.push_back(row);
    }
    return {{"schema", kPolicySchema}, {"num_bands", num_bands_}, {"vocab_size", vocab_size_},
            {"temperature", temperature_}, {"generation", gen}, {"understanding", und}};
  }

  static ToyPolicy from_json(const nlohmann::json& j) {
    require(j.at("schema").get<std::string>() == kPolicySchema, ErrorKind::kInvalidInput, "unsupported policy schema");
    ToyPolicy p(j.at("num_bands").get<int>(), j.at("vocab_size").get<int>(), j.at("temperature").get<double>());
    std::size_t i = 0;
    for (const auto& row : j.at("generation")) {
      for (const auto& v : row) p.generation_.at(i++) = v.get<double>();
    }
    require(i == p.generation_.size(), ErrorKind::kInvalidInput, "generation table size mismatch");
    i = 0;
    for (const auto& row : j.at("understanding")) {
      for (const auto& v : row) p.understanding_.at(i++) = v.get<double>();
    }
    require(i == p.understanding_.size(), ErrorKind::kInvalidInput, "understanding table size mismatch");
    return p;
  }

  friend bool operator==(const ToyPolicy&, const ToyPolicy&) = default;

 private:
  int num_bands_;
  int vocab_size_;
  double temperature_;
  std::vector<double> generation_;
  std::vector<double> understanding_;
};

// Samples a band for every object not already fixed, in declaration order.
// `band_of` holds -1 for free objects; on return every entry is set. Each
// choice that had more than one feasible band is appended to `decisions`.
inline void sample_bands(const SceneSpec& spec, const ToyPolicy& policy, std::uint64_t seed,
                         std::vector<int>& band_of, std::vector<Decision>* decisions) {
  const int K = policy.num_bands();
  BandModel model(spec, K);
  const int n = static_cast<int>(spec.objects.size());
  band_of.resize(n, -1);
  std::vector<int> fixed(n, -1);
  for (int i = 0; i < n; ++i) {
    if (band_of[i] >= 0) fixed[model.group_of(i)] = band_of[i];
  }
  for (int i = 0; i < n; ++i) {
    const int g = model.group_of(i);
    if (fixed[g] < 0) {
      auto iv = model.intervals(fixed);
      require(iv.has_value(), ErrorKind::kInfeasibleSpec, "fixed bands leave no feasible completion");
      const auto [lo, hi] = (*iv)[g];
      if (lo == hi) {
        fixed[g] = lo;
      } else {
        std::vector<int> allowed;
        for (int b = lo; b <= hi; ++b) allowed.push_back(b);
        const double u = unit_interval(derive_seed(seed, {static_cast<std::uint64_t>(spec.objects[i].id.ordinal())}));
        Decision d = policy.sample(Table::kUnderstanding, static_cast<int>(role_of(spec, i)), std::move(allowed), u);
        fixed[g] = d.action;
        if (decisions) decisions->push_back(std::move(d));
      }
    }
    band_of[i] = fixed[g];
  }
}

}  // namespace twig

#endif  // TWIG_POLICY_HPP_
