// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef TWIG_SCHEDULE_HPP_
#define TWIG_SCHEDULE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twig/backend.hpp"
#include "twig/error.hpp"
#include "twig/sequence.hpp"

namespace twig {

enum class Mode { kTwig, kThinkBefore, kThinkAfter, kNone };
enum class ScheduleMode { kStatic, kAdaptive };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kTwig: return "twig";
    case Mode::kThinkBefore: return "think_before";
    case Mode::kThinkAfter: return "think_after";
    case Mode::kNone: return "none";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "twig") return Mode::kTwig;
  if (s == "think_before") return Mode::kThinkBefore;
  if (s == "think_after") return Mode::kThinkAfter;
  if (s == "none") return Mode::kNone;
  fail(ErrorKind::kInvalidInput, "unknown mode '" + std::string(s) + "'");
}

inline std::string_view to_string(ScheduleMode m) {
  return m == ScheduleMode::kStatic ? "static" : "adaptive";
}

inline ScheduleMode parse_schedule_mode(std::string_view s) {
  if (s == "static") return ScheduleMode::kStatic;
  if (s == "adaptive") return ScheduleMode::kAdaptive;
  fail(ErrorKind::kInvalidInput, "unknown schedule mode '" + std::string(s) + "'");
}

struct EngineConfig {
  int K = 3;
  int theta = 80;
  int max_reflection_rounds = 1;
  Mode mode = Mode::kTwig;
  ScheduleMode schedule_mode = ScheduleMode::kStatic;
  std::uint64_t seed = 0;
  Geometry geometry;
  // Pass reflection history (scores and revisions) to later thoughts.
  bool expose_reflections = true;

  void validate() const {
    require(K >= 1 && K <= geometry.height, ErrorKind::kInvalidInput,
            "K must be in [1, canvas height]");
    require(theta >= 0 && theta <= 100, ErrorKind::kInvalidInput, "theta must be in [0, 100]");
    require(max_reflection_rounds >= 0 && max_reflection_rounds <= 2, ErrorKind::kInvalidInput,
            "max_reflection_rounds must be in [0, 2]");
    require(geometry.height >= 1 && geometry.width >= 1 && geometry.vocab_size >= 1,
            ErrorKind::kInvalidInput, "bad canvas geometry");
  }
};

struct Schedule {
  int K = 0;
  std::vector<RegionDescriptor> descriptors;
  ScheduleMode mode = ScheduleMode::kStatic;
  std::vector<double> ratios;  // adaptive only
  bool fallback = false;
  std::string note;
  std::optional<ScheduleProposal> proposal;  // raw backend answer, adaptive only
};

// K bands of equal height; remainder rows go to the earliest bands.
inline std::vector<RegionDescriptor> uniform_bands(const Geometry& g, int K) {
  require(K >= 1 && K <= g.height, ErrorKind::kInvalidInput, "cannot split canvas into K bands");
  std::vector<RegionDescriptor> out;
  const int base = g.height / K;
  const int extra = g.height % K;
  int row = 0;
  for (int k = 0; k < K; ++k) {
    int rows = base + (k < extra ? 1 : 0);
    out.push_back({k + 1, row, row + rows - 1, g.width});
    row += rows;
  }
  return out;
}

// Largest-remainder split of the rows by ratio; ties go to the earlier band.
// Returns nullopt if any band would be empty.
inline std::optional<std::vector<RegionDescriptor>> proportional_bands(const Geometry& g,
                                                                       const std::vector<double>& ratios) {
  const int K = static_cast<int>(ratios.size());
  std::vector<int> rows(ratios.size());
  std::vector<double> rem(ratios.size());
  int used = 0;
  for (int k = 0; k < K; ++k) {
    double exact = ratios[k] * g.height;
    rows[k] = static_cast<int>(std::floor(exact + 1e-9));
    rem[k] = exact - rows[k];
    used += rows[k];
  }
  std::vector<int> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; used < g.height && i < K; ++i, ++used) ++rows[order[i]];
  if (used != g.height) return std::nullopt;
  std::vector<RegionDescriptor> out;
  int row = 0;
  for (int k = 0; k < K; ++k) {
    if (rows[k] < 1) return std::nullopt;
    out.push_back({k + 1, row, row + rows[k] - 1, g.width});
    row += rows[k];
  }
  return out;
}

// Why a proposed adaptive schedule is unusable, or empty if it is fine.
inline std::string adaptive_violation(const ScheduleProposal& p, int max_k) {
  const int K = p.k;
  if (K < 1 || K > max_k) return "proposed K=" + std::to_string(K) + " outside [1, " + std::to_string(max_k) + "]";
  if (static_cast<int>(p.ratios.size()) != K) {
    return "expected " + std::to_string(K) + " ratios, got " + std::to_string(p.ratios.size());
  }
  double sum = 0.0;
  for (double r : p.ratios) {
    if (!std::isfinite(r)) return "non-finite ratio";
    if (r < 1.0 / (4.0 * K)) return "ratio below the 1/(4K) floor";
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) return "ratios sum to " + std::to_string(sum);
  return {};
}

inline Schedule make_schedule(std::string_view prompt, Backend& backend, const EngineConfig& config) {
  config.validate();
  Schedule s;
  s.mode = config.schedule_mode;
  if (config.schedule_mode == ScheduleMode::kAdaptive) {
    std::string why;
    try {
      ScheduleProposal p = backend.schedule(prompt, config.K);
      s.proposal = p;
      why = adaptive_violation(p, config.K);
      if (why.empty()) {
        if (auto bands = proportional_bands(config.geometry, p.ratios)) {
          s.K = p.k;
          s.descriptors = std::move(*bands);
          s.ratios = p.ratios;
          return s;
        }
        why = "ratios leave a band without rows";
      }
    } catch (const Error& e) {
      why = std::string("schedule request failed: ") + e.what();
    }
    s.fallback = true;
    s.note = "adaptive schedule rejected (" + why + "); using uniform bands";
  }
  s.K = config.K;
  s.descriptors = uniform_bands(config.geometry, config.K);
  return s;
}

}  // namespace twig

#endif  // TWIG_SCHEDULE_HPP_
