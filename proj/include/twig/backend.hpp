// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef TWIG_BACKEND_HPP_
#define TWIG_BACKEND_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "twig/error.hpp"
#include "twig/sequence.hpp"

namespace twig {

struct ReflectionTuple {
  int score = 0;  // critic score in [0, 100]
  std::string revised_thought;
};

struct ReflectionRecord {
  int k = 0;
  int score = 0;
  std::string revised;
};

struct ScheduleProposal {
  int k = 0;
  std::vector<double> ratios;
};

// Everything a forward pass may condition on. Band index k is 1-based; k = 0
// addresses the whole canvas (a global plan or a global critique).
struct BackendContext {
  std::string prompt;
  std::vector<std::string> thoughts;      // current slot texts, in order
  std::vector<RegionTokens> regions;      // bands generated so far
  std::vector<ReflectionRecord> reflections;
  int k = 0;
  int num_bands = 0;
  RegionDescriptor band;                  // target band for generate_region
  int attempt = 0;                        // regenerations of band k so far
  std::uint64_t seed = 0;
  Geometry geometry;
};

// The four forward-pass roles of a unified understanding/generation model.
// One instance serves one trajectory; instances are independent.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual ScheduleProposal schedule(std::string_view prompt, int max_k) = 0;
  virtual std::string think(const BackendContext& ctx) = 0;
  virtual RegionTokens generate_region(const BackendContext& ctx) = 0;
  virtual ReflectionTuple reflect(const BackendContext& ctx) = 0;

  // Same (context, seed) always yields the same answer.
  virtual bool deterministic() const { return true; }
};

// Creates one fresh session per trajectory, so trajectories can run
// concurrently.
using BackendFactory = std::function<std::unique_ptr<Backend>()>;

inline void check_thought(const std::string& text) {
  require(!text.empty(), ErrorKind::kContract, "backend returned an empty thought");
}

inline void check_region(const RegionTokens& tokens, const RegionDescriptor& band, int vocab_size) {
  require(tokens.tokens.size() == static_cast<std::size_t>(band.token_count()), ErrorKind::kContract,
          "backend returned " + std::to_string(tokens.tokens.size()) + " tokens for a " +
              std::to_string(band.token_count()) + "-token band");
  for (Token t : tokens.tokens) {
    require(t < vocab_size, ErrorKind::kContract, "token id " + std::to_string(t) + " outside vocabulary");
  }
}

inline void check_reflection(const ReflectionTuple& r) {
  require(r.score >= 0 && r.score <= 100, ErrorKind::kContract,
          "critic score " + std::to_string(r.score) + " outside [0, 100]");
  require(!r.revised_thought.empty(), ErrorKind::kContract, "empty revised thought");
}

}  // namespace twig

#endif  // TWIG_BACKEND_HPP_
