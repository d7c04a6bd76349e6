// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Reward providers over a finished canvas and their unweighted ensemble.
// The four built-in providers stand in for a human-preference model, an
// object grounder, a VQA consistency checker and an LMM alignment judge.

#ifndef TWIG_REWARDS_HPP_
#define TWIG_REWARDS_HPP_

#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twig/bands.hpp"
#include "twig/error.hpp"
#include "twig/scene.hpp"
#include "twig/sequence.hpp"

namespace twig {

struct RewardBundle {
  std::vector<std::pair<std::string, double>> scores;  // provider order as configured
  double ensemble = 0.0;
};

using RewardProvider = std::function<double(const SceneSpec&, const Canvas&)>;

namespace detail {

struct Cell {
  int row;
  int col;
};

// First occurrence (row-major) of each spec object's token.
inline std::vector<std::optional<Cell>> locate(const SceneSpec& spec, const Canvas& canvas) {
  std::vector<std::optional<Cell>> where(spec.objects.size());
  for (int r = 0; r < canvas.height; ++r) {
    for (int c = 0; c < canvas.width; ++c) {
      Token t = canvas.at(r, c);
      if (t == kEmptyToken) continue;
      for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        if (!where[i] && spec.objects[i].id.token() == t) where[i] = Cell{r, c};
      }
    }
  }
  return where;
}

inline double fraction(int hit, int total) {
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace detail

// 1 - (non-empty cells that are not the first copy of a spec object) / cells.
inline double aesthetic_score(const SceneSpec& spec, const Canvas& canvas) {
  auto where = detail::locate(spec, canvas);
  int off_spec = 0;
  for (int r = 0; r < canvas.height; ++r) {
    for (int c = 0; c < canvas.width; ++c) {
      if (canvas.at(r, c) == kEmptyToken) continue;
      bool on_spec = false;
      for (const auto& w : where) on_spec = on_spec || (w && w->row == r && w->col == c);
      if (!on_spec) ++off_spec;
    }
  }
  const int total = canvas.height * canvas.width;
  return total == 0 ? 1.0 : 1.0 - static_cast<double>(off_spec) / total;
}

// Fraction of spec objects present anywhere with the right color and shape.
inline double grounding_score(const SceneSpec& spec, const Canvas& canvas) {
  auto where = detail::locate(spec, canvas);
  int found = 0;
  for (const auto& w : where) found += w.has_value();
  return detail::fraction(found, static_cast<int>(spec.objects.size()));
}

// Fraction of relation clauses that hold on the actual cell coordinates.
inline double vqa_score(const SceneSpec& spec, const Canvas& canvas) {
  auto where = detail::locate(spec, canvas);
  int satisfied = 0;
  for (const RelationClause& rc : spec.relations) {
    const auto& s = where[rc.subject];
    const auto& o = where[rc.object];
    if (!s || !o) continue;
    bool ok = false;
    switch (rc.relation) {
      case Relation::kLeftOf: ok = s->col < o->col; break;
      case Relation::kRightOf: ok = s->col > o->col; break;
      case Relation::kAbove: ok = s->row < o->row; break;
      case Relation::kBelow: ok = s->row > o->row; break;
    }
    satisfied += ok;
  }
  return detail::fraction(satisfied, static_cast<int>(spec.relations.size()));
}

// Fraction of objects present inside the band the rule assignment gives them,
// using the canvas's own band partition.
inline double alignment_score(const SceneSpec& spec, const Canvas& canvas) {
  if (spec.objects.empty()) return 1.0;
  if (canvas.bands.empty()) return 0.0;
  std::optional<BandAssignment> assignment;
  try {
    assignment = assign_bands(spec, static_cast<int>(canvas.bands.size()));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInfeasibleSpec) throw;
    return 0.0;
  }
  int aligned = 0;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const RegionDescriptor& band = canvas.bands[assignment->band_of[i]];
    const Token want = spec.objects[i].id.token();
    bool present = false;
    for (int r = band.start_row; r <= band.end_row && !present; ++r) {
      for (int c = 0; c < canvas.width && !present; ++c) present = canvas.at(r, c) == want;
    }
    aligned += present;
  }
  return detail::fraction(aligned, static_cast<int>(spec.objects.size()));
}

inline const std::vector<std::string>& default_reward_names() {
  static const std::vector<std::string> names = {"aesthetic", "grounding", "vqa", "alignment"};
  return names;
}

// Name -> provider. Real reward models can be registered under new names.
class RewardRegistry {
 public:
  RewardRegistry() {
    add("aesthetic", aesthetic_score);
    add("grounding", grounding_score);
    add("vqa", vqa_score);
    add("alignment", alignment_score);
  }

  void add(std::string name, RewardProvider provider) { providers_[std::move(name)] = std::move(provider); }

  bool contains(const std::string& name) const { return providers_.count(name) > 0; }

  double score(const std::string& name, const SceneSpec& spec, const Canvas& canvas) const {
    auto it = providers_.find(name);
    require(it != providers_.end(), ErrorKind::kInvalidInput, "unknown reward provider '" + name + "'");
    return it->second(spec, canvas);
  }

 private:
  std::map<std::string, RewardProvider> providers_;
};

inline double score_provider(const std::string& name, const SceneSpec& spec, const Canvas& canvas) {
  static const RewardRegistry registry;
  return registry.score(name, spec, canvas);
}

inline double ensemble(std::span<const double> scores) {
  require(!scores.empty(), ErrorKind::kInvalidInput, "ensemble of zero providers");
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

inline RewardBundle score_all(const std::vector<std::string>& names, const SceneSpec& spec,
                              const Canvas& canvas, const RewardRegistry& registry = {}) {
  RewardBundle bundle;
  std::vector<double> values;
  for (const std::string& name : names) {
    double v = registry.score(name, spec, canvas);
    bundle.scores.emplace_back(name, v);
    values.push_back(v);
  }
  bundle.ensemble = ensemble(values);
  return bundle;
}

// Parses "aesthetic,grounding,..." and rejects unknown or repeated names.
inline std::vector<std::string> parse_reward_list(const std::string& csv,
                                                  const RewardRegistry& registry = {}) {
  std::vector<std::string> names;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    std::string name = csv.substr(start, end - start);
    require(registry.contains(name), ErrorKind::kInvalidInput, "unknown reward provider '" + name + "'");
    for (const auto& n : names) require(n != name, ErrorKind::kInvalidInput, "duplicate provider " + name);
    names.push_back(std::move(name));
    start = end + 1;
  }
  return names;
}

}  // namespace twig

#endif  // TWIG_REWARDS_HPP_
