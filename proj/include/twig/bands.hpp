// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef TWIG_BANDS_HPP_
#define TWIG_BANDS_HPP_

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twig/error.hpp"
#include "twig/scene.hpp"

namespace twig {

// Role of an object in the first relation clause that mentions it.
enum class Role {
  kFree,
  kAboveSubject,
  kAboveObject,
  kBelowSubject,
  kBelowObject,
  kHorizontalSubject,
  kHorizontalObject,
};

inline constexpr int kNumRoles = 7;

inline constexpr std::array<std::string_view, kNumRoles> kRoleNames = {
    "free",        "above_subject",      "above_object",     "below_subject",
    "below_object", "horizontal_subject", "horizontal_object"};

inline std::string_view to_string(Role r) { return kRoleNames[static_cast<int>(r)]; }

inline Role role_of(const SceneSpec& spec, int object) {
  for (const RelationClause& rc : spec.relations) {
    const bool subject = rc.subject == object;
    if (!subject && rc.object != object) continue;
    switch (rc.relation) {
      case Relation::kAbove: return subject ? Role::kAboveSubject : Role::kAboveObject;
      case Relation::kBelow: return subject ? Role::kBelowSubject : Role::kBelowObject;
      default: return subject ? Role::kHorizontalSubject : Role::kHorizontalObject;
    }
  }
  return Role::kFree;
}

// Band an object in the given role takes when nothing else constrains it.
// An "above" pair sits in (top, middle); a "below" pair in (middle, bottom)
// with the subject lowest; everything else defaults to the middle.
inline int preferred_band(Role role, int num_bands) {
  const int mid = (num_bands - 1) / 2;
  switch (role) {
    case Role::kAboveSubject: return 0;
    case Role::kBelowSubject: return num_bands - 1;
    default: return mid;
  }
}

// Feasibility structure of a scene over K bands: horizontal relations tie
// objects into one band, vertical relations impose strict band order, pins
// fix a band. Interval bounds are exact projections of the feasible set
// (difference constraints), so any value inside an interval extends to a
// complete feasible assignment.
class BandModel {
 public:
  BandModel(const SceneSpec& spec, int num_bands) : num_bands_(num_bands) {
    require(num_bands >= 1, ErrorKind::kInvalidInput, "band count must be >= 1");
    const int n = static_cast<int>(spec.objects.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) {
        x = parent[x] = parent[parent[x]];
      }
      return x;
    };
    for (const RelationClause& rc : spec.relations) {
      if (is_horizontal(rc.relation)) parent[find(rc.subject)] = find(rc.object);
    }
    group_.assign(n, -1);
    std::vector<int> root_to_group(n, -1);
    for (int i = 0; i < n; ++i) {
      int r = find(i);
      if (root_to_group[r] < 0) {
        root_to_group[r] = num_groups_++;
      }
      group_[i] = root_to_group[r];
    }

    pin_.assign(num_groups_, std::nullopt);
    for (int i = 0; i < n; ++i) {
      const auto& band = spec.objects[i].band;
      if (!band) continue;
      auto resolved = band->resolve(num_bands);
      if (!resolved) {
        infeasible("band '" + band->text() + "' does not exist with " + std::to_string(num_bands) + " bands");
      }
      auto& pin = pin_[group_[i]];
      if (pin && *pin != *resolved) infeasible("objects tied horizontally are pinned to different bands");
      pin = resolved;
    }

    succ_.assign(num_groups_, {});
    pred_.assign(num_groups_, {});
    for (const RelationClause& rc : spec.relations) {
      if (is_horizontal(rc.relation)) continue;
      int upper = group_[rc.relation == Relation::kAbove ? rc.subject : rc.object];
      int lower = group_[rc.relation == Relation::kAbove ? rc.object : rc.subject];
      if (upper == lower) infeasible("objects tied to one band are also ordered vertically");
      succ_[upper].push_back(lower);
      pred_[lower].push_back(upper);
    }

    // Kahn topological order; leftovers mean a vertical cycle.
    std::vector<int> indegree(num_groups_, 0);
    for (int g = 0; g < num_groups_; ++g) indegree[g] = static_cast<int>(pred_[g].size());
    for (int g = 0; g < num_groups_; ++g) {
      if (indegree[g] == 0) topo_.push_back(g);
    }
    for (std::size_t i = 0; i < topo_.size(); ++i) {
      for (int s : succ_[topo_[i]]) {
        if (--indegree[s] == 0) topo_.push_back(s);
      }
    }
    if (static_cast<int>(topo_.size()) != num_groups_) infeasible("vertical relations form a cycle");
    if (!intervals({})) infeasible("constraints cannot fit in " + std::to_string(num_bands) + " bands");
  }

  int num_bands() const { return num_bands_; }
  int group_of(int object) const { return group_[object]; }

  // Feasible [lo, hi] band interval per group given already-fixed groups
  // (fixed[g] < 0 means free). nullopt when nothing is feasible.
  std::optional<std::vector<std::pair<int, int>>> intervals(const std::vector<int>& fixed) const {
    std::vector<std::pair<int, int>> iv(num_groups_, {0, num_bands_ - 1});
    for (int g = 0; g < num_groups_; ++g) {
      auto& [lo, hi] = iv[g];
      std::optional<int> f = pin_[g];
      if (!fixed.empty() && fixed[g] >= 0) {
        if (f && *f != fixed[g]) return std::nullopt;
        f = fixed[g];
      }
      if (f) lo = hi = *f;
    }
    for (int g : topo_) {
      for (int p : pred_[g]) {
        iv[g].first = std::max(iv[g].first, iv[p].first + 1);
      }
    }
    for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
      for (int s : succ_[*it]) {
        iv[*it].second = std::min(iv[*it].second, iv[s].second - 1);
      }
    }
    for (const auto& [lo, hi] : iv) {
      if (lo > hi) return std::nullopt;
    }
    return iv;
  }

 private:
  [[noreturn]] static void infeasible(const std::string& why) { fail(ErrorKind::kInfeasibleSpec, why); }

  int num_bands_;
  int num_groups_ = 0;
  std::vector<int> group_;
  std::vector<std::optional<int>> pin_;
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<int>> pred_;
  std::vector<int> topo_;
};

struct BandAssignment {
  int num_bands = 0;
  std::vector<int> band_of;                   // per object, 0-based
  std::vector<std::vector<int>> objects_in;   // per band, declaration order
};

inline BandAssignment make_assignment(int num_bands, std::vector<int> band_of) {
  BandAssignment a{num_bands, std::move(band_of), std::vector<std::vector<int>>(num_bands)};
  for (std::size_t i = 0; i < a.band_of.size(); ++i) {
    a.objects_in[a.band_of[i]].push_back(static_cast<int>(i));
  }
  return a;
}

// Deterministic rule assignment: objects in declaration order take their
// role's preferred band clamped into what remains feasible.
inline BandAssignment assign_bands(const SceneSpec& spec, int num_bands) {
  BandModel model(spec, num_bands);
  const int n = static_cast<int>(spec.objects.size());
  std::vector<int> fixed(n, -1);  // indexed by group, n >= groups
  std::vector<int> band_of(n, 0);
  for (int i = 0; i < n; ++i) {
    const int g = model.group_of(i);
    if (fixed[g] < 0) {
      auto iv = model.intervals(fixed);
      if (!iv) fail(ErrorKind::kInfeasibleSpec, "no feasible band left");
      const auto [lo, hi] = (*iv)[g];
      fixed[g] = std::clamp(preferred_band(role_of(spec, i), num_bands), lo, hi);
    }
    band_of[i] = fixed[g];
  }
  return make_assignment(num_bands, std::move(band_of));
}

}  // namespace twig

#endif  // TWIG_BANDS_HPP_
