// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Compositional prompt suites for the toy domain and the runners that score
// engine configurations on them.

#ifndef TWIG_BENCH_HPP_
#define TWIG_BENCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twig/bands.hpp"
#include "twig/engine.hpp"
#include "twig/error.hpp"
#include "twig/hash.hpp"
#include "twig/parallel.hpp"
#include "twig/rewards.hpp"
#include "twig/scene.hpp"
#include "twig/toysim.hpp"

namespace twig {

enum class Category { kColor, kShape, kSpatial, kComplex };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::kColor: return "color";
    case Category::kShape: return "shape";
    case Category::kSpatial: return "spatial";
    case Category::kComplex: return "complex";
  }
  return "?";
}

inline Category parse_category(std::string_view s) {
  if (s == "color") return Category::kColor;
  if (s == "shape") return Category::kShape;
  if (s == "spatial") return Category::kSpatial;
  if (s == "complex") return Category::kComplex;
  fail(ErrorKind::kInvalidInput, "unknown category '" + std::string(s) + "'");
}

struct BenchSuite {
  Category category = Category::kColor;
  std::vector<std::string> prompts;
  std::uint64_t seed = 0;
};

namespace detail {

class SuiteRng {
 public:
  explicit SuiteRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return state_ = splitmix64(state_); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
  bool coin() { return next() & 1; }

 private:
  std::uint64_t state_;
};

inline ObjectId random_object(SuiteRng& rng) { return ObjectId::from_ordinal(rng.below(kNumObjectKinds)); }

// `count` distinct objects.
inline std::vector<ObjectId> distinct_objects(SuiteRng& rng, int count) {
  std::vector<ObjectId> out;
  while (static_cast<int>(out.size()) < count) {
    ObjectId id = random_object(rng);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

inline const char* kBandWords[] = {"top", "middle", "bottom"};
inline const char* kRelationWords[] = {"left of", "right of", "above", "below"};

inline std::string color_prompt(SuiteRng& rng) {
  const int n = 1 + rng.below(2);
  std::vector<ObjectId> objs;
  while (static_cast<int>(objs.size()) < n) {
    ObjectId id = random_object(rng);
    bool clash = false;
    for (const ObjectId& o : objs) clash = clash || o.color == id.color;
    if (!clash) objs.push_back(id);
  }
  std::string out;
  for (const ObjectId& o : objs) {
    if (!out.empty()) out += "; ";
    out += o.name();
    if (rng.below(3) == 0) out += std::string(" in ") + kBandWords[rng.below(3)];
  }
  return out;
}

inline std::string shape_prompt(SuiteRng& rng) {
  ObjectId a = random_object(rng);
  ObjectId b = random_object(rng);
  while (b.shape == a.shape) b = random_object(rng);
  std::string out = a.name();
  if (rng.coin()) out += std::string(" in ") + kBandWords[rng.below(3)];
  out += "; " + b.name();
  if (rng.coin()) out += std::string(" in ") + kBandWords[rng.below(3)];
  return out;
}

inline std::string spatial_prompt(SuiteRng& rng) {
  auto objs = distinct_objects(rng, 2);
  return objs[0].name() + " " + kRelationWords[rng.below(4)] + " " + objs[1].name();
}

// Three or four clauses; at least one relation and at least one other kind
// of constraint (a pin, a second relation type, or a free object).
inline std::string complex_candidate(SuiteRng& rng) {
  const int clauses = 3 + rng.below(2);
  auto pool = distinct_objects(rng, 6);
  int next_new = 0;
  std::vector<ObjectId> used;
  auto pick = [&](bool fresh) {
    if (!fresh && !used.empty() && rng.coin()) return used[static_cast<std::size_t>(rng.below(static_cast<int>(used.size())))];
    used.push_back(pool[static_cast<std::size_t>(next_new++ % 6)]);
    return used.back();
  };
  std::string out;
  for (int c = 0; c < clauses; ++c) {
    if (!out.empty()) out += "; ";
    const int kind = c == 0 ? 0 : rng.below(3);
    if (kind == 0 || kind == 1) {
      ObjectId s = pick(c == 0);
      ObjectId o = pick(true);
      const int rel = kind == 0 ? 2 + rng.below(2) : rng.below(2);
      out += s.name() + " " + kRelationWords[rel] + " " + o.name();
    } else {
      ObjectId o = pick(true);
      out += o.name();
      if (rng.coin()) out += std::string(" in ") + kBandWords[rng.below(3)];
    }
  }
  return out;
}

// Usable complex prompt: parses, is feasible at K=3, and every per-band
// thought fits the default generator context.
inline bool complex_ok(const std::string& prompt) {
  try {
    SceneSpec spec = parse_scene(prompt);
    if (spec.clauses.size() < 3) return false;
    BandAssignment a = assign_bands(spec, 3);
    for (int b = 0; b < 3; ++b) {
      if (band_thought(spec, a, b).size() > 48) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

// Deterministic prompt set. color: one or two objects of distinct colors;
// shape: two objects of distinct shapes; spatial: one relation clause;
// complex: three or four clauses mixing relations, pins and free objects.
inline BenchSuite generate_suite(Category category, int n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::kInvalidInput, "suite size must be >= 1");
  BenchSuite suite{category, {}, seed};
  detail::SuiteRng rng(derive_seed(seed, {static_cast<std::uint64_t>(category) + 1}));
  while (static_cast<int>(suite.prompts.size()) < n) {
    std::string p;
    switch (category) {
      case Category::kColor: p = detail::color_prompt(rng); break;
      case Category::kShape: p = detail::shape_prompt(rng); break;
      case Category::kSpatial: p = detail::spatial_prompt(rng); break;
      case Category::kComplex: p = detail::complex_candidate(rng); break;
    }
    if (category == Category::kComplex && !detail::complex_ok(p)) continue;
    try {
      assign_bands(parse_scene(p), 3);
    } catch (const Error&) {
      continue;
    }
    suite.prompts.push_back(std::move(p));
  }
  return suite;
}

// 50 prompts of each category, in category order.
inline std::vector<std::string> mixed_suite(std::uint64_t seed, int per_category = 50) {
  std::vector<std::string> out;
  for (Category c : {Category::kColor, Category::kShape, Category::kSpatial, Category::kComplex}) {
    auto s = generate_suite(c, per_category, seed);
    out.insert(out.end(), s.prompts.begin(), s.prompts.end());
  }
  return out;
}

// A backend for one trajectory, built from that trajectory's seed.
using SeededFactory = std::function<std::unique_ptr<Backend>(std::uint64_t seed)>;

inline SeededFactory toy_seeded_factory(ToyConfig toy) {
  return [toy](std::uint64_t seed) {
    ToyConfig c = toy;
    c.seed = seed;
    return std::make_unique<ToyBackend>(c);
  };
}

struct EvalRow {
  int prompt_id = 0;
  std::string category;
  std::string mode;
  std::uint64_t seed = 0;
  double score = 0.0;
  bool failed = false;
  std::string error;
};

struct EvalResult {
  std::vector<EvalRow> rows;  // prompt-major, then seed
  double mean = 0.0;
  std::vector<double> seed_means;  // one per run seed

  double seed_std() const {
    if (seed_means.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : seed_means) m += x;
    m /= static_cast<double>(seed_means.size());
    double v = 0.0;
    for (double x : seed_means) v += (x - m) * (x - m);
    return std::sqrt(v / static_cast<double>(seed_means.size()));
  }
};

// Engine seed for prompt `prompt_id` under run seed `run_seed`.
inline std::uint64_t trajectory_seed(std::uint64_t run_seed, int prompt_id) {
  return derive_seed(run_seed, {static_cast<std::uint64_t>(prompt_id)});
}

// Scores every (prompt, seed) pair. A failed trajectory scores 0 and is
// flagged rather than aborting the evaluation.
inline EvalResult evaluate(const EngineConfig& config, const SeededFactory& factory, const BenchSuite& suite,
                           const std::vector<std::uint64_t>& seeds,
                           const std::vector<std::string>& rewards = default_reward_names(), int threads = 1) {
  require(!suite.prompts.empty(), ErrorKind::kInvalidInput, "empty suite");
  require(!seeds.empty(), ErrorKind::kInvalidInput, "no seeds");
  config.validate();
  const std::size_t n = suite.prompts.size() * seeds.size();
  EvalResult res;
  res.rows.resize(n);
  parallel_for(
      n,
      [&](std::size_t idx) {
        const int p = static_cast<int>(idx / seeds.size());
        const std::uint64_t s = seeds[idx % seeds.size()];
        EvalRow& row = res.rows[idx];
        row.prompt_id = p;
        row.category = std::string(to_string(suite.category));
        row.mode = std::string(to_string(config.mode));
        row.seed = s;
        EngineConfig c = config;
        c.seed = trajectory_seed(s, p);
        try {
          auto backend = factory(c.seed);
          Trace t = run(suite.prompts[static_cast<std::size_t>(p)], *backend, c);
          row.score = score_all(rewards, parse_scene(t.prompt), *t.canvas).ensemble;
        } catch (const Error& e) {
          row.failed = true;
          row.error = e.what();
          row.score = 0.0;
        }
      },
      threads);
  std::vector<double> sums(seeds.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sums[i % seeds.size()] += res.rows[i].score;
    total += res.rows[i].score;
  }
  res.mean = total / static_cast<double>(n);
  for (double s : sums) res.seed_means.push_back(s / static_cast<double>(suite.prompts.size()));
  return res;
}

struct NamedConfig {
  std::string name;
  EngineConfig config;
  SeededFactory factory;
};

struct ModeReport {
  std::string category;
  std::vector<std::string> names;
  std::vector<EvalResult> results;

  // Per-prompt mean score (over seeds) of config `c`.
  std::vector<double> prompt_means(std::size_t c) const {
    std::map<int, std::pair<double, int>> acc;
    for (const EvalRow& r : results[c].rows) {
      acc[r.prompt_id].first += r.score;
      ++acc[r.prompt_id].second;
    }
    std::vector<double> out;
    for (auto& [id, v] : acc) out.push_back(v.first / v.second);
    return out;
  }

  void write_csv(std::ostream& out) const {
    out << "prompt_id,category,mode,seed,score\n";
    for (std::size_t c = 0; c < results.size(); ++c) {
      for (const EvalRow& r : results[c].rows) {
        out << r.prompt_id << ',' << r.category << ',' << names[c] << ',' << r.seed << ','
            << std::setprecision(10) << r.score << '\n';
      }
    }
  }

  std::string markdown() const {
    std::ostringstream out;
    out << "| config | mean | delta vs " << names.front() << " | seed std | failures |\n";
    out << "|---|---|---|---|---|\n";
    for (std::size_t c = 0; c < results.size(); ++c) {
      int failures = 0;
      for (const EvalRow& r : results[c].rows) failures += r.failed;
      out << "| " << names[c] << " | " << std::fixed << std::setprecision(4) << results[c].mean << " | "
          << std::showpos << results[c].mean - results.front().mean << std::noshowpos << " | "
          << results[c].seed_std() << " | " << failures << " |\n";
    }
    return out.str();
  }
};

inline ModeReport compare_modes(const BenchSuite& suite, const std::vector<NamedConfig>& configs,
                                const std::vector<std::uint64_t>& seeds,
                                const std::vector<std::string>& rewards = default_reward_names(), int threads = 1) {
  require(configs.size() >= 2, ErrorKind::kInvalidInput, "compare_modes needs at least two configs");
  ModeReport report;
  report.category = std::string(to_string(suite.category));
  for (const NamedConfig& nc : configs) {
    report.names.push_back(nc.name);
    report.results.push_back(evaluate(nc.config, nc.factory, suite, seeds, rewards, threads));
  }
  return report;
}

inline std::vector<std::uint64_t> seed_range(int n, std::uint64_t first = 0) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace twig

#endif  // TWIG_BENCH_HPP_
