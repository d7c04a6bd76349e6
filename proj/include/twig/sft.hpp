// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Supervised records harvested from interleaved traces, mixtures over the
// think / gen / reflect pools, and a tabular maximum-likelihood fit.
//
// Per band k (1-based) the record inputs are:
//   think_k    prompt, thoughts < k, regions < k
//   gen_k      thoughts <= k, regions < k          (no prompt)
//   reflect_k  prompt, thoughts <= k, regions <= k
// each taken from the trace state at the last event of that kind for band k.

#ifndef TWIG_SFT_HPP_
#define TWIG_SFT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "twig/bands.hpp"
#include "twig/error.hpp"
#include "twig/hash.hpp"
#include "twig/policy.hpp"
#include "twig/scene.hpp"
#include "twig/toysim.hpp"
#include "twig/trace.hpp"

namespace twig {

inline constexpr std::string_view kSftSchema = "twig-sft/1";

enum class RecordKind { kThink, kGen, kReflect };

inline std::string_view to_string(RecordKind k) {
  switch (k) {
    case RecordKind::kThink: return "think";
    case RecordKind::kGen: return "gen";
    case RecordKind::kReflect: return "reflect";
  }
  return "?";
}

inline RecordKind parse_record_kind(std::string_view s) {
  if (s == "think") return RecordKind::kThink;
  if (s == "gen") return RecordKind::kGen;
  if (s == "reflect") return RecordKind::kReflect;
  throw Error(ErrorKind::kInvalidInput, "unknown record kind '" + std::string(s) + "'");
}

struct SftRecord {
  RecordKind kind = RecordKind::kThink;
  int k = 1;
  std::uint64_t trace_seed = 0;
  std::optional<std::string> prompt;  // absent for gen records
  std::vector<std::string> thoughts;
  std::vector<std::vector<Token>> regions;
  // Target: text for think, tokens for gen, (score, text) for reflect.
  std::string text;
  std::vector<Token> tokens;
  int score = 0;

  friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

inline nlohmann::json record_to_json(const SftRecord& r) {
  nlohmann::json inputs = nlohmann::json::object();
  if (r.prompt) inputs["prompt"] = *r.prompt;
  inputs["thoughts"] = r.thoughts;
  inputs["regions"] = r.regions;
  nlohmann::json target;
  switch (r.kind) {
    case RecordKind::kThink: target = {{"thought", r.text}}; break;
    case RecordKind::kGen: target = {{"tokens", r.tokens}}; break;
    case RecordKind::kReflect: target = {{"score", r.score}, {"revised", r.text}}; break;
  }
  return {{"kind", to_string(r.kind)},
          {"k", r.k},
          {"trace_seed", r.trace_seed},
          {"inputs", inputs},
          {"target", target}};
}

inline SftRecord record_from_json(const nlohmann::json& j) {
  SftRecord r;
  r.kind = parse_record_kind(j.at("kind").get<std::string>());
  r.k = j.at("k").get<int>();
  r.trace_seed = j.at("trace_seed").get<std::uint64_t>();
  const auto& in = j.at("inputs");
  if (in.contains("prompt")) r.prompt = in.at("prompt").get<std::string>();
  r.thoughts = in.at("thoughts").get<std::vector<std::string>>();
  r.regions = in.at("regions").get<std::vector<std::vector<Token>>>();
  const auto& t = j.at("target");
  switch (r.kind) {
    case RecordKind::kThink: r.text = t.at("thought").get<std::string>(); break;
    case RecordKind::kGen: r.tokens = t.at("tokens").get<std::vector<Token>>(); break;
    case RecordKind::kReflect:
      r.score = t.at("score").get<int>();
      r.text = t.at("revised").get<std::string>();
      break;
  }
  return r;
}

// Nine records (think, gen, reflect for k = 1..3) from a finished
// interleaved trace with K = 3. Regions that were replaced contribute their
// final tokens.
inline std::vector<SftRecord> build_records(const Trace& trace) {
  require(trace.config.mode == Mode::kTwig, ErrorKind::kInvalidInput, "records need an interleaved trace");
  require(trace.canvas.has_value(), ErrorKind::kInvalidInput, "trace is incomplete");
  const Schedule* sched = trace.schedule();
  require(sched && sched->K == 3, ErrorKind::kInvalidInput, "records need K = 3");
  constexpr int K = 3;
  std::vector<std::string> thoughts;
  std::vector<std::vector<Token>> regions;
  std::array<std::optional<SftRecord>, K> think, gen, reflect;
  auto head = [](const auto& v, int n) {
    return std::decay_t<decltype(v)>(v.begin(), v.begin() + std::min<std::ptrdiff_t>(n, std::ssize(v)));
  };
  for (const TraceEvent& e : trace.events) {
    if (const auto* t = std::get_if<ThoughtEvent>(&e)) {
      require(t->k >= 1 && t->k <= K, ErrorKind::kInvalidInput, "thought outside the band range");
      think[t->k - 1] = SftRecord{RecordKind::kThink, t->k, trace.config.seed, trace.prompt,
                                  head(thoughts, t->k - 1), head(regions, t->k - 1), t->text, {}, 0};
      thoughts.resize(static_cast<std::size_t>(t->k));
      thoughts[t->k - 1] = t->text;
    } else if (const auto* r = std::get_if<RegionEvent>(&e)) {
      require(static_cast<int>(thoughts.size()) >= r->k, ErrorKind::kInvalidInput, "region before its thought");
      gen[r->k - 1] = SftRecord{RecordKind::kGen, r->k, trace.config.seed, std::nullopt,
                                head(thoughts, r->k), head(regions, r->k - 1), {}, r->tokens, 0};
      regions.resize(static_cast<std::size_t>(r->k));
      regions[r->k - 1] = r->tokens;
    } else if (const auto* c = std::get_if<ReflectionEvent>(&e)) {
      require(c->k >= 1 && static_cast<int>(regions.size()) >= c->k, ErrorKind::kInvalidInput,
              "reflection before its region");
      reflect[c->k - 1] = SftRecord{RecordKind::kReflect, c->k, trace.config.seed, trace.prompt,
                                    head(thoughts, c->k), head(regions, c->k), c->revised, {}, c->score};
    } else if (const auto* p = std::get_if<ReplaceEvent>(&e)) {
      thoughts.at(static_cast<std::size_t>(p->k - 1)) = p->revised;
    }
  }
  std::vector<SftRecord> out;
  for (auto* table : {&think, &gen, &reflect}) {
    for (auto& r : *table) {
      require(r.has_value(), ErrorKind::kInvalidInput, "trace is missing a pass");
      out.push_back(std::move(*r));
    }
  }
  return out;
}

// Keeps traces whose ensemble reward is at least `min_reward`.
inline std::vector<Trace> filter_traces(const std::vector<Trace>& traces, double min_reward) {
  std::vector<Trace> out;
  for (const Trace& t : traces) {
    require(t.reward.has_value(), ErrorKind::kInvalidInput, "trace has no reward");
    if (t.reward->ensemble >= min_reward) out.push_back(t);
  }
  return out;
}

// Think : gen : reflect weights.
struct Mixture {
  double think = 1.0;
  double gen = 1.0;
  double reflect = 1.0;
};

// Named compositions. The ratios are approximate.
inline Mixture mixture_preset(std::string_view name) {
  if (name == "think_heavy") return {1.0, 0.5, 0.0};
  if (name == "gen_heavy") return {0.5, 1.0, 0.0};
  if (name == "think_gen_equal") return {0.75, 0.75, 0.0};
  if (name == "reflect_lite") return {0.64, 0.64, 0.21};
  if (name == "reflect_heavy") return {0.5, 0.5, 0.5};
  throw Error(ErrorKind::kInvalidInput, "unknown mixture preset '" + std::string(name) + "'");
}

inline Mixture parse_mixture(std::string_view text) {
  if (text.find(':') == std::string_view::npos) return mixture_preset(text);
  std::array<double, 3> v{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', start) : text.size();
    require(end != std::string_view::npos, ErrorKind::kInvalidInput, "mixture must be T:G:R");
    const std::string part(text.substr(start, end - start));
    try {
      std::size_t used = 0;
      v[i] = std::stod(part, &used);
      require(used == part.size(), ErrorKind::kInvalidInput, "bad mixture weight '" + part + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kInvalidInput, "bad mixture weight '" + part + "'");
    }
    start = end + 1;
  }
  require(start >= text.size(), ErrorKind::kInvalidInput, "mixture must be T:G:R");
  return {v[0], v[1], v[2]};
}

namespace detail {

// Fisher-Yates with the splitmix stream, so results do not depend on the
// standard library.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = derive_seed(seed, {static_cast<std::uint64_t>(i)}) % i;
    std::swap(v[i - 1], v[j]);
  }
}

// Largest-remainder split of n by weights.
inline std::array<std::size_t, 3> quotas(const std::array<double, 3>& w, std::size_t n) {
  const double sum = w[0] + w[1] + w[2];
  std::array<std::size_t, 3> q{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * w[i] / sum;
    q[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(q[i]);
    used += q[i];
  }
  while (used < n) {
    int best = -1;
    for (int i = 0; i < 3; ++i) {
      if (w[i] > 0 && (best < 0 || rem[i] > rem[best])) best = i;
    }
    ++q[best];
    rem[best] = -1.0;
    ++used;
  }
  return q;
}

}  // namespace detail

struct Pools {
  std::vector<SftRecord> think, gen, reflect;

  static Pools from(const std::vector<SftRecord>& records) {
    Pools p;
    for (const SftRecord& r : records) {
      (r.kind == RecordKind::kThink ? p.think : r.kind == RecordKind::kGen ? p.gen : p.reflect).push_back(r);
    }
    return p;
  }
};

// Draws up to `size` records without replacement in the requested
// proportions. If a pool with positive weight runs out first, the dataset is
// shrunk to the largest size whose quotas all fit. Output order is shuffled.
inline std::vector<SftRecord> mix(const Pools& pools, const Mixture& m, std::size_t size, std::uint64_t seed) {
  const std::array<double, 3> w{m.think, m.gen, m.reflect};
  for (double x : w) require(x >= 0.0 && std::isfinite(x), ErrorKind::kInvalidInput, "mixture weights must be >= 0");
  require(w[0] + w[1] + w[2] > 0.0, ErrorKind::kInvalidInput, "mixture weights are all zero");
  const std::array<const std::vector<SftRecord>*, 3> src{&pools.think, &pools.gen, &pools.reflect};
  bool any = false;
  for (int i = 0; i < 3; ++i) any = any || (w[i] > 0 && !src[i]->empty());
  require(any, ErrorKind::kInvalidInput, "pools are empty");
  auto fits = [&](std::size_t n) {
    const auto q = detail::quotas(w, n);
    for (int i = 0; i < 3; ++i) {
      if (q[i] > src[i]->size()) return false;
    }
    return true;
  };
  std::size_t n = size;
  if (!fits(n)) {
    std::size_t lo = 0, hi = n;  // fits(lo) holds
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      (fits(mid) ? lo : hi) = mid;
    }
    n = lo;
  }
  const auto q = detail::quotas(w, n);
  std::vector<SftRecord> out;
  for (int i = 0; i < 3; ++i) {
    std::vector<std::size_t> idx(src[i]->size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    detail::seeded_shuffle(idx, derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    for (std::size_t j = 0; j < q[i]; ++j) out.push_back((*src[i])[idx[j]]);
  }
  detail::seeded_shuffle(out, derive_seed(seed, {3}));
  return out;
}

// JSON Lines: a header object, then one record per line.
inline void write_dataset(std::ostream& out, const std::vector<SftRecord>& records,
                          const nlohmann::json& header_extra = nlohmann::json::object()) {
  nlohmann::json header = {{"schema", kSftSchema}, {"tool_version", kToolVersion}, {"records", records.size()}};
  for (const auto& [k, v] : header_extra.items()) header[k] = v;
  out << header.dump() << '\n';
  for (const SftRecord& r : records) out << record_to_json(r).dump() << '\n';
}

struct Dataset {
  nlohmann::json header;
  std::vector<SftRecord> records;
};

inline Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::kInvalidInput, "empty dataset file");
  try {
    d.header = nlohmann::json::parse(line);
    require(d.header.value("schema", "") == kSftSchema, ErrorKind::kInvalidInput, "unsupported dataset schema");
    while (std::getline(in, line)) {
      if (!line.empty()) d.records.push_back(record_from_json(nlohmann::json::parse(line)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("malformed dataset: ") + e.what());
  }
  return d;
}

// Observed choices for the tabular fit, grouped by (table, row, mask).
struct MleCounts {
  struct Entry {
    Table table;
    int row;
    std::vector<int> allowed;  // empty means every action
    std::vector<double> counts;
  };
  std::vector<Entry> entries;

  void add(Table t, int row, std::vector<int> allowed, int num_actions, int action) {
    for (Entry& e : entries) {
      if (e.table == t && e.row == row && e.allowed == allowed) {
        e.counts[action] += 1.0;
        return;
      }
    }
    Entry e{t, row, std::move(allowed), std::vector<double>(static_cast<std::size_t>(num_actions), 0.0)};
    e.counts[action] = 1.0;
    entries.push_back(std::move(e));
  }
};

// Supervision recovered from records. Generation: each object the band's
// thought asks for is matched to a same-shaped target token. Understanding:
// a prompt object named in a band thought (think targets, reflect revisions)
// chose that band among those still feasible when the planner reached it.
inline MleCounts mle_counts(const std::vector<SftRecord>& records, const ToyPolicy& policy) {
  MleCounts c;
  const int K = policy.num_bands();
  for (const SftRecord& r : records) {
    require(r.k >= 1 && r.k <= K, ErrorKind::kInvalidInput, "record band outside the policy's range");
    const int kb = r.k - 1;
    if (r.kind == RecordKind::kGen) {
      require(static_cast<int>(r.thoughts.size()) >= r.k, ErrorKind::kInvalidInput, "gen record lacks its thought");
      const SceneSpec view = detail::read_scene_quietly(r.thoughts[kb]);
      // Exact tokens claim their cells first; leftovers match by shape.
      const std::vector<int> wanted = detail::objects_for_band(view, kb, K, true, 0);
      std::vector<bool> used(r.tokens.size(), false);
      std::vector<int> cell_of(wanted.size(), -1);
      for (bool exact : {true, false}) {
        for (std::size_t w = 0; w < wanted.size(); ++w) {
          if (cell_of[w] >= 0) continue;
          const ObjectId want = view.objects[wanted[w]].id;
          for (std::size_t cell = 0; cell < r.tokens.size(); ++cell) {
            const auto got = ObjectId::from_token(r.tokens[cell]);
            if (used[cell] || !got || (exact ? *got != want : got->shape != want.shape)) continue;
            used[cell] = true;
            cell_of[w] = static_cast<int>(cell);
            break;
          }
        }
      }
      for (std::size_t w = 0; w < wanted.size(); ++w) {
        if (cell_of[w] < 0) continue;
        c.add(Table::kGeneration, policy.generation_row(view.objects[wanted[w]].id.ordinal(), kb), {},
              policy.vocab_size(), r.tokens[static_cast<std::size_t>(cell_of[w])]);
      }
      continue;
    }
    if (!r.prompt) continue;
    SceneSpec prompt;
    try {
      prompt = parse_scene(*r.prompt);
    } catch (const Error&) {
      continue;
    }
    // Bands known from the record: each visible thought names its band's objects.
    std::vector<int> known(prompt.objects.size(), -1);
    auto learn = [&](const std::string& text, int band) {
      for (const SceneObject& so : detail::read_scene_quietly(text).objects) {
        const int i = prompt.find(so.id);
        if (i >= 0) known[i] = band;
      }
    };
    const int visible = std::min<int>(static_cast<int>(r.thoughts.size()), r.kind == RecordKind::kThink ? kb : r.k);
    for (int j = 0; j < visible; ++j) learn(r.thoughts[j], j);
    learn(r.text, kb);
    // Replay the planner's declaration-order choices up to each object placed
    // in this band; the mask is exact only when every earlier band is known.
    const BandModel model(prompt, K);
    std::vector<int> fixed(prompt.objects.size(), -1);
    for (std::size_t i = 0; i < prompt.objects.size(); ++i) {
      if (known[i] < 0) break;
      const int g = model.group_of(static_cast<int>(i));
      if (fixed[g] >= 0) continue;
      const auto iv = model.intervals(fixed);
      if (!iv) break;
      const auto [lo, hi] = (*iv)[g];
      if (known[i] < lo || known[i] > hi) break;
      if (known[i] == kb && lo < hi) {
        std::vector<int> allowed;
        for (int b = lo; b <= hi; ++b) allowed.push_back(b);
        c.add(Table::kUnderstanding, static_cast<int>(role_of(prompt, static_cast<int>(i))), std::move(allowed), K,
              kb);
      }
      fixed[g] = known[i];
    }
  }
  return c;
}

struct MleFit {
  ToyPolicy policy;
  std::vector<double> loss;  // mean negative log-likelihood before each epoch, then after the last
};

// Full-batch gradient descent on each row's mean negative log-likelihood.
// Rows are independent and each row's curvature is at most 1 / (2 T^2), so
// any lr below 4 T^2 lowers the loss every epoch.
inline MleFit fit_toy_mle(const std::vector<SftRecord>& dataset, ToyPolicy policy, int epochs = 500,
                          double lr = 2.0) {
  require(!dataset.empty(), ErrorKind::kInvalidInput, "empty dataset");
  require(epochs >= 0 && lr > 0.0, ErrorKind::kInvalidInput, "bad fit settings");
  require(policy.temperature() > 0.0, ErrorKind::kInvalidInput, "fit needs temperature > 0");
  const MleCounts counts = mle_counts(dataset, policy);
  const double T = policy.temperature();
  std::map<std::pair<Table, int>, double> row_total;
  double total = 0.0;
  for (const auto& e : counts.entries) {
    for (double x : e.counts) {
      row_total[{e.table, e.row}] += x;
      total += x;
    }
  }
  auto nll = [&](const ToyPolicy& p) {
    double sum = 0.0;
    for (const auto& e : counts.entries) {
      const std::vector<double> pr = p.probs(e.table, e.row, e.allowed);
      for (std::size_t a = 0; a < e.counts.size(); ++a) {
        if (e.counts[a] != 0.0) sum -= e.counts[a] * std::log(pr[a]);
      }
    }
    return total > 0 ? sum / total : 0.0;
  };
  MleFit fit{policy, {}};
  for (int epoch = 0; epoch < epochs; ++epoch) {
    fit.loss.push_back(nll(fit.policy));
    std::vector<std::vector<double>> grads;
    for (const auto& e : counts.entries) {
      const std::vector<double> pr = fit.policy.probs(e.table, e.row, e.allowed);
      double n = 0.0;
      for (double x : e.counts) n += x;
      std::vector<double> g(e.counts.size(), 0.0);
      for (std::size_t a = 0; a < g.size(); ++a) g[a] = (e.counts[a] - n * pr[a]) / T;
      grads.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < counts.entries.size(); ++i) {
      const auto& e = counts.entries[i];
      const double n = row_total[{e.table, e.row}];
      for (std::size_t a = 0; a < grads[i].size(); ++a) {
        if (grads[i][a] != 0.0) fit.policy.logit(e.table, e.row, static_cast<int>(a)) += lr * grads[i][a] / n;
      }
    }
  }
  fit.loss.push_back(nll(fit.policy));
  require(fit.policy.all_finite(), ErrorKind::kNumeric, "fit produced non-finite logits");
  return fit;
}

}  // namespace twig

#endif  // TWIG_SFT_HPP_
