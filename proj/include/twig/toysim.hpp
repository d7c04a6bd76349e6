// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// A deterministic toy model over the token canvas.
//
//   think     the objects assigned to band k, written as a scene fragment
//             ("blue circle left of green triangle; red star"), or
//             "background"; k = 0 gives a global plan with every mention
//             annotated by its band.
//   generate  reads the latest thought (or the raw prompt when there is none),
//             at most context_cap characters of it, and draws each object it
//             names that belongs to band k at a hashed cell.
//   reflect   scores the band against its thought: round(100 * matched /
//             required); k = 0 scores the whole canvas against the prompt.
//
// With a ToyPolicy attached, band choices and drawn tokens are sampled from
// the policy tables and every sampled choice is logged for training.

#ifndef TWIG_TOYSIM_HPP_
#define TWIG_TOYSIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twig/backend.hpp"
#include "twig/bands.hpp"
#include "twig/error.hpp"
#include "twig/hash.hpp"
#include "twig/policy.hpp"
#include "twig/rewards.hpp"
#include "twig/scene.hpp"
#include "twig/sequence.hpp"
#include "twig/trace.hpp"

namespace twig {

enum class FaultKind { kDrop, kRecolor };
// What an epsilon corruption does to an object.
enum class CorruptionKind { kMixed, kDrop, kRecolor };

inline std::string_view to_string(FaultKind f) { return f == FaultKind::kDrop ? "drop" : "recolor"; }

inline FaultKind parse_fault_kind(std::string_view s) {
  if (s == "drop") return FaultKind::kDrop;
  if (s == "recolor") return FaultKind::kRecolor;
  fail(ErrorKind::kInvalidInput, "unknown fault kind '" + std::string(s) + "'");
}

inline std::string_view to_string(CorruptionKind c) {
  switch (c) {
    case CorruptionKind::kMixed: return "mixed";
    case CorruptionKind::kDrop: return "drop";
    case CorruptionKind::kRecolor: return "recolor";
  }
  return "?";
}

inline CorruptionKind parse_corruption_kind(std::string_view s) {
  if (s == "mixed") return CorruptionKind::kMixed;
  if (s == "drop") return CorruptionKind::kDrop;
  if (s == "recolor") return CorruptionKind::kRecolor;
  fail(ErrorKind::kInvalidInput, "unknown corruption kind '" + std::string(s) + "'");
}

// Forces every object of `band` (1-based) to be corrupted on its first
// `times` generation attempts.
struct Fault {
  int band = 1;
  FaultKind kind = FaultKind::kDrop;
  int times = 1;
};

// Parses "2:drop" or "2:drop:1"; several entries separated by ','.
inline std::vector<Fault> parse_fault_plan(std::string_view text) {
  std::vector<Fault> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::size_t p = 0;
    while (true) {
      std::size_t q = item.find(':', p);
      parts.emplace_back(item.substr(p, q == std::string_view::npos ? item.size() - p : q - p));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    require(parts.size() == 2 || parts.size() == 3, ErrorKind::kInvalidInput,
            "fault entry must look like band:kind[:times], got '" + std::string(item) + "'");
    Fault f;
    try {
      f.band = std::stoi(parts[0]);
      if (parts.size() == 3) f.times = std::stoi(parts[2]);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidInput, "bad number in fault entry '" + std::string(item) + "'");
    }
    f.kind = parse_fault_kind(parts[1]);
    require(f.band >= 1 && f.times >= 0, ErrorKind::kInvalidInput, "fault band must be >= 1 and times >= 0");
    out.push_back(f);
  }
  return out;
}

struct ToyConfig {
  double epsilon = 0.0;
  CorruptionKind corruption = CorruptionKind::kMixed;
  std::vector<Fault> faults;
  int context_cap = 48;
  std::uint64_t seed = 0;

  void validate() const {
    require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::kInvalidInput, "epsilon must be in [0, 1]");
    require(context_cap >= 1, ErrorKind::kInvalidInput, "context_cap must be >= 1");
  }
};

inline nlohmann::json toy_config_to_json(const ToyConfig& c) {
  nlohmann::json faults = nlohmann::json::array();
  for (const Fault& f : c.faults) faults.push_back({{"band", f.band}, {"kind", to_string(f.kind)}, {"times", f.times}});
  return {{"epsilon", c.epsilon},
          {"corruption", to_string(c.corruption)},
          {"faults", faults},
          {"context_cap", c.context_cap},
          {"seed", c.seed}};
}

inline constexpr std::string_view kBackgroundThought = "background";

// Objects of 0-based `band` as a scene fragment: same-band horizontal
// relations first, then the remaining objects on their own.
inline std::string band_thought(const SceneSpec& spec, const BandAssignment& a, int band) {
  std::string out;
  std::vector<bool> said(spec.objects.size(), false);
  auto add = [&](const std::string& clause) {
    if (!out.empty()) out += "; ";
    out += clause;
  };
  for (const RelationClause& rc : spec.relations) {
    if (!is_horizontal(rc.relation)) continue;
    if (a.band_of[rc.subject] != band || a.band_of[rc.object] != band) continue;
    add(spec.objects[rc.subject].id.name() + " " + std::string(to_string(rc.relation)) + " " +
        spec.objects[rc.object].id.name());
    said[rc.subject] = said[rc.object] = true;
  }
  for (int i : a.objects_in[band]) {
    if (!said[i]) add(spec.objects[i].id.name());
  }
  return out.empty() ? std::string(kBackgroundThought) : out;
}

// Objects in order of first mention, each with its band. A horizontal pair
// is written once ("S in <band> left of O", the partner inheriting the band).
// Vertical relations stay implicit in the bands.
inline std::string global_plan(const SceneSpec& spec, const BandAssignment& a) {
  std::string out;
  auto add = [&](const std::string& clause) {
    if (!out.empty()) out += "; ";
    out += clause;
  };
  auto where = [&](int obj) { return " in " + BandRef::for_index(a.band_of[obj], a.num_bands).text(); };
  std::vector<bool> said(spec.objects.size(), false);
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    if (said[i]) continue;
    const int self = static_cast<int>(i);
    std::string clause = spec.objects[i].id.name() + where(self);
    for (const RelationClause& rc : spec.relations) {
      if (!is_horizontal(rc.relation) || (rc.subject != self && rc.object != self)) continue;
      const int other = rc.subject == self ? rc.object : rc.subject;
      if (said[other]) continue;
      clause = spec.objects[rc.subject].id.name() + where(rc.subject) + " " + std::string(to_string(rc.relation)) +
               " " + spec.objects[rc.object].id.name();
      said[other] = true;
      break;
    }
    said[i] = true;
    add(clause);
  }
  return out.empty() ? std::string(kBackgroundThought) : out;
}

// What the generator actually reads: the latest thought, else the prompt, cut
// to `cap` characters. A clause cut by the cap is dropped whole.
inline std::string generator_view(const BackendContext& ctx, int cap) {
  const std::string& text = ctx.thoughts.empty() ? ctx.prompt : ctx.thoughts.back();
  if (static_cast<int>(text.size()) <= cap) return text;
  std::string head = text.substr(0, static_cast<std::size_t>(cap));
  // The cut lands exactly on a separator: the last clause survived intact.
  if (text[static_cast<std::size_t>(cap)] == ';') return head;
  const std::size_t semi = head.rfind(';');
  return semi == std::string::npos ? std::string() : head.substr(0, semi);
}

namespace detail {

inline SceneSpec read_scene_quietly(std::string_view text) {
  if (text.empty() || text == kBackgroundThought) return {};
  return parse_scene_lenient(text);
}

// Which objects of `view` the generator draws into 0-based band `kb`.
// Annotated objects go where their annotation points, and an unannotated
// object tied to one by a horizontal relation follows it. Other unannotated
// objects belong to the current band when read from a thought; read from the
// raw prompt they land in a band picked by hash.
inline std::vector<int> objects_for_band(const SceneSpec& view, int kb, int num_bands, bool from_thought,
                                         std::uint64_t salt) {
  const std::size_t n = view.objects.size();
  std::vector<std::optional<int>> band(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (view.objects[i].band) band[i] = view.objects[i].band->resolve(num_bands).value_or(-1);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const RelationClause& rc : view.relations) {
      if (!is_horizontal(rc.relation)) continue;
      auto& s = band[rc.subject];
      auto& o = band[rc.object];
      if (s && !o) o = s, changed = true;
      if (o && !s) s = o, changed = true;
    }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i) {
    int target;
    if (band[i]) {
      target = *band[i];
    } else if (from_thought) {
      target = kb;
    } else {
      target = static_cast<int>(derive_seed(salt, {static_cast<std::uint64_t>(view.objects[i].id.ordinal())}) %
                                static_cast<std::uint64_t>(num_bands));
    }
    if (target == kb) out.push_back(static_cast<int>(i));
  }
  return out;
}

// Kahn order over `members` (indices into the spec) for the given relation
// direction; ties and cycle leftovers keep member order.
inline std::vector<int> relation_order(const SceneSpec& spec, const std::vector<int>& members, bool horizontal) {
  const int n = static_cast<int>(members.size());
  auto pos = [&](int obj) {
    for (int i = 0; i < n; ++i) {
      if (members[i] == obj) return i;
    }
    return -1;
  };
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indeg(n, 0);
  for (const RelationClause& rc : spec.relations) {
    if (is_horizontal(rc.relation) != horizontal) continue;
    int s = pos(rc.subject), o = pos(rc.object);
    if (s < 0 || o < 0) continue;
    // Edge a -> b means a gets the smaller coordinate.
    const bool subject_first = rc.relation == Relation::kLeftOf || rc.relation == Relation::kAbove;
    int a = subject_first ? s : o, b = subject_first ? o : s;
    succ[a].push_back(b);
    ++indeg[b];
  }
  std::vector<int> order;
  std::vector<bool> done(n, false);
  while (static_cast<int>(order.size()) < n) {
    int pick = -1;
    for (int i = 0; i < n && pick < 0; ++i) {
      if (!done[i] && indeg[i] == 0) pick = i;
    }
    if (pick < 0) {
      for (int i = 0; i < n; ++i) {
        if (!done[i]) order.push_back(i), done[i] = true;
      }
      break;
    }
    done[pick] = true;
    order.push_back(pick);
    for (int b : succ[pick]) --indeg[b];
  }
  std::vector<int> out;
  for (int i : order) out.push_back(members[i]);
  return out;
}

}  // namespace detail

// Cell (row-major index inside the band) for each selected object, or -1 when
// the band is full. Each object starts at a hashed cell and scans forward to
// the next free one; columns are then permuted so horizontal relations hold,
// and rows so vertical ones do.
inline std::vector<int> place_objects(const SceneSpec& spec, const std::vector<int>& selected, int rows, int width,
                                      int band, std::uint64_t seed) {
  const int cells = rows * width;
  const int n = static_cast<int>(selected.size());
  auto in_relation = [&](int obj, bool horizontal) {
    for (const RelationClause& rc : spec.relations) {
      if (is_horizontal(rc.relation) != horizontal) continue;
      int other = rc.subject == obj ? rc.object : rc.object == obj ? rc.subject : -1;
      if (other >= 0 && std::find(selected.begin(), selected.end(), other) != selected.end()) return true;
    }
    return false;
  };
  std::vector<int> where(n, -1);
  std::vector<bool> taken(cells, false), col_used(width, false), row_used(rows, false);
  std::vector<int> hset, vset;
  for (int i = 0; i < n; ++i) {
    const int obj = selected[i];
    const bool vertical = in_relation(obj, false);
    const std::uint64_t h = derive_seed(seed, {static_cast<std::uint64_t>(spec.objects[obj].id.ordinal()),
                                               static_cast<std::uint64_t>(band)});
    const int start = static_cast<int>(h % static_cast<std::uint64_t>(cells));
    int found = -1;
    for (int pass = 0; pass < 2 && found < 0; ++pass) {
      for (int j = 0; j < cells; ++j) {
        const int idx = (start + j) % cells;
        if (taken[idx]) continue;
        if (pass == 0 && (col_used[idx % width] || (vertical && row_used[idx / width]))) continue;
        found = idx;
        break;
      }
    }
    if (found < 0) continue;
    where[i] = found;
    taken[found] = true;
    col_used[found % width] = true;
    if (vertical) row_used[found / width] = true;
    if (in_relation(obj, true)) hset.push_back(obj);
    if (vertical) vset.push_back(obj);
  }
  auto index_of = [&](int obj) { return static_cast<int>(std::find(selected.begin(), selected.end(), obj) - selected.begin()); };
  std::vector<int> before = where;
  auto permute = [&](const std::vector<int>& members, bool horizontal) {
    std::vector<int> coords;
    for (int obj : members) coords.push_back(horizontal ? where[index_of(obj)] % width : where[index_of(obj)] / width);
    std::sort(coords.begin(), coords.end());
    std::vector<int> order = detail::relation_order(spec, members, horizontal);
    for (std::size_t j = 0; j < order.size(); ++j) {
      int& cell = where[index_of(order[j])];
      cell = horizontal ? (cell / width) * width + coords[j] : coords[j] * width + cell % width;
    }
  };
  permute(hset, true);
  permute(vset, false);
  std::vector<int> sorted;
  for (int c : where) {
    if (c >= 0) sorted.push_back(c);
  }
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return before;
  return where;
}

// Token after a recolor: a different color, same shape.
inline Token recolored(ObjectId id, std::uint64_t h) {
  const int c = (static_cast<int>(id.color) + 1 + static_cast<int>(h % 4)) % kNumColors;
  return ObjectId{static_cast<Color>(c), id.shape}.token();
}

namespace detail {

// Applies the fault plan and epsilon corruption to one object's token.
inline Token corrupt(const ToyConfig& cfg, ObjectId id, Token token, int k, int attempt, std::uint64_t seed) {
  for (const Fault& f : cfg.faults) {
    if (f.band == k && attempt < f.times) {
      return f.kind == FaultKind::kDrop ? kEmptyToken : recolored(id, derive_seed(seed, {0xfa17, static_cast<std::uint64_t>(id.ordinal())}));
    }
  }
  if (cfg.epsilon <= 0.0) return token;
  const std::uint64_t ord = static_cast<std::uint64_t>(id.ordinal());
  if (unit_interval(derive_seed(seed, {0xe95, ord})) >= cfg.epsilon) return token;
  const std::uint64_t h = derive_seed(seed, {0xc0, ord});
  bool drop = cfg.corruption == CorruptionKind::kDrop ||
              (cfg.corruption == CorruptionKind::kMixed && (h >> 32) % 2 == 0);
  return drop ? kEmptyToken : recolored(id, h);
}

inline std::optional<Cell> first_cell(const std::vector<Token>& tokens, int width, Token want) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == want) return Cell{static_cast<int>(i) / width, static_cast<int>(i) % width};
  }
  return std::nullopt;
}

inline bool relation_holds(Relation r, Cell s, Cell o) {
  switch (r) {
    case Relation::kLeftOf: return s.col < o.col;
    case Relation::kRightOf: return s.col > o.col;
    case Relation::kAbove: return s.row < o.row;
    case Relation::kBelow: return s.row > o.row;
  }
  return false;
}

inline int percent(int matched, int required) {
  if (required == 0) return 100;
  return static_cast<int>(std::lround(100.0 * matched / required));
}

}  // namespace detail

// Draws band ctx.k. `choose` maps (object, proposed token) to the token that
// is actually drawn before corruption.
template <typename Choose>
RegionTokens toy_generate_with(const BackendContext& ctx, const ToyConfig& cfg, Choose&& choose) {
  cfg.validate();
  require(ctx.k >= 1 && ctx.k <= ctx.num_bands, ErrorKind::kInvalidInput, "generate needs a band index in [1, K]");
  const RegionDescriptor& band = ctx.band;
  std::vector<Token> tokens(static_cast<std::size_t>(band.token_count()), kEmptyToken);
  const std::string view = generator_view(ctx, cfg.context_cap);
  const SceneSpec spec = detail::read_scene_quietly(view);
  const int kb = ctx.k - 1;
  const std::vector<int> selected =
      detail::objects_for_band(spec, kb, ctx.num_bands, !ctx.thoughts.empty(), derive_seed(cfg.seed, {0x9a7}));
  const std::vector<int> cells = place_objects(spec, selected, band.rows(), band.width, kb, ctx.seed);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (cells[i] < 0) continue;
    const ObjectId id = spec.objects[selected[i]].id;
    Token t = choose(id, kb);
    t = detail::corrupt(cfg, id, t, ctx.k, ctx.attempt, ctx.seed);
    tokens[static_cast<std::size_t>(cells[i])] = t;
  }
  return RegionTokens{std::move(tokens)};
}

inline RegionTokens toy_generate(const BackendContext& ctx, const ToyConfig& cfg) {
  return toy_generate_with(ctx, cfg, [](ObjectId id, int) { return id.token(); });
}

// Band critic for k >= 1, canvas critic for k = 0 (against the rule plan).
inline int toy_critic_score(const BackendContext& ctx) {
  if (ctx.k >= 1) {
    require(static_cast<int>(ctx.regions.size()) >= ctx.k && static_cast<int>(ctx.thoughts.size()) >= ctx.k,
            ErrorKind::kInvalidInput, "reflect needs band k generated");
    const SceneSpec spec = detail::read_scene_quietly(ctx.thoughts[ctx.k - 1]);
    const std::vector<int> required = detail::objects_for_band(spec, ctx.k - 1, ctx.num_bands, true, 0);
    const std::vector<Token>& tokens = ctx.regions[ctx.k - 1].tokens;
    const int width = ctx.geometry.width;
    int total = 0, matched = 0;
    std::vector<std::optional<detail::Cell>> at(spec.objects.size());
    for (int i : required) {
      at[i] = detail::first_cell(tokens, width, spec.objects[i].id.token());
      ++total;
      matched += at[i].has_value();
    }
    for (const RelationClause& rc : spec.relations) {
      const bool both = std::count(required.begin(), required.end(), rc.subject) &&
                        std::count(required.begin(), required.end(), rc.object);
      if (!both) continue;
      ++total;
      matched += at[rc.subject] && at[rc.object] && detail::relation_holds(rc.relation, *at[rc.subject], *at[rc.object]);
    }
    return detail::percent(matched, total);
  }
  const SceneSpec spec = parse_scene(ctx.prompt);
  const BandAssignment a = assign_bands(spec, ctx.num_bands);
  const int width = ctx.geometry.width;
  std::vector<RegionDescriptor> bands;
  int row = 0;
  for (std::size_t b = 0; b < ctx.regions.size(); ++b) {
    const int rows = static_cast<int>(ctx.regions[b].tokens.size()) / width;
    bands.push_back({static_cast<int>(b) + 1, row, row + rows - 1, width});
    row += rows;
  }
  const Canvas canvas = assemble_canvas(Geometry{row, width, ctx.geometry.vocab_size}, bands, ctx.regions);
  int total = 0, matched = 0;
  auto where = detail::locate(spec, canvas);
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    ++total;
    const RegionDescriptor& b = bands.at(static_cast<std::size_t>(a.band_of[i]));
    matched += where[i] && where[i]->row >= b.start_row && where[i]->row <= b.end_row;
  }
  for (const RelationClause& rc : spec.relations) {
    ++total;
    matched += where[rc.subject] && where[rc.object] &&
               detail::relation_holds(rc.relation, *where[rc.subject], *where[rc.object]);
  }
  return detail::percent(matched, total);
}

// Rule critic: the revision repeats the band's thought (k >= 1) or is the
// rule global plan (k = 0).
inline ReflectionTuple toy_reflect(const BackendContext& ctx) {
  const int score = toy_critic_score(ctx);
  if (ctx.k >= 1) return {score, ctx.thoughts[ctx.k - 1]};
  const SceneSpec spec = parse_scene(ctx.prompt);
  return {score, global_plan(spec, assign_bands(spec, ctx.num_bands))};
}

// One policy-sampled pass: which role it played, for which band, and the
// categorical choices it made.
struct PassRecord {
  PassKind kind = PassKind::kGenerate;
  int k = 0;
  std::vector<Decision> decisions;
  double reward = 0.0;  // filled in once the trajectory is scored
};

class ToyBackend : public Backend {
 public:
  explicit ToyBackend(ToyConfig config = {}) : config_(std::move(config)) { config_.validate(); }

  // Policy-driven session. `log`, if given, receives every sampled pass.
  ToyBackend(ToyConfig config, const ToyPolicy* policy, std::vector<PassRecord>* log = nullptr)
      : config_(std::move(config)), policy_(policy), log_(log) {
    config_.validate();
  }

  const ToyConfig& config() const { return config_; }

  ScheduleProposal schedule(std::string_view prompt, int max_k) override {
    const SceneSpec spec = parse_scene(prompt);
    const BandAssignment a = assign_bands(spec, max_k);
    std::vector<double> w;
    double sum = 0.0;
    for (const auto& objs : a.objects_in) sum += w.emplace_back(1.0 + static_cast<double>(objs.size()));
    for (double& x : w) x /= sum;
    return {max_k, w};
  }

  std::string think(const BackendContext& ctx) override {
    ensure_plan(ctx);
    if (pending_ && ctx.k > pending_->k) pending_.reset();
    const BandAssignment a = make_assignment(ctx.num_bands, band_of_);
    if (ctx.k == 0) return global_plan(*spec_, a);
    return band_thought(*spec_, a, ctx.k - 1);
  }

  RegionTokens generate_region(const BackendContext& ctx) override {
    if (!policy_) return toy_generate(ctx, config_);
    require(ctx.num_bands == policy_->num_bands(), ErrorKind::kInvalidInput, "policy band count differs from K");
    if (pending_ && ctx.attempt > pending_->attempt && (pending_->k == ctx.k || pending_->k == 0)) {
      band_of_ = std::move(pending_->band_of);
      emit(PassKind::kReflect, pending_->k, std::move(pending_->decisions));
      pending_.reset();
    }
    std::vector<Decision> decisions;
    RegionTokens out = toy_generate_with(ctx, config_, [&](ObjectId id, int kb) {
      const double u = unit_interval(derive_seed(ctx.seed, {0x70c, static_cast<std::uint64_t>(id.ordinal())}));
      Decision d = policy_->sample(Table::kGeneration, policy_->generation_row(id.ordinal(), kb), {}, u);
      const Token t = static_cast<Token>(d.action);
      decisions.push_back(std::move(d));
      return t;
    });
    emit(PassKind::kGenerate, ctx.k, std::move(decisions));
    return out;
  }

  ReflectionTuple reflect(const BackendContext& ctx) override {
    if (!policy_) return toy_reflect(ctx);
    if (ctx.k == 0 && !spec_) {
      // Nothing was planned yet (critique after generation); re-plan from scratch.
      spec_ = parse_scene(ctx.prompt);
      plan_bands_ = ctx.num_bands;
      band_of_.assign(spec_->objects.size(), -1);
    } else {
      ensure_plan(ctx);
    }
    const int score = toy_critic_score(ctx);
    // Re-plan this band and everything after it; adopted only if the engine
    // actually regenerates.
    std::vector<int> band_of = band_of_;
    for (int& b : band_of) {
      if (ctx.k == 0 || b >= ctx.k - 1) b = -1;
    }
    std::vector<Decision> decisions;
    sample_bands(*spec_, *policy_, ctx.seed, band_of, &decisions);
    const BandAssignment a = make_assignment(ctx.num_bands, band_of);
    std::string revised = ctx.k == 0 ? global_plan(*spec_, a) : band_thought(*spec_, a, ctx.k - 1);
    pending_ = Pending{ctx.k, ctx.attempt, std::move(band_of), std::move(decisions)};
    return {score, std::move(revised)};
  }

 private:
  struct Pending {
    int k;
    int attempt;
    std::vector<int> band_of;
    std::vector<Decision> decisions;
  };

  void ensure_plan(const BackendContext& ctx) {
    if (spec_ && plan_bands_ == ctx.num_bands) return;
    spec_ = parse_scene(ctx.prompt);
    plan_bands_ = ctx.num_bands;
    if (!policy_) {
      band_of_ = assign_bands(*spec_, ctx.num_bands).band_of;
      return;
    }
    require(ctx.num_bands == policy_->num_bands(), ErrorKind::kInvalidInput, "policy band count differs from K");
    band_of_.assign(spec_->objects.size(), -1);
    std::vector<Decision> decisions;
    sample_bands(*spec_, *policy_, ctx.seed, band_of_, &decisions);
    // Each choice belongs to the thought of the band it landed in.
    for (int k = 1; k <= ctx.num_bands; ++k) {
      std::vector<Decision> mine;
      for (const Decision& d : decisions) {
        if (d.action == k - 1) mine.push_back(d);
      }
      if (!mine.empty()) emit(PassKind::kThink, k, std::move(mine));
    }
  }

  void emit(PassKind kind, int k, std::vector<Decision> decisions) {
    if (log_ && !decisions.empty()) log_->push_back({kind, k, std::move(decisions), 0.0});
  }

  ToyConfig config_;
  const ToyPolicy* policy_ = nullptr;
  std::vector<PassRecord>* log_ = nullptr;
  std::optional<SceneSpec> spec_;
  int plan_bands_ = 0;
  std::vector<int> band_of_;
  std::optional<Pending> pending_;
};

inline BackendFactory toy_factory(ToyConfig config) {
  return [config] { return std::make_unique<ToyBackend>(config); };
}

// Scores a finished trace against its own prompt and attaches the bundle.
inline RewardBundle score_trace(Trace& trace, const std::vector<std::string>& names = default_reward_names()) {
  require(trace.canvas.has_value(), ErrorKind::kIncompleteTrajectory, "trace has no canvas");
  trace.reward = score_all(names, parse_scene(trace.prompt), *trace.canvas);
  return *trace.reward;
}

// Two characters per cell: ".." for EMPTY, else color initial + shape mark
// (S square, C circle, T triangle, * star). Band boundaries get a rule line.
inline std::string render_ascii(const Canvas& canvas) {
  static constexpr char kShapeMarks[] = {'S', 'C', 'T', '*'};
  std::string out;
  for (int r = 0; r < canvas.height; ++r) {
    for (const RegionDescriptor& b : canvas.bands) {
      if (b.start_row == r && r > 0) out += std::string(static_cast<std::size_t>(canvas.width) * 3 - 1, '-') + "\n";
    }
    for (int c = 0; c < canvas.width; ++c) {
      if (c > 0) out += ' ';
      const auto id = ObjectId::from_token(canvas.at(r, c));
      if (!id) {
        out += "..";
      } else {
        out += to_string(id->color)[0];
        out += kShapeMarks[static_cast<int>(id->shape)];
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace twig

#endif  // TWIG_TOYSIM_HPP_
