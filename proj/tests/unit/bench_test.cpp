// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "twig/bench.hpp"

namespace twig {
namespace {

int count_relations(const std::string& p) {
  int n = 0;
  for (const char* w : {"left of", "right of", "above", "below"}) {
    for (std::size_t at = p.find(w); at != std::string::npos; at = p.find(w, at + 1)) ++n;
  }
  return n;
}

TEST(Suite, Categories) {
  const BenchSuite spatial = generate_suite(Category::kSpatial, 1, 0);
  ASSERT_EQ(spatial.prompts.size(), 1u);
  EXPECT_EQ(count_relations(spatial.prompts[0]), 1);

  const BenchSuite complex = generate_suite(Category::kComplex, 50, 0);
  ASSERT_EQ(complex.prompts.size(), 50u);
  for (const auto& p : complex.prompts) {
    const SceneSpec spec = parse_scene(p);
    EXPECT_GE(spec.clauses.size(), 3u) << p;
    EXPECT_NO_THROW(assign_bands(spec, 3)) << p;
  }
  for (Category c : {Category::kColor, Category::kShape, Category::kSpatial, Category::kComplex}) {
    const BenchSuite a = generate_suite(c, 30, 4);
    EXPECT_EQ(a.prompts, generate_suite(c, 30, 4).prompts);
    EXPECT_NE(a.prompts, generate_suite(c, 30, 5).prompts);
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
  EXPECT_THROW(generate_suite(Category::kColor, 0, 0), Error);
  EXPECT_THROW(parse_category("numeracy"), Error);
}

TEST(Suite, ColorAndShapeSemantics) {
  for (const auto& p : generate_suite(Category::kShape, 40, 1).prompts) {
    const SceneSpec spec = parse_scene(p);
    ASSERT_EQ(spec.objects.size(), 2u);
    EXPECT_NE(spec.objects[0].id.shape, spec.objects[1].id.shape) << p;
  }
  for (const auto& p : generate_suite(Category::kColor, 40, 1).prompts) {
    const SceneSpec spec = parse_scene(p);
    if (spec.objects.size() == 2) EXPECT_NE(spec.objects[0].id.color, spec.objects[1].id.color) << p;
  }
}

EngineConfig mode_config(Mode m, int rounds = 1) {
  EngineConfig c;
  c.mode = m;
  c.max_reflection_rounds = rounds;
  return c;
}

TEST(Evaluate, CleanRuleBackendIsPerfect) {
  for (Category c : {Category::kColor, Category::kShape, Category::kSpatial, Category::kComplex}) {
    const EvalResult r = evaluate(mode_config(Mode::kTwig), toy_seeded_factory({}), generate_suite(c, 20, 0), {0, 1});
    EXPECT_EQ(r.mean, 1.0) << to_string(c);
    EXPECT_EQ(r.rows.size(), 40u);
  }
}

TEST(Evaluate, TruncatedContextHurtsFlatMode) {
  const BenchSuite suite = generate_suite(Category::kComplex, 30, 0);
  const double none = evaluate(mode_config(Mode::kNone), toy_seeded_factory({}), suite, {0}).mean;
  const double twig = evaluate(mode_config(Mode::kTwig), toy_seeded_factory({}), suite, {0}).mean;
  EXPECT_LT(none, twig);
}

TEST(Evaluate, DeterministicAcrossThreads) {
  const BenchSuite suite = generate_suite(Category::kComplex, 15, 2);
  ToyConfig toy;
  toy.epsilon = 0.2;
  const EvalResult a = evaluate(mode_config(Mode::kTwig), toy_seeded_factory(toy), suite, seed_range(3), default_reward_names(), 1);
  const EvalResult b = evaluate(mode_config(Mode::kTwig), toy_seeded_factory(toy), suite, seed_range(3), default_reward_names(), 4);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].prompt_id, b.rows[i].prompt_id);
    EXPECT_EQ(a.rows[i].score, b.rows[i].score);
  }
  EXPECT_EQ(a.mean, b.mean);
}

class BrokenBackend : public ToyBackend {
 public:
  RegionTokens generate_region(const BackendContext& c) override {
    if (c.k == 2) throw Error(ErrorKind::kTransport, "down");
    return ToyBackend::generate_region(c);
  }
};

TEST(Evaluate, FailuresScoreZeroWithFlag) {
  const BenchSuite suite = generate_suite(Category::kComplex, 5, 0);
  const EvalResult r =
      evaluate(mode_config(Mode::kTwig), [](std::uint64_t) { return std::make_unique<BrokenBackend>(); }, suite, {0});
  for (const EvalRow& row : r.rows) {
    EXPECT_TRUE(row.failed);
    EXPECT_EQ(row.score, 0.0);
    EXPECT_FALSE(row.error.empty());
  }
  EXPECT_THROW(evaluate(mode_config(Mode::kTwig), toy_seeded_factory({}), BenchSuite{}, {0}), Error);
}

TEST(CompareModes, InterleavingOrdering) {
  const BenchSuite suite = generate_suite(Category::kComplex, 40, 0);
  const auto f = toy_seeded_factory({});
  const ModeReport r = compare_modes(suite,
                                     {{"none", mode_config(Mode::kNone), f},
                                      {"think_before", mode_config(Mode::kThinkBefore), f},
                                      {"twig", mode_config(Mode::kTwig), f}},
                                     seed_range(5));
  ASSERT_EQ(r.results.size(), 3u);
  EXPECT_LT(r.results[0].mean, r.results[1].mean);
  EXPECT_LT(r.results[1].mean, r.results[2].mean);
  const std::string md = r.markdown();
  EXPECT_NE(md.find("| twig |"), std::string::npos);
  std::ostringstream csv;
  r.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "prompt_id,category,mode,seed,score");
}

TEST(CompareModes, ReflectionRoundRepairsFaults) {
  const BenchSuite suite = generate_suite(Category::kComplex, 30, 3);
  ToyConfig toy;
  toy.faults = parse_fault_plan("1:drop,2:recolor,3:drop");
  const auto f = toy_seeded_factory(toy);
  const ModeReport r = compare_modes(
      suite, {{"rounds0", mode_config(Mode::kTwig, 0), f}, {"rounds1", mode_config(Mode::kTwig, 1), f}}, {0});
  const auto zero = r.prompt_means(0);
  const auto one = r.prompt_means(1);
  for (std::size_t i = 0; i < zero.size(); ++i) EXPECT_GE(one[i], zero[i]) << suite.prompts[i];
  EXPECT_GT(r.results[1].mean, r.results[0].mean);
}

TEST(CompareModes, IdenticalConfigsHaveZeroDelta) {
  const BenchSuite suite = generate_suite(Category::kSpatial, 10, 0);
  ToyConfig toy;
  toy.epsilon = 0.3;
  const auto f = toy_seeded_factory(toy);
  const ModeReport r = compare_modes(suite, {{"a", mode_config(Mode::kTwig), f}, {"b", mode_config(Mode::kTwig), f}},
                                     seed_range(5));
  EXPECT_EQ(r.results[0].mean, r.results[1].mean);
  EXPECT_EQ(r.results[0].seed_std(), r.results[1].seed_std());
  EXPECT_THROW(compare_modes(suite, {{"a", mode_config(Mode::kTwig), f}}, {0}), Error);
}

}  // namespace
}  // namespace twig
