// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "twig/bench.hpp"
#include "twig/engine.hpp"
#include "twig/rewards.hpp"
#include "twig/toysim.hpp"

namespace twig {
namespace {

Canvas empty_canvas(int K = 3) {
  const Geometry g;
  auto bands = uniform_bands(g, K);
  std::vector<RegionTokens> regions;
  for (const auto& b : bands) regions.push_back({std::vector<Token>(b.token_count(), kEmptyToken)});
  return assemble_canvas(g, bands, regions);
}

void put(Canvas& c, int row, int col, const char* object) {
  const SceneSpec s = parse_scene(object);
  c.cells[static_cast<std::size_t>(row) * c.width + col] = s.objects[0].id.token();
}

Canvas perfect_canvas(const std::string& prompt) {
  ToyBackend b;
  EngineConfig cfg;
  return *run(prompt, b, cfg).canvas;
}

TEST(Rewards, EmptyCanvasHasNoGrounding) {
  const SceneSpec spec = parse_scene("red square; blue circle");
  EXPECT_EQ(score_provider("grounding", spec, empty_canvas()), 0.0);
  EXPECT_EQ(score_provider("aesthetic", spec, empty_canvas()), 1.0);
}

TEST(Rewards, PerfectCanvasScoresOne) {
  const std::string prompt = "red square above blue circle; green star left of blue circle; yellow triangle in bottom";
  const Canvas c = perfect_canvas(prompt);
  const SceneSpec spec = parse_scene(prompt);
  for (const auto& name : default_reward_names()) EXPECT_EQ(score_provider(name, spec, c), 1.0) << name;
  EXPECT_EQ(score_all(default_reward_names(), spec, c).ensemble, 1.0);
}

TEST(Rewards, LeftOfUsesColumns) {
  const SceneSpec spec = parse_scene("red square left of blue circle");
  Canvas c = empty_canvas();
  put(c, 5, 3, "red square");
  put(c, 5, 1, "blue circle");
  EXPECT_EQ(score_provider("vqa", spec, c), 0.0);
  EXPECT_EQ(score_provider("grounding", spec, c), 1.0);
}

TEST(Rewards, NoRelationsMeansVqaOne) {
  EXPECT_EQ(score_provider("vqa", parse_scene("red square"), empty_canvas()), 1.0);
}

TEST(Rewards, AestheticCountsOffSpecCells) {
  const SceneSpec spec = parse_scene("red square");
  Canvas c = empty_canvas();
  put(c, 0, 0, "red square");
  put(c, 0, 1, "red square");  // a second copy is off-spec
  put(c, 0, 2, "blue circle");
  EXPECT_DOUBLE_EQ(score_provider("aesthetic", spec, c), 1.0 - 2.0 / 144.0);
}

TEST(Rewards, AlignmentIsFractionInAssignedBand) {
  const SceneSpec spec = parse_scene("red square in top; blue circle in bottom");
  Canvas c = empty_canvas();
  put(c, 1, 0, "red square");
  put(c, 2, 5, "blue circle");  // top band, should be bottom
  EXPECT_DOUBLE_EQ(score_provider("alignment", spec, c), 0.5);
  put(c, 10, 5, "blue circle");
  EXPECT_DOUBLE_EQ(score_provider("alignment", spec, c), 1.0);
}

TEST(Rewards, UnknownProvider) {
  const SceneSpec spec = parse_scene("red square");
  try {
    score_provider("clip", spec, empty_canvas());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
  EXPECT_THROW(parse_reward_list("aesthetic,clip"), Error);
  EXPECT_THROW(parse_reward_list("vqa,vqa"), Error);
  EXPECT_EQ(parse_reward_list("vqa,grounding"), (std::vector<std::string>{"vqa", "grounding"}));
}

TEST(Ensemble, Mean) {
  const std::vector<double> four = {1.0, 0.5, 0.0, 0.5};
  EXPECT_EQ(ensemble(four), 0.5);
  const std::vector<double> one = {0.37};
  EXPECT_EQ(ensemble(one), 0.37);
  EXPECT_THROW(ensemble(std::span<const double>{}), Error);
}

TEST(Ensemble, BundleIsMeanOfProviders) {
  const SceneSpec spec = parse_scene("red square left of blue circle; green star in bottom");
  Canvas c = empty_canvas();
  put(c, 5, 3, "red square");
  put(c, 5, 1, "blue circle");
  put(c, 0, 0, "purple star");
  const RewardBundle b = score_all({"vqa", "grounding", "aesthetic"}, spec, c);
  ASSERT_EQ(b.scores.size(), 3u);
  EXPECT_EQ(b.scores[0].first, "vqa");
  const double mean = (b.scores[0].second + b.scores[1].second + b.scores[2].second) / 3.0;
  EXPECT_NEAR(b.ensemble, mean, 1e-12);
}

TEST(Ensemble, CustomProviderRegisters) {
  RewardRegistry reg;
  reg.add("half", [](const SceneSpec&, const Canvas&) { return 0.5; });
  const RewardBundle b = score_all({"half", "aesthetic"}, parse_scene("red square"), empty_canvas(), reg);
  EXPECT_EQ(b.ensemble, 0.75);
}

// Random sparse canvases against complex prompts.
class RewardProperty : public ::testing::TestWithParam<int> {};

TEST_P(RewardProperty, BoundsAndMonotonicity) {
  const std::uint64_t seed = static_cast<std::uint64_t>(GetParam());
  const BenchSuite suite = generate_suite(Category::kComplex, 20, seed);
  std::uint64_t h = derive_seed(seed, {99});
  auto next = [&] { return h = splitmix64(h); };
  for (const std::string& prompt : suite.prompts) {
    const SceneSpec spec = parse_scene(prompt);
    Canvas c = empty_canvas();
    for (int i = 0; i < 6; ++i) {
      c.cells[next() % c.cells.size()] = static_cast<Token>(next() % 21);
    }
    const RewardBundle b = score_all(default_reward_names(), spec, c);
    double lo = 1.0, hi = 0.0;
    for (const auto& [name, v] : b.scores) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_LE(lo, b.ensemble + 1e-12);
    EXPECT_GE(hi, b.ensemble - 1e-12);

    // Place every object, one at a time, on an empty cell of its assigned band.
    const BandAssignment a = assign_bands(spec, 3);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      const double g0 = grounding_score(spec, c);
      const double a0 = alignment_score(spec, c);
      const RegionDescriptor& band = c.bands[a.band_of[i]];
      bool placed = false;
      for (int r = band.start_row; r <= band.end_row && !placed; ++r) {
        for (int col = 0; col < c.width && !placed; ++col) {
          Token& t = c.cells[static_cast<std::size_t>(r) * c.width + col];
          if (t == kEmptyToken) {
            t = spec.objects[i].id.token();
            placed = true;
          }
        }
      }
      ASSERT_TRUE(placed);
      EXPECT_GE(grounding_score(spec, c), g0);
      EXPECT_GE(alignment_score(spec, c), a0);
    }
    EXPECT_EQ(grounding_score(spec, c), 1.0);
    EXPECT_EQ(alignment_score(spec, c), 1.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RewardProperty, ::testing::Range(0, 10));

}  // namespace
}  // namespace twig
