// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "twig/bands.hpp"
#include "twig/scene.hpp"

namespace twig {
namespace {

TEST(ParseScene, SingleClauseWithBand) {
  SceneSpec s = parse_scene("red square in top");
  ASSERT_EQ(s.objects.size(), 1u);
  EXPECT_EQ(s.objects[0].id.token(), 1);
  ASSERT_TRUE(s.objects[0].band.has_value());
  EXPECT_EQ(s.objects[0].band->kind, BandRef::Kind::kTop);
  EXPECT_TRUE(s.relations.empty());
}

TEST(ParseScene, RelationClause) {
  SceneSpec s = parse_scene("blue circle left of green triangle");
  ASSERT_EQ(s.objects.size(), 2u);
  ASSERT_EQ(s.relations.size(), 1u);
  EXPECT_EQ(s.relations[0].relation, Relation::kLeftOf);
  EXPECT_EQ(s.objects[s.relations[0].subject].id.name(), "blue circle");
  EXPECT_EQ(s.objects[s.relations[0].object].id.name(), "green triangle");
}

TEST(ParseScene, UnknownColorAtOffsetZero) {
  try {
    parse_scene("mauve blob");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
  }
}

TEST(ParseScene, ErrorOffsets) {
  auto offset = [](std::string_view text) -> std::size_t {
    try {
      parse_scene(text);
    } catch (const ParseError& e) {
      return e.offset();
    }
    return std::string_view::npos;
  };
  EXPECT_EQ(offset("red blob"), 4u);
  EXPECT_EQ(offset("red square beside blue circle"), 11u);
  EXPECT_EQ(offset("red square left of"), 18u);  // dangling relation
  EXPECT_EQ(offset("red square left of red square"), 19u);
  EXPECT_EQ(offset("red square in top; red square in bottom"), 33u);
  EXPECT_EQ(offset("red square; "), 12u);
}

TEST(ParseScene, ArticlesNumberedBandsAndRepeats) {
  SceneSpec s = parse_scene("a red square in the band 2 ; the red square above an green star");
  ASSERT_EQ(s.objects.size(), 2u);
  EXPECT_EQ(s.objects[0].band->kind, BandRef::Kind::kNumbered);
  EXPECT_EQ(s.objects[0].band->number, 2);
  EXPECT_EQ(s.clauses.size(), 2u);
}

TEST(ParseScene, RenderRoundTrips) {
  for (std::string text : {"red square in top", "blue circle left of green triangle",
                           "yellow star in band 3 below purple circle; red triangle"}) {
    SceneSpec s = parse_scene(text);
    EXPECT_EQ(render_scene(s), text);
    EXPECT_EQ(render_scene(parse_scene(render_scene(s))), text);
  }
}

TEST(ParseSceneLenient, KeepsWholeClausesOnly) {
  SceneSpec s = parse_scene_lenient("red square; blue circle left of gr");
  ASSERT_EQ(s.objects.size(), 1u);
  EXPECT_EQ(s.objects[0].id.name(), "red square");
  EXPECT_TRUE(parse_scene_lenient("nonsense").objects.empty());
}

TEST(BandRef, ResolvesAgainstK) {
  EXPECT_EQ((BandRef{BandRef::Kind::kBottom, 0}.resolve(4)), 3);
  EXPECT_EQ((BandRef{BandRef::Kind::kMiddle, 0}.resolve(4)), 1);
  EXPECT_EQ((BandRef{BandRef::Kind::kNumbered, 5}.resolve(4)), std::nullopt);
  EXPECT_EQ(BandRef::for_index(2, 3).text(), "bottom");
  EXPECT_EQ(BandRef::for_index(2, 4).text(), "band 3");
}

TEST(AssignBands, AbovePairTakesTopAndMiddle) {
  SceneSpec s = parse_scene("red square above blue circle");
  BandAssignment a = assign_bands(s, 3);
  EXPECT_EQ(a.band_of, (std::vector<int>{0, 1}));
}

TEST(AssignBands, BelowPairTakesBottomAndMiddle) {
  SceneSpec s = parse_scene("red square below blue circle");
  EXPECT_EQ(assign_bands(s, 3).band_of, (std::vector<int>{2, 1}));
}

TEST(AssignBands, PinnedAboveBottomIsInfeasible) {
  SceneSpec s = parse_scene("red square in bottom; red square above blue circle");
  try {
    assign_bands(s, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleSpec);
  }
  SceneSpec both = parse_scene("red square in top above blue circle in top");
  EXPECT_THROW(assign_bands(both, 3), Error);
}

TEST(AssignBands, SingleObjectDefaultsToMiddle) {
  EXPECT_EQ(assign_bands(parse_scene("green star"), 3).band_of, (std::vector<int>{1}));
}

TEST(AssignBands, HorizontalPairSharesBand) {
  SceneSpec s = parse_scene("red square in top; red square left of blue circle");
  EXPECT_EQ(assign_bands(s, 3).band_of, (std::vector<int>{0, 0}));
}

TEST(AssignBands, ChainsPushApart) {
  // Three-level chain needs all three bands even though two prefer middle.
  SceneSpec s = parse_scene("red square above blue circle; blue circle above green star");
  EXPECT_EQ(assign_bands(s, 3).band_of, (std::vector<int>{0, 1, 2}));
  EXPECT_THROW(assign_bands(parse_scene("red square above blue circle; blue circle above green star; "
                                        "green star above yellow star"),
                            3),
               Error);
  EXPECT_EQ(assign_bands(parse_scene("red square above blue circle; blue circle above green star; "
                                     "green star above yellow star"),
                         4)
                .band_of,
            (std::vector<int>{0, 1, 2, 3}));
}

TEST(AssignBands, CycleIsInfeasible) {
  EXPECT_THROW(assign_bands(parse_scene("red square above blue circle; blue circle above red square"), 3), Error);
  EXPECT_THROW(assign_bands(parse_scene("red square left of blue circle; red square above blue circle"), 3), Error);
}

TEST(AssignBands, Deterministic) {
  SceneSpec s = parse_scene("purple star below red circle; green square left of yellow triangle; blue star");
  EXPECT_EQ(assign_bands(s, 3).band_of, assign_bands(s, 3).band_of);
}

// Every assignment the greedy rule produces honors every constraint.
TEST(AssignBands, ResultSatisfiesAllConstraints) {
  const char* prompts[] = {
      "red square above blue circle; green star below blue circle",
      "red square in bottom; blue circle above red square; green star left of blue circle",
      "yellow star in band 2; purple circle below yellow star; red square above yellow star",
  };
  for (int K : {3, 4}) {
    for (const char* p : prompts) {
      SceneSpec s = parse_scene(p);
      BandAssignment a = assign_bands(s, K);
      for (const RelationClause& rc : s.relations) {
        const int bs = a.band_of[rc.subject], bo = a.band_of[rc.object];
        switch (rc.relation) {
          case Relation::kAbove: EXPECT_LT(bs, bo) << p; break;
          case Relation::kBelow: EXPECT_GT(bs, bo) << p; break;
          default: EXPECT_EQ(bs, bo) << p;
        }
      }
      for (std::size_t i = 0; i < s.objects.size(); ++i) {
        if (s.objects[i].band) EXPECT_EQ(a.band_of[i], *s.objects[i].band->resolve(K)) << p;
      }
    }
  }
}

}  // namespace
}  // namespace twig
