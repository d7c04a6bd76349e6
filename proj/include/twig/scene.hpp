// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Scene description language for the grid-world prompts.
//
//   scene     = clause , { ";" , clause } ;
//   clause    = objref , [ relation , objref ] ;
//   objref    = [ article ] , color , shape , [ placement ] ;
//   placement = "in" , [ "the" ] , band ;
//   band      = "top" | "middle" | "bottom" | "band" , integer ;
//   relation  = "left" , "of" | "right" , "of" | "above" | "below" ;
//   article   = "a" | "an" | "the" ;
//   color     = "red" | "green" | "blue" | "yellow" | "purple" ;
//   shape     = "square" | "circle" | "triangle" | "star" ;
//
// Words are lowercase ASCII separated by blanks. An object is identified by
// its (color, shape) pair; repeated mentions refer to the same object.

#ifndef TWIG_SCENE_HPP_
#define TWIG_SCENE_HPP_

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twig/error.hpp"
#include "twig/sequence.hpp"

namespace twig {

enum class Color { kRed, kGreen, kBlue, kYellow, kPurple };
enum class Shape { kSquare, kCircle, kTriangle, kStar };
enum class Relation { kLeftOf, kRightOf, kAbove, kBelow };

inline constexpr int kNumColors = 5;
inline constexpr int kNumShapes = 4;
inline constexpr int kNumObjectKinds = kNumColors * kNumShapes;

inline constexpr std::array<std::string_view, kNumColors> kColorNames = {
    "red", "green", "blue", "yellow", "purple"};
inline constexpr std::array<std::string_view, kNumShapes> kShapeNames = {
    "square", "circle", "triangle", "star"};

inline std::string_view to_string(Color c) { return kColorNames[static_cast<int>(c)]; }
inline std::string_view to_string(Shape s) { return kShapeNames[static_cast<int>(s)]; }
inline std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return "left of";
    case Relation::kRightOf: return "right of";
    case Relation::kAbove: return "above";
    case Relation::kBelow: return "below";
  }
  return "?";
}

inline bool is_horizontal(Relation r) {
  return r == Relation::kLeftOf || r == Relation::kRightOf;
}

struct ObjectId {
  Color color = Color::kRed;
  Shape shape = Shape::kSquare;

  // Dense id in [0, 20).
  int ordinal() const { return static_cast<int>(color) * kNumShapes + static_cast<int>(shape); }
  // Visual token id: 1 + color * 4 + shape. Token 0 is EMPTY.
  Token token() const { return static_cast<Token>(1 + ordinal()); }

  static ObjectId from_ordinal(int ordinal) {
    return {static_cast<Color>(ordinal / kNumShapes), static_cast<Shape>(ordinal % kNumShapes)};
  }
  static std::optional<ObjectId> from_token(Token t) {
    if (t == kEmptyToken || t > kNumObjectKinds) return std::nullopt;
    return from_ordinal(t - 1);
  }

  std::string name() const {
    return std::string(to_string(color)) + " " + std::string(to_string(shape));
  }

  friend bool operator==(const ObjectId&, const ObjectId&) = default;
};

// A band named in text. Named bands resolve against the band count K:
// top -> 0, middle -> (K - 1) / 2, bottom -> K - 1, "band n" -> n - 1.
struct BandRef {
  enum class Kind { kTop, kMiddle, kBottom, kNumbered };
  Kind kind = Kind::kMiddle;
  int number = 0;  // 1-based, kNumbered only

  std::optional<int> resolve(int num_bands) const {
    switch (kind) {
      case Kind::kTop: return 0;
      case Kind::kMiddle: return (num_bands - 1) / 2;
      case Kind::kBottom: return num_bands - 1;
      case Kind::kNumbered:
        if (number >= 1 && number <= num_bands) return number - 1;
        return std::nullopt;
    }
    return std::nullopt;
  }

  std::string text() const {
    switch (kind) {
      case Kind::kTop: return "top";
      case Kind::kMiddle: return "middle";
      case Kind::kBottom: return "bottom";
      case Kind::kNumbered: return "band " + std::to_string(number);
    }
    return "";
  }

  // Canonical way to name 0-based band `index` of `num_bands`.
  static BandRef for_index(int index, int num_bands) {
    if (num_bands == 3) return {static_cast<Kind>(index), 0};
    return {Kind::kNumbered, index + 1};
  }

  friend bool operator==(const BandRef&, const BandRef&) = default;
};

struct SceneObject {
  ObjectId id;
  std::optional<BandRef> band;
};

struct Mention {
  int object = -1;  // index into SceneSpec::objects
  std::optional<BandRef> band;
};

struct Clause {
  Mention first;
  std::optional<Relation> relation;
  Mention second;  // valid only with a relation
};

struct RelationClause {
  int subject = -1;
  Relation relation = Relation::kLeftOf;
  int object = -1;
};

struct SceneSpec {
  std::vector<SceneObject> objects;      // declaration order
  std::vector<RelationClause> relations;
  std::vector<Clause> clauses;           // as written

  int find(ObjectId id) const {
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i].id == id) return static_cast<int>(i);
    }
    return -1;
  }
};

namespace detail {

class SceneParser {
 public:
  explicit SceneParser(std::string_view text) : text_(text) {}

  SceneSpec parse() {
    SceneSpec spec;
    parse_clause(spec);
    while (true) {
      skip_blank();
      if (pos_ == text_.size()) break;
      if (text_[pos_] != ';') throw ParseError(pos_, "expected ';' between clauses");
      ++pos_;
      parse_clause(spec);
    }
    return spec;
  }

 private:
  struct Word {
    std::string_view text;
    std::size_t offset;
  };

  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  std::optional<Word> peek_word() {
    skip_blank();
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ';' &&
           !std::isspace(static_cast<unsigned char>(text_[end]))) {
      ++end;
    }
    if (end == pos_) return std::nullopt;
    return Word{text_.substr(pos_, end - pos_), pos_};
  }

  Word take_word(std::string_view expected) {
    auto w = peek_word();
    if (!w) throw ParseError(pos_, "expected " + std::string(expected));
    pos_ = w->offset + w->text.size();
    return *w;
  }

  bool accept(std::string_view literal) {
    auto w = peek_word();
    if (w && w->text == literal) {
      pos_ = w->offset + w->text.size();
      return true;
    }
    return false;
  }

  template <std::size_t N>
  static int lookup(const std::array<std::string_view, N>& names, std::string_view word) {
    for (std::size_t i = 0; i < N; ++i) {
      if (names[i] == word) return static_cast<int>(i);
    }
    return -1;
  }

  int parse_objref(SceneSpec& spec, std::optional<BandRef>& mention_band) {
    if (auto w = peek_word(); w && (w->text == "a" || w->text == "an" || w->text == "the")) {
      take_word("article");
    }
    Word cw = take_word("a color");
    int c = lookup(kColorNames, cw.text);
    if (c < 0) throw ParseError(cw.offset, "unknown color '" + std::string(cw.text) + "'");
    Word sw = take_word("a shape");
    int s = lookup(kShapeNames, sw.text);
    if (s < 0) throw ParseError(sw.offset, "unknown shape '" + std::string(sw.text) + "'");
    ObjectId id{static_cast<Color>(c), static_cast<Shape>(s)};

    int index = spec.find(id);
    if (index < 0) {
      spec.objects.push_back({id, std::nullopt});
      index = static_cast<int>(spec.objects.size()) - 1;
    }

    mention_band.reset();
    if (auto w = peek_word(); w && w->text == "in") {
      take_word("in");
      accept("the");
      Word bw = take_word("a band");
      BandRef band;
      if (bw.text == "top") {
        band = {BandRef::Kind::kTop, 0};
      } else if (bw.text == "middle") {
        band = {BandRef::Kind::kMiddle, 0};
      } else if (bw.text == "bottom") {
        band = {BandRef::Kind::kBottom, 0};
      } else if (bw.text == "band") {
        Word nw = take_word("a band number");
        int n = 0;
        for (char ch : nw.text) {
          if (!std::isdigit(static_cast<unsigned char>(ch)) || n > 1000) {
            throw ParseError(nw.offset, "bad band number '" + std::string(nw.text) + "'");
          }
          n = n * 10 + (ch - '0');
        }
        if (n < 1) throw ParseError(nw.offset, "band numbers start at 1");
        band = {BandRef::Kind::kNumbered, n};
      } else {
        throw ParseError(bw.offset, "unknown band '" + std::string(bw.text) + "'");
      }
      auto& existing = spec.objects[static_cast<std::size_t>(index)].band;
      if (existing && !(*existing == band)) {
        throw ParseError(bw.offset, "conflicting band constraint for " + id.name());
      }
      existing = band;
      mention_band = band;
    }
    return index;
  }

  std::optional<Relation> parse_relation() {
    auto w = peek_word();
    if (!w) return std::nullopt;
    if (w->text == "above") {
      take_word("relation");
      return Relation::kAbove;
    }
    if (w->text == "below") {
      take_word("relation");
      return Relation::kBelow;
    }
    if (w->text == "left" || w->text == "right") {
      take_word("relation");
      Word of = take_word("'of'");
      if (of.text != "of") throw ParseError(of.offset, "expected 'of'");
      return w->text == "left" ? Relation::kLeftOf : Relation::kRightOf;
    }
    throw ParseError(w->offset, "unknown relation '" + std::string(w->text) + "'");
  }

  void parse_clause(SceneSpec& spec) {
    Clause clause;
    clause.first.object = parse_objref(spec, clause.first.band);
    clause.relation = parse_relation();
    if (clause.relation) {
      skip_blank();
      std::size_t at = pos_;
      clause.second.object = parse_objref(spec, clause.second.band);
      if (clause.second.object == clause.first.object) {
        throw ParseError(at, "relation references the same object twice");
      }
      spec.relations.push_back({clause.first.object, *clause.relation, clause.second.object});
    }
    spec.clauses.push_back(clause);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline SceneSpec parse_scene(std::string_view text) {
  return detail::SceneParser(text).parse();
}

// Parses each ';'-separated clause on its own and keeps the ones that parse.
// Used by readers of truncated or partially garbled text.
inline SceneSpec parse_scene_lenient(std::string_view text) {
  std::string kept;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view piece = text.substr(start, end - start);
    std::string candidate = kept.empty() ? std::string(piece) : kept + ";" + std::string(piece);
    try {
      detail::SceneParser(piece).parse();
      detail::SceneParser(candidate).parse();
      kept = std::move(candidate);
    } catch (const ParseError&) {
      // clause dropped
    }
    start = end + 1;
  }
  if (kept.empty()) return {};
  return parse_scene(kept);
}

inline std::string render_mention(const SceneSpec& spec, const Mention& m) {
  std::string out = spec.objects[static_cast<std::size_t>(m.object)].id.name();
  if (m.band) out += " in " + m.band->text();
  return out;
}

inline std::string render_clause(const SceneSpec& spec, const Clause& c) {
  std::string out = render_mention(spec, c.first);
  if (c.relation) out += " " + std::string(to_string(*c.relation)) + " " + render_mention(spec, c.second);
  return out;
}

inline std::string render_scene(const SceneSpec& spec) {
  std::string out;
  for (const Clause& c : spec.clauses) {
    if (!out.empty()) out += "; ";
    out += render_clause(spec, c);
  }
  return out;
}

}  // namespace twig

#endif  // TWIG_SCENE_HPP_
