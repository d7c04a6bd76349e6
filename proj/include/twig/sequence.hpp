// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Interleaved token sequence: one generative trajectory laid out as
//   [prompt][thought 1 .. thought m][region 1 .. region n],  m - n in {0, 1}.
// Thoughts extend the textual pre-context; regions extend the visual suffix.
// The only edit to existing content is replacing the most recent thought and
// dropping its region so that it can be regenerated in place.

#ifndef TWIG_SEQUENCE_HPP_
#define TWIG_SEQUENCE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twig/error.hpp"
#include "twig/hash.hpp"

namespace twig {

using Token = std::uint16_t;

inline constexpr Token kEmptyToken = 0;

struct Geometry {
  int height = 12;
  int width = 12;
  int vocab_size = 21;

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct Thought {
  int index = 0;  // 1-based band index
  std::string text;
  bool revised = false;

  friend bool operator==(const Thought&, const Thought&) = default;
};

struct RegionDescriptor {
  int index = 0;  // 1-based
  int start_row = 0;
  int end_row = 0;  // inclusive
  int width = 0;

  int rows() const { return end_row - start_row + 1; }
  int token_count() const { return rows() * width; }

  friend bool operator==(const RegionDescriptor&, const RegionDescriptor&) = default;
};

// Row-major visual token ids of one band.
struct RegionTokens {
  std::vector<Token> tokens;

  friend bool operator==(const RegionTokens&, const RegionTokens&) = default;
};

struct Canvas {
  int height = 0;
  int width = 0;
  std::vector<Token> cells;               // row-major, height * width
  std::vector<RegionDescriptor> bands;    // partition the canvas was built from

  Token at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * width + col];
  }

  // u16 height, u16 width, then every cell as u16, all little-endian.
  std::vector<std::uint8_t> canonical_bytes() const {
    ByteWriter w;
    w.u16(static_cast<std::uint16_t>(height));
    w.u16(static_cast<std::uint16_t>(width));
    for (Token t : cells) w.u16(t);
    return w.bytes();
  }

  std::string hash() const { return sha256_hex(canonical_bytes()); }
};

// Splices band tokens into a canvas. Bands must be contiguous from row 0 and
// cover every row.
inline Canvas assemble_canvas(const Geometry& geometry,
                              std::span<const RegionDescriptor> bands,
                              std::span<const RegionTokens> regions) {
  require(bands.size() == regions.size(), ErrorKind::kIncompleteTrajectory,
          "band/region count mismatch");
  Canvas canvas{geometry.height, geometry.width,
                std::vector<Token>(static_cast<std::size_t>(geometry.height) * geometry.width,
                                   kEmptyToken),
                {bands.begin(), bands.end()}};
  int next_row = 0;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const RegionDescriptor& d = bands[b];
    require(d.start_row == next_row && d.width == geometry.width, ErrorKind::kIncompleteTrajectory,
            "bands are not contiguous from row 0");
    require(regions[b].tokens.size() == static_cast<std::size_t>(d.token_count()),
            ErrorKind::kShape, "region length does not match its descriptor");
    for (int r = 0; r < d.rows(); ++r) {
      for (int c = 0; c < d.width; ++c) {
        canvas.cells[static_cast<std::size_t>(d.start_row + r) * geometry.width + c] =
            regions[b].tokens[static_cast<std::size_t>(r) * d.width + c];
      }
    }
    next_row = d.end_row + 1;
  }
  require(next_row == geometry.height, ErrorKind::kIncompleteTrajectory,
          "bands cover rows [0, " + std::to_string(next_row) + ") of " +
              std::to_string(geometry.height));
  return canvas;
}

enum class SlotKind { kPrompt, kThought, kRegion };

struct LayoutSlot {
  SlotKind kind;
  int index;  // 0 for the prompt, otherwise 1-based

  friend bool operator==(const LayoutSlot&, const LayoutSlot&) = default;
};

class InterleavedSequence {
 public:
  static InterleavedSequence create(std::string prompt, Geometry geometry = {}) {
    require(!prompt.empty(), ErrorKind::kInvalidInput, "prompt must be non-empty");
    InterleavedSequence s;
    s.prompt_ = std::move(prompt);
    s.geometry_ = geometry;
    return s;
  }

  const std::string& prompt() const { return prompt_; }
  const Geometry& geometry() const { return geometry_; }
  const std::vector<Thought>& thoughts() const { return thoughts_; }
  const std::vector<RegionTokens>& regions() const { return regions_; }
  const std::vector<RegionDescriptor>& descriptors() const { return descriptors_; }

  bool thought_leads() const { return thoughts_.size() == regions_.size() + 1; }

  [[nodiscard]] InterleavedSequence append_thought(Thought thought) const {
    require(thoughts_.size() == regions_.size(), ErrorKind::kProtocolOrder,
            "a thought already leads its region");
    require(thought.index == static_cast<int>(thoughts_.size()) + 1, ErrorKind::kProtocolOrder,
            "thought index " + std::to_string(thought.index) + " out of order");
    require(!thought.text.empty(), ErrorKind::kInvalidInput, "thought text must be non-empty");
    InterleavedSequence next = *this;
    next.thoughts_.push_back(std::move(thought));
    return next;
  }

  [[nodiscard]] InterleavedSequence append_region(RegionTokens tokens,
                                                  const RegionDescriptor& desc) const {
    require(thought_leads(), ErrorKind::kProtocolOrder, "region appended without a leading thought");
    require(desc.index == static_cast<int>(regions_.size()) + 1, ErrorKind::kProtocolOrder,
            "region index " + std::to_string(desc.index) + " out of order");
    require(desc.width == geometry_.width && desc.start_row >= 0 && desc.end_row >= desc.start_row &&
                desc.end_row < geometry_.height,
            ErrorKind::kShape, "descriptor outside the canvas");
    const int expected_start = descriptors_.empty() ? 0 : descriptors_.back().end_row + 1;
    require(desc.start_row == expected_start, ErrorKind::kShape,
            "descriptor rows are not contiguous with the previous band");
    require(tokens.tokens.size() == static_cast<std::size_t>(desc.token_count()), ErrorKind::kShape,
            "band needs " + std::to_string(desc.token_count()) + " tokens, got " +
                std::to_string(tokens.tokens.size()));
    for (Token t : tokens.tokens) {
      require(t < geometry_.vocab_size, ErrorKind::kShape,
              "token id " + std::to_string(t) + " outside the visual vocabulary");
    }
    InterleavedSequence next = *this;
    next.regions_.push_back(std::move(tokens));
    next.descriptors_.push_back(desc);
    return next;
  }

  // Swaps in the revised thought for the most recent band and drops that
  // band's tokens so it can be regenerated. Earlier bands are never touched.
  [[nodiscard]] InterleavedSequence reflect_replace(int k, Thought revised) const {
    require(!regions_.empty() && k == static_cast<int>(regions_.size()), ErrorKind::kLocality,
            "only the most recent region (" + std::to_string(regions_.size()) +
                ") may be revised, not " + std::to_string(k));
    require(!thought_leads(), ErrorKind::kProtocolOrder,
            "cannot revise a band after the next thought was emitted");
    require(revised.index == k, ErrorKind::kInvalidInput, "revised thought index mismatch");
    require(!revised.text.empty(), ErrorKind::kInvalidInput, "revised thought must be non-empty");
    InterleavedSequence next = *this;
    revised.revised = true;
    next.thoughts_[static_cast<std::size_t>(k - 1)] = std::move(revised);
    next.regions_.pop_back();
    next.descriptors_.pop_back();
    return next;
  }

  bool complete() const {
    return !descriptors_.empty() && !thought_leads() &&
           descriptors_.back().end_row == geometry_.height - 1;
  }

  Canvas completed_canvas() const {
    require(complete(), ErrorKind::kIncompleteTrajectory, "regions do not cover the canvas");
    return assemble_canvas(geometry_, descriptors_, regions_);
  }

  std::vector<LayoutSlot> layout() const {
    std::vector<LayoutSlot> out{{SlotKind::kPrompt, 0}};
    for (const Thought& t : thoughts_) out.push_back({SlotKind::kThought, t.index});
    for (const RegionDescriptor& d : descriptors_) out.push_back({SlotKind::kRegion, d.index});
    return out;
  }

  // Canonical serialization: length-prefixed prompt, u32 thought count then
  // each thought length-prefixed, u32 region count then each region as a u32
  // token count followed by u16 tokens. Integers little-endian, text UTF-8.
  std::vector<std::uint8_t> layout_bytes() const {
    ByteWriter w;
    w.str(prompt_);
    w.u32(static_cast<std::uint32_t>(thoughts_.size()));
    for (const Thought& t : thoughts_) w.str(t.text);
    w.u32(static_cast<std::uint32_t>(regions_.size()));
    for (const RegionTokens& r : regions_) {
      w.u32(static_cast<std::uint32_t>(r.tokens.size()));
      for (Token t : r.tokens) w.u16(t);
    }
    return w.bytes();
  }

  std::string layout_hash() const { return sha256_hex(layout_bytes()); }

 private:
  InterleavedSequence() = default;

  std::string prompt_;
  Geometry geometry_;
  std::vector<Thought> thoughts_;
  std::vector<RegionTokens> regions_;
  std::vector<RegionDescriptor> descriptors_;
};

inline InterleavedSequence new_sequence(std::string prompt, Geometry geometry = {}) {
  return InterleavedSequence::create(std::move(prompt), geometry);
}

}  // namespace twig

#endif  // TWIG_SEQUENCE_HPP_
