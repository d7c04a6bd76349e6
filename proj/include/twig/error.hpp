// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef TWIG_ERROR_HPP_
#define TWIG_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twig {

enum class ErrorKind {
  kInvalidInput,
  kProtocolOrder,
  kShape,
  kLocality,
  kIncompleteTrajectory,
  kParse,
  kInfeasibleSpec,
  kTransport,
  kContract,
  kReplayDivergence,
  kTrajectoryAbort,
  kNumeric,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kProtocolOrder: return "protocol-order";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kLocality: return "locality";
    case ErrorKind::kIncompleteTrajectory: return "incomplete-trajectory";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInfeasibleSpec: return "infeasible-spec";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kReplayDivergence: return "replay-divergence";
    case ErrorKind::kTrajectoryAbort: return "trajectory-abort";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

// Every domain failure surfaces as a twig::Error. The kind is stable and
// machine readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(ErrorKind::kParse,
              "at byte " + std::to_string(offset) + ": " + message),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ReplayDivergence : public Error {
 public:
  ReplayDivergence(std::size_t position, const std::string& message)
      : Error(ErrorKind::kReplayDivergence,
              "event " + std::to_string(position) + ": " + message),
        position_(position) {}

  // Index of the offending event in the recorded trace.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace twig

#endif  // TWIG_ERROR_HPP_
