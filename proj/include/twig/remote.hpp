// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Bridge wire protocol: JSON bodies over HTTP POST.
//
//   /v1/schedule  {prompt, max_k}                                   -> {k, ratios}
//   /v1/think     {prompt, thoughts, regions, reflections, k, seed} -> {thought}
//   /v1/generate  {thoughts, regions, band:{rows:[s,e], width}, seed} -> {tokens}
//   /v1/reflect   {prompt, thoughts, regions, k, seed}              -> {score, revised}
//
// Requests also carry prompt, k, num_bands, attempt, width and vocab_size
// where the core fields leave them implicit. Servers must ignore fields they
// do not know.

#ifndef TWIG_REMOTE_HPP_
#define TWIG_REMOTE_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "twig/backend.hpp"
#include "twig/error.hpp"

namespace twig {

using nlohmann::json;

namespace wire {

inline json regions_json(const std::vector<RegionTokens>& regions) {
  json out = json::array();
  for (const RegionTokens& r : regions) out.push_back(r.tokens);
  return out;
}

inline json schedule_request(std::string_view prompt, int max_k) { return {{"prompt", prompt}, {"max_k", max_k}}; }

inline json think_request(const BackendContext& ctx) {
  json refl = json::array();
  for (const ReflectionRecord& r : ctx.reflections) refl.push_back({{"k", r.k}, {"score", r.score}, {"revised", r.revised}});
  return {{"prompt", ctx.prompt},     {"thoughts", ctx.thoughts}, {"regions", regions_json(ctx.regions)},
          {"reflections", refl},      {"k", ctx.k},               {"seed", ctx.seed},
          {"num_bands", ctx.num_bands}, {"width", ctx.geometry.width}};
}

inline json generate_request(const BackendContext& ctx) {
  return {{"thoughts", ctx.thoughts},
          {"regions", regions_json(ctx.regions)},
          {"band", {{"rows", {ctx.band.start_row, ctx.band.end_row}}, {"width", ctx.band.width}}},
          {"seed", ctx.seed},
          {"prompt", ctx.prompt},
          {"k", ctx.k},
          {"num_bands", ctx.num_bands},
          {"attempt", ctx.attempt},
          {"vocab_size", ctx.geometry.vocab_size}};
}

inline json reflect_request(const BackendContext& ctx) {
  return {{"prompt", ctx.prompt},  {"thoughts", ctx.thoughts},       {"regions", regions_json(ctx.regions)},
          {"k", ctx.k},            {"seed", ctx.seed},               {"num_bands", ctx.num_bands},
          {"attempt", ctx.attempt}, {"width", ctx.geometry.width}};
}

// Field access that reports schema problems as `kind` errors.
template <typename T>
T field(const json& j, const char* name, ErrorKind kind) {
  if (!j.is_object() || !j.contains(name)) throw Error(kind, std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(kind, std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* name, T fallback, ErrorKind kind) {
  return j.is_object() && j.contains(name) ? field<T>(j, name, kind) : fallback;
}

inline std::vector<Token> tokens_from(const json& arr, ErrorKind kind) {
  if (!arr.is_array()) throw Error(kind, "token list is not an array");
  std::vector<Token> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number_integer()) throw Error(kind, "token id is not an integer");
    const auto x = v.get<std::int64_t>();
    if (x < 0 || x > 0xffff) throw Error(kind, "token id " + std::to_string(x) + " out of range");
    out.push_back(static_cast<Token>(x));
  }
  return out;
}

inline std::vector<RegionTokens> regions_from(const json& j, ErrorKind kind) {
  std::vector<RegionTokens> out;
  if (!j.is_object() || !j.contains("regions")) return out;
  if (!j.at("regions").is_array()) throw Error(kind, "field 'regions' is not an array");
  for (const json& r : j.at("regions")) out.push_back({tokens_from(r, kind)});
  return out;
}

inline ScheduleProposal parse_schedule_response(const json& j) {
  constexpr auto K = ErrorKind::kContract;
  return {field<int>(j, "k", K), field<std::vector<double>>(j, "ratios", K)};
}

inline std::string parse_think_response(const json& j) { return field<std::string>(j, "thought", ErrorKind::kContract); }

inline RegionTokens parse_generate_response(const json& j) {
  if (!j.is_object() || !j.contains("tokens")) throw Error(ErrorKind::kContract, "missing field 'tokens'");
  return {tokens_from(j.at("tokens"), ErrorKind::kContract)};
}

inline ReflectionTuple parse_reflect_response(const json& j) {
  constexpr auto K = ErrorKind::kContract;
  if (!j.is_object() || !j.contains("score") || !j.at("score").is_number_integer()) {
    throw Error(K, "field 'score' must be an integer");
  }
  ReflectionTuple r{j.at("score").get<int>(), field<std::string>(j, "revised", K)};
  check_reflection(r);
  return r;
}

// Server side: rebuild the backend context from a request body. Schema
// problems are invalid-input (HTTP 400).
inline BackendContext context_from_request(const json& j, std::string_view endpoint) {
  constexpr auto K = ErrorKind::kInvalidInput;
  BackendContext ctx;
  ctx.prompt = field_or<std::string>(j, "prompt", "", K);
  ctx.thoughts = field_or<std::vector<std::string>>(j, "thoughts", {}, K);
  ctx.regions = regions_from(j, K);
  ctx.seed = field<std::uint64_t>(j, "seed", K);
  ctx.attempt = field_or<int>(j, "attempt", 0, K);
  ctx.num_bands = field_or<int>(j, "num_bands", 3, K);
  ctx.geometry.width = field_or<int>(j, "width", ctx.geometry.width, K);
  ctx.geometry.vocab_size = field_or<int>(j, "vocab_size", ctx.geometry.vocab_size, K);
  if (endpoint == "generate") {
    const json band = field<json>(j, "band", K);
    const auto rows = field<std::vector<int>>(band, "rows", K);
    require(rows.size() == 2 && rows[0] >= 0 && rows[1] >= rows[0], K, "band.rows must be [start, end]");
    const int width = field<int>(band, "width", K);
    require(width >= 1, K, "band.width must be positive");
    ctx.k = field_or<int>(j, "k", static_cast<int>(ctx.thoughts.size()), K);
    ctx.band = RegionDescriptor{ctx.k, rows[0], rows[1], width};
    ctx.geometry.width = width;
  } else {
    ctx.k = field<int>(j, "k", K);
    if (j.contains("reflections")) {
      require(j.at("reflections").is_array(), K, "field 'reflections' is not an array");
      for (const json& r : j.at("reflections")) {
        ctx.reflections.push_back(
            {field_or<int>(r, "k", 0, K), field<int>(r, "score", K), field<std::string>(r, "revised", K)});
      }
    }
  }
  require(ctx.num_bands >= 1 && ctx.k >= 0 && ctx.k <= ctx.num_bands, K, "k outside [0, num_bands]");
  return ctx;
}

}  // namespace wire

struct RemoteOptions {
  std::string url;  // scheme://host:port
  std::chrono::milliseconds timeout{30000};
  int retries = 1;  // extra attempts with the identical body
};

// One session per trajectory. Transport failures and 5xx replies are retried
// with the same body (and so the same seed); after that the call fails with
// a transport error. 4xx replies and malformed bodies are contract errors.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteOptions options) : options_(std::move(options)), client_(options_.url) {
    require(options_.url.rfind("http://", 0) == 0 && options_.url.size() > 7 && client_.is_valid(),
            ErrorKind::kInvalidInput, "bad bridge url '" + options_.url + "' (expected http://host:port)");
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client_.set_connection_timeout(secs.count(), usecs.count());
    client_.set_read_timeout(secs.count(), usecs.count());
    client_.set_write_timeout(secs.count(), usecs.count());
  }

  ScheduleProposal schedule(std::string_view prompt, int max_k) override {
    return wire::parse_schedule_response(post("/v1/schedule", wire::schedule_request(prompt, max_k)));
  }
  std::string think(const BackendContext& ctx) override {
    return wire::parse_think_response(post("/v1/think", wire::think_request(ctx)));
  }
  RegionTokens generate_region(const BackendContext& ctx) override {
    RegionTokens r = wire::parse_generate_response(post("/v1/generate", wire::generate_request(ctx)));
    check_region(r, ctx.band, ctx.geometry.vocab_size);
    return r;
  }
  ReflectionTuple reflect(const BackendContext& ctx) override {
    return wire::parse_reflect_response(post("/v1/reflect", wire::reflect_request(ctx)));
  }

  // Raw exchange, for conformance checks. Returns status and body.
  std::pair<int, std::string> exchange(const std::string& method, const std::string& path, const std::string& body) {
    auto res = method == "GET" ? client_.Get(path) : client_.Post(path, body, "application/json");
    if (!res) throw Error(ErrorKind::kTransport, path + ": " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }

 private:
  json post(const std::string& path, const json& body) {
    const std::string text = body.dump();
    std::string last;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      auto res = client_.Post(path, text, "application/json");
      if (!res) {
        last = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorKind::kContract, path + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      try {
        return json::parse(res->body);
      } catch (const json::exception&) {
        throw Error(ErrorKind::kContract, path + " answered with malformed JSON");
      }
    }
    throw Error(ErrorKind::kTransport, path + " failed after " + std::to_string(options_.retries + 1) +
                                           " attempts: " + last);
  }

  RemoteOptions options_;
  httplib::Client client_;
};

inline BackendFactory remote_factory(RemoteOptions options) {
  return [options] { return std::make_unique<RemoteBackend>(options); };
}

// Golden conformance fixtures. Checks are structural so that any bridge,
// toy or real, can pass them.
struct FixtureResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::vector<Token> empty_band(int n) { return std::vector<Token>(static_cast<std::size_t>(n), kEmptyToken); }

}  // namespace detail

inline std::vector<FixtureResult> bridge_check(const std::string& url,
                                               std::chrono::milliseconds timeout = std::chrono::milliseconds(10000)) {
  RemoteBackend client(RemoteOptions{url, timeout, 0});
  std::vector<FixtureResult> out;
  auto run = [&](std::string name, const std::function<std::string()>& f) {
    FixtureResult r{std::move(name), false, ""};
    try {
      r.detail = f();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  };
  const std::string prompt = "red square in top; blue circle left of green triangle";
  auto post = [&](const std::string& path, const json& body) {
    auto [status, text] = client.exchange("POST", path, body.dump());
    if (status != 200) throw Error(ErrorKind::kContract, path + " answered HTTP " + std::to_string(status));
    return json::parse(text);
  };

  run("healthz", [&]() -> std::string {
    auto [status, text] = client.exchange("GET", "/healthz", "");
    if (status != 200) return "status " + std::to_string(status);
    const json j = json::parse(text);
    if (!j.contains("model") || !j.contains("version")) return "missing model or version";
    return "";
  });
  run("schedule", [&]() -> std::string {
    const ScheduleProposal p = wire::parse_schedule_response(post("/v1/schedule", wire::schedule_request(prompt, 3)));
    if (p.k < 1 || p.k > 3) return "k " + std::to_string(p.k) + " outside [1, 3]";
    if (!p.ratios.empty()) {
      if (static_cast<int>(p.ratios.size()) != p.k) return "ratio count differs from k";
      double sum = 0.0;
      for (double r : p.ratios) {
        if (!(r > 0.0)) return "non-positive ratio";
        sum += r;
      }
      if (std::abs(sum - 1.0) > 1e-6) return "ratios do not sum to 1";
    }
    return "";
  });
  BackendContext ctx;
  ctx.prompt = prompt;
  ctx.k = 1;
  ctx.num_bands = 3;
  ctx.band = RegionDescriptor{1, 0, 3, 12};
  ctx.seed = 7;
  run("think", [&]() -> std::string {
    const std::string t = wire::parse_think_response(post("/v1/think", wire::think_request(ctx)));
    return t.empty() ? "empty thought" : "";
  });
  ctx.thoughts = {"red square"};
  run("generate", [&]() -> std::string {
    const RegionTokens r = wire::parse_generate_response(post("/v1/generate", wire::generate_request(ctx)));
    check_region(r, ctx.band, ctx.geometry.vocab_size);
    return "";
  });
  run("generate_second_band", [&]() -> std::string {
    BackendContext c = ctx;
    c.k = 2;
    c.band = RegionDescriptor{2, 4, 7, 12};
    c.thoughts = {"red square", "blue circle left of green triangle"};
    c.regions = {RegionTokens{detail::empty_band(48)}};
    const RegionTokens r = wire::parse_generate_response(post("/v1/generate", wire::generate_request(c)));
    check_region(r, c.band, c.geometry.vocab_size);
    return "";
  });
  run("reflect", [&]() -> std::string {
    BackendContext c = ctx;
    c.regions = {RegionTokens{detail::empty_band(48)}};
    const ReflectionTuple r = wire::parse_reflect_response(post("/v1/reflect", wire::reflect_request(c)));
    return r.revised_thought.empty() ? "empty revision" : "";
  });
  run("generate_missing_band_is_400", [&]() -> std::string {
    json body = wire::generate_request(ctx);
    body.erase("band");
    auto [status, text] = client.exchange("POST", "/v1/generate", body.dump());
    return status == 400 ? "" : "expected HTTP 400, got " + std::to_string(status);
  });
  run("reflect_bad_json_is_400", [&]() -> std::string {
    auto [status, text] = client.exchange("POST", "/v1/reflect", "{not json");
    return status == 400 ? "" : "expected HTTP 400, got " + std::to_string(status);
  });
  return out;
}

}  // namespace twig

#endif  // TWIG_REMOTE_HPP_
