// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// Serves the rule toy backend over the bridge wire protocol. Each request
// builds a fresh backend from its body, so the server holds no session state.

#ifndef TWIG_TOY_BRIDGE_HPP_
#define TWIG_TOY_BRIDGE_HPP_

#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "twig/remote.hpp"
#include "twig/toysim.hpp"
#include "twig/trace.hpp"

namespace twig {

inline void install_toy_bridge(httplib::Server& server, const ToyConfig& toy) {
  toy.validate();
  auto handle = [toy](std::string endpoint) {
    return [toy, endpoint](const httplib::Request& req, httplib::Response& res) {
      auto fail = [&](int status, const std::string& kind, const std::string& msg) {
        res.status = status;
        res.set_content(json{{"error", kind}, {"message", msg}}.dump(), "application/json");
      };
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        return fail(400, "invalid-input", std::string("malformed JSON: ") + e.what());
      }
      try {
        ToyBackend backend(toy);
        json out;
        if (endpoint == "schedule") {
          const auto p = backend.schedule(wire::field<std::string>(body, "prompt", ErrorKind::kInvalidInput),
                                          wire::field<int>(body, "max_k", ErrorKind::kInvalidInput));
          out = {{"k", p.k}, {"ratios", p.ratios}};
        } else {
          const BackendContext ctx = wire::context_from_request(body, endpoint);
          if (endpoint == "think") {
            out = {{"thought", backend.think(ctx)}};
          } else if (endpoint == "generate") {
            out = {{"tokens", backend.generate_region(ctx).tokens}};
          } else {
            const ReflectionTuple r = backend.reflect(ctx);
            out = {{"score", r.score}, {"revised", r.revised_thought}};
          }
        }
        res.set_content(out.dump(), "application/json");
      } catch (const Error& e) {
        const bool client = e.kind() == ErrorKind::kInvalidInput || e.kind() == ErrorKind::kParse ||
                            e.kind() == ErrorKind::kInfeasibleSpec;
        fail(client ? 400 : 500, std::string(to_string(e.kind())), e.what());
      }
    };
  };
  for (const char* ep : {"schedule", "think", "generate", "reflect"}) {
    server.Post(std::string("/v1/") + ep, handle(ep));
  }
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"version", kToolVersion}, {"model", "toysim"}}.dump(), "application/json");
  });
}

// A toy bridge on a background thread, bound to an ephemeral local port.
class LocalToyBridge {
 public:
  explicit LocalToyBridge(const ToyConfig& toy = {}) {
    install_toy_bridge(server_, toy);
    port_ = server_.bind_to_any_port("127.0.0.1");
    require(port_ > 0, ErrorKind::kTransport, "could not bind a local port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalToyBridge() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  LocalToyBridge(const LocalToyBridge&) = delete;
  LocalToyBridge& operator=(const LocalToyBridge&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace twig

#endif  // TWIG_TOY_BRIDGE_HPP_
