// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// twig-toy-bridge: serves the toy simulator over the bridge wire protocol.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "twig/toy_bridge.hpp"

int main(int argc, char** argv) {
  CLI::App app{"serve the toy simulator over the bridge wire protocol"};
  std::string host = "127.0.0.1";
  int port = 8765;
  double epsilon = 0.0;
  std::string corruption = "mixed";
  std::string faults;
  int context_cap = 48;
  std::uint64_t seed = 0;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  app.add_option("--epsilon", epsilon, "toy corruption rate")->capture_default_str();
  app.add_option("--corruption", corruption, "mixed | drop | recolor")->capture_default_str();
  app.add_option("--faults", faults, "fault plan, e.g. 2:drop");
  app.add_option("--context-cap", context_cap)->capture_default_str();
  app.add_option("--seed", seed, "toy seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    twig::ToyConfig toy;
    toy.epsilon = epsilon;
    toy.corruption = twig::parse_corruption_kind(corruption);
    toy.faults = twig::parse_fault_plan(faults);
    toy.context_cap = context_cap;
    toy.seed = seed;
    toy.validate();
    httplib::Server server;
    twig::install_toy_bridge(server, toy);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    if (!server.listen(host, port)) {
      std::cerr << "cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const twig::Error& e) {
    std::cerr << nlohmann::json{{"error", twig::to_string(e.kind())}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
