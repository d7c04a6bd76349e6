// Copyright 2026 The twig Authors
// SPDX-License-Identifier: Apache-2.0

// twig: command-line entry point.
//
// Exit codes: 0 success, 1 domain error, 2 usage error. Errors are printed
// to stderr as one JSON object {"error": kind, "message": text}.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twig/twig.hpp"

namespace {

using namespace twig;

struct EngineFlags {
  int K = 3;
  int theta = 80;
  int rounds = 1;
  std::string mode = "twig";
  std::string schedule = "static";
  std::uint64_t seed = 0;
  bool hide_reflections = false;

  void add(CLI::App* app, bool with_mode = true) {
    app->add_option("--K", K, "number of bands")->capture_default_str();
    app->add_option("--theta", theta, "reflection threshold in [0, 100]")->capture_default_str();
    app->add_option("--rounds", rounds, "max reflection rounds per band (0-2)")->capture_default_str();
    if (with_mode) {
      app->add_option("--mode", mode, "twig | think_before | think_after | none")->capture_default_str();
    }
    app->add_option("--schedule", schedule, "static | adaptive")->capture_default_str();
    app->add_option("--seed", seed, "run seed")->capture_default_str();
    app->add_flag("--hide-reflections", hide_reflections, "do not pass reflection history to later thoughts");
  }

  EngineConfig resolve() const {
    EngineConfig c;
    c.K = K;
    c.theta = theta;
    c.max_reflection_rounds = rounds;
    c.mode = parse_mode(mode);
    c.schedule_mode = parse_schedule_mode(schedule);
    c.seed = seed;
    c.expose_reflections = !hide_reflections;
    c.validate();
    return c;
  }
};

struct ToyFlags {
  double epsilon = 0.0;
  std::string corruption = "mixed";
  std::string faults;
  int context_cap = 48;

  void add(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "toy corruption rate in [0, 1]")->capture_default_str();
    app->add_option("--corruption", corruption, "mixed | drop | recolor")->capture_default_str();
    app->add_option("--faults", faults, "fault plan, e.g. 2:drop,3:recolor:2");
    app->add_option("--context-cap", context_cap, "characters of thought the toy generator reads")
        ->capture_default_str();
  }

  ToyConfig resolve(std::uint64_t seed) const {
    ToyConfig c;
    c.epsilon = epsilon;
    c.corruption = parse_corruption_kind(corruption);
    c.faults = parse_fault_plan(faults);
    c.context_cap = context_cap;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct BackendFlags {
  std::string backend = "toy";
  std::string bridge_url;
  int timeout_ms = 30000;
  std::string policy_path;

  void add(CLI::App* app, bool with_policy = true) {
    app->add_option("--backend", backend, "toy | remote")->capture_default_str();
    app->add_option("--bridge-url", bridge_url, "bridge base url (default: $TWIG_BRIDGE_URL)");
    app->add_option("--timeout-ms", timeout_ms, "remote request timeout")->capture_default_str();
    if (with_policy) app->add_option("--policy", policy_path, "toy policy snapshot; sample from it instead of rules");
  }

  std::string url() const {
    if (!bridge_url.empty()) return bridge_url;
    const char* env = std::getenv("TWIG_BRIDGE_URL");
    require(env && *env, ErrorKind::kInvalidInput, "remote backend needs --bridge-url or TWIG_BRIDGE_URL");
    return env;
  }

  std::optional<ToyPolicy> policy() const {
    if (policy_path.empty()) return std::nullopt;
    require(backend == "toy", ErrorKind::kInvalidInput, "--policy needs the toy backend");
    std::ifstream in(policy_path);
    require(static_cast<bool>(in), ErrorKind::kInvalidInput, "cannot read " + policy_path);
    try {
      const json j = json::parse(in);
      return ToyPolicy::from_json(j.contains("policy") ? j.at("policy") : j);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, policy_path + ": " + e.what());
    }
  }

  json to_json() const {
    json j{{"backend", backend}};
    if (backend == "remote") j["bridge_url"] = url();
    if (!policy_path.empty()) j["policy"] = policy_path;
    return j;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json artifact_header(std::string_view schema, const json& config) {
  return {{"schema", schema}, {"tool_version", kToolVersion}, {"config", config}};
}

// Snapshot file: {"header": ..., "policy": ...}; the loader also takes a bare policy.
void write_policy(std::ostream& out, const ToyPolicy& policy, const json& config) {
  out << json{{"header", artifact_header(kPolicySchema, config)}, {"policy", policy.to_json()}}.dump() << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kInvalidInput, "cannot write " + path);
  return out;
}

// ---- generate ----

struct GenerateCmd {
  std::string prompt;
  std::string trace_path = "trace.jsonl";
  std::string rewards = "aesthetic,grounding,vqa,alignment";
  EngineFlags engine;
  ToyFlags toy;
  BackendFlags backend;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("generate", "run one trajectory, print the canvas, write its trace");
    c->add_option("--prompt", prompt, "scene description")->required();
    c->add_option("--trace", trace_path, "trace output path")->capture_default_str();
    c->add_option("--rewards", rewards, "reward providers for the ensemble")->capture_default_str();
    engine.add(c);
    toy.add(c);
    backend.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    parse_scene(prompt);
    const EngineConfig cfg = engine.resolve();
    const ToyConfig tc = toy.resolve(cfg.seed);
    const auto names = parse_reward_list(rewards);
    const std::optional<ToyPolicy> policy = backend.policy();
    std::unique_ptr<Backend> b;
    if (backend.backend == "remote") {
      b = std::make_unique<RemoteBackend>(RemoteOptions{backend.url(), std::chrono::milliseconds(backend.timeout_ms)});
    } else {
      require(backend.backend == "toy", ErrorKind::kInvalidInput, "unknown backend '" + backend.backend + "'");
      b = policy ? std::make_unique<ToyBackend>(tc, &*policy) : std::make_unique<ToyBackend>(tc);
    }
    Trace t = twig::run(prompt, *b, cfg);
    score_trace(t, names);
    json resolved{{"engine", config_to_json(cfg)}, {"toy", toy_config_to_json(tc)}, {"rewards", names}};
    resolved.update(backend.to_json());
    save_trace(trace_path, t, {{"resolved", resolved}});
    std::cout << render_ascii(*t.canvas);
    std::cout << "canvas hash " << t.canvas->hash() << "\n";
    for (const auto& [name, v] : t.reward->scores) std::cout << name << " " << v << "\n";
    std::cout << "ensemble " << t.reward->ensemble << "\n";
    std::cout << "trace written to " << trace_path << "\n";
  }
};

// ---- replay ----

struct ReplayCmd {
  std::string trace_path;
  std::optional<int> theta;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("replay", "re-run a trace against its recorded answers");
    c->add_option("--trace", trace_path, "trace file")->required();
    c->add_option("--theta", theta, "override the recorded threshold");
    c->callback([this] { run(); });
  }

  void run() {
    const Trace recorded = load_trace(trace_path);
    require(recorded.canvas.has_value(), ErrorKind::kIncompleteTrajectory, "trace has no canvas");
    EngineConfig cfg = recorded.config;
    if (theta) cfg.theta = *theta;
    const Trace out = replay(recorded, cfg);
    std::cout << "canvas hash match " << out.canvas->hash() << "\n";
  }
};

// ---- bench ----

struct BenchCmd {
  std::string category = "complex";
  int n = 200;
  std::uint64_t suite_seed = 0;
  std::string modes = "none,think_before,twig";
  int seeds = 5;
  std::string csv_path = "bench.csv";
  std::string report_path = "bench.md";
  std::string rewards = "aesthetic,grounding,vqa,alignment";
  int threads = 0;
  EngineFlags engine;
  ToyFlags toy;
  BackendFlags backend;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("bench", "compare configurations on a generated suite");
    c->add_option("--category", category, "color | shape | spatial | complex")->capture_default_str();
    c->add_option("--n", n, "prompts in the suite")->capture_default_str();
    c->add_option("--suite-seed", suite_seed, "suite generation seed")->capture_default_str();
    c->add_option("--modes", modes, "comma list of mode[@rounds], e.g. twig@0,twig@1")->capture_default_str();
    c->add_option("--seeds", seeds, "run seeds 0..n-1 per prompt")->capture_default_str();
    c->add_option("--csv", csv_path, "per-prompt CSV output")->capture_default_str();
    c->add_option("--report", report_path, "markdown report output")->capture_default_str();
    c->add_option("--rewards", rewards, "reward providers for the ensemble")->capture_default_str();
    c->add_option("--threads", threads, "worker threads (0: hardware)")->capture_default_str();
    engine.add(c, false);
    toy.add(c);
    backend.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    const BenchSuite suite = generate_suite(parse_category(category), n, suite_seed);
    const auto names = parse_reward_list(rewards);
    const std::optional<ToyPolicy> policy = backend.policy();
    const ToyConfig tc = toy.resolve(0);
    SeededFactory factory;
    if (backend.backend == "remote") {
      const RemoteOptions opts{backend.url(), std::chrono::milliseconds(backend.timeout_ms)};
      factory = [opts](std::uint64_t) { return std::make_unique<RemoteBackend>(opts); };
    } else {
      require(backend.backend == "toy", ErrorKind::kInvalidInput, "unknown backend '" + backend.backend + "'");
      factory = policy ? policy_seeded_factory(tc, *policy) : toy_seeded_factory(tc);
    }
    std::vector<NamedConfig> configs;
    json resolved_modes = json::array();
    for (const std::string& m : split_list(modes)) {
      EngineFlags f = engine;
      const auto at = m.find('@');
      f.mode = m.substr(0, at);
      if (at != std::string::npos) {
        try {
          f.rounds = std::stoi(m.substr(at + 1));
        } catch (const std::logic_error&) {
          throw Error(ErrorKind::kInvalidInput, "bad rounds in '" + m + "'");
        }
      }
      configs.push_back({m, f.resolve(), factory});
      resolved_modes.push_back({{"name", m}, {"engine", config_to_json(configs.back().config)}});
    }
    const int th = threads > 0 ? threads : default_threads();
    const ModeReport report = compare_modes(suite, configs, seed_range(seeds), names, th);
    json resolved{{"category", category}, {"n", n},         {"suite_seed", suite_seed}, {"seeds", seeds},
                  {"modes", resolved_modes}, {"toy", toy_config_to_json(tc)}, {"rewards", names}};
    resolved.update(backend.to_json());
    const json header = artifact_header("twig-bench/1", resolved);
    {
      auto out = open_out(csv_path);
      out << "# " << header.dump() << "\n";
      report.write_csv(out);
    }
    const std::string md = report.markdown();
    {
      auto out = open_out(report_path);
      out << "<!-- " << header.dump() << " -->\n\n";
      out << "Category: " << report.category << ", " << suite.prompts.size() << " prompts, " << seeds
          << " seeds.\n\n";
      out << md;
    }
    std::cout << md;
  }
};

// ---- train-grpo ----

struct TrainCmd {
  TrainConfig train;
  std::string train_mode = "joint";
  std::string init = "untrained";
  double p_correct = 0.5;
  std::string category = "complex";
  int train_n = 200;
  int eval_n = 50;
  int eval_seeds = 5;
  std::uint64_t suite_seed = 1;
  std::string curve_path = "curve.csv";
  std::string policy_out = "policy.json";
  std::string rewards = "aesthetic,grounding,vqa,alignment";
  int threads = 1;
  EngineFlags engine;
  ToyFlags toy;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train-grpo", "train the toy policy with group-relative policy optimization");
    c->add_option("--iterations", train.iterations, "training iterations")->capture_default_str();
    c->add_option("--group-size", train.group_size, "rollouts per prompt (G)")->capture_default_str();
    c->add_option("--lr", train.learning_rate, "learning rate")->capture_default_str();
    c->add_option("--clip", train.clip, "ratio clip")->capture_default_str();
    c->add_option("--kl", train.kl_coef, "KL coefficient against the initial policy")->capture_default_str();
    c->add_option("--train-mode", train_mode, "joint | u_only | g_only")->capture_default_str();
    c->add_option("--train-seed", train.seed, "training seed")->capture_default_str();
    c->add_option("--prompts-per-iteration", train.prompts_per_iteration, "groups per update")
        ->capture_default_str();
    c->add_option("--epochs", train.epochs, "surrogate steps per batch")->capture_default_str();
    c->add_option("--init", init, "untrained | rule | <policy.json>")->capture_default_str();
    c->add_option("--p-correct", p_correct, "untrained policy's chance of the right token")->capture_default_str();
    c->add_option("--category", category, "suite category")->capture_default_str();
    c->add_option("--train-n", train_n, "training prompts")->capture_default_str();
    c->add_option("--eval-n", eval_n, "evaluation prompts")->capture_default_str();
    c->add_option("--eval-seeds", eval_seeds, "evaluation seeds")->capture_default_str();
    c->add_option("--suite-seed", suite_seed, "seed of the training suite; evaluation uses seed + 1")
        ->capture_default_str();
    c->add_option("--curve", curve_path, "learning curve CSV")->capture_default_str();
    c->add_option("--policy-out", policy_out, "final policy snapshot")->capture_default_str();
    c->add_option("--rewards", rewards, "reward providers for the ensemble")->capture_default_str();
    c->add_option("--threads", threads, "worker threads")->capture_default_str();
    engine.add(c);
    toy.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    train.mode = parse_train_mode(train_mode);
    train.validate();
    TrainSetup setup;
    setup.engine = engine.resolve();
    setup.toy = toy.resolve(0);
    setup.train_suite = generate_suite(parse_category(category), train_n, suite_seed);
    setup.eval_suite = generate_suite(parse_category(category), eval_n, suite_seed + 1);
    setup.eval_seeds = seed_range(eval_seeds);
    setup.rewards = parse_reward_list(rewards);
    setup.threads = threads;
    ToyPolicy start = init == "untrained" ? ToyPolicy::untrained(p_correct, setup.engine.K)
                      : init == "rule"    ? ToyPolicy::rule(setup.engine.K)
                                          : *BackendFlags{"toy", "", 0, init}.policy();
    const json resolved{{"train", train_config_to_json(train)},
                        {"engine", config_to_json(setup.engine)},
                        {"toy", toy_config_to_json(setup.toy)},
                        {"init", init},
                        {"p_correct", p_correct},
                        {"category", category},
                        {"train_n", train_n},
                        {"eval_n", eval_n},
                        {"eval_seeds", eval_seeds},
                        {"suite_seed", suite_seed},
                        {"rewards", setup.rewards}};
    const int every = std::max(1, train.iterations / 10);
    const TrainResult res = twig::train(start, setup, train, [&](const CurvePoint& p) {
      if (p.iteration % every == 0 || p.iteration == train.iterations) {
        std::cout << "iteration " << p.iteration << " mean_reward " << p.mean_reward << "\n";
      }
    });
    {
      auto out = open_out(curve_path);
      out << "# " << artifact_header("twig-curve/1", resolved).dump() << "\n";
      write_curve_csv(out, res.curve);
    }
    {
      auto out = open_out(policy_out);
      write_policy(out, res.policy, resolved);
    }
    std::cout << "initial " << res.curve.front().mean_reward << " final " << res.curve.back().mean_reward << "\n";
  }
};

// ---- build-sft ----

struct SftCmd {
  std::string category = "complex";
  int n = 200;
  std::uint64_t suite_seed = 0;
  double min_reward = 0.8;
  std::string mixture = "think_gen_equal";
  std::size_t size = 1000;
  std::uint64_t mix_seed = 0;
  std::string out_path = "sft.jsonl";
  std::string fit_out;
  int fit_epochs = 500;
  std::string rewards = "aesthetic,grounding,vqa,alignment";
  EngineFlags engine;
  ToyFlags toy;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("build-sft", "harvest supervised records from toy traces");
    c->add_option("--category", category, "suite category")->capture_default_str();
    c->add_option("--n", n, "traces to harvest")->capture_default_str();
    c->add_option("--suite-seed", suite_seed, "suite generation seed")->capture_default_str();
    c->add_option("--min-reward", min_reward, "drop traces scoring below this")->capture_default_str();
    c->add_option("--mix", mixture, "preset name or T:G:R weights")->capture_default_str();
    c->add_option("--size", size, "records to draw")->capture_default_str();
    c->add_option("--mix-seed", mix_seed, "sampling seed")->capture_default_str();
    c->add_option("--out", out_path, "dataset output (JSON Lines)")->capture_default_str();
    c->add_option("--fit-out", fit_out, "also fit the toy policy by maximum likelihood and write it here");
    c->add_option("--fit-epochs", fit_epochs, "gradient steps for the fit")->capture_default_str();
    c->add_option("--rewards", rewards, "reward providers for filtering")->capture_default_str();
    engine.add(c, false);
    toy.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    EngineConfig cfg = engine.resolve();
    require(cfg.K == 3, ErrorKind::kInvalidInput, "records need K = 3");
    const auto names = parse_reward_list(rewards);
    const BenchSuite suite = generate_suite(parse_category(category), n, suite_seed);
    const ToyConfig base = toy.resolve(0);
    std::vector<Trace> traces;
    for (std::size_t i = 0; i < suite.prompts.size(); ++i) {
      EngineConfig c = cfg;
      c.seed = trajectory_seed(cfg.seed, static_cast<int>(i));
      ToyConfig tc = base;
      tc.seed = c.seed;
      ToyBackend b(tc);
      Trace t = twig::run(suite.prompts[i], b, c);
      score_trace(t, names);
      traces.push_back(std::move(t));
    }
    const std::vector<Trace> kept = filter_traces(traces, min_reward);
    std::vector<SftRecord> records;
    for (const Trace& t : kept) {
      auto r = build_records(t);
      records.insert(records.end(), r.begin(), r.end());
    }
    const Mixture m = parse_mixture(mixture);
    const std::vector<SftRecord> data = mix(Pools::from(records), m, size, mix_seed);
    const json resolved{{"engine", config_to_json(cfg)},
                        {"toy", toy_config_to_json(base)},
                        {"category", category},
                        {"n", n},
                        {"suite_seed", suite_seed},
                        {"min_reward", min_reward},
                        {"mix", {m.think, m.gen, m.reflect}},
                        {"size", size},
                        {"mix_seed", mix_seed},
                        {"rewards", names}};
    {
      auto out = open_out(out_path);
      write_dataset(out, data, {{"config", resolved}});
    }
    std::size_t counts[3] = {0, 0, 0};
    for (const SftRecord& r : data) ++counts[static_cast<int>(r.kind)];
    std::cout << "traces " << traces.size() << " kept " << kept.size() << " records " << data.size() << " (think "
              << counts[0] << ", gen " << counts[1] << ", reflect " << counts[2] << ")\n";
    if (!fit_out.empty()) {
      const MleFit fit = fit_toy_mle(data, ToyPolicy::untrained(0.5, cfg.K), fit_epochs);
      auto out = open_out(fit_out);
      write_policy(out, fit.policy, {{"fit_from", out_path}, {"epochs", fit_epochs}});
      std::cout << "fit loss " << fit.loss.front() << " -> " << fit.loss.back() << "\n";
    }
  }
};

// ---- bridge-check ----

struct BridgeCheckCmd {
  std::string url;
  bool local_toy = false;
  int timeout_ms = 10000;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("bridge-check", "run wire-protocol conformance fixtures against a bridge");
    c->add_option("--url", url, "bridge base url (default: $TWIG_BRIDGE_URL)");
    c->add_flag("--local-toy", local_toy, "check an in-process toy bridge instead");
    c->add_option("--timeout-ms", timeout_ms, "per-request timeout")->capture_default_str();
    c->callback([this] { run(); });
  }

  void run() {
    std::optional<LocalToyBridge> local;
    std::string target = url;
    if (local_toy) {
      local.emplace();
      target = local->url();
    } else if (target.empty()) {
      target = BackendFlags{}.url();
    }
    int failed = 0;
    for (const FixtureResult& r : bridge_check(target, std::chrono::milliseconds(timeout_ms))) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
      if (!r.passed) std::cout << ": " << r.detail;
      std::cout << "\n";
      failed += !r.passed;
    }
    require(failed == 0, ErrorKind::kContract, std::to_string(failed) + " conformance fixture(s) failed");
  }
};

void print_error(std::string_view kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twig: interleaved think-while-generate toolkit"};
  app.set_version_flag("--version", std::string(twig::kToolVersion));
  app.require_subcommand(1);
  GenerateCmd generate;
  ReplayCmd replay_cmd;
  BenchCmd bench;
  TrainCmd train_cmd;
  SftCmd sft;
  BridgeCheckCmd bridge;
  generate.add(app);
  replay_cmd.add(app);
  bench.add(app);
  train_cmd.add(app);
  sft.add(app);
  bridge.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << twig::kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const twig::Error& e) {
    print_error(twig::to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
