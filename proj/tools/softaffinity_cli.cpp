/*
 * Copyright (c) The softaffinity Authors. 2026. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "softaffinity/evaluation.hpp"
#include "softaffinity/extender_api.hpp"
#include "softaffinity/hint_parsers.hpp"
#include "softaffinity/scenario_sim.hpp"

#ifndef SOFTAFFINITY_DATA_DIR
#define SOFTAFFINITY_DATA_DIR "data"
#endif

namespace sa = softaffinity;
namespace fs = std::filesystem;

namespace {

fs::path data_dir()
{
    if (const char *env = std::getenv("SOFTAFFINITY_DATA_DIR")) {
        return env;
    }
    return SOFTAFFINITY_DATA_DIR;
}

struct BackendOptions {
    std::string backend = "scripted";
    std::string scripted_file;
    std::string endpoint = "http://127.0.0.1:8080/invoke";
    std::string model;
    std::string dialect = "stub";
    int timeout_ms = 10000;
    std::size_t max_hint_length = sa::kDefaultMaxHintLength;
};

void add_backend_options(CLI::App *cmd, BackendOptions &o)
{
    cmd->add_option("--backend", o.backend, "Hint analyzer backend")
        ->check(CLI::IsMember({"regex", "llm", "scripted"}))
        ->envname("SOFTAFFINITY_BACKEND")
        ->capture_default_str();
    cmd->add_option("--scripted-file", o.scripted_file, "Fixture of golden parses for the scripted backend")
        ->envname("SOFTAFFINITY_SCRIPTED_FILE");
    cmd->add_option("--llm-endpoint", o.endpoint, "Model endpoint (plain http)")
        ->envname("SOFTAFFINITY_LLM_ENDPOINT")
        ->capture_default_str();
    cmd->add_option("--llm-model", o.model, "Model identifier")->envname("SOFTAFFINITY_LLM_MODEL");
    cmd->add_option("--llm-dialect", o.dialect, "Request/response shape")
        ->check(CLI::IsMember({"stub", "bedrock"}))
        ->envname("SOFTAFFINITY_LLM_DIALECT")
        ->capture_default_str();
    cmd->add_option("--llm-timeout-ms", o.timeout_ms, "Model request timeout")
        ->envname("SOFTAFFINITY_LLM_TIMEOUT_MS")
        ->capture_default_str();
    cmd->add_option("--max-hint-length", o.max_hint_length, "Hint truncation limit in code points")
        ->capture_default_str();
}

fs::path scripted_path(const BackendOptions &o)
{
    return o.scripted_file.empty() ? data_dir() / "scenario_hints.json" : fs::path(o.scripted_file);
}

std::shared_ptr<sa::IntentAnalyzer> make_analyzer(const BackendOptions &o)
{
    std::unique_ptr<sa::HintBackend> backend;
    if (o.backend == "regex") {
        backend = std::make_unique<sa::RegexBackend>();
    } else if (o.backend == "scripted") {
        backend = std::make_unique<sa::ScriptedBackend>(sa::ScriptedBackend::from_file(scripted_path(o)));
    } else {
        sa::AnalyzerConfig config;
        config.endpoint = o.endpoint;
        config.model_id = o.model;
        config.dialect = sa::parse_dialect(o.dialect);
        config.request_timeout = std::chrono::milliseconds(o.timeout_ms);
        config.max_hint_length = o.max_hint_length;
        backend = std::make_unique<sa::LlmBackend>(config);
    }
    return std::make_shared<sa::IntentAnalyzer>(std::move(backend), o.max_hint_length);
}

std::pair<std::string, int> split_listen(const std::string &listen)
{
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("--listen", "expected host:port");
    }
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Soft-affinity scheduler extender driven by natural-language allocation hints"};
    app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
    app.require_subcommand(1);

    std::string format = "text";
    app.add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    // serve
    BackendOptions serve_backend;
    std::string listen = "0.0.0.0:8888";
    std::string snapshot;
    std::string label_key{sa::kDefaultDeploymentLabel};
    int ttl_ms = 10000;
    auto *serve = app.add_subcommand("serve", "Run the /filter and /prioritize extender service");
    add_backend_options(serve, serve_backend);
    serve->add_option("--listen", listen, "host:port")->envname("SOFTAFFINITY_LISTEN")->capture_default_str();
    serve->add_option("--snapshot", snapshot, "Cluster snapshot JSON used to prime the state cache")
        ->envname("SOFTAFFINITY_SNAPSHOT");
    serve->add_option("--label-key", label_key, "Pod label naming the deployment")
        ->envname("SOFTAFFINITY_LABEL_KEY")
        ->capture_default_str();
    serve->add_option("--ttl-ms", ttl_ms, "Recent-placement lifetime")
        ->envname("SOFTAFFINITY_TTL_MS")
        ->capture_default_str();

    // eval
    BackendOptions eval_backend;
    eval_backend.backend = "regex";
    std::string dataset;
    bool lenient = false;
    auto *eval = app.add_subcommand("eval", "Score an analyzer backend against a labelled hint dataset");
    add_backend_options(eval, eval_backend);
    eval->add_option("--dataset", dataset, "Dataset JSON (defaults to the bundled fixture)");
    eval->add_flag("--lenient", lenient, "Skip malformed records instead of failing");

    // scenario
    BackendOptions scenario_backend;
    std::string scenario_id = "all";
    bool no_recent = false;
    int inter_arrival_ms = -1;
    int api_delay_ms = -1;
    auto *scenario = app.add_subcommand("scenario", "Replay the A-F placement scenarios on the simulated cluster");
    add_backend_options(scenario, scenario_backend);
    scenario->add_option("--id", scenario_id, "A..F or all")->capture_default_str();
    scenario->add_flag("--no-recent-placements", no_recent, "Disable the recent-placements cache (testing)");
    scenario->add_option("--inter-arrival-ms", inter_arrival_ms, "Gap between pod arrivals");
    scenario->add_option("--api-delay-ms", api_delay_ms, "Delay before bound pods appear in the state cache");

    // parse
    BackendOptions parse_backend;
    parse_backend.backend = "regex";
    std::string hint;
    bool show_prompt = false;
    auto *parse = app.add_subcommand("parse", "Parse one hint and print the intents");
    add_backend_options(parse, parse_backend);
    parse->add_option("--hint", hint, "Hint text")->required();
    parse->add_flag("--show-prompt", show_prompt, "Print the analyzer prompt instead of parsing");

    // testbed
    std::string testbed_id = "A";
    auto *testbed = app.add_subcommand("testbed", "Print a scenario's simulated cluster as a snapshot for serve");
    testbed->add_option("--id", testbed_id, "A..F")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    const bool json = format == "json";

    try {
        if (*serve) {
            auto analyzer = make_analyzer(serve_backend);
            sa::ExtenderConfig config;
            config.deployment_label = label_key;
            config.placement_ttl = std::chrono::milliseconds(ttl_ms);
            sa::ExtenderService service(analyzer, config);
            if (!snapshot.empty()) {
                auto snap = sa::load_snapshot(snapshot, label_key);
                service.state().full_resync(std::move(snap.nodes), std::move(snap.pods));
            }
            const auto [host, port] = split_listen(listen);
            std::cerr << "listening on " << host << ':' << port << " (backend " << serve_backend.backend << ", "
                      << service.state().node_count() << " nodes)\n";
            if (!sa::serve_http(service, host, port)) {
                std::cerr << "cannot listen on " << listen << '\n';
                return 1;
            }
            return 0;
        }

        if (*eval) {
            std::vector<std::string> skipped;
            const fs::path path = dataset.empty() ? data_dir() / "eval_fixture.json" : fs::path(dataset);
            const auto cases = sa::load_dataset(path, !lenient, &skipped);
            for (const auto &s : skipped) {
                std::cerr << "skipped " << s << '\n';
            }
            auto analyzer = make_analyzer(eval_backend);
            const auto run = sa::evaluate(cases, *analyzer);
            if (json) {
                auto doc = sa::to_json(run.report);
                doc["degraded_cases"] = run.degraded;
                std::cout << doc.dump(2) << '\n';
            } else {
                std::cout << sa::format_report(run.report);
                if (run.degraded > 0) {
                    std::cout << "  (" << run.degraded << " case(s) degraded: backend unavailable or unparseable)\n";
                }
            }
            return 0;
        }

        if (*scenario) {
            std::vector<sa::ScenarioSpec> specs;
            if (scenario_id == "all" || scenario_id == "ALL") {
                specs = sa::all_scenarios();
            } else {
                for (char c : scenario_id) {
                    if (c != ',') {
                        specs.push_back(sa::scenario_spec(c));
                    }
                }
            }
            for (auto &spec : specs) {
                spec.recent_placements_enabled = !no_recent;
                if (inter_arrival_ms >= 0) {
                    spec.inter_arrival = std::chrono::milliseconds(inter_arrival_ms);
                }
                if (api_delay_ms >= 0) {
                    spec.api_visibility_delay = std::chrono::milliseconds(api_delay_ms);
                }
            }
            auto analyzer = make_analyzer(scenario_backend);
            std::optional<sa::ScriptedBackend> golden;
            if (fs::exists(scripted_path(scenario_backend))) {
                golden = sa::ScriptedBackend::from_file(scripted_path(scenario_backend));
            }
            const auto summary = sa::run_all(specs, analyzer, golden ? &golden->records() : nullptr);
            if (json) {
                nlohmann::json doc = nlohmann::json::array();
                for (const auto &r : summary.reports) {
                    doc.push_back(sa::to_json(r));
                }
                std::cout << nlohmann::json{{"reports", doc}, {"passed", summary.all_passed()}}.dump(2) << '\n';
            } else {
                int passed = 0;
                for (const auto &r : summary.reports) {
                    std::cout << sa::format_report(r) << '\n';
                    passed += r.passed() ? 1 : 0;
                }
                std::cout << passed << "/" << summary.reports.size() << " scenarios passed\n";
            }
            return summary.all_passed() ? 0 : 1;
        }

        if (*testbed) {
            if (testbed_id.size() != 1) {
                throw std::invalid_argument("--id takes one scenario letter");
            }
            const auto spec = sa::scenario_spec(testbed_id.front());
            nlohmann::json pods = nlohmann::json::array();
            for (const auto &pod : sa::build_testbed(spec).pods) {
                pods.push_back({{"name", pod.name},
                                {"namespace", pod.namespace_},
                                {"labels", pod.labels},
                                {"nodeName", pod.node_name.value_or("")}});
            }
            std::cout << nlohmann::json{{"nodes", sa::testbed_nodes_json(spec.id)}, {"pods", pods}}.dump(2) << '\n';
            return 0;
        }

        if (*parse) {
            if (show_prompt) {
                std::cout << sa::build_prompt(sa::IntentRegistry::builtin(),
                                              sa::sanitize_hint(hint, parse_backend.max_hint_length));
                return 0;
            }
            auto analyzer = make_analyzer(parse_backend);
            const auto outcome = analyzer->analyze(hint);
            if (json) {
                std::cout << nlohmann::json{{"intents", sa::to_json(outcome.parsed)},
                                            {"source", sa::to_string(outcome.source)},
                                            {"degraded", outcome.degraded},
                                            {"latency_s", std::chrono::duration<double>(outcome.latency).count()}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << sa::to_json(outcome.parsed).dump(2) << '\n';
                if (outcome.degraded) {
                    std::cerr << "analyzer degraded: " << outcome.detail << '\n';
                }
            }
            return outcome.degraded ? 2 : 0;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
