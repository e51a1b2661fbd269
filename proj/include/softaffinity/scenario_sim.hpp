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

#ifndef SOFTAFFINITY_SCENARIO_SIM_HPP
#define SOFTAFFINITY_SCENARIO_SIM_HPP

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "softaffinity/cluster_state.hpp"
#include "softaffinity/hint_parsers.hpp"

namespace softaffinity {

inline constexpr std::string_view kControlPlaneNode = "minikube";

struct PrePlacement {
    std::string deployment;
    std::string node;
};

struct ScenarioSpec {
    char id = 'A';
    std::string title;
    std::string hint;
    int replicas = 1;
    std::string deployment = "web";
    std::vector<PrePlacement> pre_existing;
    std::chrono::milliseconds inter_arrival{50};
    // How long a bound pod stays invisible to the state cache.
    std::chrono::milliseconds api_visibility_delay{0};
    bool recent_placements_enabled = true;
    std::string expected;
    std::string baseline_note;
};

/// Specs for A-F with their default knobs. Throws std::invalid_argument.
ScenarioSpec scenario_spec(char id);
std::vector<ScenarioSpec> all_scenarios();

/// The eight-worker, one-control-plane cluster as raw Node objects, with
/// the scenario's label overlays applied.
nlohmann::json testbed_nodes_json(char scenario_id);

struct Testbed {
    std::vector<CachedNode> nodes;
    std::vector<CachedPod> pods;
};

Testbed build_testbed(const ScenarioSpec &spec);

struct Assertion {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct PlacementReport {
    char scenario = 'A';
    std::string title;
    std::string hint;
    nlohmann::json parsed;
    std::optional<std::string> parse_divergence;
    std::vector<std::pair<std::string, std::string>> placements;
    std::map<std::string, int> zone_counts;
    std::map<std::string, int> rack_counts;
    std::map<std::string, int> node_counts;
    std::vector<Assertion> assertions;
    std::string baseline_note;
    std::vector<std::string> notes;

    bool passed() const;
};

/// Schedules spec.replicas pods one by one on a virtual clock through the
/// extender's filter and prioritize path. Bound pods reach the state cache
/// only after api_visibility_delay. `golden`, when given, is compared with
/// the analyzer's parse and any difference is reported.
PlacementReport run_scenario(const ScenarioSpec &spec, const std::shared_ptr<IntentAnalyzer> &analyzer,
                             const ParsedHint *golden = nullptr);

struct ScenarioSummary {
    std::vector<PlacementReport> reports;
    bool all_passed() const;
};

ScenarioSummary run_all(const std::vector<ScenarioSpec> &specs, const std::shared_ptr<IntentAnalyzer> &analyzer,
                        const std::map<std::string, ParsedHint> *golden_by_hint = nullptr);

nlohmann::json to_json(const PlacementReport &report);
std::string format_report(const PlacementReport &report);

} // namespace softaffinity

#endif // SOFTAFFINITY_SCENARIO_SIM_HPP
