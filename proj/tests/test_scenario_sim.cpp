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

#include <set>

#include "doctest.h"
#include "softaffinity/scenario_sim.hpp"
#include "support.hpp"

using namespace softaffinity;
using namespace std::chrono_literals;

namespace {

std::shared_ptr<IntentAnalyzer> scripted()
{
    return std::make_shared<IntentAnalyzer>(
        std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(testing::data_file("scenario_hints.json"))));
}

std::shared_ptr<IntentAnalyzer> regex()
{
    return std::make_shared<IntentAnalyzer>(std::make_unique<RegexBackend>());
}

int on(const PlacementReport &r, const std::string &node)
{
    auto it = r.node_counts.find(node);
    return it == r.node_counts.end() ? 0 : it->second;
}

std::set<std::string> distinct_nodes(const PlacementReport &r)
{
    std::set<std::string> nodes;
    for (const auto &[_, node] : r.placements) {
        nodes.insert(node);
    }
    return nodes;
}

} // namespace

TEST_CASE("scenario specs")
{
    const auto specs = all_scenarios();
    REQUIRE(specs.size() == 6);
    CHECK(scenario_spec('a').id == 'A');
    CHECK(scenario_spec('D').replicas == 20);
    CHECK(scenario_spec('D').api_visibility_delay == 5s);
    CHECK(scenario_spec('F').replicas == 1);
    CHECK(scenario_spec('C').pre_existing.size() == 3);
    CHECK_THROWS_AS(scenario_spec('G'), std::invalid_argument);
}

TEST_CASE("testbed topology and overlays")
{
    const auto bed = build_testbed(scenario_spec('A'));
    REQUIRE(bed.nodes.size() == 9);
    std::map<std::string, int> zones;
    for (const auto &n : bed.nodes) {
        if (n.name == kControlPlaneNode) {
            CHECK(n.unschedulable_taint);
            continue;
        }
        CHECK_FALSE(n.unschedulable_taint);
        CHECK(n.region == "us-east-1");
        CHECK(n.cpu_count == 4.0);
        CHECK(n.memory_bytes == 8ull << 30);
        ++zones[n.zone.value_or("-")];
        CHECK(n.gpu_count == 0.0);
    }
    CHECK(zones == std::map<std::string, int>{{"us-east-1a", 2}, {"us-east-1b", 6}});

    for (const auto &n : build_testbed(scenario_spec('B')).nodes) {
        CHECK((n.gpu_count > 0.0) == (n.name == "minikube-m02"));
    }
    for (const auto &n : build_testbed(scenario_spec('E')).nodes) {
        if (n.name != kControlPlaneNode) {
            CHECK(n.network_gbps == (n.name == "minikube-m09" ? 100.0 : 10.0));
        }
    }
    const auto c = build_testbed(scenario_spec('C'));
    REQUIRE(c.pods.size() == 3);
    for (const auto &p : c.pods) {
        CHECK(p.node_name.has_value());
    }
    CHECK(testbed_nodes_json('A').size() == 9);
}

TEST_CASE("every scenario passes with the scripted parses")
{
    const auto fixture = ScriptedBackend::from_file(testing::data_file("scenario_hints.json"));
    const auto summary = run_all(all_scenarios(), scripted(), &fixture.records());
    REQUIRE(summary.reports.size() == 6);
    CHECK(summary.all_passed());
    for (const auto &r : summary.reports) {
        CHECK_MESSAGE(r.passed(), format_report(r));
        CHECK_FALSE(r.parse_divergence.has_value());
    }
    const auto &a = summary.reports[0];
    CHECK(a.zone_counts.at("us-east-1a") == 3);
    CHECK(a.zone_counts.at("us-east-1b") == 3);
    CHECK(on(summary.reports[1], "minikube-m02") == 6);
    CHECK(on(summary.reports[2], "minikube-m02") == 0);
    CHECK(on(summary.reports[2], "minikube-m03") == 6);
    CHECK(distinct_nodes(summary.reports[3]).size() == 1);
    CHECK(summary.reports[3].placements.size() == 20);
    CHECK(on(summary.reports[4], "minikube-m09") == 6);
    CHECK(summary.reports[5].placements.size() == 1);
}

TEST_CASE("every scenario passes with the regex engine")
{
    const auto fixture = ScriptedBackend::from_file(testing::data_file("scenario_hints.json"));
    const auto summary = run_all(all_scenarios(), regex(), &fixture.records());
    for (const auto &r : summary.reports) {
        CHECK_MESSAGE(r.passed(), format_report(r));
    }
}

TEST_CASE("placements are deterministic")
{
    const auto first = run_scenario(scenario_spec('F'), scripted());
    const auto second = run_scenario(scenario_spec('F'), scripted());
    CHECK(first.placements == second.placements);
    CHECK(to_json(first) == to_json(second));
    CHECK(format_report(first).find("favoured") != std::string::npos);
}

TEST_CASE("spread bursts lean on the recent placements cache")
{
    // Bound pods stay invisible for the whole burst, so without local
    // records every replica sees the same empty histogram.
    auto spec = scenario_spec('A');
    spec.api_visibility_delay = 5s;
    CHECK(run_scenario(spec, scripted()).passed());
    spec.recent_placements_enabled = false;
    const auto blind = run_scenario(spec, scripted());
    CHECK_FALSE(blind.passed());
    CHECK(distinct_nodes(blind).size() == 1);
}

TEST_CASE("colocation burst without the cache still lands on the tie-break node")
{
    // Every round ties at zero and the lexicographic rule picks the same node,
    // so scenario D alone cannot show the cache is load-bearing.
    auto spec = scenario_spec('D');
    spec.recent_placements_enabled = false;
    const auto report = run_scenario(spec, scripted());
    CHECK(distinct_nodes(report) == std::set<std::string>{"minikube-m02"});
}

TEST_CASE("a divergent analyzer parse is reported")
{
    const auto golden = testing::hint_of({testing::intent("prefer_ssd")});
    const auto report = run_scenario(scenario_spec('B'), regex(), &golden);
    CHECK(report.parse_divergence.has_value());
}
