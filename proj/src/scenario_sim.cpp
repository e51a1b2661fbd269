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

#include "softaffinity/scenario_sim.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "softaffinity/extender_api.hpp"

namespace softaffinity {

namespace {

struct NodeRow {
    const char *name;
    const char *zone;
    const char *rack;
};

constexpr NodeRow kWorkers[] = {
    {"minikube-m02", "us-east-1a", "rack-1"}, {"minikube-m03", "us-east-1a", "rack-1"},
    {"minikube-m04", "us-east-1b", "rack-2"}, {"minikube-m05", "us-east-1b", "rack-3"},
    {"minikube-m06", "us-east-1b", "rack-3"}, {"minikube-m07", "us-east-1b", "rack-4"},
    {"minikube-m08", "us-east-1b", "rack-4"}, {"minikube-m09", "us-east-1b", "rack-5"},
};
constexpr const char *kRegion = "us-east-1";

nlohmann::json raw_node(std::string_view name, nlohmann::json labels, bool control_plane)
{
    labels["kubernetes.io/hostname"] = name;
    nlohmann::json node{
        {"metadata", {{"name", name}, {"labels", std::move(labels)}}},
        {"spec", nlohmann::json::object()},
        {"status",
         {{"capacity", {{"cpu", "4"}, {"memory", "8Gi"}, {"ephemeral-storage", "50Gi"}, {"pods", "110"}}}}},
    };
    if (control_plane) {
        node["spec"]["taints"] = nlohmann::json::array(
            {{{"key", "node-role.kubernetes.io/control-plane"}, {"effect", "NoSchedule"}}});
    }
    return node;
}

nlohmann::json pod_json(const ScenarioSpec &spec, const std::string &name)
{
    nlohmann::json metadata{{"name", name}, {"namespace", "default"}, {"labels", {{"app", spec.deployment}}}};
    if (!spec.hint.empty()) {
        metadata["annotations"] = {{std::string(kHintAnnotation), spec.hint}};
    }
    return {{"metadata", std::move(metadata)}, {"spec", nlohmann::json::object()}};
}

std::string replica_name(const ScenarioSpec &spec, int index)
{
    std::string id(1, static_cast<char>(std::tolower(static_cast<unsigned char>(spec.id))));
    return "test-scenario-" + id + "-hint-" + std::to_string(index);
}

struct SimResult {
    std::vector<std::pair<std::string, std::string>> placements;
    ParsedHint parsed;
    std::map<std::string, double> winner_contributions;
    std::vector<std::string> notes;
};

SimResult simulate(const ScenarioSpec &spec, const std::shared_ptr<IntentAnalyzer> &analyzer)
{
    const Testbed testbed = build_testbed(spec);
    const Timestamp start = Timestamp{} + std::chrono::hours(1);
    Timestamp now = start;

    ExtenderConfig config;
    config.recent_placements_enabled = spec.recent_placements_enabled;
    ExtenderService service(analyzer, config, [&now] { return now; });
    service.state().full_resync(testbed.nodes, testbed.pods);

    std::vector<std::string> all_nodes;
    for (const auto &n : testbed.nodes) {
        all_nodes.push_back(n.name);
    }

    std::vector<std::pair<Timestamp, CachedPod>> in_flight;
    SimResult result;
    for (int i = 0; i < spec.replicas; ++i) {
        now = start + spec.inter_arrival * i;
        std::erase_if(in_flight, [&](const auto &event) {
            if (event.first > now) {
                return false;
            }
            service.state().apply_event(EventKind::added, event.second);
            return true;
        });

        const std::string name = replica_name(spec, i);
        const nlohmann::json pod = pod_json(spec, name);

        const auto filtered = service.dispatch("POST", "/filter", nlohmann::json{{"pod", pod}, {"nodenames", all_nodes}}.dump());
        const auto accepted = nlohmann::json::parse(filtered.body).at("nodenames").get<std::vector<std::string>>();
        if (filtered.status != 200 || accepted.empty()) {
            result.notes.push_back(name + " left pending: no node passed /filter");
            continue;
        }

        const auto args = parse_extender_args({{"pod", pod}, {"nodenames", accepted}});
        const PrioritizeOutcome outcome = service.handle_prioritize(args);
        const auto hundreds = std::count_if(outcome.priorities.begin(), outcome.priorities.end(),
                                            [](const HostPriority &p) { return p.score == 100; });
        if (outcome.priorities.size() != accepted.size() || hundreds != 1) {
            result.notes.push_back(name + ": malformed prioritize response");
        }
        if (i == 0) {
            result.parsed = outcome.analysis.parsed;
            if (outcome.analysis.degraded) {
                result.notes.push_back("analyzer degraded: " + outcome.analysis.detail);
            }
        }
        for (const auto &b : outcome.breakdowns) {
            if (b.node == outcome.winner) {
                result.winner_contributions = b.contributions;
            }
        }
        result.placements.emplace_back(name, outcome.winner);

        CachedPod bound = pod_from_raw(pod, config.deployment_label);
        bound.node_name = outcome.winner;
        in_flight.emplace_back(now + spec.api_visibility_delay, std::move(bound));
    }
    return result;
}

std::optional<std::string> describe_divergence(const ParsedHint &got, const ParsedHint &want)
{
    std::vector<std::string> issues;
    for (const auto &[name, w] : want.intents) {
        auto it = got.intents.find(name);
        if (it == got.intents.end()) {
            issues.push_back("missing " + name);
            continue;
        }
        if (it->second.strength != w.strength) {
            issues.push_back(name + " strength " + std::to_string(it->second.strength) + " vs " +
                             std::to_string(w.strength));
        }
        if (it->second.metadata != w.metadata) {
            issues.push_back(name + " metadata differs");
        }
    }
    for (const auto &[name, _] : got.intents) {
        if (!want.contains(name)) {
            issues.push_back("unexpected " + name);
        }
    }
    if (issues.empty()) {
        return std::nullopt;
    }
    std::string joined;
    for (const auto &issue : issues) {
        joined += (joined.empty() ? "" : "; ") + issue;
    }
    return joined;
}

std::string counts_text(const std::map<std::string, int> &counts)
{
    std::string out;
    for (const auto &[k, v] : counts) {
        out += (out.empty() ? "" : ", ") + k + "=" + std::to_string(v);
    }
    return out.empty() ? "none" : out;
}

void add(PlacementReport &report, std::string name, bool passed, std::string detail)
{
    report.assertions.push_back({std::move(name), passed, std::move(detail)});
}

} // namespace

ScenarioSpec scenario_spec(char id)
{
    ScenarioSpec s;
    s.id = static_cast<char>(std::toupper(static_cast<unsigned char>(id)));
    switch (s.id) {
        case 'A':
            s.title = "Topology Spreading";
            s.hint = "spread these pods evenly across all available zones for high availability";
            s.replicas = 6;
            s.expected = "zone counts us-east-1a=3, us-east-1b=3";
            s.baseline_note = "Baseline (topologySpreadConstraints, maxSkew 1, DoNotSchedule): 3:3 split across the two zones.";
            break;
        case 'B':
            s.title = "Resource Affinity";
            s.hint = "this is a critical ML training job, it must run on nodes with GPUs";
            s.replicas = 6;
            s.expected = "6/6 replicas on minikube-m02 (the only GPU node)";
            s.baseline_note = "Baseline (preferred nodeAffinity hardware=gpu): 6/6 on minikube-m02.";
            break;
        case 'C':
            s.title = "Complex Co-location and Anti-Affinity";
            s.hint = "prefer to be in the same region as the 'database' and 'cache' deployments, but avoid being on "
                     "the same node as the 'logging-agent' pods.";
            s.replicas = 6;
            s.pre_existing = {{"database", "minikube-m05"}, {"cache", "minikube-m03"}, {"logging-agent", "minikube-m02"}};
            s.expected = "0 replicas on minikube-m02; all 6 on minikube-m03";
            s.baseline_note = "Baseline (preferred podAffinity on region, podAntiAffinity on hostname): all 6 avoided "
                              "minikube-m02, spread over m03, m06, m07, m08 and m09.";
            break;
        case 'D':
            s.title = "Rapid Burst Colocation";
            s.hint = "Collocate all pods from this deployment on a single node.";
            s.replicas = 20;
            s.api_visibility_delay = std::chrono::seconds(5);
            s.expected = "20/20 replicas on one node";
            s.baseline_note = "Baseline (required podAffinity on hostname): 20/20 on a single node.";
            break;
        case 'E':
            s.title = "Quantitative Resource Preference";
            s.hint = "This is a high-bandwidth job, please place on nodes with at least 100Gbps network speed.";
            s.replicas = 6;
            s.expected = "6/6 replicas on minikube-m09 (the only 100 Gbps node)";
            s.baseline_note = "Baseline (preferred nodeAffinity network-gbps > 99): 1/6 on the preferred node; other "
                              "scoring plugins outweighed the soft preference.";
            break;
        case 'F':
            s.title = "Conflicting Intents";
            s.hint = "For high performance, collocate all pods on a single node. For high availability, you must also "
                     "spread these pods across all zones.";
            s.replicas = 1;
            s.expected = "the pod is scheduled; the favoured intent is reported and stable across runs";
            s.baseline_note = "Baseline (contradictory hard podAffinity and topologySpreadConstraints): pod stays Pending.";
            break;
        default:
            throw std::invalid_argument(std::string("unknown scenario id: ") + id);
    }
    return s;
}

std::vector<ScenarioSpec> all_scenarios()
{
    std::vector<ScenarioSpec> specs;
    for (char id : {'A', 'B', 'C', 'D', 'E', 'F'}) {
        specs.push_back(scenario_spec(id));
    }
    return specs;
}

nlohmann::json testbed_nodes_json(char scenario_id)
{
    const char id = static_cast<char>(std::toupper(static_cast<unsigned char>(scenario_id)));
    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json control_labels{{"node-role.kubernetes.io/control-plane", ""}, {std::string(kRegionLabel), kRegion}};
    if (id == 'E') {
        control_labels["network-gbps"] = "10";
    }
    nodes.push_back(raw_node(kControlPlaneNode, std::move(control_labels), true));
    for (const auto &row : kWorkers) {
        nlohmann::json labels{{std::string(kRegionLabel), kRegion},
                              {std::string(kZoneLabel), row.zone},
                              {std::string(kRackLabel), row.rack}};
        const std::string_view name = row.name;
        if (id == 'B' && name == "minikube-m02") {
            labels["hardware"] = "gpu";
        }
        if (id == 'E') {
            labels["network-gbps"] = name == "minikube-m09" ? "100" : "10";
        }
        nodes.push_back(raw_node(name, std::move(labels), false));
    }
    return nodes;
}

Testbed build_testbed(const ScenarioSpec &spec)
{
    Testbed testbed;
    for (const auto &raw : testbed_nodes_json(spec.id)) {
        testbed.nodes.push_back(node_from_raw(raw));
    }
    for (const auto &pre : spec.pre_existing) {
        CachedPod pod;
        pod.name = pre.deployment + "-0";
        pod.deployment = pre.deployment;
        pod.labels = {{"app", pre.deployment}};
        pod.node_name = pre.node;
        testbed.pods.push_back(std::move(pod));
    }
    return testbed;
}

bool PlacementReport::passed() const
{
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion &a) { return a.passed; });
}

PlacementReport run_scenario(const ScenarioSpec &spec, const std::shared_ptr<IntentAnalyzer> &analyzer,
                             const ParsedHint *golden)
{
    if (spec.replicas < 1) {
        throw std::invalid_argument("scenario needs at least one replica");
    }
    const SimResult sim = simulate(spec, analyzer);

    PlacementReport report;
    report.scenario = spec.id;
    report.title = spec.title;
    report.hint = spec.hint;
    report.parsed = to_json(sim.parsed);
    report.placements = sim.placements;
    report.baseline_note = spec.baseline_note;
    report.notes = sim.notes;
    if (golden != nullptr) {
        report.parse_divergence = describe_divergence(sim.parsed, *golden);
    }

    const Testbed testbed = build_testbed(spec);
    std::map<std::string, const CachedNode *> by_name;
    for (const auto &node : testbed.nodes) {
        by_name[node.name] = &node;
        if (!node.unschedulable_taint) {
            report.zone_counts.try_emplace(node.zone.value_or("-"), 0);
        }
    }
    for (const auto &[_, node_name] : report.placements) {
        const CachedNode *node = by_name.at(node_name);
        ++report.zone_counts[node->zone.value_or("-")];
        ++report.rack_counts[node->rack.value_or("-")];
        ++report.node_counts[node_name];
    }

    const int placed = static_cast<int>(report.placements.size());
    const int replicas = spec.replicas;
    auto on = [&](const char *node) {
        auto it = report.node_counts.find(node);
        return it == report.node_counts.end() ? 0 : it->second;
    };
    add(report, "all replicas scheduled", placed == replicas,
        std::to_string(placed) + "/" + std::to_string(replicas) + " placed");

    switch (spec.id) {
        case 'A': {
            auto [lo, hi] = std::minmax_element(report.zone_counts.begin(), report.zone_counts.end(),
                                                [](const auto &a, const auto &b) { return a.second < b.second; });
            add(report, "zone skew <= 1", hi->second - lo->second <= 1, counts_text(report.zone_counts));
            if (replicas == 6) {
                add(report, "3:3 zone split",
                    report.zone_counts["us-east-1a"] == 3 && report.zone_counts["us-east-1b"] == 3,
                    counts_text(report.zone_counts));
            }
            break;
        }
        case 'B':
            add(report, "every replica on minikube-m02", on("minikube-m02") == replicas,
                counts_text(report.node_counts));
            break;
        case 'C':
            add(report, "no replica on minikube-m02", on("minikube-m02") == 0, counts_text(report.node_counts));
            add(report, "all replicas on minikube-m03 (exact placement)", on("minikube-m03") == replicas,
                counts_text(report.node_counts));
            break;
        case 'D':
            add(report, "single distinct node", placed == replicas && report.node_counts.size() == 1,
                std::to_string(report.node_counts.size()) + " distinct node(s): " + counts_text(report.node_counts));
            break;
        case 'E':
            add(report, "every replica on minikube-m09", on("minikube-m09") == replicas,
                counts_text(report.node_counts));
            break;
        case 'F': {
            const double colocate = sim.winner_contributions.contains("prefer_colocate_same_deployment")
                                        ? sim.winner_contributions.at("prefer_colocate_same_deployment")
                                        : 0.0;
            const double spread =
                sim.winner_contributions.contains("spread_zones") ? sim.winner_contributions.at("spread_zones") : 0.0;
            std::ostringstream favoured;
            favoured << (spread > colocate   ? "spread_zones"
                         : colocate > spread ? "prefer_colocate_same_deployment"
                                             : "neither (tie)")
                     << " (winner contributions: colocate " << colocate << ", spread_zones " << spread << ")";
            report.notes.push_back("favoured intent: " + favoured.str());

            const SimResult again = simulate(spec, analyzer);
            add(report, "choice deterministic across runs", again.placements == sim.placements,
                again.placements.empty() ? "second run placed nothing" : "second run winner " + again.placements[0].second);
            break;
        }
        default:
            break;
    }
    return report;
}

bool ScenarioSummary::all_passed() const
{
    return std::all_of(reports.begin(), reports.end(), [](const PlacementReport &r) { return r.passed(); });
}

ScenarioSummary run_all(const std::vector<ScenarioSpec> &specs, const std::shared_ptr<IntentAnalyzer> &analyzer,
                        const std::map<std::string, ParsedHint> *golden_by_hint)
{
    ScenarioSummary summary;
    for (const auto &spec : specs) {
        const ParsedHint *golden = nullptr;
        if (golden_by_hint != nullptr) {
            if (auto it = golden_by_hint->find(sanitize_hint(spec.hint)); it != golden_by_hint->end()) {
                golden = &it->second;
            }
        }
        summary.reports.push_back(run_scenario(spec, analyzer, golden));
    }
    return summary;
}

nlohmann::json to_json(const PlacementReport &report)
{
    nlohmann::json placements = nlohmann::json::array();
    for (const auto &[pod, node] : report.placements) {
        placements.push_back({{"pod", pod}, {"node", node}});
    }
    nlohmann::json assertions = nlohmann::json::array();
    for (const auto &a : report.assertions) {
        assertions.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    }
    return {
        {"scenario", std::string(1, report.scenario)},
        {"title", report.title},
        {"hint", report.hint},
        {"parsed", report.parsed},
        {"parse_divergence", report.parse_divergence ? nlohmann::json(*report.parse_divergence) : nlohmann::json()},
        {"placements", std::move(placements)},
        {"zone_counts", report.zone_counts},
        {"rack_counts", report.rack_counts},
        {"node_counts", report.node_counts},
        {"assertions", std::move(assertions)},
        {"passed", report.passed()},
        {"baseline", report.baseline_note},
        {"notes", report.notes},
    };
}

std::string format_report(const PlacementReport &report)
{
    std::ostringstream out;
    out << "Scenario " << report.scenario << " - " << report.title << ": " << (report.passed() ? "PASS" : "FAIL")
        << '\n';
    out << "  hint:    " << report.hint << '\n';
    out << "  intents: " << report.parsed.dump() << '\n';
    if (report.parse_divergence) {
        out << "  parse divergence from golden: " << *report.parse_divergence << '\n';
    }
    out << "  zones:   " << counts_text(report.zone_counts) << '\n';
    out << "  racks:   " << counts_text(report.rack_counts) << '\n';
    out << "  nodes:   " << counts_text(report.node_counts) << '\n';
    for (const auto &a : report.assertions) {
        out << "  [" << (a.passed ? "ok" : "FAIL") << "] " << a.name << " (" << a.detail << ")\n";
    }
    for (const auto &note : report.notes) {
        out << "  note: " << note << '\n';
    }
    out << "  " << report.baseline_note << '\n';
    return out.str();
}

} // namespace softaffinity
