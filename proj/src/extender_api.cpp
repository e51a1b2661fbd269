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

#include "softaffinity/extender_api.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <set>

#include "httplib.h"

namespace softaffinity {

namespace {

const nlohmann::json *find_key(const nlohmann::json &object, std::string_view key)
{
    for (auto it = object.begin(); it != object.end(); ++it) {
        const std::string &candidate = it.key();
        if (candidate.size() == key.size() &&
            std::equal(candidate.begin(), candidate.end(), key.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            })) {
            return &it.value();
        }
    }
    return nullptr;
}

nlohmann::json error_body(const std::string &message)
{
    return {{"error", message}};
}

} // namespace

ExtenderArgs parse_extender_args(const nlohmann::json &body)
{
    if (!body.is_object()) {
        throw MalformedRequest("request body must be a JSON object");
    }
    ExtenderArgs args;
    const auto *pod = find_key(body, "pod");
    if (pod == nullptr || !pod->is_object()) {
        throw MalformedRequest("request has no pod object");
    }
    args.pod = *pod;

    if (const auto *nodes = find_key(body, "nodes"); nodes != nullptr && !nodes->is_null()) {
        const auto *items = nodes->is_object() ? find_key(*nodes, "items") : nodes;
        if (items == nullptr || !items->is_array()) {
            throw MalformedRequest("nodes must be a NodeList or an array");
        }
        try {
            for (const auto &raw : *items) {
                args.inline_nodes.push_back(node_from_raw(raw));
            }
        } catch (const std::exception &e) {
            throw MalformedRequest(std::string("bad inline node: ") + e.what());
        }
    }

    if (const auto *names = find_key(body, "nodenames"); names != nullptr && !names->is_null()) {
        if (!names->is_array()) {
            throw MalformedRequest("nodenames must be an array");
        }
        for (const auto &name : *names) {
            if (!name.is_string() || name.get_ref<const std::string &>().empty()) {
                throw MalformedRequest("nodenames entries must be non-empty strings");
            }
            args.node_names.push_back(name.get<std::string>());
        }
    } else {
        for (const auto &node : args.inline_nodes) {
            args.node_names.push_back(node.name);
        }
    }

    if (args.node_names.empty()) {
        throw MalformedRequest("request lists no candidate nodes");
    }
    std::set<std::string> seen;
    for (const auto &name : args.node_names) {
        if (!seen.insert(name).second) {
            throw MalformedRequest("duplicate candidate node: " + name);
        }
    }
    return args;
}

nlohmann::json to_json(const FilterResult &result)
{
    nlohmann::json failed = nlohmann::json::object();
    for (const auto &[node, reason] : result.rejected) {
        failed[node] = reason;
    }
    return {{"nodenames", result.accepted}, {"failedNodes", std::move(failed)}};
}

nlohmann::json to_json(const std::vector<HostPriority> &priorities)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto &p : priorities) {
        out.push_back({{"host", p.host}, {"score", p.score}});
    }
    return out;
}

ExtenderService::ExtenderService(std::shared_ptr<IntentAnalyzer> analyzer, ExtenderConfig config, ClockFn clock)
    : analyzer_(std::move(analyzer)), config_(std::move(config)), clock_(std::move(clock)),
      recent_(config_.placement_ttl)
{
    if (!analyzer_) {
        throw std::invalid_argument("ExtenderService needs an analyzer");
    }
}

CachedNode ExtenderService::resolve(const std::string &name, const ExtenderArgs &args) const
{
    if (auto node = state_.node(name)) {
        return *std::move(node);
    }
    auto inline_node = std::find_if(args.inline_nodes.begin(), args.inline_nodes.end(),
                                    [&](const CachedNode &n) { return n.name == name; });
    if (inline_node != args.inline_nodes.end()) {
        return *inline_node;
    }
    throw MalformedRequest("unknown node: " + name);
}

FilterResult ExtenderService::handle_filter(const ExtenderArgs &args) const
{
    FilterResult result;
    for (const auto &name : args.node_names) {
        CachedNode node;
        try {
            node = resolve(name, args);
        } catch (const MalformedRequest &) {
            result.rejected.emplace(name, "unknown node");
            continue;
        }
        if (node.unschedulable_taint) {
            result.rejected.emplace(name, "node has a NoSchedule taint");
        } else {
            result.accepted.push_back(name);
        }
    }
    return result;
}

PrioritizeOutcome ExtenderService::handle_prioritize(const ExtenderArgs &args)
{
    CachedPod subject;
    try {
        subject = pod_from_raw(args.pod, config_.deployment_label);
    } catch (const std::exception &e) {
        throw MalformedRequest(std::string("bad pod object: ") + e.what());
    }
    if (subject.name.empty()) {
        throw MalformedRequest("pod has no metadata.name");
    }

    ScoringContext ctx;
    for (const auto &name : args.node_names) {
        ctx.candidates.push_back(resolve(name, args));
    }

    PrioritizeOutcome outcome;
    // The analyzer has its own memo and coalescing; it stays outside the lock
    // so a slow backend does not serialize unrelated requests.
    outcome.analysis = analyzer_->analyze(subject.allocation_hint.value_or(""));

    std::lock_guard lock(prioritize_mutex_);
    const Timestamp now = clock_();
    ctx.effective = config_.recent_placements_enabled ? effective_pods(state_, recent_, now) : state_.pods();
    ctx.topology = state_.nodes();
    ctx.subject_deployment = subject.deployment;
    ctx.subject_pod = subject;

    outcome.breakdowns = score_nodes(outcome.analysis.parsed, ctx);
    outcome.winner = winner_of(outcome.breakdowns).node;
    for (const auto &b : outcome.breakdowns) {
        outcome.priorities.push_back({b.node, b.final_score});
    }
    if (config_.recent_placements_enabled) {
        recent_.record_placement(subject, outcome.winner, now);
    }
    return outcome;
}

HttpReply ExtenderService::dispatch(const std::string &method, const std::string &path, const std::string &body)
{
    if (path == "/healthz") {
        return {200, "ok", "text/plain"};
    }
    if (method != "POST" || (path != "/filter" && path != "/prioritize")) {
        return {404, error_body("no route for " + method + " " + path).dump()};
    }
    try {
        const auto args = parse_extender_args(nlohmann::json::parse(body));
        if (path == "/filter") {
            return {200, to_json(handle_filter(args)).dump()};
        }
        return {200, to_json(handle_prioritize(args).priorities).dump()};
    } catch (const nlohmann::json::parse_error &e) {
        return {400, error_body(std::string("invalid JSON: ") + e.what()).dump()};
    } catch (const MalformedRequest &e) {
        return {400, error_body(e.what()).dump()};
    } catch (const std::exception &e) {
        return {500, error_body(e.what()).dump()};
    }
}

namespace {

std::atomic<httplib::Server *> g_running_server{nullptr};

void stop_on_signal(int)
{
    if (auto *server = g_running_server.load()) {
        server->stop();
    }
}

} // namespace

bool serve_http(ExtenderService &service, const std::string &host, int port)
{
    httplib::Server server;
    auto route = [&service](const httplib::Request &req, httplib::Response &res) {
        const auto reply = service.dispatch(req.method, req.path, req.body);
        res.status = reply.status;
        res.set_content(reply.body, reply.content_type);
    };
    server.Post("/filter", route);
    server.Post("/prioritize", route);
    server.Get("/healthz", route);

    g_running_server = &server;
    std::signal(SIGINT, stop_on_signal);
    std::signal(SIGTERM, stop_on_signal);
    const bool ok = server.listen(host, port);
    g_running_server = nullptr;
    return ok;
}

} // namespace softaffinity
