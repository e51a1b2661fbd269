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

#ifndef SOFTAFFINITY_EXTENDER_API_HPP
#define SOFTAFFINITY_EXTENDER_API_HPP

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "softaffinity/cluster_state.hpp"
#include "softaffinity/hint_parsers.hpp"
#include "softaffinity/scoring.hpp"

namespace softaffinity {

class MalformedRequest : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Body of /filter and /prioritize. On the wire:
///   {"pod": {...}, "nodenames": ["a", "b"]}
/// or, when the scheduler is not node-cache-capable,
///   {"pod": {...}, "nodes": {"items": [<Node>, ...]}}
/// Keys are matched case-insensitively ("NodeNames" works too).
struct ExtenderArgs {
    nlohmann::json pod;
    std::vector<std::string> node_names;
    // Node objects sent inline; used for names the cache does not know.
    std::vector<CachedNode> inline_nodes;
};

ExtenderArgs parse_extender_args(const nlohmann::json &body);

struct FilterResult {
    std::vector<std::string> accepted;
    std::map<std::string, std::string> rejected;
};

struct HostPriority {
    std::string host;
    int score = 0;

    bool operator==(const HostPriority &) const = default;
};

struct PrioritizeOutcome {
    std::vector<HostPriority> priorities;
    std::vector<ScoreBreakdown> breakdowns;
    std::string winner;
    AnalysisOutcome analysis;
};

// {"nodenames": [...], "failedNodes": {...}}
nlohmann::json to_json(const FilterResult &result);
// [{"host": ..., "score": ...}, ...]
nlohmann::json to_json(const std::vector<HostPriority> &priorities);

struct ExtenderConfig {
    std::string deployment_label{kDefaultDeploymentLabel};
    Duration placement_ttl = kDefaultPlacementTtl;
    // Test switch: scoring then sees only what the API has reported.
    bool recent_placements_enabled = true;
};

struct HttpReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class ExtenderService {
public:
    using ClockFn = std::function<Timestamp()>;

    ExtenderService(std::shared_ptr<IntentAnalyzer> analyzer, ExtenderConfig config = {},
                    ClockFn clock = [] { return Clock::now(); });

    FilterResult handle_filter(const ExtenderArgs &args) const;
    /// Analyze, score and record the winner, atomically with respect to
    /// other prioritize calls. Throws MalformedRequest.
    PrioritizeOutcome handle_prioritize(const ExtenderArgs &args);

    /// Routes one HTTP request without a socket. Bad input yields 400.
    HttpReply dispatch(const std::string &method, const std::string &path, const std::string &body);

    StateCache &state() noexcept { return state_; }
    RecentPlacements &recent() noexcept { return recent_; }
    IntentAnalyzer &analyzer() noexcept { return *analyzer_; }
    const ExtenderConfig &config() const noexcept { return config_; }

private:
    CachedNode resolve(const std::string &name, const ExtenderArgs &args) const;

    std::shared_ptr<IntentAnalyzer> analyzer_;
    ExtenderConfig config_;
    ClockFn clock_;
    StateCache state_;
    RecentPlacements recent_;
    std::mutex prioritize_mutex_;
};

/// Blocks serving /filter, /prioritize and /healthz until stop is requested
/// (SIGINT/SIGTERM in the CLI). Returns false if the socket cannot be bound.
bool serve_http(ExtenderService &service, const std::string &host, int port);

} // namespace softaffinity

#endif // SOFTAFFINITY_EXTENDER_API_HPP
