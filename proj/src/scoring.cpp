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

#include "softaffinity/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

namespace softaffinity {

namespace {

constexpr double kGiB = 1073741824.0;
constexpr double kAvoidPenalty = -2.0;
// Below this many candidates the OpenMP fork costs more than the loop.
constexpr std::size_t kParallelThreshold = 256;

enum class Logic { binary, avoid, spread, proximity, colocate, unknown };

Logic logic_of(std::string_view name)
{
    if (name == "prefer_colocate_same_deployment") {
        return Logic::colocate;
    }
    if (name == "prefer_nearby_nodes_same_deployment" || name == "prefer_deployments") {
        return Logic::proximity;
    }
    if (name.starts_with("avoid_")) {
        return Logic::avoid;
    }
    if (name.starts_with("spread_")) {
        return Logic::spread;
    }
    if (name.starts_with("prefer_")) {
        return Logic::binary;
    }
    return Logic::unknown;
}

double float_meta(const DetectedIntent &intent, const std::string &field)
{
    auto it = intent.metadata.find(field);
    if (it == intent.metadata.end()) {
        return 1.0;
    }
    if (const auto *v = std::get_if<double>(&it->second)) {
        return *v;
    }
    return 1.0;
}

const std::vector<std::string> &list_meta(const DetectedIntent &intent, const std::string &field)
{
    static const std::vector<std::string> empty;
    auto it = intent.metadata.find(field);
    if (it == intent.metadata.end()) {
        return empty;
    }
    if (const auto *v = std::get_if<std::vector<std::string>>(&it->second)) {
        return *v;
    }
    return empty;
}

std::string string_meta(const DetectedIntent &intent, const std::string &field)
{
    auto it = intent.metadata.find(field);
    if (it == intent.metadata.end()) {
        return {};
    }
    if (const auto *v = std::get_if<std::string>(&it->second)) {
        return *v;
    }
    return {};
}

bool contains(const std::vector<std::string> &items, const std::optional<std::string> &value)
{
    return value && std::find(items.begin(), items.end(), *value) != items.end();
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

const std::optional<std::string> &domain_label(const CachedNode &node, SpreadDomain domain)
{
    switch (domain) {
        case SpreadDomain::region:
            return node.region;
        case SpreadDomain::zone:
            return node.zone;
        case SpreadDomain::rack:
        case SpreadDomain::node:
            break;
    }
    return node.rack;
}

std::optional<std::string> domain_value(const CachedNode &node, SpreadDomain domain)
{
    if (domain == SpreadDomain::node) {
        return node.name;
    }
    return domain_label(node, domain);
}

/// Resolves a pod's node_name to node labels. Candidates shadow topology.
class NodeIndex {
public:
    explicit NodeIndex(const ScoringContext &ctx)
    {
        for (const auto &node : ctx.topology) {
            index_[node.name] = &node;
        }
        for (const auto &node : ctx.candidates) {
            index_[node.name] = &node;
        }
    }

    const CachedNode *find(const std::string &name) const
    {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : it->second;
    }

private:
    std::unordered_map<std::string, const CachedNode *> index_;
};

/// Placed pods other than the subject itself.
template <typename Fn>
void for_each_placed(const ScoringContext &ctx, Fn &&fn)
{
    const PodKey subject = ctx.subject_pod.key();
    for (const auto &pod : ctx.effective) {
        if (!pod.node_name || pod.key() == subject) {
            continue;
        }
        fn(pod);
    }
}

bool in_targets(const CachedPod &pod, std::span<const std::string> targets)
{
    return pod.deployment && std::find(targets.begin(), targets.end(), *pod.deployment) != targets.end();
}

struct ProximityCounts {
    std::unordered_map<std::string, int> rack;
    std::unordered_map<std::string, int> zone;
    std::unordered_map<std::string, int> region;

    static int lookup(const std::unordered_map<std::string, int> &counts, const std::optional<std::string> &key)
    {
        if (!key) {
            return 0;
        }
        auto it = counts.find(*key);
        return it == counts.end() ? 0 : it->second;
    }

    double score(const CachedNode &node, const ProximityWeights &w) const
    {
        return w.rack * lookup(rack, node.rack) + w.zone * lookup(zone, node.zone) +
               w.region * lookup(region, node.region);
    }
};

ProximityCounts proximity_counts(const ScoringContext &ctx, std::span<const std::string> targets)
{
    ProximityCounts counts;
    const NodeIndex index(ctx);
    for_each_placed(ctx, [&](const CachedPod &pod) {
        if (!in_targets(pod, targets)) {
            return;
        }
        const CachedNode *host = index.find(*pod.node_name);
        if (host == nullptr) {
            return;
        }
        if (host->rack) {
            ++counts.rack[*host->rack];
        }
        if (host->zone) {
            ++counts.zone[*host->zone];
        }
        if (host->region) {
            ++counts.region[*host->region];
        }
    });
    return counts;
}

std::unordered_map<std::string, int> same_deployment_per_node(const ScoringContext &ctx)
{
    std::unordered_map<std::string, int> counts;
    if (!ctx.subject_deployment) {
        return counts;
    }
    for_each_placed(ctx, [&](const CachedPod &pod) {
        if (pod.deployment == ctx.subject_deployment) {
            ++counts[*pod.node_name];
        }
    });
    return counts;
}

std::vector<std::string> proximity_targets(const DetectedIntent &intent, const ScoringContext &ctx)
{
    if (intent.intent == "prefer_deployments") {
        return list_meta(intent, "prefer_deployments");
    }
    if (ctx.subject_deployment) {
        return {*ctx.subject_deployment};
    }
    return {};
}

/// One intent with its per-round aggregates precomputed so that evaluating
/// a node is a constant number of lookups.
class PreparedIntent {
public:
    PreparedIntent(const DetectedIntent &intent, double base, const ScoringContext &ctx)
        : intent_(&intent), weight_(intent_weight(base, intent).combined), logic_(logic_of(intent.intent))
    {
        switch (logic_) {
            case Logic::spread:
                domain_ = *spread_domain_of(intent.intent);
                tally_ = build_spread_tally(domain_, ctx);
                break;
            case Logic::proximity: {
                const auto targets = proximity_targets(intent, ctx);
                counts_ = proximity_counts(ctx, targets);
                for (const auto &node : ctx.candidates) {
                    max_proximity_ = std::max(max_proximity_, counts_.score(node, ProximityWeights{}));
                }
                break;
            }
            case Logic::colocate:
                per_node_ = same_deployment_per_node(ctx);
                for (const auto &node : ctx.candidates) {
                    auto it = per_node_.find(node.name);
                    max_colocate_ = std::max(max_colocate_, it == per_node_.end() ? 0 : it->second);
                }
                break;
            case Logic::avoid:
                if (intent.intent == "avoid_deployments") {
                    const auto &avoided = list_meta(intent, "avoid_deployments");
                    for_each_placed(ctx, [&](const CachedPod &pod) {
                        if (in_targets(pod, avoided)) {
                            avoided_hosts_.insert(*pod.node_name);
                        }
                    });
                }
                break;
            case Logic::binary:
            case Logic::unknown:
                break;
        }
    }

    const std::string &name() const { return intent_->intent; }
    double weight() const { return weight_; }

    double phi(const CachedNode &node) const
    {
        switch (logic_) {
            case Logic::binary:
                return eval_binary_pref(*intent_, node);
            case Logic::avoid:
                if (intent_->intent == "avoid_deployments") {
                    return avoided_hosts_.count(node.name) != 0 ? kAvoidPenalty : 0.0;
                }
                return eval_avoid(*intent_, node, ScoringContext{});
            case Logic::spread: {
                const auto value = domain_value(node, domain_);
                int k = 0;
                if (value) {
                    auto it = tally_.counts.find(*value);
                    k = it == tally_.counts.end() ? 0 : it->second;
                }
                const int m = tally_.max_count;
                return static_cast<double>(m - k + 1) / static_cast<double>(m + 1);
            }
            case Logic::proximity:
                if (max_proximity_ <= 0.0) {
                    return 0.0;
                }
                return counts_.score(node, ProximityWeights{}) / max_proximity_;
            case Logic::colocate: {
                if (max_colocate_ <= 0) {
                    return 0.0;
                }
                auto it = per_node_.find(node.name);
                const int c = it == per_node_.end() ? 0 : it->second;
                return static_cast<double>(c) / static_cast<double>(max_colocate_);
            }
            case Logic::unknown:
                break;
        }
        return 0.0;
    }

private:
    const DetectedIntent *intent_;
    double weight_;
    Logic logic_;
    SpreadDomain domain_ = SpreadDomain::node;
    SpreadTally tally_;
    ProximityCounts counts_;
    double max_proximity_ = 0.0;
    std::unordered_map<std::string, int> per_node_;
    int max_colocate_ = 0;
    std::set<std::string> avoided_hosts_;
};

std::vector<PreparedIntent> prepare(const ParsedHint &parsed, const ScoringContext &ctx)
{
    std::vector<PreparedIntent> prepared;
    if (parsed.intents.empty()) {
        return prepared;
    }
    const double base = base_weight(parsed.intents.size());
    prepared.reserve(parsed.intents.size());
    for (const auto &[_, intent] : parsed.intents) {
        prepared.emplace_back(intent, base, ctx);
    }
    return prepared;
}

void score_one(const std::vector<PreparedIntent> &prepared, const CachedNode &node, ScoreBreakdown &out)
{
    out.node = node.name;
    out.contributions.clear();
    double raw = 0.0;
    for (const auto &intent : prepared) {
        const double contribution = intent.weight() * intent.phi(node);
        out.contributions.emplace(intent.name(), contribution);
        raw += contribution;
    }
    out.raw = raw;
}

void finish(std::vector<ScoreBreakdown> &breakdowns)
{
    std::map<std::string, double> raw;
    for (const auto &b : breakdowns) {
        if (!raw.emplace(b.node, b.raw).second) {
            throw std::invalid_argument("duplicate candidate node: " + b.node);
        }
    }
    const auto normalized = normalize_scores(raw);
    for (auto &b : breakdowns) {
        b.normalized = normalized.normalized.at(b.node);
        b.final_score = normalized.final_scores.at(b.node);
        b.is_winner = b.node == normalized.winner;
    }
}

void require_candidates(const ScoringContext &ctx)
{
    if (ctx.candidates.empty()) {
        throw std::invalid_argument("scoring needs at least one candidate node");
    }
}

} // namespace

double base_weight(std::size_t intent_count)
{
    if (intent_count == 0) {
        throw ZeroIntents();
    }
    return 100.0 / static_cast<double>(intent_count);
}

IntentWeight intent_weight(double base, const DetectedIntent &intent)
{
    return {base, intent.confidence, intent.strength, base * intent.confidence * intent.strength};
}

double eval_binary_pref(const DetectedIntent &intent, const CachedNode &node)
{
    const std::string &name = intent.intent;
    bool satisfied = false;
    if (name == "prefer_regions") {
        satisfied = contains(list_meta(intent, "prefer_regions"), node.region);
    } else if (name == "prefer_zones") {
        satisfied = contains(list_meta(intent, "prefer_zones"), node.zone);
    } else if (name == "prefer_racks") {
        satisfied = contains(list_meta(intent, "prefer_racks"), node.rack);
    } else if (name == "prefer_nodes") {
        satisfied = contains(list_meta(intent, "prefer_nodes"), node.name);
    } else if (name == "prefer_memory") {
        satisfied = static_cast<double>(node.memory_bytes) / kGiB >= float_meta(intent, "prefer_memory_gb");
    } else if (name == "prefer_cpu") {
        satisfied = node.cpu_count >= float_meta(intent, "prefer_cpu_cores");
    } else if (name == "prefer_gpu") {
        satisfied = node.gpu_count >= float_meta(intent, "prefer_gpu_cores");
    } else if (name == "prefer_tpu") {
        satisfied = node.tpu_count >= float_meta(intent, "prefer_tpu_cores");
    } else if (name == "prefer_ssd") {
        satisfied = node.has_ssd;
    } else if (name == "prefer_public_ip") {
        satisfied = node.has_public_ip;
    } else if (name == "prefer_network_speed") {
        satisfied = node.network_gbps >= float_meta(intent, "prefer_network_gbps");
    } else if (name == "prefer_network_type") {
        satisfied = node.network_type && iequals(*node.network_type, string_meta(intent, "prefer_network_type"));
    } else if (name == "prefer_ephemeral_storage") {
        satisfied = static_cast<double>(node.ephemeral_storage_bytes) / kGiB >=
                    float_meta(intent, "prefer_ephemeral_storage_gb");
    }
    return satisfied ? 1.0 : 0.0;
}

double eval_avoid(const DetectedIntent &intent, const CachedNode &node, const ScoringContext &ctx)
{
    const std::string &name = intent.intent;
    bool matches = false;
    if (name == "avoid_regions") {
        matches = contains(list_meta(intent, "avoid_regions"), node.region);
    } else if (name == "avoid_zones") {
        matches = contains(list_meta(intent, "avoid_zones"), node.zone);
    } else if (name == "avoid_racks") {
        matches = contains(list_meta(intent, "avoid_racks"), node.rack);
    } else if (name == "avoid_nodes") {
        matches = contains(list_meta(intent, "avoid_nodes"), node.name);
    } else if (name == "avoid_deployments") {
        const auto &avoided = list_meta(intent, "avoid_deployments");
        for_each_placed(ctx, [&](const CachedPod &pod) {
            if (*pod.node_name == node.name && in_targets(pod, avoided)) {
                matches = true;
            }
        });
    }
    return matches ? kAvoidPenalty : 0.0;
}

std::optional<SpreadDomain> spread_domain_of(std::string_view intent_name)
{
    if (intent_name == "spread_regions") {
        return SpreadDomain::region;
    }
    if (intent_name == "spread_zones") {
        return SpreadDomain::zone;
    }
    if (intent_name == "spread_racks") {
        return SpreadDomain::rack;
    }
    if (intent_name == "spread_nodes") {
        return SpreadDomain::node;
    }
    return std::nullopt;
}

SpreadTally build_spread_tally(SpreadDomain domain, const ScoringContext &ctx)
{
    SpreadTally tally;
    if (!ctx.subject_deployment) {
        return tally;
    }
    const NodeIndex index(ctx);
    for_each_placed(ctx, [&](const CachedPod &pod) {
        if (pod.deployment != ctx.subject_deployment) {
            return;
        }
        std::optional<std::string> value;
        if (domain == SpreadDomain::node) {
            value = *pod.node_name;
        } else if (const CachedNode *host = index.find(*pod.node_name)) {
            value = domain_label(*host, domain);
        }
        if (value) {
            ++tally.counts[*value];
        }
    });
    for (const auto &[_, count] : tally.counts) {
        tally.max_count = std::max(tally.max_count, count);
    }
    return tally;
}

double eval_spread(const DetectedIntent &intent, const CachedNode &node, const ScoringContext &ctx)
{
    const auto domain = spread_domain_of(intent.intent);
    if (!domain) {
        throw std::invalid_argument("not a spread intent: " + intent.intent);
    }
    PreparedIntent prepared(intent, 100.0, ctx);
    return prepared.phi(node);
}

double proximity_raw(const CachedNode &node, const ScoringContext &ctx, std::span<const std::string> targets,
                     const ProximityWeights &weights)
{
    return proximity_counts(ctx, targets).score(node, weights);
}

double eval_proximity(const CachedNode &node, const ScoringContext &ctx, std::span<const std::string> targets)
{
    const auto counts = proximity_counts(ctx, targets);
    double max_score = 0.0;
    for (const auto &candidate : ctx.candidates) {
        max_score = std::max(max_score, counts.score(candidate, ProximityWeights{}));
    }
    if (max_score <= 0.0) {
        return 0.0;
    }
    return counts.score(node, ProximityWeights{}) / max_score;
}

double eval_colocate(const CachedNode &node, const ScoringContext &ctx)
{
    DetectedIntent colocate;
    colocate.intent = "prefer_colocate_same_deployment";
    PreparedIntent prepared(colocate, 100.0, ctx);
    return prepared.phi(node);
}

std::vector<ScoreBreakdown> score_nodes(const ParsedHint &parsed, const ScoringContext &ctx)
{
    require_candidates(ctx);
    const auto prepared = prepare(parsed, ctx);
    std::vector<ScoreBreakdown> breakdowns(ctx.candidates.size());
    const auto count = static_cast<std::ptrdiff_t>(ctx.candidates.size());

#pragma omp parallel for schedule(static) if (ctx.candidates.size() >= kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        score_one(prepared, ctx.candidates[static_cast<std::size_t>(i)], breakdowns[static_cast<std::size_t>(i)]);
    }

    finish(breakdowns);
    return breakdowns;
}

std::vector<ScoreBreakdown> score_nodes_serial(const ParsedHint &parsed, const ScoringContext &ctx)
{
    require_candidates(ctx);
    const auto prepared = prepare(parsed, ctx);
    std::vector<ScoreBreakdown> breakdowns(ctx.candidates.size());
    for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
        score_one(prepared, ctx.candidates[i], breakdowns[i]);
    }
    finish(breakdowns);
    return breakdowns;
}

NormalizedScores normalize_scores(const std::map<std::string, double> &raw)
{
    if (raw.empty()) {
        throw std::invalid_argument("normalize_scores needs at least one node");
    }
    NormalizedScores out;

    // std::map iterates in lexicographic order, so the first maximum wins ties.
    double max_raw = raw.begin()->second;
    out.winner = raw.begin()->first;
    for (const auto &[node, score] : raw) {
        if (score > max_raw) {
            max_raw = score;
            out.winner = node;
        }
    }

    for (const auto &[node, score] : raw) {
        const double norm = max_raw > 0.0 ? std::max(0.0, score) / max_raw * 100.0 : 0.0;
        out.normalized.emplace(node, norm);
        if (node == out.winner) {
            out.final_scores.emplace(node, 100);
        } else {
            const double rounded = std::floor(norm + 0.5);
            out.final_scores.emplace(node, static_cast<int>(std::clamp(rounded, 1.0, 99.0)));
        }
    }
    return out;
}

const ScoreBreakdown &winner_of(const std::vector<ScoreBreakdown> &breakdowns)
{
    auto it = std::find_if(breakdowns.begin(), breakdowns.end(), [](const ScoreBreakdown &b) { return b.is_winner; });
    if (it == breakdowns.end()) {
        throw std::logic_error("score breakdown without a winner");
    }
    return *it;
}

} // namespace softaffinity
