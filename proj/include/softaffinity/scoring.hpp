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

#ifndef SOFTAFFINITY_SCORING_HPP
#define SOFTAFFINITY_SCORING_HPP

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "softaffinity/cluster_state.hpp"
#include "softaffinity/intent_schema.hpp"

namespace softaffinity {

/// Inputs to one scoring round. All scoring functions are pure in it.
struct ScoringContext {
    std::vector<CachedNode> candidates;
    std::vector<CachedPod> effective;
    CachedPod subject_pod;
    std::optional<std::string> subject_deployment;
    // Nodes outside the candidate list that may host effective pods; used
    // only to resolve those pods' topology labels.
    std::vector<CachedNode> topology;
};

class ZeroIntents : public std::invalid_argument {
public:
    ZeroIntents() : std::invalid_argument("base weight needs at least one intent") {}
};

struct IntentWeight {
    double base = 0.0;
    double confidence = 0.0;
    double strength = 0.0;
    double combined = 0.0;
};

struct ProximityWeights {
    double rack = 2.0;
    double zone = 0.5;
    double region = 0.2;
};

struct SpreadTally {
    std::map<std::string, int> counts;
    int max_count = 0;
};

enum class SpreadDomain { region, zone, rack, node };

struct ScoreBreakdown {
    std::string node;
    std::map<std::string, double> contributions;
    double raw = 0.0;
    double normalized = 0.0;
    int final_score = 0;
    bool is_winner = false;

    bool operator==(const ScoreBreakdown &) const = default;
};

struct NormalizedScores {
    std::map<std::string, double> normalized;
    std::map<std::string, int> final_scores;
    std::string winner;
};

double base_weight(std::size_t intent_count);
/// combined = (base * confidence) * strength
IntentWeight intent_weight(double base, const DetectedIntent &intent);

double eval_binary_pref(const DetectedIntent &intent, const CachedNode &node);
double eval_avoid(const DetectedIntent &intent, const CachedNode &node, const ScoringContext &ctx);

std::optional<SpreadDomain> spread_domain_of(std::string_view intent_name);
SpreadTally build_spread_tally(SpreadDomain domain, const ScoringContext &ctx);
double eval_spread(const DetectedIntent &intent, const CachedNode &node, const ScoringContext &ctx);

/// Weighted count of target-deployment pods sharing the node's rack, zone
/// and region. Counts are inclusive across the nested domains.
double proximity_raw(const CachedNode &node, const ScoringContext &ctx, std::span<const std::string> targets,
                     const ProximityWeights &weights = {});
double eval_proximity(const CachedNode &node, const ScoringContext &ctx, std::span<const std::string> targets);
double eval_colocate(const CachedNode &node, const ScoringContext &ctx);

/// Raw, normalized and final scores for every candidate, in candidate order.
/// Large candidate sets are evaluated with OpenMP.
std::vector<ScoreBreakdown> score_nodes(const ParsedHint &parsed, const ScoringContext &ctx);
/// Single-threaded reference for score_nodes; results are identical.
std::vector<ScoreBreakdown> score_nodes_serial(const ParsedHint &parsed, const ScoringContext &ctx);

/// Winner is the lexicographically smallest node among the raw maxima and
/// gets 100; everyone else lands in [1, 99]. Nonpositive maxima normalize to 0.
NormalizedScores normalize_scores(const std::map<std::string, double> &raw);

const ScoreBreakdown &winner_of(const std::vector<ScoreBreakdown> &breakdowns);

} // namespace softaffinity

#endif // SOFTAFFINITY_SCORING_HPP
