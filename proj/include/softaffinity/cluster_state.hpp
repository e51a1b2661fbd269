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

#ifndef SOFTAFFINITY_CLUSTER_STATE_HPP
#define SOFTAFFINITY_CLUSTER_STATE_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace softaffinity {

using Clock = std::chrono::steady_clock;
using Timestamp = Clock::time_point;
using Duration = Clock::duration;

inline constexpr std::string_view kRegionLabel = "topology.kubernetes.io/region";
inline constexpr std::string_view kZoneLabel = "topology.kubernetes.io/zone";
inline constexpr std::string_view kRackLabel = "topology.kubernetes.io/rack";
inline constexpr std::string_view kHintAnnotation = "allocation_hint";
inline constexpr std::string_view kDefaultDeploymentLabel = "app";
inline constexpr std::chrono::seconds kDefaultPlacementTtl{10};

using Labels = std::map<std::string, std::string>;

class MalformedQuantity : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kubernetes resource quantity: decimal number with an optional suffix from
/// {m, k/K, M, G, T, Ki, Mi, Gi, Ti}.
double parse_quantity(std::string_view text);

struct CachedNode {
    std::string name;
    std::optional<std::string> region;
    std::optional<std::string> zone;
    std::optional<std::string> rack;
    double cpu_count = 0.0;
    std::uint64_t memory_bytes = 0;
    double gpu_count = 0.0;
    double tpu_count = 0.0;
    bool has_ssd = false;
    bool has_public_ip = false;
    double network_gbps = 0.0;
    std::optional<std::string> network_type;
    std::uint64_t ephemeral_storage_bytes = 0;
    bool unschedulable_taint = false;
    Labels labels;

    bool operator==(const CachedNode &) const = default;
};

struct PodKey {
    std::string namespace_;
    std::string name;

    auto operator<=>(const PodKey &) const = default;
    std::string str() const { return namespace_ + "/" + name; }
};

struct CachedPod {
    std::string name;
    std::string namespace_ = "default";
    std::optional<std::string> node_name;
    std::optional<std::string> deployment;
    std::optional<std::string> allocation_hint;
    Labels labels;
    Timestamp created_at{};

    PodKey key() const { return {namespace_, name}; }
    bool operator==(const CachedPod &) const = default;
};

/// Accepts either a Kubernetes Node object ({metadata, spec, status}) or the
/// flat snapshot shape ({name, labels, capacity, taints}).
///
/// Attribute labels: hardware=gpu|tpu (count from gpu-count / tpu-count,
/// default 1), disk=ssd, network=public or has-public-ip=true,
/// network-gbps=<float>, network-type=<text>. Extended resources
/// nvidia.com/gpu and google.com/tpu in the capacity map also count.
CachedNode node_from_raw(const nlohmann::json &raw);

/// Same two shapes as node_from_raw; nodeName may sit under spec or top level.
CachedPod pod_from_raw(const nlohmann::json &raw, std::string_view deployment_label = kDefaultDeploymentLabel);

enum class EventKind { added, modified, deleted };

using WatchObject = std::variant<CachedNode, CachedPod>;

/// In-memory mirror of nodes and pods. One writer at a time, any number of
/// readers; every accessor returns a copy taken under the lock.
class StateCache {
public:
    void apply_event(EventKind kind, const WatchObject &object);
    void full_resync(std::vector<CachedNode> nodes, std::vector<CachedPod> pods);

    std::optional<CachedNode> node(std::string_view name) const;
    std::vector<CachedNode> nodes() const;
    std::vector<CachedPod> pods() const;
    std::size_t node_count() const;
    std::size_t pod_count() const;

    bool operator==(const StateCache &other) const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, CachedNode, std::less<>> nodes_;
    std::map<PodKey, CachedPod> pods_;
};

/// Short-lived record of placement decisions not yet confirmed by the API.
/// Entries aged >= ttl are invisible and pruned on the next query.
class RecentPlacements {
public:
    struct Entry {
        CachedPod pod;
        std::string node_name;
        Timestamp placed_at;
    };

    explicit RecentPlacements(Duration ttl = kDefaultPlacementTtl) : ttl_(ttl) {}

    /// Overwrites any earlier entry for the same pod key.
    void record_placement(const CachedPod &pod, std::string_view node_name, Timestamp now);
    std::vector<Entry> unexpired(Timestamp now);
    void clear();

    Duration ttl() const noexcept { return ttl_; }

private:
    Duration ttl_;
    std::mutex mutex_;
    std::map<PodKey, Entry> entries_;
};

/// API pods united with unexpired local placements, one pod per key. The API
/// copy wins unless it is still unbound and the local entry carries a node.
std::vector<CachedPod> effective_pods(const StateCache &cache, RecentPlacements &recent, Timestamp now);
std::vector<CachedPod> effective_pods(const std::vector<CachedPod> &api_pods,
                                      const std::vector<RecentPlacements::Entry> &local);

struct ClusterSnapshot {
    std::vector<CachedNode> nodes;
    std::vector<CachedPod> pods;
    nlohmann::json raw;
};

/// Snapshot document: {"nodes": [...], "pods": [...]} with entries in either
/// raw shape accepted by node_from_raw / pod_from_raw.
ClusterSnapshot snapshot_from_json(const nlohmann::json &doc,
                                   std::string_view deployment_label = kDefaultDeploymentLabel);
ClusterSnapshot load_snapshot(const std::filesystem::path &path,
                              std::string_view deployment_label = kDefaultDeploymentLabel);

} // namespace softaffinity

#endif // SOFTAFFINITY_CLUSTER_STATE_HPP
