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

#include "softaffinity/cluster_state.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

namespace softaffinity {

namespace {

struct Suffix {
    std::string_view text;
    double multiplier;
    bool divide;
};

// Longest suffixes first so "Mi" is not read as "M" + garbage.
constexpr Suffix kSuffixes[] = {
    {"Ki", 1024.0, false},
    {"Mi", 1048576.0, false},
    {"Gi", 1073741824.0, false},
    {"Ti", 1099511627776.0, false},
    {"m", 1000.0, true},
    {"k", 1e3, false},
    {"K", 1e3, false},
    {"M", 1e6, false},
    {"G", 1e9, false},
    {"T", 1e12, false},
};

const nlohmann::json &empty_object()
{
    static const nlohmann::json empty = nlohmann::json::object();
    return empty;
}

const nlohmann::json &member(const nlohmann::json &obj, std::string_view key)
{
    if (!obj.is_object()) {
        return empty_object();
    }
    auto it = obj.find(key);
    return it == obj.end() ? empty_object() : *it;
}

std::optional<std::string> string_member(const nlohmann::json &obj, std::string_view key)
{
    if (!obj.is_object()) {
        return std::nullopt;
    }
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        return std::nullopt;
    }
    return it->get<std::string>();
}

Labels labels_from(const nlohmann::json &obj)
{
    Labels out;
    if (!obj.is_object()) {
        return out;
    }
    for (const auto &[key, value] : obj.items()) {
        if (value.is_string()) {
            out.emplace(key, value.get<std::string>());
        } else if (!value.is_null()) {
            out.emplace(key, value.dump());
        }
    }
    return out;
}

std::optional<std::string> label(const Labels &labels, std::string_view key)
{
    auto it = labels.find(std::string(key));
    if (it == labels.end()) {
        return std::nullopt;
    }
    return it->second;
}

double quantity_member(const nlohmann::json &capacity, std::string_view key)
{
    if (!capacity.is_object()) {
        return 0.0;
    }
    auto it = capacity.find(key);
    if (it == capacity.end() || it->is_null()) {
        return 0.0;
    }
    if (it->is_number()) {
        return it->get<double>();
    }
    if (!it->is_string()) {
        throw MalformedQuantity("capacity " + std::string(key) + " is not a quantity");
    }
    return parse_quantity(it->get_ref<const std::string &>());
}

std::string lower(std::string text)
{
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::optional<std::string> lower_label(const Labels &labels, std::string_view key)
{
    auto value = label(labels, key);
    if (value) {
        *value = lower(std::move(*value));
    }
    return value;
}

double label_count(const Labels &labels, std::string_view key)
{
    if (auto value = label(labels, key)) {
        try {
            return parse_quantity(*value);
        } catch (const MalformedQuantity &) {
            return 1.0;
        }
    }
    return 1.0;
}

} // namespace

double parse_quantity(std::string_view text)
{
    std::size_t digits_end = 0;
    bool seen_digit = false;
    bool seen_dot = false;
    while (digits_end < text.size()) {
        const char c = text[digits_end];
        if (c >= '0' && c <= '9') {
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
        ++digits_end;
    }
    if (!seen_digit) {
        throw MalformedQuantity("malformed quantity: '" + std::string(text) + "'");
    }

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + digits_end, value);
    if (ec != std::errc() || ptr != text.data() + digits_end) {
        throw MalformedQuantity("malformed quantity: '" + std::string(text) + "'");
    }

    const std::string_view suffix = text.substr(digits_end);
    if (suffix.empty()) {
        return value;
    }
    for (const auto &s : kSuffixes) {
        if (suffix == s.text) {
            return s.divide ? value / s.multiplier : value * s.multiplier;
        }
    }
    throw MalformedQuantity("unknown quantity suffix: '" + std::string(text) + "'");
}

CachedNode node_from_raw(const nlohmann::json &raw)
{
    const bool k8s_shape = raw.contains("metadata");
    const auto &meta = k8s_shape ? member(raw, "metadata") : raw;
    const auto &capacity = k8s_shape ? member(member(raw, "status"), "capacity") : member(raw, "capacity");
    const auto &taints = k8s_shape ? member(member(raw, "spec"), "taints") : member(raw, "taints");

    CachedNode node;
    node.name = string_member(meta, "name").value_or("");
    node.labels = labels_from(member(meta, "labels"));
    node.region = label(node.labels, kRegionLabel);
    node.zone = label(node.labels, kZoneLabel);
    node.rack = label(node.labels, kRackLabel);

    node.cpu_count = quantity_member(capacity, "cpu");
    node.memory_bytes = static_cast<std::uint64_t>(std::llround(quantity_member(capacity, "memory")));
    node.ephemeral_storage_bytes =
        static_cast<std::uint64_t>(std::llround(quantity_member(capacity, "ephemeral-storage")));
    node.gpu_count = quantity_member(capacity, "nvidia.com/gpu");
    node.tpu_count = quantity_member(capacity, "google.com/tpu");

    const auto hardware = lower_label(node.labels, "hardware");
    if (hardware == "gpu" && node.gpu_count <= 0.0) {
        node.gpu_count = label_count(node.labels, "gpu-count");
    }
    if (hardware == "tpu" && node.tpu_count <= 0.0) {
        node.tpu_count = label_count(node.labels, "tpu-count");
    }
    node.has_ssd = lower_label(node.labels, "disk") == "ssd";
    node.has_public_ip = lower_label(node.labels, "network") == "public" ||
                         lower_label(node.labels, "has-public-ip") == "true";
    if (auto gbps = label(node.labels, "network-gbps")) {
        node.network_gbps = parse_quantity(*gbps);
    }
    node.network_type = label(node.labels, "network-type");

    if (taints.is_array()) {
        for (const auto &taint : taints) {
            if (string_member(taint, "effect") == "NoSchedule") {
                node.unschedulable_taint = true;
            }
        }
    }
    return node;
}

CachedPod pod_from_raw(const nlohmann::json &raw, std::string_view deployment_label)
{
    const bool k8s_shape = raw.contains("metadata");
    const auto &meta = k8s_shape ? member(raw, "metadata") : raw;

    CachedPod pod;
    pod.name = string_member(meta, "name").value_or("");
    pod.namespace_ = string_member(meta, "namespace").value_or("default");
    pod.labels = labels_from(member(meta, "labels"));
    pod.deployment = label(pod.labels, deployment_label);

    const auto &annotations = member(meta, "annotations");
    pod.allocation_hint = string_member(annotations, kHintAnnotation);

    pod.node_name = string_member(member(raw, "spec"), "nodeName");
    if (!pod.node_name) {
        pod.node_name = string_member(raw, "nodeName");
    }
    if (pod.node_name && pod.node_name->empty()) {
        pod.node_name.reset();
    }
    return pod;
}

void StateCache::apply_event(EventKind kind, const WatchObject &object)
{
    std::unique_lock lock(mutex_);
    if (const auto *node = std::get_if<CachedNode>(&object)) {
        if (kind == EventKind::deleted) {
            nodes_.erase(node->name);
        } else {
            nodes_.insert_or_assign(node->name, *node);
        }
        return;
    }
    const auto &pod = std::get<CachedPod>(object);
    if (kind == EventKind::deleted) {
        pods_.erase(pod.key());
    } else {
        pods_.insert_or_assign(pod.key(), pod);
    }
}

void StateCache::full_resync(std::vector<CachedNode> nodes, std::vector<CachedPod> pods)
{
    std::map<std::string, CachedNode, std::less<>> fresh_nodes;
    for (auto &node : nodes) {
        auto name = node.name;
        fresh_nodes.insert_or_assign(std::move(name), std::move(node));
    }
    std::map<PodKey, CachedPod> fresh_pods;
    for (auto &pod : pods) {
        auto key = pod.key();
        fresh_pods.insert_or_assign(std::move(key), std::move(pod));
    }

    std::unique_lock lock(mutex_);
    nodes_.swap(fresh_nodes);
    pods_.swap(fresh_pods);
}

std::optional<CachedNode> StateCache::node(std::string_view name) const
{
    std::shared_lock lock(mutex_);
    auto it = nodes_.find(name);
    if (it == nodes_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<CachedNode> StateCache::nodes() const
{
    std::shared_lock lock(mutex_);
    std::vector<CachedNode> out;
    out.reserve(nodes_.size());
    for (const auto &[_, node] : nodes_) {
        out.push_back(node);
    }
    return out;
}

std::vector<CachedPod> StateCache::pods() const
{
    std::shared_lock lock(mutex_);
    std::vector<CachedPod> out;
    out.reserve(pods_.size());
    for (const auto &[_, pod] : pods_) {
        out.push_back(pod);
    }
    return out;
}

std::size_t StateCache::node_count() const
{
    std::shared_lock lock(mutex_);
    return nodes_.size();
}

std::size_t StateCache::pod_count() const
{
    std::shared_lock lock(mutex_);
    return pods_.size();
}

bool StateCache::operator==(const StateCache &other) const
{
    if (this == &other) {
        return true;
    }
    std::shared_lock lhs(mutex_, std::defer_lock);
    std::shared_lock rhs(other.mutex_, std::defer_lock);
    std::lock(lhs, rhs);
    return nodes_ == other.nodes_ && pods_ == other.pods_;
}

void RecentPlacements::record_placement(const CachedPod &pod, std::string_view node_name, Timestamp now)
{
    std::lock_guard lock(mutex_);
    Entry entry{pod, std::string(node_name), now};
    entry.pod.node_name = entry.node_name;
    entries_.insert_or_assign(pod.key(), std::move(entry));
}

std::vector<RecentPlacements::Entry> RecentPlacements::unexpired(Timestamp now)
{
    std::lock_guard lock(mutex_);
    std::vector<Entry> live;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (now - it->second.placed_at >= ttl_) {
            it = entries_.erase(it);
        } else {
            live.push_back(it->second);
            ++it;
        }
    }
    return live;
}

void RecentPlacements::clear()
{
    std::lock_guard lock(mutex_);
    entries_.clear();
}

std::vector<CachedPod> effective_pods(const std::vector<CachedPod> &api_pods,
                                      const std::vector<RecentPlacements::Entry> &local)
{
    std::map<PodKey, CachedPod> merged;
    for (const auto &pod : api_pods) {
        merged.insert_or_assign(pod.key(), pod);
    }
    for (const auto &entry : local) {
        auto [it, inserted] = merged.try_emplace(entry.pod.key(), entry.pod);
        if (!inserted && !it->second.node_name) {
            it->second.node_name = entry.node_name;
        }
    }
    std::vector<CachedPod> out;
    out.reserve(merged.size());
    for (auto &[_, pod] : merged) {
        out.push_back(std::move(pod));
    }
    return out;
}

std::vector<CachedPod> effective_pods(const StateCache &cache, RecentPlacements &recent, Timestamp now)
{
    return effective_pods(cache.pods(), recent.unexpired(now));
}

ClusterSnapshot snapshot_from_json(const nlohmann::json &doc, std::string_view deployment_label)
{
    ClusterSnapshot snapshot;
    snapshot.raw = doc;
    auto items = [](const nlohmann::json &list) -> const nlohmann::json & {
        // Kubernetes list responses wrap entries in "items".
        if (list.is_object() && list.contains("items")) {
            return list.at("items");
        }
        return list;
    };
    const auto &nodes = items(member(doc, "nodes"));
    const auto &pods = items(member(doc, "pods"));
    if (nodes.is_array()) {
        for (const auto &raw : nodes) {
            snapshot.nodes.push_back(node_from_raw(raw));
        }
    }
    if (pods.is_array()) {
        for (const auto &raw : pods) {
            snapshot.pods.push_back(pod_from_raw(raw, deployment_label));
        }
    }
    return snapshot;
}

ClusterSnapshot load_snapshot(const std::filesystem::path &path, std::string_view deployment_label)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open snapshot: " + path.string());
    }
    return snapshot_from_json(nlohmann::json::parse(in), deployment_label);
}

} // namespace softaffinity
