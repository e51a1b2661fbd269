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

#include "softaffinity/intent_schema.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

namespace softaffinity {

namespace {

constexpr std::array<IntentClass, 25> kIntentClasses{{
    {"prefer_colocate_same_deployment", IntentCategory::colocation_proximity,
     "Prefer scheduling this pod on the SAME node as existing pods from the SAME deployment. No metadata required.",
     "", MetadataKind::none},
    {"prefer_nearby_nodes_same_deployment", IntentCategory::colocation_proximity,
     "Prefer scheduling this pod on a node TOPOLOGICALLY CLOSE (same rack > zone > region) to existing pods from the SAME deployment. No metadata required.",
     "", MetadataKind::none},
    {"prefer_regions", IntentCategory::topological,
     "Prefer scheduling in specific regions. Extract a list of region names. Metadata field: 'prefer_regions' (MUST be a JSON list of strings, e.g., ['us-east-1', 'eu-west-1']).",
     "prefer_regions", MetadataKind::string_list},
    {"avoid_regions", IntentCategory::topological,
     "Avoid scheduling in specific regions. Extract a list of region names to avoid. Metadata field: 'avoid_regions' (MUST be a JSON list of strings, e.g., ['us-east-1', 'eu-west-1']).",
     "avoid_regions", MetadataKind::string_list},
    {"spread_regions", IntentCategory::topological,
     "Distribute pods of the same deployment across different REGIONS. No metadata required.",
     "", MetadataKind::none},
    {"prefer_zones", IntentCategory::topological,
     "Prefer scheduling in specific availability zones. Extract a list of zone names. Metadata field: 'prefer_zones' (MUST be a JSON list of strings, e.g., ['us-east-1a', 'us-east-1b']).",
     "prefer_zones", MetadataKind::string_list},
    {"avoid_zones", IntentCategory::topological,
     "Avoid scheduling in specific availability zones. Extract a list of zone names to avoid. Metadata field: 'avoid_zones' (MUST be a JSON list of strings, e.g., ['eu-central-1c']).",
     "avoid_zones", MetadataKind::string_list},
    {"spread_zones", IntentCategory::topological,
     "Distribute pods of the same deployment across different availability ZONES. No metadata required.",
     "", MetadataKind::none},
    {"prefer_racks", IntentCategory::topological,
     "Prefer scheduling in specific server racks. Extract a list of rack names. Metadata field: 'prefer_racks' (MUST be a JSON list of strings, e.g., ['rack-a1', 'rack-b2']).",
     "prefer_racks", MetadataKind::string_list},
    {"avoid_racks", IntentCategory::topological,
     "Avoid scheduling in specific server racks. Extract a list of rack names to avoid. Metadata field: 'avoid_racks' (MUST be a JSON list of strings, e.g., ['rack-c3']).",
     "avoid_racks", MetadataKind::string_list},
    {"spread_racks", IntentCategory::topological,
     "Distribute pods of the same deployment across different server RACKS. No metadata required.",
     "", MetadataKind::none},
    {"prefer_nodes", IntentCategory::node_level,
     "Prefer scheduling on specific nodes (servers/hosts). Extract a list of node names. Metadata field: 'prefer_nodes' (MUST be a JSON list of strings, e.g., ['node-101', 'node-102']).",
     "prefer_nodes", MetadataKind::string_list},
    {"avoid_nodes", IntentCategory::node_level,
     "Avoid scheduling on specific nodes (servers/hosts). Extract a list of node names to avoid. Metadata field: 'avoid_nodes' (MUST be a JSON list of strings, e.g., ['node-maint']).",
     "avoid_nodes", MetadataKind::string_list},
    {"spread_nodes", IntentCategory::node_level,
     "Distribute pods of the same deployment across different NODES (servers/hosts). No metadata required.",
     "", MetadataKind::none},
    {"prefer_deployments", IntentCategory::deployment_level,
     "Prefer scheduling near pods from specific other deployments/applications. Extract a list of deployment names. Metadata field: 'prefer_deployments' (MUST be a JSON list of strings, e.g., ['database', 'cache']).",
     "prefer_deployments", MetadataKind::string_list},
    {"avoid_deployments", IntentCategory::deployment_level,
     "Avoid scheduling near pods from specific other deployments/applications. Extract a list of deployment names to avoid. Metadata field: 'avoid_deployments' (MUST be a JSON list of strings, e.g., ['batch-job']).",
     "avoid_deployments", MetadataKind::string_list},
    {"prefer_memory", IntentCategory::resource_based,
     "Prefer nodes with a minimum amount of available RAM. Extract the amount in Gigabytes as a float number. Metadata field: 'prefer_memory_gb' (MUST be a float, e.g., 128.0 for 128GB).",
     "prefer_memory_gb", MetadataKind::float_value},
    {"prefer_cpu", IntentCategory::resource_based,
     "Prefer nodes with a minimum number of CPU cores. Extract the number of cores as a float number. Metadata field: 'prefer_cpu_cores' (MUST be a float, e.g., 16.0 for 16 cores).",
     "prefer_cpu_cores", MetadataKind::float_value},
    {"prefer_gpu", IntentCategory::resource_based,
     "Prefer nodes with GPU hardware (CUDA cores). Extract the minimum number of GPUs required as a float number. Metadata field: 'prefer_gpu_cores' (MUST be a float, e.g., 4.0 for 4 GPUs).",
     "prefer_gpu_cores", MetadataKind::float_value},
    {"prefer_tpu", IntentCategory::resource_based,
     "Prefer nodes with TPU hardware (Tensor Processing Unit). Extract the minimum number of TPU cores required as a float number. Metadata field: 'prefer_tpu_cores' (MUST be a float, e.g., 8.0 for 8 TPU cores).",
     "prefer_tpu_cores", MetadataKind::float_value},
    {"prefer_ssd", IntentCategory::resource_based,
     "Prefer nodes with Solid State Drive (SSD) storage. No metadata required.",
     "", MetadataKind::none},
    {"prefer_public_ip", IntentCategory::resource_based,
     "Prefer nodes that have a public or external IP address. No metadata required.",
     "", MetadataKind::none},
    {"prefer_network_speed", IntentCategory::resource_based,
     "Prefer nodes with a minimum network bandwidth. Extract the speed in Gigabits per second (Gbps) as a float number. Metadata field: 'prefer_network_gbps' (MUST be a float, e.g., 100.0 for 100Gbps).",
     "prefer_network_gbps", MetadataKind::float_value},
    {"prefer_network_type", IntentCategory::resource_based,
     "Prefer nodes with a specific network interface type. Extract the network type name as a string. Metadata field: 'prefer_network_type' (MUST be a string, e.g., 'infiniband', 'ena').",
     "prefer_network_type", MetadataKind::string_value},
    {"prefer_ephemeral_storage", IntentCategory::resource_based,
     "Prefer nodes with a minimum amount of local ephemeral storage. Extract the amount in Gigabytes as a float number. Metadata field: 'prefer_ephemeral_storage_gb' (MUST be a float, e.g., 500.0 for 500GB).",
     "prefer_ephemeral_storage_gb", MetadataKind::float_value},
}};

std::optional<double> number_from_json(const nlohmann::json &value)
{
    if (value.is_number()) {
        return value.get<double>();
    }
    if (value.is_string()) {
        const auto &text = value.get_ref<const std::string &>();
        auto first = text.data();
        auto last = text.data() + text.size();
        while (first < last && *first == ' ') {
            ++first;
        }
        while (last > first && *(last - 1) == ' ') {
            --last;
        }
        double parsed = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, parsed);
        if (ec == std::errc() && ptr == last && first != last) {
            return parsed;
        }
    }
    return std::nullopt;
}

MetadataValue metadata_from_json(const IntentClass &cls, const nlohmann::json &fields)
{
    const std::string field(cls.metadata_field);
    const auto it = fields.find(field);
    const bool missing = it == fields.end() || it->is_null();

    switch (cls.metadata_kind) {
        case MetadataKind::float_value: {
            if (missing) {
                return 1.0;
            }
            auto number = number_from_json(*it);
            return number && std::isfinite(*number) ? *number : 1.0;
        }
        case MetadataKind::string_value: {
            if (missing) {
                return std::string();
            }
            if (!it->is_string()) {
                throw MalformedValue(field + " must be a string");
            }
            return it->get<std::string>();
        }
        case MetadataKind::string_list: {
            if (missing) {
                return std::vector<std::string>{};
            }
            if (!it->is_array()) {
                throw MalformedValue(field + " must be a list of strings");
            }
            std::vector<std::string> items;
            items.reserve(it->size());
            for (const auto &item : *it) {
                if (!item.is_string()) {
                    throw MalformedValue(field + " must be a list of strings");
                }
                items.push_back(item.get<std::string>());
            }
            return items;
        }
        case MetadataKind::none:
            break;
    }
    return {};
}

bool kind_matches(MetadataKind kind, const MetadataValue &value)
{
    switch (kind) {
        case MetadataKind::float_value:
            return std::holds_alternative<double>(value);
        case MetadataKind::string_value:
            return std::holds_alternative<std::string>(value);
        case MetadataKind::string_list:
            return std::holds_alternative<std::vector<std::string>>(value);
        case MetadataKind::none:
            return false;
    }
    return false;
}

} // namespace

std::string_view to_string(IntentCategory category)
{
    switch (category) {
        case IntentCategory::colocation_proximity:
            return "colocation_proximity";
        case IntentCategory::topological:
            return "topological";
        case IntentCategory::node_level:
            return "node_level";
        case IntentCategory::deployment_level:
            return "deployment_level";
        case IntentCategory::resource_based:
            return "resource_based";
    }
    return "unknown";
}

std::string_view to_string(MetadataKind kind)
{
    switch (kind) {
        case MetadataKind::none:
            return "none";
        case MetadataKind::float_value:
            return "float";
        case MetadataKind::string_value:
            return "string";
        case MetadataKind::string_list:
            return "string_list";
    }
    return "unknown";
}

const IntentRegistry &IntentRegistry::builtin()
{
    static const IntentRegistry registry{std::span<const IntentClass>(kIntentClasses)};
    return registry;
}

const IntentClass *IntentRegistry::find(std::string_view name) const noexcept
{
    auto it = std::find_if(classes_.begin(), classes_.end(), [&](const IntentClass &c) { return c.name == name; });
    return it == classes_.end() ? nullptr : &*it;
}

const IntentClass &IntentRegistry::lookup(std::string_view name) const
{
    if (const auto *cls = find(name)) {
        return *cls;
    }
    throw UnknownIntent(std::string(name));
}

std::vector<std::string> IntentRegistry::names() const
{
    std::vector<std::string> out;
    out.reserve(classes_.size());
    for (const auto &cls : classes_) {
        out.emplace_back(cls.name);
    }
    return out;
}

double snap_strength(double raw) noexcept
{
    // Midpoints 0.75 and 1.25 go up.
    if (raw < 0.75) {
        return kWeakStrength;
    }
    if (raw < 1.25) {
        return kDefaultStrength;
    }
    return kStrongStrength;
}

DetectedIntent validate_detected(std::string_view raw_intent_name, const nlohmann::json &raw_fields,
                                 const IntentRegistry &registry)
{
    const IntentClass &cls = registry.lookup(raw_intent_name);
    if (!raw_fields.is_object()) {
        throw MalformedValue("fields of " + std::string(cls.name) + " must be an object");
    }

    DetectedIntent out;
    out.intent = std::string(cls.name);

    if (auto it = raw_fields.find("confidence"); it != raw_fields.end() && !it->is_null()) {
        auto number = number_from_json(*it);
        if (!number || std::isnan(*number)) {
            throw MalformedValue("confidence of " + out.intent + " is not numeric");
        }
        out.confidence = std::clamp(*number, 0.0, 1.0);
    }

    if (auto it = raw_fields.find("strength"); it != raw_fields.end() && !it->is_null()) {
        auto number = number_from_json(*it);
        if (!number || std::isnan(*number)) {
            throw MalformedValue("strength of " + out.intent + " is not numeric");
        }
        out.strength = snap_strength(*number);
    }

    if (auto it = raw_fields.find("strength_explanation"); it != raw_fields.end() && it->is_string()) {
        auto text = it->get<std::string>();
        if (!text.empty()) {
            out.strength_explanation = std::move(text);
        }
    }

    if (cls.metadata_kind != MetadataKind::none) {
        out.metadata.emplace(std::string(cls.metadata_field), metadata_from_json(cls, raw_fields));
    }
    return out;
}

ParsedHint parsed_hint_from_entries(std::string hint, std::vector<DetectedIntent> entries)
{
    ParsedHint parsed;
    parsed.hint_text = std::move(hint);
    for (auto &entry : entries) {
        auto it = parsed.intents.find(entry.intent);
        if (it == parsed.intents.end()) {
            parsed.intents.emplace(entry.intent, std::move(entry));
        } else if (entry.confidence > it->second.confidence) {
            it->second = std::move(entry);
        }
    }
    return parsed;
}

bool is_well_formed(const DetectedIntent &intent, const IntentRegistry &registry)
{
    const IntentClass *cls = registry.find(intent.intent);
    if (cls == nullptr) {
        return false;
    }
    if (!(intent.confidence >= 0.0 && intent.confidence <= 1.0)) {
        return false;
    }
    if (intent.strength != kWeakStrength && intent.strength != kDefaultStrength &&
        intent.strength != kStrongStrength) {
        return false;
    }
    if (intent.strength_explanation && intent.strength_explanation->empty()) {
        return false;
    }
    if (cls->metadata_kind == MetadataKind::none) {
        return intent.metadata.empty();
    }
    if (intent.metadata.size() != 1) {
        return false;
    }
    const auto it = intent.metadata.find(std::string(cls->metadata_field));
    return it != intent.metadata.end() && kind_matches(cls->metadata_kind, it->second);
}

nlohmann::json intent_fields_to_json(const DetectedIntent &intent)
{
    nlohmann::json fields = nlohmann::json::object();
    fields["confidence"] = intent.confidence;
    fields["strength"] = intent.strength;
    if (intent.strength_explanation) {
        fields["strength_explanation"] = *intent.strength_explanation;
    }
    for (const auto &[field, value] : intent.metadata) {
        std::visit([&](const auto &v) { fields[field] = v; }, value);
    }
    return fields;
}

nlohmann::json to_json(const ParsedHint &parsed)
{
    nlohmann::json wire = nlohmann::json::object();
    for (const auto &[name, intent] : parsed.intents) {
        wire[name] = intent_fields_to_json(intent);
    }
    return wire;
}

ParsedHint parsed_hint_from_json(std::string hint, const nlohmann::json &wire, const IntentRegistry &registry,
                                 std::vector<std::string> *skipped)
{
    if (!wire.is_object()) {
        throw MalformedValue("parsed hint must be a JSON object");
    }
    std::vector<DetectedIntent> entries;
    for (const auto &[name, fields] : wire.items()) {
        if (registry.find(name) == nullptr) {
            if (skipped != nullptr) {
                skipped->push_back(name);
            }
            continue;
        }
        entries.push_back(validate_detected(name, fields, registry));
    }
    return parsed_hint_from_entries(std::move(hint), std::move(entries));
}

} // namespace softaffinity
