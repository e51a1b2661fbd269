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

#ifndef SOFTAFFINITY_INTENT_SCHEMA_HPP
#define SOFTAFFINITY_INTENT_SCHEMA_HPP

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace softaffinity {

enum class IntentCategory {
    colocation_proximity,
    topological,
    node_level,
    deployment_level,
    resource_based,
};

enum class MetadataKind {
    none,
    float_value,
    string_value,
    string_list,
};

std::string_view to_string(IntentCategory category);
std::string_view to_string(MetadataKind kind);

struct IntentClass {
    std::string_view name;
    IntentCategory category;
    // Rendered verbatim into the analyzer prompt.
    std::string_view description;
    // Empty iff kind == MetadataKind::none.
    std::string_view metadata_field;
    MetadataKind metadata_kind;
};

class UnknownIntent : public std::runtime_error {
public:
    explicit UnknownIntent(const std::string &name)
        : std::runtime_error("unknown intent: " + name), name_(name)
    {
    }
    const std::string &name() const noexcept { return name_; }

private:
    std::string name_;
};

class MalformedValue : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The closed set of 25 intent classes, in canonical order. Compiled-in so
/// the prompt built from it is byte-stable.
class IntentRegistry {
public:
    static const IntentRegistry &builtin();

    std::span<const IntentClass> classes() const noexcept { return classes_; }
    std::size_t size() const noexcept { return classes_.size(); }

    /// Throws UnknownIntent for anything outside the registry.
    const IntentClass &lookup(std::string_view name) const;
    const IntentClass *find(std::string_view name) const noexcept;

    std::vector<std::string> names() const;

private:
    explicit IntentRegistry(std::span<const IntentClass> classes) : classes_(classes) {}
    std::span<const IntentClass> classes_;
};

using MetadataValue = std::variant<double, std::string, std::vector<std::string>>;

struct DetectedIntent {
    std::string intent;
    double confidence = 1.0;
    double strength = 1.0;
    std::optional<std::string> strength_explanation;
    std::map<std::string, MetadataValue> metadata;

    bool operator==(const DetectedIntent &) const = default;
};

struct ParsedHint {
    std::string hint_text;
    // Keyed by intent name; at most one entry per class.
    std::map<std::string, DetectedIntent> intents;

    bool empty() const noexcept { return intents.empty(); }
    bool contains(std::string_view name) const { return intents.find(std::string(name)) != intents.end(); }

    bool operator==(const ParsedHint &) const = default;
};

inline constexpr double kWeakStrength = 0.5;
inline constexpr double kDefaultStrength = 1.0;
inline constexpr double kStrongStrength = 1.5;

/// Snaps to the nearest of {0.5, 1.0, 1.5}; midpoints round up.
double snap_strength(double raw) noexcept;

/// Normalizes one analyzer entry: clamps confidence, snaps strength, fills
/// missing or unparseable metadata with defaults and drops unknown fields.
/// Throws UnknownIntent or MalformedValue.
DetectedIntent validate_detected(std::string_view raw_intent_name, const nlohmann::json &raw_fields,
                                 const IntentRegistry &registry = IntentRegistry::builtin());

/// Keeps the highest-confidence entry per intent; earlier entries win ties.
ParsedHint parsed_hint_from_entries(std::string hint, std::vector<DetectedIntent> entries);

/// Checks the structural rules every validated intent obeys: registered name,
/// confidence in [0,1], strength on the 3-point scale, exactly the class's
/// metadata field with the right kind. Explanation presence is not checked;
/// see explanation_required().
bool is_well_formed(const DetectedIntent &intent, const IntentRegistry &registry = IntentRegistry::builtin());

inline bool explanation_required(const DetectedIntent &intent) noexcept
{
    return intent.strength != kDefaultStrength;
}

// Wire shape: {"<intent>": {"confidence": c, "strength": w,
// "strength_explanation"?: "...", "<metadata_field>"?: value}, ...}
nlohmann::json intent_fields_to_json(const DetectedIntent &intent);
nlohmann::json to_json(const ParsedHint &parsed);

/// Decodes a wire object. Unknown intent keys are skipped and appended to
/// `skipped` when provided; malformed entries throw.
ParsedHint parsed_hint_from_json(std::string hint, const nlohmann::json &wire,
                                 const IntentRegistry &registry = IntentRegistry::builtin(),
                                 std::vector<std::string> *skipped = nullptr);

} // namespace softaffinity

#endif // SOFTAFFINITY_INTENT_SCHEMA_HPP
