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
#include "softaffinity/intent_schema.hpp"
#include "support.hpp"

using namespace softaffinity;
using nlohmann::json;

TEST_CASE("registry holds the 25 classes in order")
{
    const auto &reg = IntentRegistry::builtin();
    REQUIRE(reg.size() == 25);
    CHECK(reg.classes().front().name == "prefer_colocate_same_deployment");
    CHECK(reg.classes().back().name == "prefer_ephemeral_storage");

    std::set<std::string_view> names;
    for (const auto &c : reg.classes()) {
        names.insert(c.name);
        CHECK((c.metadata_kind == MetadataKind::none) == c.metadata_field.empty());
    }
    CHECK(names.size() == 25);
}

TEST_CASE("registry lookup")
{
    const auto &reg = IntentRegistry::builtin();
    const auto &gpu = reg.lookup("prefer_gpu");
    CHECK(gpu.metadata_field == "prefer_gpu_cores");
    CHECK(gpu.metadata_kind == MetadataKind::float_value);
    CHECK(gpu.category == IntentCategory::resource_based);

    CHECK(reg.lookup("spread_zones").metadata_kind == MetadataKind::none);
    CHECK(reg.lookup("prefer_network_type").metadata_kind == MetadataKind::string_value);
    CHECK(reg.lookup("avoid_deployments").metadata_kind == MetadataKind::string_list);

    CHECK_THROWS_AS(reg.lookup("prefer_quantum"), UnknownIntent);
    CHECK(reg.find("prefer_quantum") == nullptr);
    try {
        reg.lookup("prefer_quantum");
    } catch (const UnknownIntent &e) {
        CHECK(e.name() == "prefer_quantum");
    }
}

TEST_CASE("strength snaps to the three-point scale")
{
    CHECK(snap_strength(0.5) == 0.5);
    CHECK(snap_strength(1.0) == 1.0);
    CHECK(snap_strength(1.5) == 1.5);
    CHECK(snap_strength(0.7) == 0.5);
    CHECK(snap_strength(0.75) == 1.0);
    CHECK(snap_strength(1.25) == 1.5);
    CHECK(snap_strength(1.2) == 1.0);
    CHECK(snap_strength(3.0) == 1.5);
    CHECK(snap_strength(-1.0) == 0.5);
}

TEST_CASE("validate_detected")
{
    SUBCASE("complete entry")
    {
        auto d = validate_detected(
            "prefer_cpu",
            json{{"confidence", 0.9}, {"strength", 1.5}, {"strength_explanation", "must"}, {"prefer_cpu_cores", 16.0}});
        CHECK(d.intent == "prefer_cpu");
        CHECK(d.confidence == 0.9);
        CHECK(d.strength == 1.5);
        CHECK(d.strength_explanation == "must");
        CHECK(std::get<double>(d.metadata.at("prefer_cpu_cores")) == 16.0);
        CHECK(is_well_formed(d));
    }
    SUBCASE("defaults fill the gaps")
    {
        auto d = validate_detected("prefer_memory", json{{"confidence", 0.8}});
        CHECK(d.strength == 1.0);
        CHECK(std::get<double>(d.metadata.at("prefer_memory_gb")) == 1.0);
        CHECK(is_well_formed(d));

        auto e = validate_detected("prefer_zones", json::object());
        CHECK(e.confidence == 1.0);
        CHECK(std::get<std::vector<std::string>>(e.metadata.at("prefer_zones")).empty());

        auto t = validate_detected("prefer_network_type", json::object());
        CHECK(std::get<std::string>(t.metadata.at("prefer_network_type")).empty());
    }
    SUBCASE("empty list is valid")
    {
        auto d = validate_detected("avoid_zones", json{{"confidence", 1.0}, {"avoid_zones", json::array()}});
        CHECK(std::get<std::vector<std::string>>(d.metadata.at("avoid_zones")).empty());
    }
    SUBCASE("clamping and snapping")
    {
        auto d = validate_detected("prefer_ssd", json{{"confidence", 1.7}, {"strength", 1.2}});
        CHECK(d.confidence == 1.0);
        CHECK(d.strength == 1.0);
        auto low = validate_detected("prefer_ssd", json{{"confidence", -0.3}});
        CHECK(low.confidence == 0.0);
    }
    SUBCASE("numeric strings are accepted")
    {
        auto d = validate_detected("prefer_gpu", json{{"prefer_gpu_cores", "4"}});
        CHECK(std::get<double>(d.metadata.at("prefer_gpu_cores")) == 4.0);
    }
    SUBCASE("unknown fields are dropped and metadata-free classes stay bare")
    {
        auto d = validate_detected("spread_zones", json{{"confidence", 0.9}, {"zones", json::array({"a"})}});
        CHECK(d.metadata.empty());
    }
    SUBCASE("malformed values")
    {
        CHECK_THROWS_AS(validate_detected("avoid_zones", json{{"avoid_zones", "us-east-1a"}}), MalformedValue);
        CHECK_THROWS_AS(validate_detected("avoid_zones", json{{"avoid_zones", json::array({1, 2})}}), MalformedValue);
        CHECK_THROWS_AS(validate_detected("prefer_ssd", json::array()), MalformedValue);
        CHECK_THROWS_AS(validate_detected("prefer_quantum", json::object()), UnknownIntent);
    }
}

TEST_CASE("parsed_hint_from_entries keeps the most confident duplicate")
{
    auto a = testing::intent("prefer_gpu", 0.9);
    auto b = testing::intent("prefer_gpu", 0.7);
    auto parsed = parsed_hint_from_entries("h", {b, a});
    REQUIRE(parsed.intents.size() == 1);
    CHECK(parsed.intents.at("prefer_gpu").confidence == 0.9);

    CHECK(parsed_hint_from_entries("h", {}).empty());
    auto two = parsed_hint_from_entries("h", {testing::intent("prefer_gpu"), testing::intent("spread_zones")});
    CHECK(two.intents.size() == 2);

    // Equal confidence: the earlier entry wins.
    auto first = testing::intent("prefer_ssd", 0.8, 1.5);
    auto second = testing::intent("prefer_ssd", 0.8, 0.5);
    CHECK(parsed_hint_from_entries("h", {first, second}).intents.at("prefer_ssd").strength == 1.5);
}

TEST_CASE("wire round trip")
{
    const json wire = json::parse(R"({
        "prefer_gpu": {"confidence": 0.98, "prefer_gpu_cores": 4.0, "strength": 1.5,
                       "strength_explanation": "User stated 'Requires 4 GPUs.'"},
        "avoid_regions": {"confidence": 0.95, "avoid_regions": ["us-east-1", "ap-south-1"], "strength": 1.0},
        "prefer_network_type": {"confidence": 0.9, "prefer_network_type": "ena", "strength": 0.5,
                                "strength_explanation": "maybe"}
    })");
    const auto parsed = parsed_hint_from_json("hint", wire);
    CHECK(parsed.intents.size() == 3);
    CHECK(to_json(parsed) == wire);
    CHECK(parsed_hint_from_json("hint", to_json(parsed)) == parsed);

    std::vector<std::string> skipped;
    auto partial = parsed_hint_from_json("hint", json{{"prefer_quantum", json::object()}, {"prefer_ssd", json::object()}},
                                         IntentRegistry::builtin(), &skipped);
    CHECK(partial.intents.size() == 1);
    CHECK(skipped == std::vector<std::string>{"prefer_quantum"});
}

TEST_CASE("well-formedness rejects structural violations")
{
    auto d = testing::intent("prefer_gpu");
    CHECK_FALSE(is_well_formed(d)); // metadata field missing
    d.metadata["prefer_gpu_cores"] = 2.0;
    CHECK(is_well_formed(d));
    d.strength = 0.7;
    CHECK_FALSE(is_well_formed(d));
    d.strength = 1.0;
    d.confidence = 1.2;
    CHECK_FALSE(is_well_formed(d));
    d.confidence = 1.0;
    d.metadata["prefer_gpu_cores"] = std::string("2");
    CHECK_FALSE(is_well_formed(d));

    auto weak = testing::intent("prefer_ssd", 1.0, 0.5);
    CHECK(explanation_required(weak));
    CHECK_FALSE(explanation_required(testing::intent("prefer_ssd")));
}
