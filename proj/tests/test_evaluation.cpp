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

#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "softaffinity/evaluation.hpp"
#include "support.hpp"

using namespace softaffinity;
using nlohmann::json;
using std::chrono::milliseconds;

namespace {

std::vector<GroundTruthCase> fixture()
{
    return load_dataset(testing::data_file("eval_fixture.json"));
}

IntentAnalyzer replaying(const std::vector<GroundTruthCase> &cases)
{
    std::map<std::string, ParsedHint> by_hint;
    for (const auto &c : cases) {
        by_hint[sanitize_hint(c.prompt)] = c.expected;
    }
    return IntentAnalyzer(std::make_unique<ScriptedBackend>(std::move(by_hint)));
}

std::vector<HintCategory> categories_of(const std::vector<GroundTruthCase> &cases)
{
    std::vector<HintCategory> out;
    for (const auto &c : cases) {
        out.push_back(c.category);
    }
    return out;
}

} // namespace

TEST_CASE("dataset loading")
{
    const auto cases = fixture();
    CHECK(cases.size() >= 40);
    std::map<HintCategory, int> per_category;
    std::set<std::string> classes;
    for (const auto &c : cases) {
        ++per_category[c.category];
        for (const auto &[name, _] : c.expected.intents) {
            classes.insert(name);
        }
        if (c.category == HintCategory::negative_noise) {
            CHECK(c.expected.empty());
        }
    }
    CHECK(per_category.size() == 4);
    CHECK(classes.size() == 25);

    CHECK(load_dataset(json::array()).empty());

    const json strength = json::array({{{"prompt", "x"},
                                        {"expected", {{"prefer_ssd", {{"confidence", 1.0}, {"strength", 0.7}}}}},
                                        {"category", "strength_nuance"}}});
    CHECK_THROWS_AS(load_dataset(strength), SchemaViolation);
    // Lenient mode snaps instead of rejecting, and skips records it cannot read.
    std::vector<std::string> skipped;
    const auto snapped = load_dataset(strength, false, &skipped);
    REQUIRE(snapped.size() == 1);
    CHECK(snapped.front().expected.intents.at("prefer_ssd").strength == 0.5);
    CHECK(skipped.empty());
    const json unreadable = json::array({{{"prompt", "x"}}, strength.at(0)});
    CHECK(load_dataset(unreadable, false, &skipped).size() == 1);
    CHECK(skipped.size() == 1);

    const json aliases = json::array({{{"hint", "fast disks"},
                                       {"expected_output", {{"prefer_ssd", {{"confidence", 1.0}, {"strength", 1.0}}}}},
                                       {"type", "paraphrasing"}}});
    const auto aliased = load_dataset(aliases);
    REQUIRE(aliased.size() == 1);
    CHECK(aliased.front().prompt == "fast disks");
    CHECK(aliased.front().category == HintCategory::categorical_paraphrasing);

    CHECK_THROWS_AS(load_dataset(json::array({{{"prompt", "x"}, {"expected", {{"prefer_quantum", json::object()}}},
                                               {"category", "combinatorial"}}})),
                    SchemaViolation);
    CHECK_THROWS_AS(load_dataset(json::array({{{"prompt", "x"}, {"expected", {{"prefer_ssd", json::object()}}},
                                               {"category", "negative_noise"}}})),
                    SchemaViolation);
    CHECK_THROWS_AS(load_dataset(json::array({{{"prompt", "x"}, {"expected", json::object()}, {"category", "misc"}}})),
                    SchemaViolation);
    CHECK_THROWS_AS(load_dataset(json::object()), SchemaViolation);
}

TEST_CASE("compare_case")
{
    auto zones = testing::intent("avoid_zones");
    zones.metadata["avoid_zones"] = std::vector<std::string>{"us-east-1a", "us-east-1b"};
    auto wrong = zones;
    wrong.metadata["avoid_zones"] = std::vector<std::string>{"us-east-1"};
    const auto t = compare_case(testing::hint_of({wrong}), testing::hint_of({zones}));
    CHECK(t.true_positives.size() == 1);
    REQUIRE(t.metadata.size() == 1);
    CHECK(t.metadata.front().present);
    CHECK_FALSE(t.metadata.front().correct);
    CHECK(t.exact_set_match);

    const auto missed = compare_case(ParsedHint{}, testing::hint_of({testing::intent("spread_zones")}));
    CHECK(missed.false_negatives.size() == 1);
    CHECK_FALSE(missed.exact_set_match);
    CHECK(missed.strength.empty());

    auto gpu = testing::intent("prefer_gpu", 0.9, 1.5);
    gpu.metadata["prefer_gpu_cores"] = 4.0;
    auto cpu = testing::intent("prefer_cpu", 0.8, 0.5);
    cpu.metadata["prefer_cpu_cores"] = 8.0;
    cpu.strength_explanation = "maybe";
    const auto three = testing::hint_of({gpu, cpu, testing::intent("spread_zones")});
    const auto same = compare_case(three, three);
    CHECK(same.exact_set_match);
    CHECK(same.true_positives.size() == 3);
    CHECK(same.false_positives.empty());
    for (const auto &m : same.metadata) {
        CHECK(m.correct);
    }
    CHECK(same.explanations.size() == 3);
    int required = 0, provided = 0;
    for (const auto &e : same.explanations) {
        required += e.required;
        provided += e.required && e.provided;
    }
    CHECK(required == 2);
    CHECK(provided == 1);
}

TEST_CASE("metadata equality")
{
    CHECK(metadata_equal(4.0, 4.0 * (1 + 1e-9)));
    CHECK_FALSE(metadata_equal(4.0, 4.1));
    CHECK(metadata_equal(std::vector<std::string>{"a", "b", "a"}, std::vector<std::string>{"a", "a", "b"}));
    CHECK_FALSE(metadata_equal(std::vector<std::string>{"a", "b"}, std::vector<std::string>{"a", "b", "b"}));
    CHECK_FALSE(metadata_equal(std::vector<std::string>{"us-east-1a"}, std::vector<std::string>{"us-east-1*"}));
    CHECK(metadata_equal(std::string("ENA"), std::string("ena")));
    CHECK_FALSE(metadata_equal(std::string("4"), 4.0));
}

TEST_CASE("percentile goldens")
{
    std::vector<std::chrono::nanoseconds> grid;
    for (int i = 1; i <= 100; ++i) {
        grid.push_back(milliseconds(i));
    }
    std::shuffle(grid.begin(), grid.end(), std::mt19937(5));
    CHECK(percentile(grid, 95) == milliseconds(95));
    CHECK(percentile(grid, 100) == milliseconds(100));
    CHECK(percentile(grid, 0.5) == milliseconds(1));
    const std::vector<std::chrono::nanoseconds> one{milliseconds(7)};
    CHECK(percentile(one, 1) == milliseconds(7));
    CHECK(percentile(one, 95) == milliseconds(7));
    const std::vector<std::chrono::nanoseconds> two{milliseconds(20), milliseconds(10)};
    CHECK(percentile(two, 95) == milliseconds(20));
    CHECK(percentile(two, 50) == milliseconds(10));
    CHECK_THROWS_AS(percentile(std::span<const std::chrono::nanoseconds>{}, 95), EmptyInput);
    CHECK_THROWS(percentile(two, 0));
    CHECK_THROWS(percentile(two, 101));
}

TEST_CASE("aggregate small cases")
{
    const auto gpu = testing::hint_of({testing::intent("prefer_ssd")});
    std::vector<CaseTally> tallies{compare_case(gpu, gpu), compare_case(gpu, gpu), compare_case(ParsedHint{}, gpu)};
    const auto report = aggregate(tallies);
    CHECK(report.subset_accuracy == doctest::Approx(66.6667).epsilon(1e-4));
    CHECK(report.tp == 2);
    CHECK(report.fn == 1);
    CHECK(report.per_class.at("prefer_ssd").recall == doctest::Approx(2.0 / 3.0));
    CHECK(report.per_class.at("prefer_gpu").f1 == 1.0);
    CHECK_FALSE(report.metadata_accuracy.has_value());
    CHECK(to_json(report).at("metadata_accuracy").is_null());
    CHECK(format_report(report).find("n/a") != std::string::npos);
    CHECK_THROWS_AS(aggregate(std::span<const CaseTally>{}), EmptyInput);
}

TEST_CASE("perfect predictor")
{
    const auto cases = fixture();
    auto analyzer = replaying(cases);
    const auto run = evaluate(cases, analyzer);
    const auto &r = run.report;
    CHECK(r.subset_accuracy == 100.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.macro_precision == 1.0);
    CHECK(r.macro_recall == 1.0);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    CHECK(r.confidence_mae == 0.0);
    CHECK(r.metadata_accuracy == 100.0);
    CHECK(r.strength_accuracy == 100.0);
    CHECK(r.strength_explanation_accuracy == 100.0);
    CHECK(run.degraded == 0);
    CHECK(r.per_category.size() == 4);
}

TEST_CASE("empty predictor")
{
    const auto cases = fixture();
    IntentAnalyzer analyzer(std::make_unique<ScriptedBackend>(std::map<std::string, ParsedHint>{}));
    const auto r = evaluate(cases, analyzer).report;

    int noise = 0, expected_intents = 0;
    std::map<std::string, int> support;
    for (const auto &c : cases) {
        noise += c.category == HintCategory::negative_noise ? 1 : 0;
        expected_intents += static_cast<int>(c.expected.intents.size());
        for (const auto &[name, _] : c.expected.intents) {
            ++support[name];
        }
    }
    CHECK(r.subset_accuracy == doctest::Approx(100.0 * noise / double(cases.size())));
    CHECK(r.tp == 0);
    CHECK(r.fp == 0);
    CHECK(r.fn == expected_intents);
    for (const auto &[name, n] : support) {
        CHECK(r.per_class.at(name).recall == 0.0);
        CHECK(r.per_class.at(name).fn == n);
    }
    CHECK_FALSE(r.strength_accuracy.has_value());
}

TEST_CASE("conservation, permutation invariance and self-evaluation")
{
    auto cases = fixture();
    IntentAnalyzer regex(std::make_unique<RegexBackend>());
    const auto run = evaluate(cases, regex);
    int tp = 0, fp = 0, fn = 0;
    for (const auto &[_, c] : run.report.per_class) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    CHECK(tp == run.report.tp);
    CHECK(fp == run.report.fp);
    CHECK(fn == run.report.fn);
    int category_cases = 0;
    for (const auto &[_, c] : run.report.per_category) {
        category_cases += c.cases;
    }
    CHECK(category_cases == run.report.cases);

    auto tallies = run.tallies;
    auto categories = categories_of(cases);
    std::vector<std::size_t> order(tallies.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937(9));
    std::vector<CaseTally> shuffled;
    std::vector<HintCategory> shuffled_categories;
    for (auto i : order) {
        shuffled.push_back(tallies[i]);
        shuffled_categories.push_back(categories[i]);
    }
    const auto a = to_json(aggregate(tallies, IntentRegistry::builtin(), categories));
    const auto b = to_json(aggregate(shuffled, IntentRegistry::builtin(), shuffled_categories));
    CHECK(a == b);

    // Ground truth built from the regex engine's own output.
    std::vector<GroundTruthCase> own = cases;
    for (std::size_t i = 0; i < own.size(); ++i) {
        own[i].expected = run.predictions[i];
    }
    IntentAnalyzer again(std::make_unique<RegexBackend>());
    const auto self = evaluate(own, again).report;
    CHECK(self.subset_accuracy == 100.0);
    CHECK(self.confidence_mae.value_or(0.0) == 0.0);

    // Adding an exactly matched case never lowers subset accuracy.
    auto more = tallies;
    more.push_back(compare_case(ParsedHint{}, ParsedHint{}));
    CHECK(aggregate(more).subset_accuracy >= aggregate(tallies).subset_accuracy);
}

TEST_CASE("report rendering")
{
    const auto cases = fixture();
    IntentAnalyzer regex(std::make_unique<RegexBackend>());
    const auto report = evaluate(cases, regex).report;
    const auto text = format_report(report);
    for (const char *row : {"Subset Accuracy", "Macro Avg. F1-Score", "Overall Strength Accuracy"}) {
        CHECK(text.find(row) != std::string::npos);
    }
    const auto doc = to_json(report);
    CHECK(doc.at("cases") == cases.size());
    CHECK(doc.at("per_class").size() == 25);
}
