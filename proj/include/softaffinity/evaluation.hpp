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

#ifndef SOFTAFFINITY_EVALUATION_HPP
#define SOFTAFFINITY_EVALUATION_HPP

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "softaffinity/hint_parsers.hpp"
#include "softaffinity/intent_schema.hpp"

namespace softaffinity {

enum class HintCategory { categorical_paraphrasing, combinatorial, strength_nuance, negative_noise };

std::string_view to_string(HintCategory category);
/// Accepts the canonical names plus short aliases ("paraphrasing", "noise", ...).
std::optional<HintCategory> parse_category(std::string_view text);

struct GroundTruthCase {
    std::string prompt;
    ParsedHint expected;
    HintCategory category = HintCategory::categorical_paraphrasing;
};

class SchemaViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Array of {"prompt", "expected", "category"}; "hint"/"text" and
/// "expected_output"/"ground_truth" are read as aliases. Strict mode throws
/// SchemaViolation on the first bad record; lenient mode skips it and notes
/// the index in `skipped`.
std::vector<GroundTruthCase> load_dataset(const nlohmann::json &records, bool strict = true,
                                          std::vector<std::string> *skipped = nullptr);
std::vector<GroundTruthCase> load_dataset(const std::filesystem::path &path, bool strict = true,
                                          std::vector<std::string> *skipped = nullptr);

struct MetadataFieldResult {
    std::string intent;
    std::string field;
    MetadataValue expected;
    std::optional<MetadataValue> predicted;
    bool present = false;
    bool correct = false;
};

struct StrengthResult {
    std::string intent;
    double expected = 1.0;
    double predicted = 1.0;
    bool correct = false;
};

struct ExplanationResult {
    std::string intent;
    bool required = false;
    bool provided = false;
};

struct CaseTally {
    bool exact_set_match = false;
    std::vector<std::string> true_positives;
    std::vector<std::string> false_positives;
    std::vector<std::string> false_negatives;
    std::vector<MetadataFieldResult> metadata;
    std::vector<StrengthResult> strength;
    std::vector<ExplanationResult> explanations;
    std::vector<double> confidence_abs_errors;
    std::chrono::nanoseconds latency{0};
};

/// Floats match within 1e-6 relative, lists as multisets of exact strings,
/// strings case-insensitively.
bool metadata_equal(const MetadataValue &expected, const MetadataValue &predicted);

CaseTally compare_case(const ParsedHint &predicted, const ParsedHint &expected,
                       std::chrono::nanoseconds latency = {});

/// Nearest rank: the ceil(p/100 * n)-th smallest element (1-based).
std::chrono::nanoseconds percentile(std::span<const std::chrono::nanoseconds> latencies, double p);

struct ClassStats {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

struct CategorySummary {
    int cases = 0;
    int exact_matches = 0;
    double subset_accuracy = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct EvalReport {
    int cases = 0;
    int exact_matches = 0;
    double subset_accuracy = 0.0;

    std::map<std::string, ClassStats> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;

    // Ratios over an empty denominator are left unset and print as n/a.
    int metadata_expected = 0;
    int metadata_correct = 0;
    int metadata_present = 0;
    std::optional<double> metadata_accuracy;
    std::optional<double> metadata_completeness;

    int strength_compared = 0;
    int strength_correct = 0;
    std::optional<double> strength_accuracy;

    int explanations_required = 0;
    int explanations_provided = 0;
    std::optional<double> strength_explanation_accuracy;

    std::optional<double> confidence_mae;

    std::chrono::nanoseconds latency_avg{0};
    std::chrono::nanoseconds latency_max{0};
    std::chrono::nanoseconds latency_p95{0};

    std::map<std::string, CategorySummary> per_category;
    std::string backend;
};

/// Macro averages span every class in the registry. `categories`, when
/// given, must be parallel to `tallies`.
EvalReport aggregate(std::span<const CaseTally> tallies, const IntentRegistry &registry = IntentRegistry::builtin(),
                     std::span<const HintCategory> categories = {});

struct EvalRun {
    EvalReport report;
    std::vector<CaseTally> tallies;
    std::vector<ParsedHint> predictions;
    int degraded = 0;
};

/// Runs the analyzer over every case (in parallel with OpenMP) and
/// aggregates in case order.
EvalRun evaluate(std::span<const GroundTruthCase> cases, IntentAnalyzer &analyzer,
                 const IntentRegistry &registry = IntentRegistry::builtin());

nlohmann::json to_json(const EvalReport &report);
/// Text table using the usual row names (Subset Accuracy, Macro Avg. F1-Score, ...).
std::string format_report(const EvalReport &report);

} // namespace softaffinity

#endif // SOFTAFFINITY_EVALUATION_HPP
