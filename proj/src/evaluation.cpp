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

#include "softaffinity/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace softaffinity {

namespace {

std::string normalized_token(std::string_view text)
{
    std::string out;
    for (char c : text) {
        if (c == '-' || c == ' ') {
            out.push_back('_');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

const nlohmann::json *first_of(const nlohmann::json &record, std::initializer_list<const char *> keys)
{
    for (const char *key : keys) {
        if (auto it = record.find(key); it != record.end()) {
            return &*it;
        }
    }
    return nullptr;
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

/// Raw-record checks that validation would otherwise hide by snapping
/// or clamping.
void check_strict(const nlohmann::json &expected)
{
    for (const auto &[name, fields] : expected.items()) {
        if (!fields.is_object()) {
            throw SchemaViolation("intent '" + name + "' is not an object");
        }
        if (auto s = fields.find("strength"); s != fields.end()) {
            if (!s->is_number()) {
                throw SchemaViolation("intent '" + name + "' has a non-numeric strength");
            }
            const double w = s->get<double>();
            if (w != kWeakStrength && w != kDefaultStrength && w != kStrongStrength) {
                throw SchemaViolation("intent '" + name + "' has strength " + s->dump() + " off the 0.5/1.0/1.5 scale");
            }
        }
        if (auto c = fields.find("confidence"); c != fields.end()) {
            if (!c->is_number() || c->get<double>() < 0.0 || c->get<double>() > 1.0) {
                throw SchemaViolation("intent '" + name + "' has confidence outside [0, 1]");
            }
        }
    }
}

GroundTruthCase case_from_record(const nlohmann::json &record, bool strict)
{
    if (!record.is_object()) {
        throw SchemaViolation("record is not an object");
    }
    const auto *prompt = first_of(record, {"prompt", "hint", "text"});
    const auto *expected = first_of(record, {"expected", "expected_output", "ground_truth"});
    const auto *category = first_of(record, {"category", "type"});
    if (prompt == nullptr || !prompt->is_string()) {
        throw SchemaViolation("missing prompt");
    }
    if (expected == nullptr || !expected->is_object()) {
        throw SchemaViolation("missing expected object");
    }
    if (category == nullptr || !category->is_string()) {
        throw SchemaViolation("missing category");
    }
    auto parsed_category = parse_category(category->get<std::string>());
    if (!parsed_category) {
        throw SchemaViolation("unknown category '" + category->get<std::string>() + "'");
    }
    if (strict) {
        check_strict(*expected);
    }

    GroundTruthCase c;
    c.prompt = prompt->get<std::string>();
    c.category = *parsed_category;
    try {
        std::vector<std::string> unknown;
        c.expected = parsed_hint_from_json(c.prompt, *expected, IntentRegistry::builtin(), &unknown);
        if (strict && !unknown.empty()) {
            throw SchemaViolation("unknown intent '" + unknown.front() + "'");
        }
    } catch (const MalformedValue &e) {
        throw SchemaViolation(e.what());
    }
    if (c.category == HintCategory::negative_noise && !c.expected.empty()) {
        throw SchemaViolation("negative_noise case expects intents");
    }
    return c;
}

std::optional<double> ratio_percent(int numerator, int denominator)
{
    if (denominator == 0) {
        return std::nullopt;
    }
    return 100.0 * numerator / denominator;
}

nlohmann::json optional_json(const std::optional<double> &value)
{
    return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

double seconds(std::chrono::nanoseconds d)
{
    return std::chrono::duration<double>(d).count();
}

} // namespace

std::string_view to_string(HintCategory category)
{
    switch (category) {
        case HintCategory::categorical_paraphrasing:
            return "categorical_paraphrasing";
        case HintCategory::combinatorial:
            return "combinatorial";
        case HintCategory::strength_nuance:
            return "strength_nuance";
        case HintCategory::negative_noise:
            return "negative_noise";
    }
    return "unknown";
}

std::optional<HintCategory> parse_category(std::string_view text)
{
    static const std::map<std::string, HintCategory> names{
        {"categorical_paraphrasing", HintCategory::categorical_paraphrasing},
        {"paraphrasing", HintCategory::categorical_paraphrasing},
        {"categorical", HintCategory::categorical_paraphrasing},
        {"combinatorial", HintCategory::combinatorial},
        {"combination", HintCategory::combinatorial},
        {"strength_nuance", HintCategory::strength_nuance},
        {"strength", HintCategory::strength_nuance},
        {"negative_noise", HintCategory::negative_noise},
        {"negative", HintCategory::negative_noise},
        {"noise", HintCategory::negative_noise},
    };
    auto it = names.find(normalized_token(text));
    if (it == names.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<GroundTruthCase> load_dataset(const nlohmann::json &records, bool strict, std::vector<std::string> *skipped)
{
    if (!records.is_array()) {
        throw SchemaViolation("dataset must be a JSON array");
    }
    std::vector<GroundTruthCase> cases;
    cases.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            cases.push_back(case_from_record(records[i], strict));
        } catch (const SchemaViolation &e) {
            const std::string message = "record " + std::to_string(i) + ": " + e.what();
            if (strict) {
                throw SchemaViolation(message);
            }
            if (skipped != nullptr) {
                skipped->push_back(message);
            }
        }
    }
    return cases;
}

std::vector<GroundTruthCase> load_dataset(const std::filesystem::path &path, bool strict,
                                          std::vector<std::string> *skipped)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset: " + path.string());
    }
    return load_dataset(nlohmann::json::parse(in), strict, skipped);
}

bool metadata_equal(const MetadataValue &expected, const MetadataValue &predicted)
{
    if (expected.index() != predicted.index()) {
        return false;
    }
    if (const auto *e = std::get_if<double>(&expected)) {
        const double p = std::get<double>(predicted);
        return *e == p || std::abs(*e - p) <= 1e-6 * std::max(std::abs(*e), std::abs(p));
    }
    if (const auto *e = std::get_if<std::string>(&expected)) {
        return iequals(*e, std::get<std::string>(predicted));
    }
    auto a = std::get<std::vector<std::string>>(expected);
    auto b = std::get<std::vector<std::string>>(predicted);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

CaseTally compare_case(const ParsedHint &predicted, const ParsedHint &expected, std::chrono::nanoseconds latency)
{
    CaseTally tally;
    tally.latency = latency;
    for (const auto &[name, exp] : expected.intents) {
        auto it = predicted.intents.find(name);
        if (it == predicted.intents.end()) {
            tally.false_negatives.push_back(name);
            continue;
        }
        const DetectedIntent &pred = it->second;
        tally.true_positives.push_back(name);

        for (const auto &[field, value] : exp.metadata) {
            MetadataFieldResult r{name, field, value, std::nullopt, false, false};
            if (auto p = pred.metadata.find(field); p != pred.metadata.end()) {
                r.predicted = p->second;
                r.present = true;
                r.correct = metadata_equal(value, p->second);
            }
            tally.metadata.push_back(std::move(r));
        }
        tally.strength.push_back({name, exp.strength, pred.strength, exp.strength == pred.strength});
        tally.explanations.push_back({name, exp.strength != kDefaultStrength,
                                      pred.strength_explanation.has_value() && !pred.strength_explanation->empty()});
        tally.confidence_abs_errors.push_back(std::abs(pred.confidence - exp.confidence));
    }
    for (const auto &[name, _] : predicted.intents) {
        if (!expected.contains(name)) {
            tally.false_positives.push_back(name);
        }
    }
    tally.exact_set_match = tally.false_positives.empty() && tally.false_negatives.empty();
    return tally;
}

std::chrono::nanoseconds percentile(std::span<const std::chrono::nanoseconds> latencies, double p)
{
    if (latencies.empty()) {
        throw EmptyInput("percentile of an empty list");
    }
    if (!(p > 0.0 && p <= 100.0)) {
        throw std::invalid_argument("percentile rank must be in (0, 100]");
    }
    std::vector<std::chrono::nanoseconds> sorted(latencies.begin(), latencies.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

EvalReport aggregate(std::span<const CaseTally> tallies, const IntentRegistry &registry,
                     std::span<const HintCategory> categories)
{
    if (tallies.empty()) {
        throw EmptyInput("no cases to aggregate");
    }
    if (!categories.empty() && categories.size() != tallies.size()) {
        throw std::invalid_argument("categories must be parallel to tallies");
    }

    EvalReport report;
    report.cases = static_cast<int>(tallies.size());
    for (const auto &cls : registry.classes()) {
        report.per_class.emplace(std::string(cls.name), ClassStats{});
    }

    double confidence_error_sum = 0.0;
    std::size_t confidence_count = 0;
    std::vector<std::chrono::nanoseconds> latencies;
    latencies.reserve(tallies.size());

    for (std::size_t i = 0; i < tallies.size(); ++i) {
        const CaseTally &t = tallies[i];
        report.exact_matches += t.exact_set_match ? 1 : 0;
        for (const auto &name : t.true_positives) {
            ++report.per_class[name].tp;
        }
        for (const auto &name : t.false_positives) {
            ++report.per_class[name].fp;
        }
        for (const auto &name : t.false_negatives) {
            ++report.per_class[name].fn;
        }
        for (const auto &m : t.metadata) {
            ++report.metadata_expected;
            report.metadata_present += m.present ? 1 : 0;
            report.metadata_correct += m.correct ? 1 : 0;
        }
        for (const auto &s : t.strength) {
            ++report.strength_compared;
            report.strength_correct += s.correct ? 1 : 0;
        }
        for (const auto &e : t.explanations) {
            if (e.required) {
                ++report.explanations_required;
                report.explanations_provided += e.provided ? 1 : 0;
            }
        }
        for (double err : t.confidence_abs_errors) {
            confidence_error_sum += err;
            ++confidence_count;
        }
        latencies.push_back(t.latency);

        if (!categories.empty()) {
            auto &cat = report.per_category[std::string(to_string(categories[i]))];
            ++cat.cases;
            cat.exact_matches += t.exact_set_match ? 1 : 0;
            cat.tp += static_cast<int>(t.true_positives.size());
            cat.fp += static_cast<int>(t.false_positives.size());
            cat.fn += static_cast<int>(t.false_negatives.size());
        }
    }

    report.subset_accuracy = 100.0 * report.exact_matches / report.cases;
    for (auto &[_, cat] : report.per_category) {
        cat.subset_accuracy = 100.0 * cat.exact_matches / cat.cases;
    }

    double p_sum = 0.0;
    double r_sum = 0.0;
    double f_sum = 0.0;
    for (auto &[_, c] : report.per_class) {
        c.precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
        c.recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fn);
        c.f1 = c.precision + c.recall == 0.0 ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
        p_sum += c.precision;
        r_sum += c.recall;
        f_sum += c.f1;
        report.tp += c.tp;
        report.fp += c.fp;
        report.fn += c.fn;
    }
    const auto classes = static_cast<double>(report.per_class.size());
    report.macro_precision = p_sum / classes;
    report.macro_recall = r_sum / classes;
    report.macro_f1 = f_sum / classes;

    report.metadata_accuracy = ratio_percent(report.metadata_correct, report.metadata_expected);
    report.metadata_completeness = ratio_percent(report.metadata_present, report.metadata_expected);
    report.strength_accuracy = ratio_percent(report.strength_correct, report.strength_compared);
    report.strength_explanation_accuracy = ratio_percent(report.explanations_provided, report.explanations_required);
    if (confidence_count > 0) {
        report.confidence_mae = confidence_error_sum / static_cast<double>(confidence_count);
    }

    std::chrono::nanoseconds total{0};
    for (auto l : latencies) {
        total += l;
        report.latency_max = std::max(report.latency_max, l);
    }
    report.latency_avg = total / static_cast<long>(latencies.size());
    report.latency_p95 = percentile(latencies, 95.0);
    return report;
}

EvalRun evaluate(std::span<const GroundTruthCase> cases, IntentAnalyzer &analyzer, const IntentRegistry &registry)
{
    EvalRun run;
    const auto n = static_cast<long>(cases.size());
    std::vector<AnalysisOutcome> outcomes(cases.size());

    // Backend calls dominate; each iteration writes only its own slot.
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        outcomes[static_cast<std::size_t>(i)] = analyzer.analyze(cases[static_cast<std::size_t>(i)].prompt);
    }

    std::vector<HintCategory> categories;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        run.tallies.push_back(compare_case(outcomes[i].parsed, cases[i].expected, outcomes[i].latency));
        run.predictions.push_back(std::move(outcomes[i].parsed));
        run.degraded += outcomes[i].degraded ? 1 : 0;
        categories.push_back(cases[i].category);
    }
    run.report = aggregate(run.tallies, registry, categories);
    run.report.backend = std::string(to_string(analyzer.backend().source()));
    return run;
}

nlohmann::json to_json(const EvalReport &report)
{
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto &[name, c] : report.per_class) {
        per_class[name] = {{"tp", c.tp},          {"fp", c.fp},         {"fn", c.fn},
                           {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
    }
    nlohmann::json per_category = nlohmann::json::object();
    for (const auto &[name, c] : report.per_category) {
        per_category[name] = {{"cases", c.cases},
                              {"exact_matches", c.exact_matches},
                              {"subset_accuracy", c.subset_accuracy},
                              {"tp", c.tp},
                              {"fp", c.fp},
                              {"fn", c.fn}};
    }
    return {
        {"backend", report.backend},
        {"cases", report.cases},
        {"exact_matches", report.exact_matches},
        {"subset_accuracy", report.subset_accuracy},
        {"macro_precision", report.macro_precision},
        {"macro_recall", report.macro_recall},
        {"macro_f1", report.macro_f1},
        {"tp", report.tp},
        {"fp", report.fp},
        {"fn", report.fn},
        {"metadata_expected", report.metadata_expected},
        {"metadata_correct", report.metadata_correct},
        {"metadata_present", report.metadata_present},
        {"metadata_accuracy", optional_json(report.metadata_accuracy)},
        {"metadata_completeness", optional_json(report.metadata_completeness)},
        {"metadata_scope", "true-positive intents only"},
        {"strength_compared", report.strength_compared},
        {"strength_correct", report.strength_correct},
        {"strength_accuracy", optional_json(report.strength_accuracy)},
        {"explanations_required", report.explanations_required},
        {"explanations_provided", report.explanations_provided},
        {"strength_explanation_accuracy", optional_json(report.strength_explanation_accuracy)},
        {"confidence_mae", optional_json(report.confidence_mae)},
        {"latency_avg_s", seconds(report.latency_avg)},
        {"latency_max_s", seconds(report.latency_max)},
        {"latency_p95_s", seconds(report.latency_p95)},
        {"per_class", std::move(per_class)},
        {"per_category", std::move(per_category)},
    };
}

std::string format_report(const EvalReport &report)
{
    std::ostringstream out;
    auto row = [&out](std::string_view name, const std::string &value) {
        out << "  " << std::left << std::setw(28) << name << value << '\n';
    };
    auto fixed = [](double v, int digits) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(digits) << v;
        return s.str();
    };
    auto percent = [&](const std::optional<double> &v) { return v ? fixed(*v, 2) + "%" : std::string("n/a"); };
    auto secs = [&](std::chrono::nanoseconds d) { return fixed(seconds(d), 4) + "s"; };

    out << "Backend: " << (report.backend.empty() ? "-" : report.backend) << "  Cases: " << report.cases << '\n';
    out << "Intent Classification\n";
    row("Subset Accuracy", fixed(report.subset_accuracy, 2) + "%");
    row("Macro Avg. F1-Score", fixed(report.macro_f1, 2));
    row("Macro Avg. Precision", fixed(report.macro_precision, 2));
    row("Macro Avg. Recall", fixed(report.macro_recall, 2));
    row("Aggregated True Positives", std::to_string(report.tp));
    row("Aggregated False Positives", std::to_string(report.fp));
    row("Aggregated False Negatives", std::to_string(report.fn));
    out << "Metadata Validation (true-positive intents only)\n";
    row("Metadata Accuracy", percent(report.metadata_accuracy));
    row("Metadata Completeness", percent(report.metadata_completeness));
    row("Strength Expl. Accuracy", percent(report.strength_explanation_accuracy));
    row("Correct Metadata Fields",
        std::to_string(report.metadata_correct) + " / " + std::to_string(report.metadata_expected));
    out << "Strength and Confidence\n";
    row("Overall Strength Accuracy", percent(report.strength_accuracy));
    row("Overall Confidence MAE", report.confidence_mae ? fixed(*report.confidence_mae, 4) : "n/a");
    out << "Latency\n";
    row("Avg. Response Time", secs(report.latency_avg));
    row("Max Response Time", secs(report.latency_max));
    row("P95 Response Time", secs(report.latency_p95));
    if (!report.per_category.empty()) {
        out << "Per category\n";
        for (const auto &[name, c] : report.per_category) {
            row(name, std::to_string(c.exact_matches) + "/" + std::to_string(c.cases) + " exact (" +
                          fixed(c.subset_accuracy, 2) + "%), TP " + std::to_string(c.tp) + " FP " +
                          std::to_string(c.fp) + " FN " + std::to_string(c.fn));
        }
    }
    return out.str();
}

} // namespace softaffinity
