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

#ifndef SOFTAFFINITY_HINT_PARSERS_HPP
#define SOFTAFFINITY_HINT_PARSERS_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "softaffinity/intent_schema.hpp"

namespace softaffinity {

inline constexpr std::size_t kDefaultMaxHintLength = 2048;

enum class LlmDialect {
    // {"model", "prompt", "temperature", "top_p", "max_tokens"} -> {"completion"}
    stub,
    // Bedrock InvokeModel messages body -> output.message.content[0].text
    bedrock,
};

struct AnalyzerConfig {
    std::string endpoint;
    std::string model_id;
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 512;
    std::chrono::milliseconds request_timeout{10000};
    std::size_t max_hint_length = kDefaultMaxHintLength;
    LlmDialect dialect = LlmDialect::stub;
};

LlmDialect parse_dialect(std::string_view text);

enum class AnalysisSource { regex, llm, scripted, cache };
std::string_view to_string(AnalysisSource source);

struct AnalysisOutcome {
    ParsedHint parsed;
    std::chrono::nanoseconds latency{0};
    AnalysisSource source = AnalysisSource::regex;
    // Backend failed; parsed is empty and scoring falls back to neutral.
    bool degraded = false;
    std::string detail;
};

class Unparseable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BackendUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Drops control characters (tab, CR and LF survive), collapses runs of
/// three or more '-' to one, and truncates to max_length code points.
std::string sanitize_hint(std::string_view text, std::size_t max_length = kDefaultMaxHintLength);

std::string build_prompt(const IntentRegistry &registry, std::string_view sanitized_hint);

/// Pulls the first balanced {...} out of a completion (fences and chatter
/// around it are ignored) and validates every entry. Unknown intents and
/// malformed entries are dropped and described in `warnings`.
ParsedHint decode_model_response(std::string_view text, const IntentRegistry &registry = IntentRegistry::builtin(),
                                 std::vector<std::string> *warnings = nullptr);

/// Deterministic keyword/pattern baseline. Every match gets confidence 0.9.
ParsedHint regex_parse(std::string_view hint, const IntentRegistry &registry = IntentRegistry::builtin());

class HintBackend {
public:
    virtual ~HintBackend() = default;
    /// Receives an already-sanitized hint. Throws BackendUnavailable.
    virtual ParsedHint parse(const std::string &sanitized_hint) = 0;
    virtual AnalysisSource source() const = 0;
};

class RegexBackend : public HintBackend {
public:
    ParsedHint parse(const std::string &sanitized_hint) override;
    AnalysisSource source() const override { return AnalysisSource::regex; }
};

/// Replays fixture parses: a JSON array of {"hint": text, "parsed": wire}.
/// Unknown hints parse to nothing.
class ScriptedBackend : public HintBackend {
public:
    explicit ScriptedBackend(std::map<std::string, ParsedHint> by_hint);
    static ScriptedBackend from_json(const nlohmann::json &records);
    static ScriptedBackend from_file(const std::filesystem::path &path);

    ParsedHint parse(const std::string &sanitized_hint) override;
    AnalysisSource source() const override { return AnalysisSource::scripted; }

    const std::map<std::string, ParsedHint> &records() const noexcept { return by_hint_; }

private:
    std::map<std::string, ParsedHint> by_hint_;
};

/// Remote model over HTTP. Transport is swappable for tests.
class LlmBackend : public HintBackend {
public:
    using Transport = std::function<std::string(const AnalyzerConfig &, const std::string &body)>;

    explicit LlmBackend(AnalyzerConfig config, const IntentRegistry &registry = IntentRegistry::builtin());
    LlmBackend(AnalyzerConfig config, Transport transport, const IntentRegistry &registry = IntentRegistry::builtin());

    ParsedHint parse(const std::string &sanitized_hint) override;
    AnalysisSource source() const override { return AnalysisSource::llm; }

    std::string request_body(const std::string &prompt) const;
    std::string completion_text(const std::string &response_body) const;

    const AnalyzerConfig &config() const noexcept { return config_; }

private:
    AnalyzerConfig config_;
    Transport transport_;
    const IntentRegistry *registry_;
};

/// POSTs `body` to config.endpoint with cpp-httplib, honouring the timeout.
std::string http_transport(const AnalyzerConfig &config, const std::string &body);

/// Front door for hint analysis: sanitizes, memoizes by raw hint, coalesces
/// concurrent callers so each distinct hint reaches the backend at most once.
/// Failed calls are not memoized.
class IntentAnalyzer {
public:
    explicit IntentAnalyzer(std::unique_ptr<HintBackend> backend, std::size_t max_hint_length = kDefaultMaxHintLength);

    AnalysisOutcome analyze(const std::string &hint);

    std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
    void clear_cache();
    HintBackend &backend() noexcept { return *backend_; }

private:
    std::unique_ptr<HintBackend> backend_;
    std::size_t max_hint_length_;
    std::mutex mutex_;
    std::map<std::string, std::shared_future<ParsedHint>> memo_;
    std::atomic<std::size_t> backend_calls_{0};
};

} // namespace softaffinity

#endif // SOFTAFFINITY_HINT_PARSERS_HPP
