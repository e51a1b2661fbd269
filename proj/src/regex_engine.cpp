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

// Keyword and pattern baseline. The hint is lowercased (Kubernetes object
// names are lowercase anyway), cut into clauses, and each clause is cut once
// more at its first negation marker: names after the marker feed the avoid_*
// intents, names before it the prefer_* ones. Strength comes from the
// clause's keywords.

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "softaffinity/hint_parsers.hpp"

namespace softaffinity {

namespace {

constexpr double kRegexConfidence = 0.9;

using std::regex;
constexpr auto kFlags = regex::ECMAScript | regex::optimize;

struct Patterns {
    regex clause_break{R"([.;!?](?=\s|$)|,?\s+but\s+|,?\s+however,?\s+|\s+whereas\s+)", kFlags};
    regex negation{R"(\b(avoid\w*|not|never|away from|exclud\w*|stay off|steer clear|don't|cannot|can't|without)\b)",
                   kFlags};

    regex strong{R"(\b(must|critical|required|requires|absolutely|essential|high priority|need|needs|forbidden|do not|don't|cannot|can't|only)\b)",
                 kFlags};
    regex weak{R"(\b(prefer|preferred|prefers|preferably|if possible|try|maybe|nice to have|optional|optionally|low priority|suggestion|like|ideally)\b)",
               kFlags};

    regex zone{R"(\b[a-z]{2}-[a-z]+-\d[a-z]\b)", kFlags};
    regex region{R"(\b[a-z]{2}-[a-z]+-\d\b)", kFlags};
    regex rack{R"(\brack-[a-z0-9][a-z0-9-]*\b)", kFlags};
    regex node{R"(\b(?:node|worker|host|server|minikube)-[a-z0-9][a-z0-9-]*\b)", kFlags};

    regex quoted{R"(['"`]([a-z0-9][a-z0-9._-]*)['"`])", kFlags};
    regex named_deployment{R"(\b([a-z][a-z0-9-]*)\s+(?:deployments?|pods|apps?|applications?|services?|workloads?)\b)",
                           kFlags};
    regex deployment_context{R"(\b(deployments?|pods?|apps?|applications?|services?|workloads?)\b)", kFlags};

    regex spread_verb{R"(\b(spread\w*|distribut\w*|balanc\w*|scatter\w*|fan out|evenly|anti-affinity)\b)", kFlags};
    regex spread_domain{R"(\b(regions?|zones?|racks?|nodes?|hosts?|servers?|machines?)\b)", kFlags};

    regex colocate{R"(\b(co-?locat\w*|collocat\w*|pack\w* together|together on)\b|\b(all|every)\s+(the\s+)?(pods|replicas)\b.*\b(single|one|same)\s+(node|host|machine|server)\b)",
                   kFlags};
    regex own_deployment{R"(\b(this|same|its own|our|my) deployment\b|\beach other\b|\btogether\b|\bsibling|\bother replicas\b|\bown replicas\b)",
                         kFlags};
    regex nearby{R"(\b(near\w*|close|closer|proximity|adjacent|topologically)\b)", kFlags};

    regex gpu{R"(\b(gpus?|cuda|nvidia)\b)", kFlags};
    regex gpu_count{R"(\b(\d+(?:\.\d+)?)\s*(?:x\s*)?(?:[a-z0-9]+\s+)?(?:gpus?|cuda gpus?)\b)", kFlags};
    regex tpu{R"(\b(tpus?|tensor processing units?)\b)", kFlags};
    regex tpu_count{R"(\b(\d+(?:\.\d+)?)\s*(?:x\s*)?(?:tpus?|tpu cores?|tpu chips?)\b)", kFlags};
    regex cpu{R"(\b(cpus?|vcpus?|processors?|compute cores)\b|\b\d+(?:\.\d+)?\s*cores\b)", kFlags};
    regex cpu_count{R"(\b(\d+(?:\.\d+)?)\s*(?:v?cpus?|(?:v?cpu\s+)?cores|processors?)\b)", kFlags};
    regex memory{R"(\b(ram|memory)\b)", kFlags};
    regex ephemeral{R"(\b(ephemeral|scratch space|scratch storage|local storage|local disk|temp storage|temporary storage)\b)",
                    kFlags};
    regex size_gb{R"(\b(\d+(?:\.\d+)?)\s*(tb|tib|gb|gib|g)\b)", kFlags};
    regex ssd{R"(\b(ssds?|nvme|solid[- ]state|flash storage)\b)", kFlags};
    regex public_ip{R"(\b(public ip|public ips|external ip|public address|publicly (?:reachable|accessible)|internet[- ]facing)\b)",
                    kFlags};
    regex network_speed{R"(\b(\d+(?:\.\d+)?)\s*(?:gbps|gbit/s|gb/s|gigabits?)\b)", kFlags};
    regex network_generic{R"(\b(network speed|bandwidth|fast network|high-bandwidth|low latency network)\b)", kFlags};
    regex network_type{R"(\b(infiniband|ena|efa|roce|sr-iov|sriov|elastic fabric adapter)\b)", kFlags};
};

const Patterns &patterns()
{
    static const Patterns p;
    return p;
}

const std::set<std::string> &name_stopwords()
{
    static const std::set<std::string> words{
        "a",     "all",   "an",    "any",   "both",   "different", "each",   "every",   "existing", "its",
        "my",    "other", "our",   "same",  "single", "some",      "that",   "the",     "these",    "this",
        "those", "your",  "their", "of",    "from",   "with",      "my-own", "replica", "own",      "new",
        "more",  "many",  "few",   "other", "sibling", "running",  "multiple"};
    return words;
}

std::string lowercase(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::vector<std::string> split_clauses(const std::string &text)
{
    std::vector<std::string> clauses;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), patterns().clause_break);
         it != std::sregex_iterator(); ++it) {
        clauses.push_back(text.substr(last, static_cast<std::size_t>(it->position()) - last));
        last = static_cast<std::size_t>(it->position() + it->length());
    }
    clauses.push_back(text.substr(last));
    std::erase_if(clauses, [](const std::string &c) {
        return std::all_of(c.begin(), c.end(), [](unsigned char ch) { return std::isspace(ch); });
    });
    return clauses;
}

std::vector<std::string> all_matches(const std::string &text, const regex &re, int group = 0)
{
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        std::string value = (*it)[group].str();
        if (std::find(out.begin(), out.end(), value) == out.end()) {
            out.push_back(std::move(value));
        }
    }
    return out;
}

std::optional<double> first_number(const std::string &text, const regex &re)
{
    std::smatch m;
    if (std::regex_search(text, m, re)) {
        return std::stod(m[1].str());
    }
    return std::nullopt;
}

/// Size in GB closest to the keyword, searching within a small window.
std::optional<double> nearest_size_gb(const std::string &text, const regex &keyword)
{
    std::smatch key;
    if (!std::regex_search(text, key, keyword)) {
        return std::nullopt;
    }
    const auto key_pos = static_cast<long>(key.position());
    std::optional<double> best;
    long best_distance = 48;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), patterns().size_gb); it != std::sregex_iterator();
         ++it) {
        const long distance = std::labs(static_cast<long>(it->position()) - key_pos);
        if (distance < best_distance) {
            best_distance = distance;
            double value = std::stod((*it)[1].str());
            const std::string unit = (*it)[2].str();
            if (unit == "tb" || unit == "tib") {
                value *= 1024.0;
            }
            best = value;
        }
    }
    return best;
}

bool is_location_token(const std::string &token)
{
    const auto &p = patterns();
    return std::regex_match(token, p.zone) || std::regex_match(token, p.region) || std::regex_match(token, p.rack) ||
           std::regex_match(token, p.node);
}

std::vector<std::string> deployment_names(const std::string &segment)
{
    const auto &p = patterns();
    std::vector<std::string> names;
    auto add = [&](std::string name) {
        if (name_stopwords().contains(name) || is_location_token(name)) {
            return;
        }
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            names.push_back(std::move(name));
        }
    };
    if (std::regex_search(segment, p.deployment_context)) {
        for (auto &q : all_matches(segment, p.quoted, 1)) {
            add(std::move(q));
        }
    }
    if (names.empty()) {
        for (auto &n : all_matches(segment, p.named_deployment, 1)) {
            add(std::move(n));
        }
    }
    return names;
}

struct ClauseStrength {
    double value = kDefaultStrength;
    std::optional<std::string> explanation;
};

ClauseStrength clause_strength(const std::string &clause)
{
    const auto &p = patterns();
    auto quote = [](const std::vector<std::string> &words) {
        std::string text = "User stated ";
        for (std::size_t i = 0; i < words.size(); ++i) {
            text += (i == 0 ? "'" : ", '") + words[i] + "'";
        }
        return text;
    };
    if (auto strong = all_matches(clause, p.strong); !strong.empty()) {
        return {kStrongStrength, quote(strong)};
    }
    if (auto weak = all_matches(clause, p.weak); !weak.empty()) {
        return {kWeakStrength, quote(weak)};
    }
    return {};
}

class Collector {
public:
    explicit Collector(const IntentRegistry &registry) : registry_(registry) {}

    void add(const std::string &name, const ClauseStrength &strength, std::optional<MetadataValue> value = {})
    {
        const auto &cls = registry_.lookup(name);
        auto [it, inserted] = found_.try_emplace(name);
        DetectedIntent &intent = it->second;
        if (inserted) {
            intent.intent = name;
            intent.confidence = kRegexConfidence;
            intent.strength = strength.value;
            intent.strength_explanation = strength.explanation;
            order_.push_back(name);
        }
        if (cls.metadata_kind == MetadataKind::none) {
            return;
        }
        const std::string field(cls.metadata_field);
        auto existing = intent.metadata.find(field);
        if (cls.metadata_kind == MetadataKind::string_list) {
            auto incoming = value ? std::get<std::vector<std::string>>(*value) : std::vector<std::string>{};
            if (existing == intent.metadata.end()) {
                intent.metadata.emplace(field, std::move(incoming));
                return;
            }
            auto &list = std::get<std::vector<std::string>>(existing->second);
            for (auto &item : incoming) {
                if (std::find(list.begin(), list.end(), item) == list.end()) {
                    list.push_back(std::move(item));
                }
            }
            return;
        }
        if (existing == intent.metadata.end()) {
            if (value) {
                intent.metadata.emplace(field, *value);
            } else if (cls.metadata_kind == MetadataKind::float_value) {
                intent.metadata.emplace(field, 1.0);
            } else {
                intent.metadata.emplace(field, std::string{});
            }
        }
    }

    std::vector<DetectedIntent> take()
    {
        std::vector<DetectedIntent> out;
        for (const auto &name : order_) {
            out.push_back(std::move(found_.at(name)));
        }
        return out;
    }

private:
    const IntentRegistry &registry_;
    std::map<std::string, DetectedIntent> found_;
    std::vector<std::string> order_;
};

std::vector<std::string> as_list(std::vector<std::string> values)
{
    return values;
}

void scan_locations(const std::string &segment, bool negative, const ClauseStrength &strength, Collector &out)
{
    const auto &p = patterns();
    const char *prefix = negative ? "avoid_" : "prefer_";
    struct Kind {
        const regex *re;
        const char *suffix;
    };
    for (const Kind kind : {Kind{&p.region, "regions"}, Kind{&p.zone, "zones"}, Kind{&p.rack, "racks"},
                            Kind{&p.node, "nodes"}}) {
        auto found = all_matches(segment, *kind.re);
        // Rack and node names both look like "<word>-<id>"; racks win.
        if (std::string_view(kind.suffix) == "nodes") {
            std::erase_if(found, [&](const std::string &n) { return std::regex_match(n, p.rack); });
        }
        if (!found.empty()) {
            out.add(std::string(prefix) + kind.suffix, strength, MetadataValue(as_list(std::move(found))));
        }
    }
}

void scan_deployments(const std::string &segment, bool negative, const ClauseStrength &strength, Collector &out)
{
    auto names = deployment_names(segment);
    if (!names.empty()) {
        out.add(negative ? "avoid_deployments" : "prefer_deployments", strength, MetadataValue(std::move(names)));
    }
}

void scan_spread(const std::string &segment, const ClauseStrength &strength, Collector &out)
{
    const auto &p = patterns();
    std::smatch verb;
    if (!std::regex_search(segment, verb, p.spread_verb)) {
        return;
    }
    const std::string rest = segment.substr(static_cast<std::size_t>(verb.position()));
    std::smatch domain;
    if (!std::regex_search(rest, domain, p.spread_domain)) {
        return;
    }
    const std::string noun = domain[1].str();
    if (noun.starts_with("region")) {
        out.add("spread_regions", strength);
    } else if (noun.starts_with("zone")) {
        out.add("spread_zones", strength);
    } else if (noun.starts_with("rack")) {
        out.add("spread_racks", strength);
    } else {
        out.add("spread_nodes", strength);
    }
}

void scan_affinity(const std::string &segment, const ClauseStrength &strength, Collector &out)
{
    const auto &p = patterns();
    const bool own = std::regex_search(segment, p.own_deployment);
    const bool named = !deployment_names(segment).empty();
    if (std::regex_search(segment, p.colocate) && (own || !named)) {
        out.add("prefer_colocate_same_deployment", strength);
        return;
    }
    if (std::regex_search(segment, p.nearby) && own && !named) {
        out.add("prefer_nearby_nodes_same_deployment", strength);
    }
}

void scan_resources(const std::string &segment, const ClauseStrength &strength, Collector &out)
{
    const auto &p = patterns();
    if (std::regex_search(segment, p.gpu)) {
        out.add("prefer_gpu", strength, MetadataValue(first_number(segment, p.gpu_count).value_or(1.0)));
    }
    if (std::regex_search(segment, p.tpu)) {
        out.add("prefer_tpu", strength, MetadataValue(first_number(segment, p.tpu_count).value_or(1.0)));
    }
    std::string without_accel = std::regex_replace(segment, regex(R"(\b(tpu|gpu|cuda)\s+cores?\b)"), " ");
    if (std::regex_search(without_accel, p.cpu)) {
        out.add("prefer_cpu", strength, MetadataValue(first_number(without_accel, p.cpu_count).value_or(1.0)));
    }
    if (std::regex_search(segment, p.memory)) {
        out.add("prefer_memory", strength, MetadataValue(nearest_size_gb(segment, p.memory).value_or(1.0)));
    }
    if (std::regex_search(segment, p.ephemeral)) {
        out.add("prefer_ephemeral_storage", strength,
                MetadataValue(nearest_size_gb(segment, p.ephemeral).value_or(1.0)));
    }
    if (std::regex_search(segment, p.ssd)) {
        out.add("prefer_ssd", strength);
    }
    if (std::regex_search(segment, p.public_ip)) {
        out.add("prefer_public_ip", strength);
    }
    if (auto gbps = first_number(segment, p.network_speed)) {
        out.add("prefer_network_speed", strength, MetadataValue(*gbps));
    } else if (std::regex_search(segment, p.network_generic)) {
        out.add("prefer_network_speed", strength, MetadataValue(1.0));
    }
    std::smatch type;
    if (std::regex_search(segment, type, p.network_type)) {
        std::string name = type[1].str();
        if (name == "elastic fabric adapter") {
            name = "efa";
        }
        out.add("prefer_network_type", strength, MetadataValue(std::move(name)));
    }
}

} // namespace

ParsedHint regex_parse(std::string_view hint, const IntentRegistry &registry)
{
    const auto &p = patterns();
    Collector collector(registry);
    for (const auto &clause : split_clauses(lowercase(hint))) {
        const ClauseStrength strength = clause_strength(clause);
        std::smatch neg;
        std::string positive = clause;
        std::string negative;
        if (std::regex_search(clause, neg, p.negation)) {
            positive = clause.substr(0, static_cast<std::size_t>(neg.position()));
            negative = clause.substr(static_cast<std::size_t>(neg.position()));
        }

        scan_locations(positive, false, strength, collector);
        scan_deployments(positive, false, strength, collector);
        scan_spread(positive, strength, collector);
        scan_affinity(positive, strength, collector);
        scan_resources(positive, strength, collector);

        if (!negative.empty()) {
            scan_locations(negative, true, strength, collector);
            scan_deployments(negative, true, strength, collector);
        }
    }
    return parsed_hint_from_entries(std::string(hint), collector.take());
}

} // namespace softaffinity
