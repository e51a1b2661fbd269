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

// Serial versus OpenMP node scoring on synthetic clusters.
//   bench_scoring [nodes...]   (default: 256 4096 65536)

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>

#include "softaffinity/scoring.hpp"

using namespace softaffinity;

namespace {

ScoringContext synthetic_cluster(int nodes, std::mt19937_64 &rng)
{
    ScoringContext ctx;
    for (int i = 0; i < nodes; ++i) {
        CachedNode n;
        n.name = "node-" + std::to_string(i);
        n.region = "region-" + std::to_string(i % 4);
        n.zone = "zone-" + std::to_string(i % 16);
        n.rack = "rack-" + std::to_string(i % 256);
        n.cpu_count = double(4 << (rng() % 4));
        n.memory_bytes = std::uint64_t(8 << (rng() % 5)) << 30;
        n.gpu_count = double(rng() % 3);
        n.has_ssd = rng() % 2 == 0;
        n.network_gbps = rng() % 4 == 0 ? 100.0 : 10.0;
        ctx.candidates.push_back(std::move(n));
    }
    const char *deployments[] = {"web", "db", "cache", "logging-agent"};
    for (int i = 0; i < nodes / 2; ++i) {
        CachedPod p;
        p.name = "pod-" + std::to_string(i);
        p.deployment = deployments[rng() % 4];
        p.node_name = "node-" + std::to_string(rng() % std::uint64_t(nodes));
        ctx.effective.push_back(std::move(p));
    }
    ctx.subject_pod.name = "subject";
    ctx.subject_deployment = "web";
    return ctx;
}

ParsedHint busy_hint()
{
    ParsedHint h;
    auto add = [&](std::string name, double c, double w) -> DetectedIntent & {
        auto &i = h.intents[name];
        i.intent = std::move(name);
        i.confidence = c;
        i.strength = w;
        return i;
    };
    add("spread_zones", 0.95, 1.5);
    add("prefer_nearby_nodes_same_deployment", 0.8, 1.0);
    add("prefer_gpu", 0.9, 1.0).metadata["prefer_gpu_cores"] = 1.0;
    add("prefer_memory", 0.9, 0.5).metadata["prefer_memory_gb"] = 64.0;
    add("prefer_deployments", 0.7, 0.5).metadata["prefer_deployments"] = std::vector<std::string>{"db", "cache"};
    add("avoid_deployments", 0.9, 1.0).metadata["avoid_deployments"] = std::vector<std::string>{"logging-agent"};
    return h;
}

template <typename Fn>
double best_of(int reps, Fn &&fn)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
}

} // namespace

int main(int argc, char **argv)
{
    std::vector<int> sizes;
    for (int i = 1; i < argc; ++i) {
        sizes.push_back(std::atoi(argv[i]));
    }
    if (sizes.empty()) {
        sizes = {256, 4096, 65536};
    }

    const auto hint = busy_hint();
    std::mt19937_64 rng(42);
    std::cout << "threads " << omp_get_max_threads() << "\n";
    std::cout << std::setw(8) << "nodes" << std::setw(14) << "serial ms" << std::setw(14) << "parallel ms"
              << std::setw(10) << "speedup" << "  identical\n";
    for (int nodes : sizes) {
        const auto ctx = synthetic_cluster(nodes, rng);
        const int reps = nodes > 10000 ? 5 : 20;
        std::vector<ScoreBreakdown> serial, parallel;
        const double s = best_of(reps, [&] { serial = score_nodes_serial(hint, ctx); });
        const double p = best_of(reps, [&] { parallel = score_nodes(hint, ctx); });
        std::cout << std::setw(8) << nodes << std::setw(14) << std::fixed << std::setprecision(3) << s
                  << std::setw(14) << p << std::setw(10) << std::setprecision(2) << s / p << "  "
                  << (serial == parallel ? "yes" : "NO") << "\n";
        if (serial != parallel) {
            return 1;
        }
    }
    return 0;
}
