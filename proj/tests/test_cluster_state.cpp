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

#include <random>
#include <thread>

#include "doctest.h"
#include "softaffinity/cluster_state.hpp"
#include "support.hpp"

using namespace softaffinity;
using nlohmann::json;
using namespace std::chrono_literals;

TEST_CASE("parse_quantity")
{
    CHECK(parse_quantity("4") == 4.0);
    CHECK(parse_quantity("500m") == 0.5);
    CHECK(parse_quantity("1.5") == 1.5);
    CHECK(parse_quantity("8Gi") == 8.0 * 1024 * 1024 * 1024);
    CHECK(parse_quantity("512Mi") == 512.0 * 1024 * 1024);
    CHECK(parse_quantity("2Ki") == 2048.0);
    CHECK(parse_quantity("1Ti") == 1099511627776.0);
    CHECK(parse_quantity("3k") == 3000.0);
    CHECK(parse_quantity("2M") == 2e6);
    CHECK(parse_quantity("1G") == 1e9);
    CHECK(parse_quantity("1T") == 1e12);
    CHECK_THROWS_AS(parse_quantity(""), MalformedQuantity);
    CHECK_THROWS_AS(parse_quantity("Gi"), MalformedQuantity);
    CHECK_THROWS_AS(parse_quantity("4Xi"), MalformedQuantity);
    CHECK_THROWS_AS(parse_quantity("-1"), MalformedQuantity);
}

TEST_CASE("node_from_raw reads both shapes")
{
    const json k8s = json::parse(R"({
        "metadata": {"name": "minikube-m02", "labels": {
            "topology.kubernetes.io/region": "us-east-1",
            "topology.kubernetes.io/zone": "us-east-1a",
            "topology.kubernetes.io/rack": "rack-1",
            "hardware": "GPU", "gpu-count": "2", "disk": "ssd", "network": "public",
            "network-gbps": "25", "network-type": "ena"}},
        "spec": {"taints": [{"key": "k", "effect": "NoSchedule"}]},
        "status": {"capacity": {"cpu": "4", "memory": "8Gi", "ephemeral-storage": "50Gi"}}
    })");
    const auto n = node_from_raw(k8s);
    CHECK(n.name == "minikube-m02");
    CHECK(n.region == "us-east-1");
    CHECK(n.zone == "us-east-1a");
    CHECK(n.rack == "rack-1");
    CHECK(n.cpu_count == 4.0);
    CHECK(n.memory_bytes == 8ull << 30);
    CHECK(n.ephemeral_storage_bytes == 50ull << 30);
    CHECK(n.gpu_count == 2.0);
    CHECK(n.has_ssd);
    CHECK(n.has_public_ip);
    CHECK(n.network_gbps == 25.0);
    CHECK(n.network_type == "ena");
    CHECK(n.unschedulable_taint);

    const json flat = json::parse(R"({
        "name": "n1", "labels": {"hardware": "tpu", "has-public-ip": "true"},
        "capacity": {"cpu": 8, "nvidia.com/gpu": "1"},
        "taints": [{"effect": "PreferNoSchedule"}]
    })");
    const auto f = node_from_raw(flat);
    CHECK(f.name == "n1");
    CHECK_FALSE(f.zone.has_value());
    CHECK(f.cpu_count == 8.0);
    CHECK(f.gpu_count == 1.0);
    CHECK(f.tpu_count == 1.0);
    CHECK(f.has_public_ip);
    CHECK_FALSE(f.unschedulable_taint);

    CHECK_THROWS_AS(node_from_raw(json{{"name", "bad"}, {"capacity", {{"cpu", "lots"}}}}), MalformedQuantity);
}

TEST_CASE("pod_from_raw")
{
    const json k8s = json::parse(R"({
        "metadata": {"name": "web-1", "namespace": "prod",
                     "labels": {"app": "web", "team": "x"},
                     "annotations": {"allocation_hint": "needs a GPU"}},
        "spec": {"nodeName": "n2"}
    })");
    const auto p = pod_from_raw(k8s);
    CHECK(p.name == "web-1");
    CHECK(p.namespace_ == "prod");
    CHECK(p.deployment == "web");
    CHECK(p.allocation_hint == "needs a GPU");
    CHECK(p.node_name == "n2");
    CHECK(p.key().str() == "prod/web-1");

    CHECK(pod_from_raw(k8s, "team").deployment == "x");
    CHECK_FALSE(pod_from_raw(k8s, "tier").deployment.has_value());

    const auto flat = pod_from_raw(json{{"name", "p"}, {"nodeName", ""}});
    CHECK(flat.namespace_ == "default");
    CHECK_FALSE(flat.node_name.has_value());
    CHECK(pod_from_raw(json{{"name", "p"}, {"nodeName", "n9"}}).node_name == "n9");
}

TEST_CASE("state cache events and resync")
{
    StateCache cache;
    cache.apply_event(EventKind::added, testing::node("a"));
    cache.apply_event(EventKind::added, testing::node("b"));
    cache.apply_event(EventKind::added, testing::pod("p1", "web", "a"));
    CHECK(cache.node_count() == 2);
    CHECK(cache.pod_count() == 1);

    auto moved = testing::pod("p1", "web", "b");
    cache.apply_event(EventKind::modified, moved);
    CHECK(cache.pod_count() == 1);
    CHECK(cache.pods().front().node_name == "b");

    auto relabelled = testing::node("a", "r2");
    cache.apply_event(EventKind::modified, relabelled);
    CHECK(cache.node("a")->region == "r2");

    cache.apply_event(EventKind::deleted, testing::node("b"));
    CHECK_FALSE(cache.node("b").has_value());
    cache.apply_event(EventKind::deleted, testing::pod("p1", "web"));
    CHECK(cache.pod_count() == 0);
    cache.apply_event(EventKind::deleted, testing::pod("ghost", "web"));
    CHECK(cache.pod_count() == 0);

    // Replaying an event stream and resyncing to its end state agree.
    std::mt19937 rng(3);
    StateCache streamed;
    std::map<std::string, CachedNode> nodes;
    std::map<std::string, CachedPod> pods;
    for (int i = 0; i < 2000; ++i) {
        const auto id = std::to_string(rng() % 20);
        const auto kind = static_cast<EventKind>(rng() % 3);
        if (rng() % 2 == 0) {
            auto n = testing::node("n" + id, "r" + std::to_string(rng() % 3));
            streamed.apply_event(kind, n);
            kind == EventKind::deleted ? (void)nodes.erase(n.name) : (void)(nodes[n.name] = n);
        } else {
            auto p = testing::pod("p" + id, "d", "n" + std::to_string(rng() % 20));
            streamed.apply_event(kind, p);
            kind == EventKind::deleted ? (void)pods.erase(p.name) : (void)(pods[p.name] = p);
        }
    }
    StateCache resynced;
    std::vector<CachedNode> nv;
    std::vector<CachedPod> pv;
    for (auto &[_, n] : nodes) {
        nv.push_back(n);
    }
    for (auto &[_, p] : pods) {
        pv.push_back(p);
    }
    resynced.full_resync(nv, pv);
    CHECK(streamed == resynced);
    CHECK(streamed.node_count() == nodes.size());
}

TEST_CASE("state cache tolerates concurrent readers and a writer")
{
    StateCache cache;
    std::atomic<bool> stop{false};
    std::thread writer([&] {
        for (int i = 0; i < 5000; ++i) {
            cache.apply_event(EventKind::added, testing::pod("p" + std::to_string(i % 50), "d", "n"));
        }
        stop = true;
    });
    std::vector<std::thread> readers;
    for (int r = 0; r < 4; ++r) {
        readers.emplace_back([&] {
            while (!stop) {
                for (const auto &p : cache.pods()) {
                    CHECK(p.deployment == "d");
                }
            }
        });
    }
    writer.join();
    for (auto &t : readers) {
        t.join();
    }
    CHECK(cache.pod_count() == 50);
}

TEST_CASE("recent placements expire at exactly the ttl")
{
    RecentPlacements recent(10s);
    const Timestamp t0 = Timestamp{} + 1h;
    recent.record_placement(testing::pod("p", "web"), "n1", t0);
    CHECK(recent.unexpired(t0).size() == 1);
    CHECK(recent.unexpired(t0 + 9999ms).size() == 1);
    CHECK(recent.unexpired(t0 + 9999ms).front().pod.node_name == "n1");
    CHECK(recent.unexpired(t0 + 10s).empty());
    // Pruned: a later query with an earlier clock still sees nothing.
    CHECK(recent.unexpired(t0).empty());

    recent.record_placement(testing::pod("p", "web"), "n1", t0);
    recent.record_placement(testing::pod("p", "web"), "n2", t0 + 5s);
    const auto live = recent.unexpired(t0 + 12s);
    REQUIRE(live.size() == 1);
    CHECK(live.front().node_name == "n2");
    recent.clear();
    CHECK(recent.unexpired(t0).empty());
}

TEST_CASE("effective pods merge API state with local placements")
{
    const Timestamp t0 = Timestamp{} + 1h;
    StateCache cache;
    cache.apply_event(EventKind::added, testing::pod("bound", "web", "n1"));
    cache.apply_event(EventKind::added, testing::pod("pending", "web"));
    RecentPlacements recent;
    recent.record_placement(testing::pod("bound", "web"), "n9", t0);
    recent.record_placement(testing::pod("pending", "web"), "n2", t0);
    recent.record_placement(testing::pod("local-only", "web"), "n3", t0);

    auto eff = effective_pods(cache, recent, t0 + 1s);
    REQUIRE(eff.size() == 3);
    std::map<std::string, std::optional<std::string>> where;
    for (const auto &p : eff) {
        where[p.name] = p.node_name;
    }
    CHECK(where["bound"] == "n1");   // API copy wins
    CHECK(where["pending"] == "n2"); // unbound API copy takes the local node
    CHECK(where["local-only"] == "n3");

    eff = effective_pods(cache, recent, t0 + 10s);
    CHECK(eff.size() == 2);

    // Same name in another namespace is a different pod.
    auto other = testing::pod("bound", "web", "n4");
    other.namespace_ = "other";
    CHECK(effective_pods(std::vector<CachedPod>{other}, {{testing::pod("bound", "web", "n1"), "n1", t0}}).size() == 2);
}

TEST_CASE("snapshots load from json and disk")
{
    const json doc = json::parse(R"({
        "nodes": [{"name": "a", "labels": {"topology.kubernetes.io/zone": "z"}},
                  {"metadata": {"name": "b"}}],
        "pods": [{"name": "p", "labels": {"svc": "api"}, "nodeName": "a"}]
    })");
    const auto snap = snapshot_from_json(doc, "svc");
    REQUIRE(snap.nodes.size() == 2);
    CHECK(snap.nodes[0].zone == "z");
    CHECK(snap.pods.front().deployment == "api");
    CHECK(snap.raw == doc);

    const auto path = std::filesystem::temp_directory_path() / "softaffinity_snapshot_test.json";
    std::ofstream(path) << doc.dump();
    CHECK(load_snapshot(path, "svc").nodes.size() == 2);
    std::filesystem::remove(path);
    CHECK_THROWS(load_snapshot(path));
}
