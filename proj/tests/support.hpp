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

#ifndef SOFTAFFINITY_TESTS_SUPPORT_HPP
#define SOFTAFFINITY_TESTS_SUPPORT_HPP

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "softaffinity/cluster_state.hpp"
#include "softaffinity/intent_schema.hpp"

#ifndef SOFTAFFINITY_DATA_DIR
#define SOFTAFFINITY_DATA_DIR "data"
#endif
#ifndef SOFTAFFINITY_GOLDEN_DIR
#define SOFTAFFINITY_GOLDEN_DIR "tests/golden"
#endif

namespace testing {

inline std::filesystem::path data_file(const std::string &name)
{
    return std::filesystem::path(SOFTAFFINITY_DATA_DIR) / name;
}

inline std::filesystem::path golden_file(const std::string &name)
{
    return std::filesystem::path(SOFTAFFINITY_GOLDEN_DIR) / name;
}

inline std::string slurp(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Asks the kernel for an unused loopback port and releases it again.
inline int free_port()
{
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    socklen_t len = sizeof(addr);
    int port = 0;
    if (::bind(fd, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) == 0 &&
        ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len) == 0) {
        port = ntohs(addr.sin_port);
    }
    ::close(fd);
    return port;
}

inline softaffinity::CachedNode node(std::string name, std::string region = "r1", std::string zone = "z1",
                                     std::string rack = "k1")
{
    softaffinity::CachedNode n;
    n.name = std::move(name);
    n.region = std::move(region);
    n.zone = std::move(zone);
    n.rack = std::move(rack);
    return n;
}

inline softaffinity::CachedPod pod(std::string name, std::string deployment, std::optional<std::string> on = {})
{
    softaffinity::CachedPod p;
    p.name = std::move(name);
    p.deployment = deployment;
    p.labels = {{"app", std::move(deployment)}};
    p.node_name = std::move(on);
    return p;
}

inline softaffinity::DetectedIntent intent(std::string name, double confidence = 1.0, double strength = 1.0)
{
    softaffinity::DetectedIntent i;
    i.intent = std::move(name);
    i.confidence = confidence;
    i.strength = strength;
    return i;
}

inline softaffinity::ParsedHint hint_of(std::initializer_list<softaffinity::DetectedIntent> intents)
{
    softaffinity::ParsedHint h;
    for (const auto &i : intents) {
        h.intents[i.intent] = i;
    }
    return h;
}

} // namespace testing

#endif // SOFTAFFINITY_TESTS_SUPPORT_HPP
