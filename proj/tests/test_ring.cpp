#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colma/storage/ring.hpp"

#include <map>
#include <set>

using namespace colma::storage;

TEST_CASE("placement is deterministic and respects RF distinctness") {
    RingConfig one{4, 64, 1};
    PartitionKey pk{"ns", "user-17"};
    auto a = ring_locate(pk, one);
    auto b = ring_locate(pk, one);
    REQUIRE(a.size() == 1);
    CHECK(a == b);

    RingConfig rf3{4, 64, 3};
    auto replicas = ring_locate(pk, rf3);
    REQUIRE(replicas.size() == 3);
    std::set<uint32_t> uniq(replicas.begin(), replicas.end());
    CHECK(uniq.size() == 3);
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(Ring(RingConfig{0, 64, 1}), RingError);
    CHECK_THROWS_AS(Ring(RingConfig{4, 64, 5}), RingError);
    CHECK_THROWS_AS(Ring(RingConfig{4, 64, 0}), RingError);
}

TEST_CASE("64 vnodes balance keys within a 1.3 max/min ratio") {
    Ring ring(RingConfig{8, 64, 1});
    std::map<uint32_t, size_t> load;
    const int keys = 100'000;
    for (int i = 0; i < keys; ++i) {
        PartitionKey pk{"ns", "key-" + std::to_string(i)};
        load[ring.locate(pk)[0]]++;
    }
    REQUIRE(load.size() == 8);
    size_t mn = keys, mx = 0;
    for (auto& [node, n] : load) {
        (void)node;
        mn = std::min(mn, n);
        mx = std::max(mx, n);
    }
    CHECK(static_cast<double>(mx) / static_cast<double>(mn) <= 1.3);
}

TEST_CASE("removing a node moves about 1/node_count of primaries") {
    const uint32_t nodes = 5;
    Ring before(RingConfig{nodes, 64, 1});
    Ring after = before.remove_node(nodes - 1);
    const int keys = 10'000;
    int moved = 0;
    for (int i = 0; i < keys; ++i) {
        PartitionKey pk{"ns", "key-" + std::to_string(i)};
        if (before.locate(pk)[0] != after.locate(pk)[0]) ++moved;
    }
    double frac = static_cast<double>(moved) / keys;
    CHECK(frac <= 1.0 / nodes + 0.05);
    CHECK(frac >= 1.0 / nodes - 0.05);
    // Survivors keep serving everything they already owned.
    CHECK(after.live_nodes() == nodes - 1);
}
