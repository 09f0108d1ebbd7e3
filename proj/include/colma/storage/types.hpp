#pragma once
// Wide-column data model: a partition holds rows addressed by a clustering
// byte-string, each row a set of named columns, each column a stack of
// timestamped versions. Last-write-wins; ties broken by seqno, then by
// value bytes so replica merges commute.

#include "colma/common/bytes.hpp"
#include "colma/common/clock.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace colma::storage {

struct PartitionKey {
    std::string ns;      // namespace: isolation unit
    std::string entity;  // entity within the namespace

    // Serialized form `namespace 0x1F entity`; total order is bytewise on it.
    Bytes serialized() const { return ns + '\x1F' + entity; }

    static std::optional<PartitionKey> parse(std::string_view serialized) {
        auto sep = serialized.find('\x1F');
        if (sep == std::string_view::npos) return std::nullopt;
        return PartitionKey{std::string(serialized.substr(0, sep)),
                            std::string(serialized.substr(sep + 1))};
    }

    bool operator==(const PartitionKey& o) const = default;
};

struct Cell {
    Bytes clustering;        // sort key within the partition
    std::string column;      // column name
    Bytes value;             // empty when tombstone
    int64_t timestamp_us = 0;
    uint32_t ttl_s = 0;      // 0 = no TTL
    bool tombstone = false;

    bool expired(int64_t now_us) const {
        return ttl_s > 0 && now_us > timestamp_us + static_cast<int64_t>(ttl_s) * kMicrosPerSecond;
    }
};

struct Mutation {
    PartitionKey partition;
    Cell cell;
    uint64_t seqno = 0;  // strictly increasing per store; assigned at WAL append
};

// One stored version of a (partition, clustering, column) coordinate.
// Ordering: newer = greater (timestamp, seqno, value, tombstone). The value
// component makes last-write-wins commutative across replicas whose seqno
// spaces collide.
struct Version {
    int64_t timestamp_us = 0;
    uint64_t seqno = 0;
    Bytes value;
    uint32_t ttl_s = 0;
    bool tombstone = false;

    bool expired(int64_t now_us) const {
        return ttl_s > 0 && now_us > timestamp_us + static_cast<int64_t>(ttl_s) * kMicrosPerSecond;
    }
    auto order_key() const { return std::tie(timestamp_us, seqno, value, tombstone); }
    bool operator<(const Version& o) const { return order_key() < o.order_key(); }
    bool operator==(const Version& o) const {
        return order_key() == o.order_key() && ttl_s == o.ttl_s;
    }
};

struct StoreConfig {
    std::string dir;
    uint64_t max_cell_bytes = 1 << 20;      // 1 MiB value cap
    int64_t grace_window_s = 86'400;        // tombstone GC grace
    int64_t retention_horizon_s = 604'800;  // historical versions kept this long
    uint8_t codec = 1;                      // 0 = none, 1 = key prefix + varint
    bool fsync_writes = false;              // fsync WAL on every append
    Clock clock = wall_clock_us;
};

struct CompactionStats {
    size_t segments_in = 0;
    size_t segments_out = 0;
    size_t versions_in = 0;
    size_t versions_kept = 0;
    size_t versions_dropped = 0;
};

struct RingConfig {
    uint32_t node_count = 1;
    uint32_t vnodes_per_node = 64;
    uint32_t replication_factor = 1;
};

} // namespace colma::storage
