#pragma once
// Embedded wide-column store: WAL + memtable + sorted segments.
//
// Read = merge of memtable and all segments; a coordinate's visible cell is
// the greatest Version with timestamp <= as_of that is neither tombstoned
// nor TTL-expired (expiry judged at wall time). Flush and compaction never
// change read results, other than dropping data past the configured
// grace/retention windows.

#include "colma/storage/segment.hpp"
#include "colma/storage/types.hpp"
#include "colma/storage/wal.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace colma::storage {

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrityError : StoreError {
    using StoreError::StoreError;
};

struct StoreStats {
    uint64_t max_seqno = 0;
    size_t memtable_versions = 0;
    size_t segment_count = 0;
    size_t mutation_log_size = 0;
};

class Store {
public:
    // Opens (or creates) a store in config.dir: replays the CRC-valid WAL
    // prefix (silently truncating a torn tail), loads and checksum-verifies
    // every segment, and resumes the seqno counter past the highest replayed
    // value. Throws IntegrityError on segment corruption.
    static std::unique_ptr<Store> open(StoreConfig config);

    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Durable in the WAL before returning. Returns the assigned seqno.
    uint64_t put(const PartitionKey& partition, Cell cell);

    // Tombstone write; succeeds even when nothing matches.
    uint64_t remove(const PartitionKey& partition, Bytes clustering, std::string column,
                    int64_t timestamp_us);

    std::optional<Cell> get(const PartitionKey& partition, const Bytes& clustering,
                            const std::string& column,
                            std::optional<int64_t> as_of = std::nullopt) const;

    // Cells sorted by (clustering, column), one newest-visible version per
    // coordinate. Inverted ranges yield an empty result.
    std::vector<Cell> range_scan(const PartitionKey& partition, const Bytes& clustering_low,
                                 const Bytes& clustering_high,
                                 std::optional<int64_t> as_of = std::nullopt) const;

    // Whole-partition scan (no clustering bounds).
    std::vector<Cell> scan_partition(const PartitionKey& partition,
                                     std::optional<int64_t> as_of = std::nullopt) const;

    // Every visible cell, ordered by (partition, clustering, column).
    std::vector<std::pair<PartitionKey, Cell>> scan_all(
        std::optional<int64_t> as_of = std::nullopt) const;

    // Distinct partitions with visible data, optionally restricted to `ns`.
    std::vector<PartitionKey> list_partitions(const std::string& ns = {}) const;

    // Seals the memtable into a new segment. Returns nullopt when empty.
    std::optional<uint64_t> flush();

    // Merges segments whose partition span overlaps [partition_low,
    // partition_high] (serialized keys; empty = unbounded), dropping
    // expired cells, tombstone groups past the grace window, and shadowed
    // versions older than the retention horizon. Atomic via rename.
    CompactionStats compact(const Bytes& partition_low = {}, const Bytes& partition_high = {});

    // Delta sync: all mutations for `partition` with seqno > since_seqno,
    // in seqno order. Unknown partitions yield an empty batch.
    std::vector<Mutation> sync_delta(const PartitionKey& partition, uint64_t since_seqno) const;

    // Applies a replication batch, preserving origin seqnos. Idempotent;
    // returns the new max seqno.
    uint64_t apply_delta(const std::vector<Mutation>& batch);

    uint64_t max_seqno() const;
    StoreStats stats() const;
    const StoreConfig& config() const { return config_; }
    size_t segment_count() const;

private:
    Store() = default;

    using CoordKey = std::tuple<Bytes, Bytes, std::string>;  // partition, clustering, column
    using VersionSet = std::set<Version>;

    void load_segments();
    std::string segment_path(uint64_t id) const;
    uint64_t append_mutation(Mutation m, bool assign_seqno);
    void apply_to_memtable(const Mutation& m);
    VersionSet collect_coord(const Bytes& partition, const Bytes& clustering,
                             const std::string& column) const;

    // Newest visible version at as_of, judged for expiry at wall time `now`.
    static const Version* visible(const VersionSet& versions, int64_t as_of, int64_t now);

    // Compaction keep-rule for one coordinate; returns versions newest-first.
    std::vector<Version> keep_versions(const VersionSet& versions, int64_t now) const;

    StoreConfig config_;
    std::string wal_path_;

    mutable std::recursive_mutex mu_;
    std::map<CoordKey, VersionSet> memtable_;
    std::vector<std::unique_ptr<SegmentReader>> segments_;
    std::vector<Mutation> mutation_log_;            // replicated history
    std::unordered_set<std::string> mutation_ids_;  // dedup for idempotent apply
    WalWriter wal_;
    uint64_t seqno_ = 0;
    uint64_t next_segment_id_ = 1;
    bool closed_ = false;
};

} // namespace colma::storage
