#pragma once
// Immutable sorted segment files (`seg-<id>.colm`).
//
// Layout, all integers little-endian:
//   header:  magic "COLM" | u32 format version = 1 | u8 codec | u64 index offset
//   blocks:  [u32 payload length][u32 crc32(payload)][payload] ...
//   index:   lp(min_key) lp(max_key) varint(entry count) varint(block count)
//            then per block: u64 offset, u32 stored length, lp(first composite key)
//
// Entries are sorted by (partition, clustering, column) ascending, versions
// newest-first within a coordinate. Composite keys are length-prefixed field
// concatenations; codec 1 front-codes them against the previous entry.

#include "colma/storage/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace colma::storage {

constexpr char kSegmentMagic[4] = {'C', 'O', 'L', 'M'};
constexpr uint32_t kSegmentFormatVersion = 1;
constexpr size_t kBlockEntryTarget = 64;  // entries per block before sealing it

struct Coord {
    Bytes partition;  // serialized PartitionKey
    Bytes clustering;
    std::string column;

    auto tied() const { return std::tie(partition, clustering, column); }
    bool operator<(const Coord& o) const { return tied() < o.tied(); }
    bool operator==(const Coord& o) const { return tied() == o.tied(); }
};

// Range bound over coordinates; unset fields widen the bound to the whole
// subspace (missing = -inf for lows, +inf for highs).
struct CoordBound {
    Bytes partition;
    std::optional<Bytes> clustering;
    std::optional<std::string> column;
};

bool coord_before_low(const Coord& c, const CoordBound& low);
bool coord_after_high(const Coord& c, const CoordBound& high);

struct SegmentEntry {
    Coord coord;
    Version version;

    Bytes composite_key() const;
    // Sort order: coordinate ascending, then version descending (newest first).
    bool operator<(const SegmentEntry& o) const;
};

struct SegmentMeta {
    uint64_t id = 0;
    Coord min_key;
    Coord max_key;
    uint64_t entry_count = 0;
    uint8_t codec = 0;
};

// Writes `entries` (already sorted) atomically: tmp file + rename.
// Returns false without creating a file when entries is empty.
bool write_segment(const std::string& path, uint64_t id, uint8_t codec,
                   const std::vector<SegmentEntry>& entries, SegmentMeta* meta_out);

class SegmentReader {
public:
    // Throws std::runtime_error on malformed header/index.
    void open(const std::string& path, uint64_t id);

    const SegmentMeta& meta() const { return meta_; }

    // Decodes one block, verifying its checksum (throws on mismatch).
    std::vector<SegmentEntry> read_block(size_t block_idx) const;
    size_t block_count() const { return blocks_.size(); }

    // Visits entries with low <= coord <= high, in file order.
    void scan(const CoordBound& low, const CoordBound& high,
              const std::function<void(const SegmentEntry&)>& fn) const;
    void scan_all(const std::function<void(const SegmentEntry&)>& fn) const;

    // Full checksum pass over every block; throws on any mismatch.
    void verify_all() const;

private:
    struct BlockRef {
        uint64_t offset = 0;
        uint32_t length = 0;
        Coord first_key;
    };

    std::string path_;
    SegmentMeta meta_;
    std::vector<BlockRef> blocks_;
};

Coord decode_composite_key(const Bytes& key);

} // namespace colma::storage
