#pragma once
// Write-ahead log. Record framing:
//   [u32 LE length] [u32 LE crc32(payload)] [payload]
// Payload is the binary Mutation encoding: fields in declaration order,
// integers little-endian, byte-strings varint-length-prefixed. Replay stops
// at the first torn or CRC-invalid record and truncates the tail.

#include "colma/storage/types.hpp"

#include <string>
#include <vector>

namespace colma::storage {

Bytes encode_mutation(const Mutation& m);
Mutation decode_mutation(std::string_view payload);  // throws on malformed input

class WalWriter {
public:
    WalWriter() = default;
    ~WalWriter();
    WalWriter(const WalWriter&) = delete;
    WalWriter& operator=(const WalWriter&) = delete;

    // Opens for append, creating the file if needed.
    void open(const std::string& path, bool fsync_writes);
    void append(const Mutation& m);
    void close();

private:
    int fd_ = -1;
    bool fsync_writes_ = false;
};

struct WalReplay {
    std::vector<Mutation> mutations;  // CRC-valid prefix, in log order
    uint64_t valid_bytes = 0;         // offset of the first invalid byte
    bool truncated_tail = false;      // true when a torn/corrupt tail was cut
};

// Reads the CRC-valid prefix of a WAL file. Missing file yields an empty replay.
WalReplay replay_wal(const std::string& path);
WalReplay replay_wal_bytes(std::string_view data);

} // namespace colma::storage
