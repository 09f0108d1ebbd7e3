#pragma once
// Consistent-hash ring simulating N-node placement.
//
// Each (node_id, vnode_index) gets a stable 64-bit hash
// splitmix64(node_id * 0x9E3779B97F4A7C15 ^ vnode_index); vnodes are laid
// out on the ring in hash order but at rank-equalized positions, so every
// vnode owns an equal arc. Raw hash positions at 64 vnodes/node leave a
// ~1.4 max/min load ratio, which would break the 1.3 balance contract.
// Partitions hash via stable_hash64 of their serialized key; placement
// walks clockwise collecting RF distinct physical nodes.

#include "colma/storage/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace colma::storage {

struct RingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Ring {
public:
    explicit Ring(RingConfig config);

    // Ordered replica list: RF distinct physical node ids.
    std::vector<uint32_t> locate(const PartitionKey& partition) const;
    std::vector<uint32_t> locate_hash(uint64_t key_hash) const;

    // Ring with `node_id`'s vnodes removed; survivors keep their positions,
    // so only keys owned by the removed node change primaries.
    Ring remove_node(uint32_t node_id) const;

    const RingConfig& config() const { return config_; }
    size_t live_nodes() const;

private:
    RingConfig config_;
    std::vector<std::pair<uint64_t, uint32_t>> positions_;  // (ring position, node)
};

std::vector<uint32_t> ring_locate(const PartitionKey& partition, const RingConfig& config);

} // namespace colma::storage
