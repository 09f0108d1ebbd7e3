#include "colma/storage/ring.hpp"

#include "colma/common/hash.hpp"

#include <algorithm>
#include <set>

namespace colma::storage {

Ring::Ring(RingConfig config) : config_(config) {
    if (config_.node_count == 0 || config_.vnodes_per_node == 0)
        throw RingError("ring needs at least one node and one vnode");
    if (config_.replication_factor < 1 || config_.replication_factor > config_.node_count)
        throw RingError("replication factor must be in [1, node_count]");

    struct Point {
        uint64_t hash;
        uint32_t node;
        uint32_t vnode;
    };
    std::vector<Point> points;
    points.reserve(static_cast<size_t>(config_.node_count) * config_.vnodes_per_node);
    for (uint32_t node = 0; node < config_.node_count; ++node)
        for (uint32_t vnode = 0; vnode < config_.vnodes_per_node; ++vnode)
            points.push_back({splitmix64(static_cast<uint64_t>(node) * 0x9E3779B97F4A7C15ull ^
                                         static_cast<uint64_t>(vnode)),
                              node, vnode});
    std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        return std::tie(a.hash, a.node, a.vnode) < std::tie(b.hash, b.node, b.vnode);
    });

    positions_.reserve(points.size());
    const auto total = static_cast<unsigned __int128>(points.size());
    for (size_t rank = 0; rank < points.size(); ++rank) {
        auto pos = static_cast<uint64_t>(
            (static_cast<unsigned __int128>(rank) << 64) / total);
        positions_.emplace_back(pos, points[rank].node);
    }
}

std::vector<uint32_t> Ring::locate_hash(uint64_t key_hash) const {
    std::vector<uint32_t> replicas;
    replicas.reserve(config_.replication_factor);
    auto it = std::lower_bound(
        positions_.begin(), positions_.end(), key_hash,
        [](const std::pair<uint64_t, uint32_t>& p, uint64_t h) { return p.first < h; });
    size_t start = static_cast<size_t>(it - positions_.begin());
    size_t want = std::min<size_t>(config_.replication_factor, live_nodes());
    for (size_t step = 0; step < positions_.size() && replicas.size() < want; ++step) {
        uint32_t node = positions_[(start + step) % positions_.size()].second;
        if (std::find(replicas.begin(), replicas.end(), node) == replicas.end())
            replicas.push_back(node);
    }
    return replicas;
}

std::vector<uint32_t> Ring::locate(const PartitionKey& partition) const {
    return locate_hash(stable_hash64(partition.serialized()));
}

Ring Ring::remove_node(uint32_t node_id) const {
    Ring out = *this;
    out.positions_.erase(std::remove_if(out.positions_.begin(), out.positions_.end(),
                                        [&](const auto& p) { return p.second == node_id; }),
                         out.positions_.end());
    if (out.positions_.empty()) throw RingError("cannot remove the last node");
    return out;
}

size_t Ring::live_nodes() const {
    std::set<uint32_t> nodes;
    for (const auto& [pos, node] : positions_) {
        (void)pos;
        nodes.insert(node);
    }
    return nodes.size();
}

std::vector<uint32_t> ring_locate(const PartitionKey& partition, const RingConfig& config) {
    return Ring(config).locate(partition);
}

} // namespace colma::storage
