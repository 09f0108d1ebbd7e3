#include "colma/storage/store.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>

namespace fs = std::filesystem;

namespace colma::storage {

std::unique_ptr<Store> Store::open(StoreConfig config) {
    auto s = std::unique_ptr<Store>(new Store());
    s->config_ = std::move(config);
    if (s->config_.dir.empty()) throw StoreError("store dir not set");
    fs::create_directories(s->config_.dir);
    s->wal_path_ = s->config_.dir + "/wal.log";

    s->load_segments();

    WalReplay replay = replay_wal(s->wal_path_);
    if (replay.truncated_tail) fs::resize_file(s->wal_path_, replay.valid_bytes);
    for (auto& m : replay.mutations) {
        s->apply_to_memtable(m);
        s->mutation_ids_.insert(encode_mutation(m));
        s->mutation_log_.push_back(m);
        s->seqno_ = std::max(s->seqno_, m.seqno);
    }
    // Flushed mutations replay into the memtable alongside their segment
    // copies; the version sets dedup them, so reads stay exact.

    s->wal_.open(s->wal_path_, s->config_.fsync_writes);
    return s;
}

Store::~Store() {
    std::lock_guard lk(mu_);
    closed_ = true;
    wal_.close();
}

void Store::load_segments() {
    segments_.clear();
    uint64_t max_id = 0;
    std::vector<std::pair<uint64_t, std::string>> found;
    if (fs::exists(config_.dir)) {
        for (const auto& de : fs::directory_iterator(config_.dir)) {
            std::string name = de.path().filename().string();
            if (name.rfind("seg-", 0) != 0 || name.size() < 10 ||
                name.substr(name.size() - 5) != ".colm")
                continue;
            uint64_t id = std::stoull(name.substr(4, name.size() - 9));
            found.emplace_back(id, de.path().string());
        }
    }
    std::sort(found.begin(), found.end());
    for (auto& [id, path] : found) {
        auto r = std::make_unique<SegmentReader>();
        try {
            r->open(path, id);
            r->verify_all();
        } catch (const std::exception& e) {
            throw IntegrityError(std::string("segment integrity failure: ") + e.what());
        }
        segments_.push_back(std::move(r));
        max_id = std::max(max_id, id);
    }
    next_segment_id_ = max_id + 1;
}

std::string Store::segment_path(uint64_t id) const {
    return config_.dir + "/seg-" + std::to_string(id) + ".colm";
}

uint64_t Store::put(const PartitionKey& partition, Cell cell) {
    std::lock_guard lk(mu_);
    if (closed_) throw StoreError("store closed");
    if (partition.ns.empty() || partition.entity.empty())
        throw StoreError("partition key components must be non-empty");
    if (cell.value.size() > config_.max_cell_bytes)
        throw StoreError("cell value exceeds configured max size");
    if (cell.tombstone) cell.value.clear();
    Mutation m{partition, std::move(cell), 0};
    return append_mutation(std::move(m), /*assign_seqno=*/true);
}

uint64_t Store::remove(const PartitionKey& partition, Bytes clustering, std::string column,
                       int64_t timestamp_us) {
    Cell cell;
    cell.clustering = std::move(clustering);
    cell.column = std::move(column);
    cell.timestamp_us = timestamp_us;
    cell.tombstone = true;
    return put(partition, std::move(cell));
}

uint64_t Store::append_mutation(Mutation m, bool assign_seqno) {
    if (assign_seqno) {
        m.seqno = ++seqno_;
    } else {
        seqno_ = std::max(seqno_, m.seqno);
    }
    std::string identity = encode_mutation(m);
    if (!mutation_ids_.insert(identity).second) return seqno_;  // replayed duplicate
    wal_.append(m);
    apply_to_memtable(m);
    mutation_log_.push_back(std::move(m));
    return assign_seqno ? mutation_log_.back().seqno : seqno_;
}

void Store::apply_to_memtable(const Mutation& m) {
    CoordKey key{m.partition.serialized(), m.cell.clustering, m.cell.column};
    Version v;
    v.timestamp_us = m.cell.timestamp_us;
    v.seqno = m.seqno;
    v.value = m.cell.value;
    v.ttl_s = m.cell.ttl_s;
    v.tombstone = m.cell.tombstone;
    memtable_[std::move(key)].insert(std::move(v));
}

const Version* Store::visible(const VersionSet& versions, int64_t as_of, int64_t now) {
    for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
        if (it->timestamp_us > as_of) continue;
        if (it->tombstone || it->expired(now)) return nullptr;
        return &*it;
    }
    return nullptr;
}

Store::VersionSet Store::collect_coord(const Bytes& partition, const Bytes& clustering,
                                       const std::string& column) const {
    VersionSet vs;
    auto it = memtable_.find(CoordKey{partition, clustering, column});
    if (it != memtable_.end()) vs = it->second;
    CoordBound bound{partition, clustering, column};
    for (const auto& seg : segments_)
        seg->scan(bound, bound, [&](const SegmentEntry& e) { vs.insert(e.version); });
    return vs;
}

std::optional<Cell> Store::get(const PartitionKey& partition, const Bytes& clustering,
                               const std::string& column, std::optional<int64_t> as_of) const {
    std::lock_guard lk(mu_);
    int64_t now = config_.clock();
    VersionSet vs = collect_coord(partition.serialized(), clustering, column);
    const Version* v = visible(vs, as_of.value_or(std::numeric_limits<int64_t>::max()), now);
    if (!v) return std::nullopt;
    Cell c;
    c.clustering = clustering;
    c.column = column;
    c.value = v->value;
    c.timestamp_us = v->timestamp_us;
    c.ttl_s = v->ttl_s;
    return c;
}

std::vector<Cell> Store::range_scan(const PartitionKey& partition, const Bytes& clustering_low,
                                    const Bytes& clustering_high,
                                    std::optional<int64_t> as_of) const {
    std::lock_guard lk(mu_);
    std::vector<Cell> out;
    if (clustering_low > clustering_high) return out;
    int64_t now = config_.clock();
    int64_t as = as_of.value_or(std::numeric_limits<int64_t>::max());
    Bytes ps = partition.serialized();

    std::map<std::pair<Bytes, std::string>, VersionSet> acc;
    for (auto it = memtable_.lower_bound(CoordKey{ps, clustering_low, ""});
         it != memtable_.end(); ++it) {
        const auto& [p, cl, col] = it->first;
        if (p != ps || cl > clustering_high) break;
        acc[{cl, col}].insert(it->second.begin(), it->second.end());
    }
    CoordBound low{ps, clustering_low, std::nullopt};
    CoordBound high{ps, clustering_high, std::nullopt};
    for (const auto& seg : segments_)
        seg->scan(low, high, [&](const SegmentEntry& e) {
            acc[{e.coord.clustering, e.coord.column}].insert(e.version);
        });

    for (const auto& [key, vs] : acc) {
        const Version* v = visible(vs, as, now);
        if (!v) continue;
        Cell c;
        c.clustering = key.first;
        c.column = key.second;
        c.value = v->value;
        c.timestamp_us = v->timestamp_us;
        c.ttl_s = v->ttl_s;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Cell> Store::scan_partition(const PartitionKey& partition,
                                        std::optional<int64_t> as_of) const {
    std::lock_guard lk(mu_);
    int64_t now = config_.clock();
    int64_t as = as_of.value_or(std::numeric_limits<int64_t>::max());
    Bytes ps = partition.serialized();

    std::map<std::pair<Bytes, std::string>, VersionSet> acc;
    for (auto it = memtable_.lower_bound(CoordKey{ps, "", ""}); it != memtable_.end(); ++it) {
        const auto& [p, cl, col] = it->first;
        if (p != ps) break;
        acc[{cl, col}].insert(it->second.begin(), it->second.end());
    }
    CoordBound bound{ps, std::nullopt, std::nullopt};
    for (const auto& seg : segments_)
        seg->scan(bound, bound, [&](const SegmentEntry& e) {
            acc[{e.coord.clustering, e.coord.column}].insert(e.version);
        });

    std::vector<Cell> out;
    for (const auto& [key, vs] : acc) {
        const Version* v = visible(vs, as, now);
        if (!v) continue;
        Cell c;
        c.clustering = key.first;
        c.column = key.second;
        c.value = v->value;
        c.timestamp_us = v->timestamp_us;
        c.ttl_s = v->ttl_s;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::pair<PartitionKey, Cell>> Store::scan_all(std::optional<int64_t> as_of) const {
    std::lock_guard lk(mu_);
    int64_t now = config_.clock();
    int64_t as = as_of.value_or(std::numeric_limits<int64_t>::max());

    std::map<CoordKey, VersionSet> acc;
    for (const auto& [key, vs] : memtable_) acc[key].insert(vs.begin(), vs.end());
    for (const auto& seg : segments_)
        seg->scan_all([&](const SegmentEntry& e) {
            acc[CoordKey{e.coord.partition, e.coord.clustering, e.coord.column}].insert(e.version);
        });

    std::vector<std::pair<PartitionKey, Cell>> out;
    for (const auto& [key, vs] : acc) {
        const Version* v = visible(vs, as, now);
        if (!v) continue;
        auto pk = PartitionKey::parse(std::get<0>(key));
        if (!pk) continue;
        Cell c;
        c.clustering = std::get<1>(key);
        c.column = std::get<2>(key);
        c.value = v->value;
        c.timestamp_us = v->timestamp_us;
        c.ttl_s = v->ttl_s;
        out.emplace_back(*pk, std::move(c));
    }
    return out;
}

std::vector<PartitionKey> Store::list_partitions(const std::string& ns) const {
    std::vector<PartitionKey> out;
    Bytes last;
    for (const auto& [pk, cell] : scan_all()) {
        (void)cell;
        if (!ns.empty() && pk.ns != ns) continue;
        Bytes s = pk.serialized();
        if (s != last) {
            out.push_back(pk);
            last = s;
        }
    }
    return out;
}

std::optional<uint64_t> Store::flush() {
    std::lock_guard lk(mu_);
    if (memtable_.empty()) return std::nullopt;
    std::vector<SegmentEntry> entries;
    for (const auto& [key, vs] : memtable_)
        for (auto it = vs.rbegin(); it != vs.rend(); ++it)
            entries.push_back(
                {Coord{std::get<0>(key), std::get<1>(key), std::get<2>(key)}, *it});
    uint64_t id = next_segment_id_++;
    SegmentMeta meta;
    if (!write_segment(segment_path(id), id, config_.codec, entries, &meta))
        return std::nullopt;
    auto r = std::make_unique<SegmentReader>();
    r->open(segment_path(id), id);
    segments_.push_back(std::move(r));
    memtable_.clear();
    return id;
}

std::vector<Version> Store::keep_versions(const VersionSet& versions, int64_t now) const {
    std::vector<Version> keep;
    if (versions.empty()) return keep;
    const Version& newest = *versions.rbegin();
    const int64_t grace_us = config_.grace_window_s * kMicrosPerSecond;
    const int64_t horizon_us = config_.retention_horizon_s * kMicrosPerSecond;

    bool newest_deleted = newest.tombstone || newest.expired(now);
    if (newest_deleted) {
        int64_t delete_time = newest.tombstone
                                  ? newest.timestamp_us
                                  : newest.timestamp_us +
                                        static_cast<int64_t>(newest.ttl_s) * kMicrosPerSecond;
        if (delete_time < now - grace_us) return keep;  // whole group GC'd
    }
    for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
        bool is_newest = it == versions.rbegin();
        if (is_newest || it->timestamp_us >= now - horizon_us) keep.push_back(*it);
    }
    return keep;
}

CompactionStats Store::compact(const Bytes& partition_low, const Bytes& partition_high) {
    std::lock_guard lk(mu_);
    CompactionStats stats;
    int64_t now = config_.clock();

    // The memtable joins the merge; otherwise dropping a tombstone group
    // could resurrect an older shadowed cell still sitting in memory.
    flush();

    std::vector<size_t> inputs;
    for (size_t i = 0; i < segments_.size(); ++i) {
        const auto& meta = segments_[i]->meta();
        bool above = !partition_high.empty() && meta.min_key.partition > partition_high;
        bool below = !partition_low.empty() && meta.max_key.partition < partition_low;
        if (!above && !below) inputs.push_back(i);
    }
    if (inputs.empty()) return stats;
    stats.segments_in = inputs.size();

    std::map<Coord, VersionSet> groups;
    for (size_t idx : inputs)
        segments_[idx]->scan_all([&](const SegmentEntry& e) {
            groups[e.coord].insert(e.version);
            ++stats.versions_in;
        });

    std::vector<SegmentEntry> out;
    for (const auto& [coord, vs] : groups) {
        // GC only partitions fully inside the range: segments outside the
        // range may still hold shadowed versions of other partitions.
        bool in_range = (partition_low.empty() || coord.partition >= partition_low) &&
                        (partition_high.empty() || coord.partition <= partition_high);
        if (in_range) {
            for (const auto& v : keep_versions(vs, now)) out.push_back({coord, v});
        } else {
            for (auto it = vs.rbegin(); it != vs.rend(); ++it) out.push_back({coord, *it});
        }
    }
    stats.versions_kept = out.size();
    stats.versions_dropped = stats.versions_in - stats.versions_kept;

    uint64_t id = next_segment_id_++;
    std::unique_ptr<SegmentReader> merged;
    if (write_segment(segment_path(id), id, config_.codec, out, nullptr)) {
        merged = std::make_unique<SegmentReader>();
        merged->open(segment_path(id), id);
        stats.segments_out = 1;
    }

    // Swap inputs for the merged output; rename above already made it durable.
    std::vector<std::string> stale;
    for (auto it = inputs.rbegin(); it != inputs.rend(); ++it) {
        stale.push_back(segment_path(segments_[*it]->meta().id));
        segments_.erase(segments_.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    if (merged) segments_.push_back(std::move(merged));
    for (const auto& path : stale) fs::remove(path);
    return stats;
}

std::vector<Mutation> Store::sync_delta(const PartitionKey& partition,
                                        uint64_t since_seqno) const {
    std::lock_guard lk(mu_);
    std::vector<Mutation> out;
    for (const auto& m : mutation_log_)
        if (m.partition == partition && m.seqno > since_seqno) out.push_back(m);
    std::sort(out.begin(), out.end(),
              [](const Mutation& a, const Mutation& b) { return a.seqno < b.seqno; });
    return out;
}

uint64_t Store::apply_delta(const std::vector<Mutation>& batch) {
    std::lock_guard lk(mu_);
    if (closed_) throw StoreError("store closed");
    for (const auto& m : batch) append_mutation(m, /*assign_seqno=*/false);
    return seqno_;
}

uint64_t Store::max_seqno() const {
    std::lock_guard lk(mu_);
    return seqno_;
}

size_t Store::segment_count() const {
    std::lock_guard lk(mu_);
    return segments_.size();
}

StoreStats Store::stats() const {
    std::lock_guard lk(mu_);
    StoreStats st;
    st.max_seqno = seqno_;
    for (const auto& [k, vs] : memtable_) {
        (void)k;
        st.memtable_versions += vs.size();
    }
    st.segment_count = segments_.size();
    st.mutation_log_size = mutation_log_.size();
    return st;
}

} // namespace colma::storage
