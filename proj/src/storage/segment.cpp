#include "colma/storage/segment.hpp"

#include "colma/common/crc32.hpp"
#include "colma/common/varint.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace colma::storage {

namespace {

size_t shared_prefix(std::string_view a, std::string_view b) {
    size_t n = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    return i;
}

void encode_entry(std::string& out, uint8_t codec, const Bytes& key, const Bytes& prev_key,
                  const SegmentEntry& e) {
    size_t shared = codec == 1 ? shared_prefix(prev_key, key) : 0;
    put_varint(out, shared);
    put_varint(out, key.size() - shared);
    out.append(key, shared, key.size() - shared);
    put_fixed64(out, static_cast<uint64_t>(e.version.timestamp_us));
    put_fixed64(out, e.version.seqno);
    put_varint(out, e.version.ttl_s);
    out.push_back(e.version.tombstone ? 1 : 0);
    put_lp_bytes(out, e.version.value);
}

} // namespace

bool coord_before_low(const Coord& c, const CoordBound& low) {
    if (c.partition != low.partition) return c.partition < low.partition;
    if (!low.clustering) return false;
    if (c.clustering != *low.clustering) return c.clustering < *low.clustering;
    if (!low.column) return false;
    return c.column < *low.column;
}

bool coord_after_high(const Coord& c, const CoordBound& high) {
    if (c.partition != high.partition) return c.partition > high.partition;
    if (!high.clustering) return false;
    if (c.clustering != *high.clustering) return c.clustering > *high.clustering;
    if (!high.column) return false;
    return c.column > *high.column;
}

Bytes SegmentEntry::composite_key() const {
    Bytes k;
    put_lp_bytes(k, coord.partition);
    put_lp_bytes(k, coord.clustering);
    put_lp_bytes(k, coord.column);
    return k;
}

Coord decode_composite_key(const Bytes& key) {
    Coord c;
    size_t pos = 0;
    std::string_view sv(key);
    c.partition = get_lp_bytes(sv, pos);
    c.clustering = get_lp_bytes(sv, pos);
    c.column = get_lp_bytes(sv, pos);
    if (pos != key.size()) throw std::runtime_error("composite key trailing bytes");
    return c;
}

bool SegmentEntry::operator<(const SegmentEntry& o) const {
    if (!(coord == o.coord)) return coord < o.coord;
    return o.version < version;  // newest first within a coordinate
}

bool write_segment(const std::string& path, uint64_t id, uint8_t codec,
                   const std::vector<SegmentEntry>& entries, SegmentMeta* meta_out) {
    if (entries.empty()) return false;

    std::string body;
    struct BlockInfo {
        uint64_t offset;
        uint32_t length;
        Bytes first_key;
    };
    std::vector<BlockInfo> blocks;

    const size_t header_size = 4 + 4 + 1 + 8;
    std::string block_payload;
    Bytes prev_key;
    Bytes block_first_key;
    size_t in_block = 0;

    auto seal_block = [&] {
        if (block_payload.empty()) return;
        BlockInfo bi;
        bi.offset = header_size + body.size();
        bi.length = static_cast<uint32_t>(8 + block_payload.size());
        bi.first_key = block_first_key;
        std::string frame;
        put_fixed32(frame, static_cast<uint32_t>(block_payload.size()));
        put_fixed32(frame, crc32(block_payload));
        body += frame;
        body += block_payload;
        blocks.push_back(std::move(bi));
        block_payload.clear();
        prev_key.clear();  // codec 1 restarts at block boundaries
        in_block = 0;
    };

    for (const auto& e : entries) {
        Bytes key = e.composite_key();
        if (in_block == 0) block_first_key = key;
        encode_entry(block_payload, codec, key, prev_key, e);
        prev_key = key;
        if (++in_block >= kBlockEntryTarget) seal_block();
    }
    seal_block();

    SegmentMeta meta;
    meta.id = id;
    meta.codec = codec;
    meta.entry_count = entries.size();
    meta.min_key = entries.front().coord;
    meta.max_key = entries.back().coord;

    std::string index;
    put_lp_bytes(index, entries.front().composite_key());
    put_lp_bytes(index, entries.back().composite_key());
    put_varint(index, meta.entry_count);
    put_varint(index, blocks.size());
    for (const auto& b : blocks) {
        put_fixed64(index, b.offset);
        put_fixed32(index, b.length);
        put_lp_bytes(index, b.first_key);
    }

    std::string header;
    header.append(kSegmentMagic, 4);
    put_fixed32(header, kSegmentFormatVersion);
    header.push_back(static_cast<char>(codec));
    put_fixed64(header, header_size + body.size());  // index offset

    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("segment write failed: " + tmp);
        out << header << body << index;
        out.flush();
        if (!out) throw std::runtime_error("segment write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
    if (meta_out) *meta_out = meta;
    return true;
}

void SegmentReader::open(const std::string& path, uint64_t id) {
    path_ = path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("segment open failed: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 17 || data.compare(0, 4, kSegmentMagic, 4) != 0)
        throw std::runtime_error("segment bad magic: " + path);
    size_t pos = 4;
    uint32_t version = get_fixed32(data, pos);
    if (version != kSegmentFormatVersion)
        throw std::runtime_error("segment unsupported format version");
    uint8_t codec = static_cast<uint8_t>(data[pos++]);
    uint64_t index_offset = get_fixed64(data, pos);
    if (index_offset > data.size()) throw std::runtime_error("segment index offset out of range");

    pos = index_offset;
    std::string_view sv(data);
    meta_.id = id;
    meta_.codec = codec;
    meta_.min_key = decode_composite_key(get_lp_bytes(sv, pos));
    meta_.max_key = decode_composite_key(get_lp_bytes(sv, pos));
    meta_.entry_count = get_varint(sv, pos);
    uint64_t nblocks = get_varint(sv, pos);
    blocks_.clear();
    blocks_.reserve(nblocks);
    for (uint64_t i = 0; i < nblocks; ++i) {
        BlockRef b;
        b.offset = get_fixed64(sv, pos);
        b.length = get_fixed32(sv, pos);
        b.first_key = decode_composite_key(get_lp_bytes(sv, pos));
        blocks_.push_back(std::move(b));
    }
}

std::vector<SegmentEntry> SegmentReader::read_block(size_t block_idx) const {
    const BlockRef& b = blocks_.at(block_idx);
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw std::runtime_error("segment open failed: " + path_);
    std::string raw(b.length, '\0');
    in.seekg(static_cast<std::streamoff>(b.offset));
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw std::runtime_error("segment block truncated: " + path_);

    size_t pos = 0;
    uint32_t payload_len = get_fixed32(raw, pos);
    uint32_t crc = get_fixed32(raw, pos);
    if (pos + payload_len != raw.size()) throw std::runtime_error("segment block length mismatch");
    std::string_view payload(raw.data() + pos, payload_len);
    if (crc32(payload) != crc)
        throw std::runtime_error("segment checksum mismatch: " + path_);

    std::vector<SegmentEntry> out;
    Bytes prev_key;
    size_t p = 0;
    while (p < payload.size()) {
        uint64_t shared = get_varint(payload, p);
        uint64_t suffix_len = get_varint(payload, p);
        if (shared > prev_key.size() || p + suffix_len > payload.size())
            throw std::runtime_error("segment entry malformed");
        Bytes key = prev_key.substr(0, shared);
        key.append(payload.data() + p, suffix_len);
        p += suffix_len;
        SegmentEntry e;
        e.coord = decode_composite_key(key);
        e.version.timestamp_us = static_cast<int64_t>(get_fixed64(payload, p));
        e.version.seqno = get_fixed64(payload, p);
        e.version.ttl_s = static_cast<uint32_t>(get_varint(payload, p));
        if (p >= payload.size()) throw std::runtime_error("segment entry malformed");
        e.version.tombstone = payload[p++] != 0;
        e.version.value = get_lp_bytes(payload, p);
        prev_key = key;
        out.push_back(std::move(e));
    }
    return out;
}

void SegmentReader::scan(const CoordBound& low, const CoordBound& high,
                         const std::function<void(const SegmentEntry&)>& fn) const {
    if (coord_after_high(meta_.min_key, high) || coord_before_low(meta_.max_key, low)) return;
    size_t start = 0;
    while (start + 1 < blocks_.size() && coord_before_low(blocks_[start + 1].first_key, low))
        ++start;
    for (size_t i = start; i < blocks_.size(); ++i) {
        if (coord_after_high(blocks_[i].first_key, high)) break;
        for (const auto& e : read_block(i)) {
            if (coord_before_low(e.coord, low)) continue;
            if (coord_after_high(e.coord, high)) return;
            fn(e);
        }
    }
}

void SegmentReader::scan_all(const std::function<void(const SegmentEntry&)>& fn) const {
    for (size_t i = 0; i < blocks_.size(); ++i)
        for (const auto& e : read_block(i)) fn(e);
}

void SegmentReader::verify_all() const {
    for (size_t i = 0; i < blocks_.size(); ++i) (void)read_block(i);
}

} // namespace colma::storage
