#include "colma/storage/wal.hpp"

#include "colma/common/crc32.hpp"
#include "colma/common/varint.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace colma::storage {

Bytes encode_mutation(const Mutation& m) {
    std::string out;
    put_lp_bytes(out, m.partition.ns);
    put_lp_bytes(out, m.partition.entity);
    put_lp_bytes(out, m.cell.clustering);
    put_lp_bytes(out, m.cell.column);
    put_lp_bytes(out, m.cell.value);
    put_fixed64(out, static_cast<uint64_t>(m.cell.timestamp_us));
    put_fixed32(out, m.cell.ttl_s);
    out.push_back(m.cell.tombstone ? 1 : 0);
    put_fixed64(out, m.seqno);
    return out;
}

Mutation decode_mutation(std::string_view payload) {
    Mutation m;
    size_t pos = 0;
    m.partition.ns = get_lp_bytes(payload, pos);
    m.partition.entity = get_lp_bytes(payload, pos);
    m.cell.clustering = get_lp_bytes(payload, pos);
    m.cell.column = get_lp_bytes(payload, pos);
    m.cell.value = get_lp_bytes(payload, pos);
    m.cell.timestamp_us = static_cast<int64_t>(get_fixed64(payload, pos));
    m.cell.ttl_s = get_fixed32(payload, pos);
    if (pos >= payload.size()) throw std::runtime_error("mutation truncated");
    m.cell.tombstone = payload[pos++] != 0;
    m.seqno = get_fixed64(payload, pos);
    if (pos != payload.size()) throw std::runtime_error("mutation has trailing bytes");
    return m;
}

WalWriter::~WalWriter() { close(); }

void WalWriter::open(const std::string& path, bool fsync_writes) {
    close();
    fsync_writes_ = fsync_writes;
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0)
        throw std::runtime_error("wal open failed: " + path + ": " + std::strerror(errno));
}

void WalWriter::append(const Mutation& m) {
    if (fd_ < 0) throw std::runtime_error("wal not open");
    Bytes payload = encode_mutation(m);
    std::string frame;
    frame.reserve(8 + payload.size());
    put_fixed32(frame, static_cast<uint32_t>(payload.size()));
    put_fixed32(frame, crc32(payload));
    frame += payload;
    size_t off = 0;
    while (off < frame.size()) {
        ssize_t n = ::write(fd_, frame.data() + off, frame.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("wal write failed: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(n);
    }
    if (fsync_writes_) ::fdatasync(fd_);
}

void WalWriter::close() {
    if (fd_ >= 0) {
        ::fdatasync(fd_);
        ::close(fd_);
        fd_ = -1;
    }
}

WalReplay replay_wal(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return replay_wal_bytes(data);
}

WalReplay replay_wal_bytes(std::string_view data) {
    WalReplay out;
    size_t pos = 0;
    while (pos + 8 <= data.size()) {
        size_t p = pos;
        uint32_t len = get_fixed32(data, p);
        uint32_t crc = get_fixed32(data, p);
        if (p + len > data.size()) break;  // torn tail
        std::string_view payload(data.data() + p, len);
        if (crc32(payload) != crc) break;  // corrupt record: cut here
        try {
            out.mutations.push_back(decode_mutation(payload));
        } catch (const std::exception&) {
            break;  // framing ok but payload malformed: treat as corruption
        }
        pos = p + len;
        out.valid_bytes = pos;
    }
    out.truncated_tail = out.valid_bytes < data.size();
    return out;
}

} // namespace colma::storage
