#pragma once
// LEB128-style unsigned varints for segment block encoding.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace colma {

inline void put_varint(std::string& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7F) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

// Reads a varint at `pos`, advancing it. Throws on truncation/overflow.
inline uint64_t get_varint(std::string_view in, size_t& pos) {
    uint64_t v = 0;
    int shift = 0;
    while (pos < in.size()) {
        unsigned char b = in[pos++];
        if (shift >= 63 && (b & 0x7E)) throw std::runtime_error("varint overflow");
        v |= static_cast<uint64_t>(b & 0x7F) << shift;
        if (!(b & 0x80)) return v;
        shift += 7;
    }
    throw std::runtime_error("varint truncated");
}

inline void put_fixed32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_fixed64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline uint32_t get_fixed32(std::string_view in, size_t& pos) {
    if (pos + 4 > in.size()) throw std::runtime_error("fixed32 truncated");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
    return v;
}

inline uint64_t get_fixed64(std::string_view in, size_t& pos) {
    if (pos + 8 > in.size()) throw std::runtime_error("fixed64 truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
    return v;
}

inline void put_lp_bytes(std::string& out, std::string_view b) {
    put_varint(out, b.size());
    out.append(b.data(), b.size());
}

inline std::string get_lp_bytes(std::string_view in, size_t& pos) {
    uint64_t n = get_varint(in, pos);
    if (pos + n > in.size()) throw std::runtime_error("length-prefixed bytes truncated");
    std::string s(in.substr(pos, n));
    pos += n;
    return s;
}

} // namespace colma
