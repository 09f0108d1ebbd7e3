#pragma once
// Stable 64-bit hashes. These feed ring placement, the deterministic
// embedder, and transcript digests, so the constants are part of the
// on-disk/wire contract and must never change.

#include <cstdint>
#include <string_view>

namespace colma {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// FNV-1a 64 over raw bytes, then splitmix64 to spread low-entropy inputs.
inline uint64_t stable_hash64(std::string_view bytes) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return splitmix64(h);
}

// Deterministic PRNG stream: state advances by the splitmix64 increment.
class SplitMix {
public:
    explicit SplitMix(uint64_t seed) : state_(seed) {}
    uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }
    // Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return n ? next() % n : 0; }

private:
    uint64_t state_;
};

} // namespace colma
