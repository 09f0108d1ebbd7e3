#pragma once
// Knowledge Category Layer domain types: versioned multimodal records,
// triples with validity intervals, key-value facts, scored results.

#include "colma/common/bytes.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace colma::kb {

struct KnowledgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Opaque 128-bit record identifier; canonical text form is 32 lowercase
// hex chars. Ordering is bytewise (used for score tie-breaks).
struct RecordId {
    std::array<uint8_t, 16> bytes{};

    std::string hex() const {
        std::string raw(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        return to_hex(raw);
    }
    static std::optional<RecordId> parse(std::string_view hex) {
        if (hex.size() != 32) return std::nullopt;
        Bytes raw = from_hex(hex);
        if (raw.size() != 16) return std::nullopt;
        RecordId id;
        for (size_t i = 0; i < 16; ++i) id.bytes[i] = static_cast<uint8_t>(raw[i]);
        return id;
    }
    auto operator<=>(const RecordId&) const = default;
};

enum class Modality { text, image_descriptor, structured, event };
enum class Tier { short_term, medium_term, long_term, archived };

std::string to_string(Modality m);
std::string to_string(Tier t);
std::optional<Modality> modality_from_string(std::string_view s);
std::optional<Tier> tier_from_string(std::string_view s);

struct MemoryRecord {
    RecordId id;
    std::string ns;
    Modality modality = Modality::text;
    Bytes content;
    std::optional<std::vector<float>> embedding;
    int64_t created_at = 0;    // microseconds
    int64_t last_access = 0;   // microseconds
    uint64_t access_count = 0;
    double salience = 0.5;     // [0, 1]
    Tier tier = Tier::short_term;
    uint64_t version = 1;
    std::optional<std::pair<RecordId, uint64_t>> supersedes;
    std::vector<std::string> provenance;
};

// Entity strings carry a `ent:` prefix, literals `lit:`, record references
// `rec:<hex>`; the prefixes disambiguate Triple.object.
constexpr const char* kEntityPrefix = "ent:";
constexpr const char* kLiteralPrefix = "lit:";
constexpr const char* kRecordPrefix = "rec:";

struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    double confidence = 1.0;  // (0, 1]
    int64_t asserted_at = 0;
    std::optional<int64_t> retracted_at;
    std::optional<RecordId> source_record;

    bool live() const { return !retracted_at.has_value(); }
    bool live_at(int64_t as_of) const {
        return asserted_at <= as_of && (!retracted_at || *retracted_at > as_of);
    }
    // Stable identity within a namespace.
    auto key() const { return std::tie(subject, predicate, object, asserted_at); }
};

struct Fact {
    std::string key;
    Bytes value;
    int64_t updated_at = 0;
};

struct ScoredId {
    RecordId id;
    double score = 0.0;
};

// Canonical result ordering: score descending, ties by ascending id bytes.
inline bool scored_before(const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

} // namespace colma::kb
