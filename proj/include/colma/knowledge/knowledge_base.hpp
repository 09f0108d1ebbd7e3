#pragma once
// The Knowledge Category Layer for one namespace: versioned multimodal
// records, a triple store with pattern indexes, vector search, and
// key-value facts, all persisted through the wide-column store and fused
// by record<->entity links (triples with predicate "mentionedIn").
//
// Storage layout inside namespace `ns`:
//   (ns, "rec:<id-hex>")  clustering be64(version), column "r": record JSON
//   (ns, "recidx")        clustering be64(created_at)+id bytes, column "t": id hex
//   (ns, "tri")           clustering s|p|o|be64(asserted_at), column "t": triple JSON
//   (ns, "fact")          clustering key, column "v": fact JSON
//   (ns, "meta")          clustering "dim", column "v": embedding dimension

#include "colma/common/clock.hpp"
#include "colma/knowledge/triple_index.hpp"
#include "colma/knowledge/types.hpp"
#include "colma/knowledge/vector_index.hpp"
#include "colma/storage/store.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace colma::kb {

struct KbConfig {
    size_t embedding_dim = 64;
    AnnParams ann;
    bool graph_enabled = true;
    Clock clock = wall_clock_us;
};

struct UpsertOutcome {
    bool ok = false;
    RecordId id;
    uint64_t version = 0;        // stored version on success
    uint64_t current_version = 0;  // reported on version conflict
    std::string error;           // empty on success
};

class KnowledgeBase {
public:
    KnowledgeBase(storage::Store& store, std::string ns, KbConfig config);

    const std::string& ns() const { return ns_; }
    size_t embedding_dim() const { return dim_; }

    // -- records ---------------------------------------------------------
    // New ids create version 1; updates require version = current + 1 and
    // supersedes = (id, current). Prior versions stay readable.
    UpsertOutcome upsert_record(MemoryRecord r);

    // Default read: newest non-archived version, bumping access counters.
    // Explicit version: that exact stored version, archived or not, no bump.
    std::optional<MemoryRecord> get_record(const RecordId& id,
                                           std::optional<uint64_t> version = std::nullopt);
    std::optional<MemoryRecord> peek_record(const RecordId& id,
                                            std::optional<uint64_t> version = std::nullopt) const;

    // In-place metadata mutation of the head version (counters, salience,
    // tier). No version bump: versioning tracks content changes only.
    bool mutate_head(const RecordId& id, const std::function<void(MemoryRecord&)>& fn);

    // Admin import path: stores the record exactly as given.
    void import_record(const MemoryRecord& r);

    void for_each_head(const std::function<void(const MemoryRecord&)>& fn) const;
    std::vector<RecordId> record_ids() const;
    size_t version_count(const RecordId& id) const;

    // Record ids whose created_at falls in [t_lo, t_hi], time order.
    std::vector<RecordId> records_in_window(int64_t t_lo, int64_t t_hi) const;

    // -- triples ----------------------------------------------------------
    const Triple& assert_triple(Triple t);
    RetractResult retract_triple(const std::string& subject, const std::string& predicate,
                                 const std::string& object, int64_t at);
    bool set_triple_confidence(const std::string& subject, const std::string& predicate,
                               const std::string& object, double confidence);
    std::vector<Triple> query_triples(const TriplePattern& pattern,
                                      std::optional<int64_t> as_of = std::nullopt,
                                      IndexKind via = IndexKind::automatic) const;
    std::map<std::string, int> neighbors(const std::string& entity, int max_depth,
                                         Direction direction) const;
    size_t triple_count(bool live_only) const;

    // -- vectors ----------------------------------------------------------
    std::vector<ScoredId> knn(const std::vector<float>& query, size_t k, KnnMode mode) const;

    // -- facts -------------------------------------------------------------
    void put_fact(const std::string& key, Bytes value);
    std::optional<Fact> get_fact(const std::string& key) const;
    size_t fact_count() const;

    // -- linking ------------------------------------------------------------
    void link_record_entity(const RecordId& id, const std::string& entity);
    std::vector<RecordId> records_of_entity(const std::string& entity) const;

    // -- event streams --------------------------------------------------------
    // Clustering-time-ordered label sequences for prediction.
    void append_stream_event(const std::string& stream_id, const std::string& label,
                             int64_t occurred_at, const RecordId& record);
    std::vector<std::string> stream_events(const std::string& stream_id) const;

    // -- export / import ------------------------------------------------------
    void export_jsonl(std::ostream& out) const;
    // Returns imported line count; throws KnowledgeError on malformed lines.
    size_t import_jsonl(std::istream& in);

    static std::string normalize_entity(const std::string& entity);

private:
    void load();
    void persist_record(const MemoryRecord& r);
    void persist_triple(const Triple& t);
    void index_record(const MemoryRecord& r);
    const MemoryRecord* head_of(const RecordId& id) const;
    void require_graph() const;

    storage::Store& store_;
    std::string ns_;
    KbConfig config_;
    size_t dim_;

    mutable std::shared_mutex mu_;
    std::map<RecordId, std::map<uint64_t, MemoryRecord>> records_;
    TripleIndex triples_;
    std::unique_ptr<VectorIndex> vectors_;
    std::map<std::string, Fact> facts_;
};

} // namespace colma::kb
