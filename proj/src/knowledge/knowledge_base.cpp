#include "colma/knowledge/knowledge_base.hpp"

#include "colma/knowledge/json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace colma::kb {

namespace {

constexpr const char* kRecIdxEntity = "recidx";
constexpr const char* kTriplesEntity = "tri";
constexpr const char* kFactsEntity = "fact";
constexpr const char* kMetaEntity = "meta";

Bytes triple_clustering(const Triple& t) {
    Bytes b = t.subject;
    b += '\x1F';
    b += t.predicate;
    b += '\x1F';
    b += t.object;
    b += '\x1F';
    b += be64(static_cast<uint64_t>(t.asserted_at));
    return b;
}

Bytes id_bytes(const RecordId& id) {
    return Bytes(reinterpret_cast<const char*>(id.bytes.data()), id.bytes.size());
}

void validate_record(const MemoryRecord& r, size_t dim) {
    if (r.ns.empty()) throw KnowledgeError("record namespace must be set");
    if (r.salience < 0.0 || r.salience > 1.0)
        throw KnowledgeError("salience must be in [0, 1]");
    if (r.version == 0) throw KnowledgeError("versions start at 1");
    if (r.embedding) {
        if (r.embedding->size() != dim) throw KnowledgeError("dimension mismatch");
        for (float v : *r.embedding)
            if (!std::isfinite(v)) throw KnowledgeError("embedding components must be finite");
    }
}

} // namespace

std::string KnowledgeBase::normalize_entity(const std::string& entity) {
    if (entity.rfind(kEntityPrefix, 0) == 0 || entity.rfind(kLiteralPrefix, 0) == 0 ||
        entity.rfind(kRecordPrefix, 0) == 0)
        return entity;
    return kEntityPrefix + entity;
}

KnowledgeBase::KnowledgeBase(storage::Store& store, std::string ns, KbConfig config)
    : store_(store), ns_(std::move(ns)), config_(std::move(config)), dim_(config_.embedding_dim) {
    if (ns_.empty()) throw KnowledgeError("namespace must be non-empty");
    // Dimension is fixed per namespace at creation.
    storage::PartitionKey meta{ns_, kMetaEntity};
    if (auto cell = store_.get(meta, "dim", "v")) {
        dim_ = std::stoull(cell->value);
    } else {
        storage::Cell c;
        c.clustering = "dim";
        c.column = "v";
        c.value = std::to_string(dim_);
        c.timestamp_us = config_.clock();
        store_.put(meta, c);
    }
    vectors_ = std::make_unique<VectorIndex>(dim_, config_.ann);
    load();
}

void KnowledgeBase::load() {
    std::unique_lock lk(mu_);
    for (const auto& pk : store_.list_partitions(ns_)) {
        if (pk.entity.rfind(kRecordPrefix, 0) == 0) {
            for (const auto& cell : store_.scan_partition(pk)) {
                if (cell.column != "r") continue;
                MemoryRecord r = record_from_json(Json::parse(cell.value));
                records_[r.id][r.version] = std::move(r);
            }
        } else if (pk.entity == kTriplesEntity) {
            for (const auto& cell : store_.scan_partition(pk)) {
                if (cell.column != "t") continue;
                triples_.insert(triple_from_json(Json::parse(cell.value)));
            }
        } else if (pk.entity == kFactsEntity) {
            for (const auto& cell : store_.scan_partition(pk)) {
                if (cell.column != "v") continue;
                Fact f = fact_from_json(Json::parse(cell.value));
                facts_[f.key] = std::move(f);
            }
        }
    }
    for (const auto& [id, versions] : records_) {
        (void)id;
        const MemoryRecord& head = versions.rbegin()->second;
        index_record(head);
    }
}

void KnowledgeBase::require_graph() const {
    if (!config_.graph_enabled) throw KnowledgeError("graph layer disabled");
}

const MemoryRecord* KnowledgeBase::head_of(const RecordId& id) const {
    auto it = records_.find(id);
    if (it == records_.end() || it->second.empty()) return nullptr;
    return &it->second.rbegin()->second;
}

void KnowledgeBase::persist_record(const MemoryRecord& r) {
    storage::PartitionKey pk{ns_, kRecordPrefix + r.id.hex()};
    storage::Cell c;
    c.clustering = be64(r.version);
    c.column = "r";
    c.value = canon(record_to_json(r));
    c.timestamp_us = config_.clock();
    store_.put(pk, c);
    if (r.version == 1) {
        storage::Cell idx;
        idx.clustering = be64(static_cast<uint64_t>(r.created_at)) + id_bytes(r.id);
        idx.column = "t";
        idx.value = r.id.hex();
        idx.timestamp_us = c.timestamp_us;
        store_.put({ns_, kRecIdxEntity}, idx);
    }
}

void KnowledgeBase::persist_triple(const Triple& t) {
    storage::Cell c;
    c.clustering = triple_clustering(t);
    c.column = "t";
    c.value = canon(triple_to_json(t));
    c.timestamp_us = config_.clock();
    store_.put({ns_, kTriplesEntity}, c);
}

void KnowledgeBase::index_record(const MemoryRecord& r) {
    if (r.tier != Tier::archived && r.embedding) {
        vectors_->upsert(r.id, *r.embedding);
    } else {
        vectors_->erase(r.id);
    }
}

UpsertOutcome KnowledgeBase::upsert_record(MemoryRecord r) {
    std::unique_lock lk(mu_);
    if (r.ns.empty()) r.ns = ns_;
    if (r.ns != ns_) throw KnowledgeError("record namespace does not match this knowledge base");
    validate_record(r, dim_);

    UpsertOutcome out;
    out.id = r.id;
    const MemoryRecord* head = head_of(r.id);
    if (head == nullptr) {
        if (r.version != 1) {
            out.error = "version conflict";
            out.current_version = 0;
            return out;
        }
        if (r.supersedes) {
            // A fresh trace may supersede an existing record of another id;
            // the target must already exist, which keeps chains acyclic.
            auto target = records_.find(r.supersedes->first);
            if (target == records_.end() || !target->second.count(r.supersedes->second))
                throw KnowledgeError("supersedes target does not exist");
        }
    } else {
        if (r.version != head->version + 1) {
            out.error = "version conflict";
            out.current_version = head->version;
            return out;
        }
        if (!r.supersedes || !(r.supersedes->first == r.id) ||
            r.supersedes->second != head->version)
            throw KnowledgeError("update must supersede (id, current version)");
    }
    persist_record(r);
    uint64_t version = r.version;
    RecordId id = r.id;
    records_[id][version] = std::move(r);
    index_record(records_[id][version]);
    out.ok = true;
    out.version = version;
    out.current_version = version;
    return out;
}

std::optional<MemoryRecord> KnowledgeBase::peek_record(const RecordId& id,
                                                       std::optional<uint64_t> version) const {
    std::shared_lock lk(mu_);
    auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    if (version) {
        auto vit = it->second.find(*version);
        if (vit == it->second.end()) return std::nullopt;
        return vit->second;
    }
    const MemoryRecord& head = it->second.rbegin()->second;
    if (head.tier == Tier::archived) return std::nullopt;
    return head;
}

std::optional<MemoryRecord> KnowledgeBase::get_record(const RecordId& id,
                                                      std::optional<uint64_t> version) {
    if (version) return peek_record(id, version);
    std::unique_lock lk(mu_);
    auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    MemoryRecord& head = it->second.rbegin()->second;
    if (head.tier == Tier::archived) return std::nullopt;
    // Default reads feed the retention signal.
    head.access_count += 1;
    head.last_access = config_.clock();
    persist_record(head);
    return head;
}

bool KnowledgeBase::mutate_head(const RecordId& id, const std::function<void(MemoryRecord&)>& fn) {
    std::unique_lock lk(mu_);
    auto it = records_.find(id);
    if (it == records_.end()) return false;
    MemoryRecord& head = it->second.rbegin()->second;
    uint64_t version_before = head.version;
    Bytes content_before = head.content;
    fn(head);
    head.version = version_before;  // metadata mutations never bump versions
    head.content = content_before;
    head.salience = std::clamp(head.salience, 0.0, 1.0);
    persist_record(head);
    index_record(head);
    return true;
}

void KnowledgeBase::import_record(const MemoryRecord& r) {
    std::unique_lock lk(mu_);
    validate_record(r, dim_);
    persist_record(r);
    records_[r.id][r.version] = r;
    const MemoryRecord& head = records_[r.id].rbegin()->second;
    index_record(head);
}

void KnowledgeBase::for_each_head(const std::function<void(const MemoryRecord&)>& fn) const {
    std::shared_lock lk(mu_);
    for (const auto& [id, versions] : records_) {
        (void)id;
        fn(versions.rbegin()->second);
    }
}

std::vector<RecordId> KnowledgeBase::record_ids() const {
    std::shared_lock lk(mu_);
    std::vector<RecordId> out;
    out.reserve(records_.size());
    for (const auto& [id, versions] : records_) {
        (void)versions;
        out.push_back(id);
    }
    return out;
}

size_t KnowledgeBase::version_count(const RecordId& id) const {
    std::shared_lock lk(mu_);
    auto it = records_.find(id);
    return it == records_.end() ? 0 : it->second.size();
}

std::vector<RecordId> KnowledgeBase::records_in_window(int64_t t_lo, int64_t t_hi) const {
    std::vector<RecordId> out;
    if (t_lo > t_hi) return out;
    Bytes lo = be64(static_cast<uint64_t>(std::max<int64_t>(t_lo, 0)));
    Bytes hi = be64(static_cast<uint64_t>(std::max<int64_t>(t_hi, 0))) + Bytes(16, '\xFF');
    for (const auto& cell : store_.range_scan({ns_, kRecIdxEntity}, lo, hi)) {
        auto id = RecordId::parse(cell.value);
        if (id) out.push_back(*id);
    }
    return out;
}

const Triple& KnowledgeBase::assert_triple(Triple t) {
    require_graph();
    std::unique_lock lk(mu_);
    if (t.asserted_at == 0) t.asserted_at = config_.clock();
    const Triple& stored = triples_.insert(std::move(t));
    persist_triple(stored);
    return stored;
}

RetractResult KnowledgeBase::retract_triple(const std::string& subject,
                                            const std::string& predicate,
                                            const std::string& object, int64_t at) {
    require_graph();
    std::unique_lock lk(mu_);
    RetractResult res = triples_.retract(subject, predicate, object, at);
    if (res.was_live && res.retracted) persist_triple(*res.retracted);
    return res;
}

bool KnowledgeBase::set_triple_confidence(const std::string& subject,
                                          const std::string& predicate,
                                          const std::string& object, double confidence) {
    require_graph();
    std::unique_lock lk(mu_);
    if (!triples_.set_confidence(subject, predicate, object, confidence)) return false;
    persist_triple(*triples_.find_live(subject, predicate, object));
    return true;
}

std::vector<Triple> KnowledgeBase::query_triples(const TriplePattern& pattern,
                                                 std::optional<int64_t> as_of,
                                                 IndexKind via) const {
    require_graph();
    std::shared_lock lk(mu_);
    return triples_.query(pattern, as_of, via);
}

std::map<std::string, int> KnowledgeBase::neighbors(const std::string& entity, int max_depth,
                                                    Direction direction) const {
    require_graph();
    std::shared_lock lk(mu_);
    return triples_.neighbors(normalize_entity(entity), max_depth, direction);
}

size_t KnowledgeBase::triple_count(bool live_only) const {
    std::shared_lock lk(mu_);
    return live_only ? triples_.live_count() : triples_.total_count();
}

std::vector<ScoredId> KnowledgeBase::knn(const std::vector<float>& query, size_t k,
                                         KnnMode mode) const {
    if (k == 0) throw KnowledgeError("k must be >= 1");
    std::shared_lock lk(mu_);
    return vectors_->knn(query, k, mode);
}

void KnowledgeBase::put_fact(const std::string& key, Bytes value) {
    std::unique_lock lk(mu_);
    Fact f{key, std::move(value), config_.clock()};
    storage::Cell c;
    c.clustering = key;
    c.column = "v";
    c.value = canon(fact_to_json(f));
    c.timestamp_us = f.updated_at;
    store_.put({ns_, kFactsEntity}, c);
    facts_[key] = std::move(f);
}

std::optional<Fact> KnowledgeBase::get_fact(const std::string& key) const {
    std::shared_lock lk(mu_);
    auto it = facts_.find(key);
    if (it == facts_.end()) return std::nullopt;
    return it->second;
}

size_t KnowledgeBase::fact_count() const {
    std::shared_lock lk(mu_);
    return facts_.size();
}

void KnowledgeBase::link_record_entity(const RecordId& id, const std::string& entity) {
    {
        std::shared_lock lk(mu_);
        if (!records_.count(id)) throw KnowledgeError("unknown record");
    }
    Triple t;
    t.subject = normalize_entity(entity);
    t.predicate = "mentionedIn";
    t.object = kRecordPrefix + id.hex();
    t.confidence = 1.0;
    assert_triple(std::move(t));
}

std::vector<RecordId> KnowledgeBase::records_of_entity(const std::string& entity) const {
    std::vector<RecordId> out;
    TriplePattern p{normalize_entity(entity), std::string("mentionedIn"), std::nullopt};
    for (const Triple& t : query_triples(p)) {
        if (t.object.rfind(kRecordPrefix, 0) != 0) continue;
        auto id = RecordId::parse(t.object.substr(4));
        if (id) out.push_back(*id);
    }
    return out;
}

void KnowledgeBase::append_stream_event(const std::string& stream_id, const std::string& label,
                                        int64_t occurred_at, const RecordId& record) {
    std::unique_lock lk(mu_);
    storage::PartitionKey pk{ns_, "stream:" + stream_id};
    uint64_t ordinal = store_.scan_partition(pk).size();
    storage::Cell c;
    c.clustering = be64(static_cast<uint64_t>(occurred_at)) + be64(ordinal);
    c.column = "e";
    Json v;
    v["label"] = label;
    v["record"] = record.hex();
    c.value = canon(v);
    c.timestamp_us = config_.clock();
    store_.put(pk, c);
}

std::vector<std::string> KnowledgeBase::stream_events(const std::string& stream_id) const {
    std::shared_lock lk(mu_);
    std::vector<std::string> labels;
    for (const auto& cell : store_.scan_partition({ns_, "stream:" + stream_id})) {
        if (cell.column != "e") continue;
        Json j = Json::parse(cell.value, nullptr, false);
        if (j.is_object() && j.contains("label")) labels.push_back(j.at("label"));
    }
    return labels;
}

void KnowledgeBase::export_jsonl(std::ostream& out) const {
    std::shared_lock lk(mu_);
    for (const auto& [id, versions] : records_) {
        (void)id;
        for (const auto& [v, r] : versions) {
            (void)v;
            out << export_line(r) << '\n';
        }
    }
    triples_.for_each([&](const Triple& t) { out << export_line(t) << '\n'; });
    for (const auto& [k, f] : facts_) {
        (void)k;
        out << export_line(f) << '\n';
    }
}

size_t KnowledgeBase::import_jsonl(std::istream& in) {
    size_t count = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) throw KnowledgeError("malformed JSONL line");
        std::string kind = j.value("kind", "");
        if (kind == "record") {
            MemoryRecord r = record_from_json(j);
            r.ns = ns_;
            import_record(r);
        } else if (kind == "triple") {
            Triple t = triple_from_json(j);
            std::unique_lock lk(mu_);
            const Triple& stored = triples_.insert(std::move(t));
            persist_triple(stored);
        } else if (kind == "fact") {
            Fact f = fact_from_json(j);
            std::unique_lock lk(mu_);
            storage::Cell c;
            c.clustering = f.key;
            c.column = "v";
            c.value = canon(fact_to_json(f));
            c.timestamp_us = f.updated_at;
            store_.put({ns_, kFactsEntity}, c);
            facts_[f.key] = std::move(f);
        } else {
            throw KnowledgeError("unknown kind in JSONL: " + kind);
        }
        ++count;
    }
    return count;
}

} // namespace colma::kb
