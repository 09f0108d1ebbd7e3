#include "colma/knowledge/triple_index.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace colma::kb {

namespace {
constexpr int64_t kNow = std::numeric_limits<int64_t>::max();
}

const Triple& TripleIndex::insert(Triple t) {
    if (t.confidence <= 0.0 || t.confidence > 1.0)
        throw KnowledgeError("triple confidence must be in (0, 1]");
    if (t.retracted_at && *t.retracted_at <= t.asserted_at)
        throw KnowledgeError("retracted_at must be after asserted_at");
    // Idempotent when an identical live assertion exists. Pre-retracted
    // triples (import/replication) bypass this and store by identity.
    if (t.live()) {
        if (auto live = find_live(t.subject, t.predicate, t.object)) {
            auto it = triples_.find(TKey{t.subject, t.predicate, t.object, live->asserted_at});
            return it->second;
        }
    }
    TKey key{t.subject, t.predicate, t.object, t.asserted_at};
    auto [it, fresh] = triples_.emplace(key, std::move(t));
    if (!fresh) return it->second;  // identical quadruple already stored
    const Triple& stored = it->second;
    pos_.insert({stored.predicate, stored.object, stored.subject, stored.asserted_at});
    osp_.insert({stored.object, stored.subject, stored.predicate, stored.asserted_at});
    return stored;
}

RetractResult TripleIndex::retract(const std::string& subject, const std::string& predicate,
                                   const std::string& object, int64_t at) {
    auto live = find_live(subject, predicate, object);
    if (!live) return {false, std::nullopt};
    auto it = triples_.find(TKey{subject, predicate, object, live->asserted_at});
    it->second.retracted_at = std::max(at, it->second.asserted_at + 1);
    return {true, it->second};
}

bool TripleIndex::set_confidence(const std::string& subject, const std::string& predicate,
                                 const std::string& object, double confidence) {
    auto live = find_live(subject, predicate, object);
    if (!live) return false;
    auto it = triples_.find(TKey{subject, predicate, object, live->asserted_at});
    it->second.confidence = confidence;
    return true;
}

std::optional<Triple> TripleIndex::find_live(const std::string& subject,
                                             const std::string& predicate,
                                             const std::string& object) const {
    auto lo = triples_.lower_bound(TKey{subject, predicate, object, 0});
    for (auto it = lo; it != triples_.end(); ++it) {
        const auto& [s, p, o, at] = it->first;
        (void)at;
        if (s != subject || p != predicate || o != object) break;
        if (it->second.live()) return it->second;
    }
    return std::nullopt;
}

std::vector<const Triple*> TripleIndex::candidates(const TriplePattern& p, IndexKind via) const {
    if (via == IndexKind::automatic) {
        if (p.subject) via = IndexKind::spo;
        else if (p.predicate) via = IndexKind::pos;
        else if (p.object) via = IndexKind::osp;
        else via = IndexKind::spo;
    }
    std::vector<const Triple*> out;
    auto emit_range = [&](const std::string& first_bound) {
        // Prefix scan over the canonical map on a bound subject.
        auto it = triples_.lower_bound(TKey{first_bound, "", "", 0});
        for (; it != triples_.end() && std::get<0>(it->first) == first_bound; ++it)
            out.push_back(&it->second);
    };
    switch (via) {
        case IndexKind::spo:
            if (p.subject) {
                emit_range(*p.subject);
            } else {
                for (const auto& [k, t] : triples_) {
                    (void)k;
                    out.push_back(&t);
                }
            }
            break;
        case IndexKind::pos: {
            auto scan = [&](auto begin_key) {
                for (auto it = pos_.lower_bound(begin_key); it != pos_.end(); ++it) {
                    const auto& [pp, oo, ss, at] = *it;
                    if (p.predicate && pp != *p.predicate) break;
                    auto found = triples_.find(TKey{ss, pp, oo, at});
                    out.push_back(&found->second);
                }
            };
            if (p.predicate)
                scan(std::tuple<std::string, std::string, std::string, int64_t>{*p.predicate, "",
                                                                                "", 0});
            else
                scan(std::tuple<std::string, std::string, std::string, int64_t>{"", "", "", 0});
            break;
        }
        case IndexKind::osp: {
            auto scan = [&](auto begin_key) {
                for (auto it = osp_.lower_bound(begin_key); it != osp_.end(); ++it) {
                    const auto& [oo, ss, pp, at] = *it;
                    if (p.object && oo != *p.object) break;
                    auto found = triples_.find(TKey{ss, pp, oo, at});
                    out.push_back(&found->second);
                }
            };
            if (p.object)
                scan(std::tuple<std::string, std::string, std::string, int64_t>{*p.object, "", "",
                                                                                0});
            else
                scan(std::tuple<std::string, std::string, std::string, int64_t>{"", "", "", 0});
            break;
        }
        case IndexKind::automatic: break;  // unreachable
    }
    return out;
}

std::vector<Triple> TripleIndex::query(const TriplePattern& pattern, std::optional<int64_t> as_of,
                                       IndexKind via) const {
    int64_t at = as_of.value_or(kNow);
    std::vector<Triple> out;
    for (const Triple* t : candidates(pattern, via))
        if (pattern.matches(*t) && t->live_at(at)) out.push_back(*t);
    std::sort(out.begin(), out.end(), [](const Triple& a, const Triple& b) {
        return std::tie(a.subject, a.predicate, a.object, a.asserted_at) <
               std::tie(b.subject, b.predicate, b.object, b.asserted_at);
    });
    return out;
}

std::map<std::string, int> TripleIndex::neighbors(const std::string& entity, int max_depth,
                                                  Direction direction) const {
    if (max_depth < 0 || max_depth > 8) throw KnowledgeError("max_depth must be in [0, 8]");
    std::map<std::string, int> dist{{entity, 0}};
    std::deque<std::string> frontier{entity};
    while (!frontier.empty()) {
        std::string node = frontier.front();
        frontier.pop_front();
        int d = dist[node];
        if (d >= max_depth) continue;
        auto visit = [&](const std::string& next) {
            if (dist.emplace(next, d + 1).second) frontier.push_back(next);
        };
        if (direction == Direction::out || direction == Direction::both)
            for (const Triple& t : query(TriplePattern{node, std::nullopt, std::nullopt}))
                visit(t.object);
        if (direction == Direction::in || direction == Direction::both)
            for (const Triple& t : query(TriplePattern{std::nullopt, std::nullopt, node}))
                visit(t.subject);
    }
    return dist;
}

void TripleIndex::for_each(const std::function<void(const Triple&)>& fn) const {
    for (const auto& [k, t] : triples_) {
        (void)k;
        fn(t);
    }
}

size_t TripleIndex::live_count() const {
    size_t n = 0;
    for (const auto& [k, t] : triples_) {
        (void)k;
        if (t.live()) ++n;
    }
    return n;
}

void TripleIndex::clear() {
    triples_.clear();
    pos_.clear();
    osp_.clear();
}

} // namespace colma::kb
