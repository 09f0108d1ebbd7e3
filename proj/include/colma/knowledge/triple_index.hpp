#pragma once
// Triple store with SPO / POS / OSP permutation indexes and BFS exploration.
// Assertions never overwrite: retraction stamps retracted_at and the triple
// stays queryable at historical as_of. One live (s,p,o) at a time.

#include "colma/knowledge/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace colma::kb {

struct TriplePattern {
    std::optional<std::string> subject;
    std::optional<std::string> predicate;
    std::optional<std::string> object;

    bool matches(const Triple& t) const {
        return (!subject || *subject == t.subject) && (!predicate || *predicate == t.predicate) &&
               (!object || *object == t.object);
    }
};

enum class IndexKind { spo, pos, osp, automatic };
enum class Direction { out, in, both };

struct RetractResult {
    bool was_live = false;
    std::optional<Triple> retracted;
};

class TripleIndex {
public:
    using TKey = std::tuple<std::string, std::string, std::string, int64_t>;

    // Idempotent for an identical live (s,p,o); returns the stored triple.
    const Triple& insert(Triple t);
    // Signals "not live" instead of erroring when nothing matches.
    RetractResult retract(const std::string& subject, const std::string& predicate,
                          const std::string& object, int64_t at);
    // Confidence update in place (reinforcement); false when not live.
    bool set_confidence(const std::string& subject, const std::string& predicate,
                        const std::string& object, double confidence);

    // Triples matching the pattern, live at as_of (default: live now),
    // ordered by (s, p, o, asserted_at). `via` pins the serving index.
    std::vector<Triple> query(const TriplePattern& pattern,
                              std::optional<int64_t> as_of = std::nullopt,
                              IndexKind via = IndexKind::automatic) const;

    // Breadth-first hop distances over live triples; the seed maps to 0.
    std::map<std::string, int> neighbors(const std::string& entity, int max_depth,
                                         Direction direction) const;

    std::optional<Triple> find_live(const std::string& subject, const std::string& predicate,
                                    const std::string& object) const;

    void for_each(const std::function<void(const Triple&)>& fn) const;
    size_t total_count() const { return triples_.size(); }
    size_t live_count() const;
    void clear();

private:
    std::vector<const Triple*> candidates(const TriplePattern& p, IndexKind via) const;

    std::map<TKey, Triple> triples_;  // canonical storage, SPO-ordered
    // Permutation indexes refer back to canonical keys.
    std::set<std::tuple<std::string, std::string, std::string, int64_t>> pos_;  // (p,o,s,at)
    std::set<std::tuple<std::string, std::string, std::string, int64_t>> osp_;  // (o,s,p,at)
};

} // namespace colma::kb
