#pragma once
// Coordination Layer: intake encoding into short-term memory, scheduled
// consolidation (tier promotion), reinforcement, and forgetting (archival
// demotion; physical removal stays with storage compaction).

#include "colma/common/clock.hpp"
#include "colma/coordination/policy.hpp"
#include "colma/knowledge/knowledge_base.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace colma::coord {

using IdGen = std::function<kb::RecordId()>;

struct Stimulus {
    kb::Modality modality = kb::Modality::text;
    Bytes content;
    std::optional<std::vector<float>> embedding;
    std::optional<double> salience;  // defaults to 0.5
    std::vector<std::string> entities;
    int64_t occurred_at = 0;  // 0 = coordinator clock
};

struct TierChange {
    kb::RecordId id;
    kb::Tier from;
    kb::Tier to;
};

struct TickReport {
    std::vector<TierChange> promoted;
    std::vector<kb::RecordId> archived;
    size_t evaluated = 0;

    bool empty() const { return promoted.empty() && archived.empty(); }
};

class Coordinator {
public:
    Coordinator(kb::KnowledgeBase& base, RetentionPolicy policy, Clock clock, IdGen idgen);

    // Encoding stage: stimulus -> short-tier record (version 1), entities
    // linked. Over capacity, the weakest short record is promoted or
    // archived, never silently dropped.
    kb::MemoryRecord encode(const Stimulus& stimulus);

    double score(const kb::MemoryRecord& r, int64_t now) const {
        return retention_score(policy_, r, now);
    }

    // Evaluates every non-archived record: R >= promote_threshold moves one
    // tier up (long stays); R < archive_threshold archives. Idempotent for
    // a fixed `now` (the second run reports nothing).
    TickReport consolidate_tick(int64_t now);

    // Archival-only pass.
    std::vector<kb::RecordId> forget_tick(int64_t now);

    // salience += delta (clamped), access_count += 1, last_access = now.
    // No version bump. Throws KnowledgeError for unknown ids.
    void reinforce(const kb::RecordId& id, double delta_salience);

    const RetentionPolicy& policy() const { return policy_; }
    int64_t now() const { return clock_(); }

private:
    void enforce_short_capacity(TickReport* report);
    std::optional<int64_t> last_tick_now() const;

    kb::KnowledgeBase& base_;
    RetentionPolicy policy_;
    Clock clock_;
    IdGen idgen_;
};

} // namespace colma::coord
