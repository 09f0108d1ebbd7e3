#include "colma/coordination/coordinator.hpp"

#include <algorithm>

namespace colma::coord {

namespace {
constexpr const char* kLastTickFact = "__coord:last_consolidate_tick";

kb::Tier next_tier(kb::Tier t) {
    switch (t) {
        case kb::Tier::short_term: return kb::Tier::medium_term;
        case kb::Tier::medium_term: return kb::Tier::long_term;
        case kb::Tier::long_term:
        case kb::Tier::archived: return t;
    }
    return t;
}
} // namespace

Coordinator::Coordinator(kb::KnowledgeBase& base, RetentionPolicy policy, Clock clock,
                         IdGen idgen)
    : base_(base), policy_(policy), clock_(std::move(clock)), idgen_(std::move(idgen)) {
    policy_.validate();
}

kb::MemoryRecord Coordinator::encode(const Stimulus& stimulus) {
    double salience = stimulus.salience.value_or(0.5);
    if (salience < 0.0 || salience > 1.0)
        throw kb::KnowledgeError("salience must be in [0, 1]");
    int64_t at = stimulus.occurred_at != 0 ? stimulus.occurred_at : clock_();

    kb::MemoryRecord r;
    r.id = idgen_();
    r.ns = base_.ns();
    r.modality = stimulus.modality;
    r.content = stimulus.content;
    r.embedding = stimulus.embedding;
    r.created_at = at;
    r.last_access = at;
    r.access_count = 0;
    r.salience = salience;
    r.tier = kb::Tier::short_term;
    r.version = 1;

    auto out = base_.upsert_record(r);
    if (!out.ok) throw kb::KnowledgeError("encode failed: " + out.error);
    for (const auto& entity : stimulus.entities) base_.link_record_entity(r.id, entity);

    enforce_short_capacity(nullptr);
    return *base_.peek_record(r.id);
}

void Coordinator::enforce_short_capacity(TickReport* report) {
    while (true) {
        std::vector<kb::MemoryRecord> shorts;
        base_.for_each_head([&](const kb::MemoryRecord& r) {
            if (r.tier == kb::Tier::short_term) shorts.push_back(r);
        });
        if (shorts.size() <= policy_.short_capacity) return;

        int64_t now = clock_();
        // Evict lowest retention; ties by oldest created_at, then id bytes.
        const kb::MemoryRecord* victim = nullptr;
        double victim_score = 0.0;
        for (const auto& r : shorts) {
            double s = score(r, now);
            if (!victim || s < victim_score ||
                (s == victim_score && (r.created_at < victim->created_at ||
                                       (r.created_at == victim->created_at &&
                                        r.id < victim->id)))) {
                victim = &r;
                victim_score = s;
            }
        }
        kb::Tier to = victim_score >= policy_.promote_threshold ? kb::Tier::medium_term
                                                                : kb::Tier::archived;
        kb::RecordId id = victim->id;
        base_.mutate_head(id, [&](kb::MemoryRecord& r) { r.tier = to; });
        if (report) {
            if (to == kb::Tier::archived)
                report->archived.push_back(id);
            else
                report->promoted.push_back({id, kb::Tier::short_term, to});
        }
    }
}

std::optional<int64_t> Coordinator::last_tick_now() const {
    auto f = base_.get_fact(kLastTickFact);
    if (!f) return std::nullopt;
    try {
        return std::stoll(f->value);
    } catch (...) {
        return std::nullopt;
    }
}

TickReport Coordinator::consolidate_tick(int64_t now) {
    TickReport report;
    if (auto last = last_tick_now(); last && *last == now) return report;  // idempotent

    struct Decision {
        kb::RecordId id;
        kb::Tier from;
        kb::Tier to;
    };
    std::vector<Decision> decisions;
    // Snapshot-evaluate, then apply as a batch.
    base_.for_each_head([&](const kb::MemoryRecord& r) {
        if (r.tier == kb::Tier::archived) return;
        ++report.evaluated;
        double s = score(r, now);
        if (s >= policy_.promote_threshold) {
            kb::Tier to = next_tier(r.tier);
            if (to != r.tier) decisions.push_back({r.id, r.tier, to});
        } else if (s < policy_.archive_threshold) {
            decisions.push_back({r.id, r.tier, kb::Tier::archived});
        }
    });
    for (const auto& d : decisions) {
        base_.mutate_head(d.id, [&](kb::MemoryRecord& r) { r.tier = d.to; });
        if (d.to == kb::Tier::archived)
            report.archived.push_back(d.id);
        else
            report.promoted.push_back({d.id, d.from, d.to});
    }
    base_.put_fact(kLastTickFact, std::to_string(now));
    return report;
}

std::vector<kb::RecordId> Coordinator::forget_tick(int64_t now) {
    std::vector<kb::RecordId> archived;
    base_.for_each_head([&](const kb::MemoryRecord& r) {
        if (r.tier == kb::Tier::archived) return;
        if (score(r, now) < policy_.archive_threshold) archived.push_back(r.id);
    });
    for (const auto& id : archived)
        base_.mutate_head(id, [](kb::MemoryRecord& r) { r.tier = kb::Tier::archived; });
    return archived;
}

void Coordinator::reinforce(const kb::RecordId& id, double delta_salience) {
    int64_t now = clock_();
    bool ok = base_.mutate_head(id, [&](kb::MemoryRecord& r) {
        r.salience = std::clamp(r.salience + delta_salience, 0.0, 1.0);
        r.access_count += 1;
        r.last_access = now;
    });
    if (!ok) throw kb::KnowledgeError("unknown record");
}

} // namespace colma::coord
