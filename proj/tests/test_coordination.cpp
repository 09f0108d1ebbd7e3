#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colma/engine.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace colma;
using colma::test::TempDir;
using colma::test::TestClock;

namespace {

EngineConfig config_with(const std::string& dir, const TestClock& clock,
                         coord::RetentionPolicy policy = {}, uint64_t seed = 13) {
    EngineConfig c;
    c.store_dir = dir;
    c.seed = seed;
    c.clock = clock.fn();
    c.policy = policy;
    return c;
}

coord::Stimulus stim(const std::string& content, double salience,
                     std::vector<std::string> entities = {}) {
    coord::Stimulus s;
    s.content = content;
    s.salience = salience;
    s.entities = std::move(entities);
    return s;
}

} // namespace

TEST_CASE("retention score: frozen boundary values") {
    coord::RetentionPolicy p;

    // dt=0, access=0, salience=1 -> 0.3 + 0 + 0.4 = 0.7
    CHECK(coord::retention_score(p, kb::Tier::short_term, 1000, 0, 1.0, 1000) ==
          doctest::Approx(0.7).epsilon(1e-12));

    // dt -> infinity, access=0, salience=0 -> 0
    int64_t huge = 1000 + static_cast<int64_t>(4e17);
    CHECK(coord::retention_score(p, kb::Tier::short_term, 1000, 0, 0.0, huge) ==
          doctest::Approx(0.0).epsilon(1e-9));

    // medium tier, lambda=0.2, dt=10d, access=5, salience=0.5:
    // independently evaluated R = 0.3 e^-2 + 0.3 (1 - e^-1) + 0.2
    double expect = 0.3 * std::exp(-2.0) + 0.3 * (1.0 - std::exp(-1.0)) + 0.2;
    int64_t ten_days = static_cast<int64_t>(10 * 86'400.0 * 1e6);
    CHECK(coord::retention_score(p, kb::Tier::medium_term, 0, 5, 0.5, ten_days) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("retention score monotonicity over sampled arguments") {
    coord::RetentionPolicy p;
    std::mt19937_64 rng(77);
    for (int i = 0; i < 2000; ++i) {
        auto tier = static_cast<kb::Tier>(rng() % 3);
        int64_t last = static_cast<int64_t>(rng() % 1'000'000'000);
        int64_t dt = static_cast<int64_t>(rng() % static_cast<uint64_t>(30 * 86'400.0 * 1e6));
        uint64_t access = rng() % 50;
        double sal = static_cast<double>(rng() % 1000) / 999.0;

        double base = coord::retention_score(p, tier, last, access, sal, last + dt);
        // non-decreasing in access_count and salience
        CHECK(coord::retention_score(p, tier, last, access + 1, sal, last + dt) >= base);
        double sal2 = std::min(1.0, sal + 0.1);
        CHECK(coord::retention_score(p, tier, last, access, sal2, last + dt) >= base);
        // non-increasing in elapsed time
        CHECK(coord::retention_score(p, tier, last, access, sal, last + dt + 1'000'000) <=
              base);
    }
}

TEST_CASE("policy invariants are validated") {
    coord::RetentionPolicy bad;
    bad.lambda_medium = 3.0;  // violates short > medium
    CHECK_THROWS_AS(bad.validate(), coord::PolicyError);
    coord::RetentionPolicy bad2;
    bad2.archive_threshold = 0.8;  // violates archive < promote
    CHECK_THROWS_AS(bad2.validate(), coord::PolicyError);
    coord::RetentionPolicy bad3;
    bad3.w_recency = 0.5;  // weights no longer sum to 1
    CHECK_THROWS_AS(bad3.validate(), coord::PolicyError);
}

TEST_CASE("encode: short-tier record, links, capacity forces one exit") {
    TempDir dir("coord-encode");
    TestClock clock;
    coord::RetentionPolicy policy;
    policy.short_capacity = 8;
    Engine engine(config_with(dir.str(), clock, policy));
    auto& h = engine.ns("mind");

    auto rec = h.coordinator->encode(stim("saw a red mushroom", 0.9, {"mushroom"}));
    CHECK(rec.tier == kb::Tier::short_term);
    CHECK(rec.access_count == 0);
    CHECK(rec.version == 1);
    CHECK(rec.salience == doctest::Approx(0.9));
    auto linked = h.base->records_of_entity("mushroom");
    REQUIRE(linked.size() == 1);
    CHECK(linked[0] == rec.id);

    // capacity + 1 encodes of equal salience: exactly one leaves short tier.
    for (size_t i = 1; i < policy.short_capacity + 1; ++i) {
        clock.advance_us(10);
        h.coordinator->encode(stim("note " + std::to_string(i), 0.9));
    }
    size_t shorts = 0, moved = 0;
    h.base->for_each_head([&](const kb::MemoryRecord& r) {
        if (r.tier == kb::Tier::short_term) ++shorts;
        else ++moved;
    });
    CHECK(shorts == policy.short_capacity);
    CHECK(moved == 1);
}

TEST_CASE("consolidate_tick: promotion ladder, archival, idempotence") {
    TempDir dir("coord-tick");
    TestClock clock;
    Engine engine(config_with(dir.str(), clock));
    auto& h = engine.ns("mind");

    // Empty store: empty report.
    CHECK(h.coordinator->consolidate_tick(engine.now()).empty());

    auto fresh = h.coordinator->encode(stim("vivid event", 1.0));
    clock.advance_us(1);
    auto stale = h.coordinator->encode(stim("dull event", 0.0));

    // Fresh high-salience record: R = 0.3 + 0 + 0.4 = 0.7 >= 0.6, promotes.
    clock.advance_us(1);
    auto report = h.coordinator->consolidate_tick(engine.now());
    REQUIRE(report.promoted.size() == 1);
    CHECK(report.promoted[0].id == fresh.id);
    CHECK(report.promoted[0].to == kb::Tier::medium_term);
    CHECK(report.archived.empty());  // dull one still above 0.05 while recent
    CHECK(report.evaluated == 2);

    // Same `now` again: nothing (idempotent).
    auto again = h.coordinator->consolidate_tick(engine.now());
    CHECK(again.empty());
    CHECK(again.evaluated == 0);

    // Second tick later: medium -> long (short -> long needs two ticks).
    clock.advance_us(10);
    auto report2 = h.coordinator->consolidate_tick(engine.now());
    bool to_long = false;
    for (const auto& pc : report2.promoted)
        if (pc.id == fresh.id && pc.to == kb::Tier::long_term) to_long = true;
    CHECK(to_long);

    // Much later the stale record decays below the archive threshold.
    clock.advance_days(30);
    auto report3 = h.coordinator->consolidate_tick(engine.now());
    bool archived = false;
    for (const auto& id : report3.archived)
        if (id == stale.id) archived = true;
    CHECK(archived);
    CHECK_FALSE(h.base->get_record(stale.id).has_value());        // default read: absent
    CHECK(h.base->peek_record(stale.id, 1).has_value());          // explicit version: kept
}

TEST_CASE("reinforce: clamping, counters, monotone retention") {
    TempDir dir("coord-reinf");
    TestClock clock;
    Engine engine(config_with(dir.str(), clock));
    auto& h = engine.ns("mind");
    auto rec = h.coordinator->encode(stim("memory", 1.0));

    h.coordinator->reinforce(rec.id, 0.5);
    CHECK(h.base->peek_record(rec.id)->salience == doctest::Approx(1.0));  // clamped

    double before = h.coordinator->score(*h.base->peek_record(rec.id), engine.now());
    h.coordinator->reinforce(rec.id, 0.0);
    double after = h.coordinator->score(*h.base->peek_record(rec.id), engine.now());
    CHECK(after >= before);

    CHECK_THROWS_AS(h.coordinator->reinforce(engine.gen_id(), 0.1), kb::KnowledgeError);

    // Counters equal an event-count oracle over random reinforces.
    std::mt19937_64 rng(3);
    uint64_t events = 0;
    double salience_oracle = h.base->peek_record(rec.id)->salience;
    for (int i = 0; i < 50; ++i) {
        double delta = (static_cast<double>(rng() % 200) - 100.0) / 400.0;
        h.coordinator->reinforce(rec.id, delta);
        salience_oracle = std::clamp(salience_oracle + delta, 0.0, 1.0);
        ++events;
    }
    auto final = *h.base->peek_record(rec.id);
    CHECK(final.access_count == events + 2);  // the two explicit reinforces above
    CHECK(final.salience == doctest::Approx(salience_oracle).epsilon(1e-12));
    CHECK(final.version == 1);  // reinforcement never bumps versions
}

TEST_CASE("forget_tick archives only below-threshold records, reversibly") {
    TempDir dir("coord-forget");
    TestClock clock;
    Engine engine(config_with(dir.str(), clock));
    auto& h = engine.ns("mind");

    CHECK(h.coordinator->forget_tick(engine.now()).empty());

    auto keep = h.coordinator->encode(stim("important", 1.0));
    clock.advance_us(1);
    auto fade = h.coordinator->encode(stim("trivial", 0.0));
    clock.advance_days(40);  // recency gone; score = w_salience * salience

    auto archived = h.coordinator->forget_tick(engine.now());
    REQUIRE(archived.size() == 1);
    CHECK(archived[0] == fade.id);
    CHECK(h.base->peek_record(keep.id)->tier == kb::Tier::short_term);

    // Archived records never surface in knn. Re-encode with embeddings.
    auto emb = engine.config().embedder("trivial");
    coord::Stimulus s = stim("with vector", 0.0);
    s.embedding = emb;
    clock.advance_us(1);
    auto vanishing = h.coordinator->encode(s);
    clock.advance_days(40);
    h.coordinator->forget_tick(engine.now());
    for (const auto& hit : h.base->knn(emb, 10, kb::KnnMode::exact))
        CHECK(hit.id != vanishing.id);
}

TEST_CASE("tick decisions equal a straight-line oracle over random traces") {
    TempDir dir("coord-oracle");
    TestClock clock;
    coord::RetentionPolicy roomy;
    roomy.short_capacity = 100'000;  // keep capacity eviction out of the trace
    Engine engine(config_with(dir.str(), clock, roomy));
    auto& h = engine.ns("mind");
    coord::RetentionPolicy p = h.coordinator->policy();
    std::mt19937_64 rng(99);

    struct Shadow {
        kb::RecordId id;
        int64_t last_access;
        uint64_t access;
        double salience;
        kb::Tier tier;
    };
    std::vector<Shadow> shadow;
    for (int i = 0; i < 200; ++i) {
        double sal = static_cast<double>(rng() % 1000) / 999.0;
        auto rec = h.coordinator->encode(stim("r" + std::to_string(i), sal));
        shadow.push_back({rec.id, rec.last_access, 0, sal, kb::Tier::short_term});
        clock.advance_us(50);
        if (rng() % 3 == 0) {
            size_t pick = rng() % shadow.size();
            h.coordinator->reinforce(shadow[pick].id, 0.05);
            shadow[pick].access += 1;
            shadow[pick].salience = std::clamp(shadow[pick].salience + 0.05, 0.0, 1.0);
            shadow[pick].last_access = engine.now();
        }
        if (i % 50 == 49) {
            clock.advance_days(2);
            int64_t now = engine.now();
            // Straight-line re-implementation of the tick rule.
            std::map<std::string, kb::Tier> expect;
            for (auto& s : shadow) {
                if (s.tier == kb::Tier::archived) continue;
                double dt_days = static_cast<double>(now - s.last_access) / (86'400.0 * 1e6);
                double lambda = s.tier == kb::Tier::short_term    ? p.lambda_short
                                : s.tier == kb::Tier::medium_term ? p.lambda_medium
                                                                  : p.lambda_long;
                double r = p.w_recency * std::exp(-lambda * dt_days) +
                           p.w_frequency *
                               (1.0 - std::exp(-static_cast<double>(s.access) / 5.0)) +
                           p.w_salience * s.salience;
                kb::Tier to = s.tier;
                if (r >= p.promote_threshold) {
                    to = s.tier == kb::Tier::short_term    ? kb::Tier::medium_term
                         : s.tier == kb::Tier::medium_term ? kb::Tier::long_term
                                                           : kb::Tier::long_term;
                } else if (r < p.archive_threshold) {
                    to = kb::Tier::archived;
                }
                if (to != s.tier) expect[s.id.hex()] = to;
                s.tier = to;
            }
            auto report = h.coordinator->consolidate_tick(now);
            std::map<std::string, kb::Tier> got;
            for (const auto& pc : report.promoted) got[pc.id.hex()] = pc.to;
            for (const auto& id : report.archived) got[id.hex()] = kb::Tier::archived;
            CHECK(got == expect);
        }
    }
}
