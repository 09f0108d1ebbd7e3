#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colma/engine.hpp"
#include "test_util.hpp"

#include <random>
#include <set>

using namespace colma;
using namespace colma::cog;
using colma::test::TempDir;
using colma::test::TestClock;

namespace {

EngineConfig cfg(const std::string& dir, const TestClock& clock, uint64_t seed = 3) {
    EngineConfig c;
    c.store_dir = dir;
    c.seed = seed;
    c.clock = clock.fn();
    c.policy.short_capacity = 100'000;
    return c;
}

kb::Triple triple(const std::string& s, const std::string& p, const std::string& o, int64_t at,
                  double conf = 1.0) {
    kb::Triple t;
    t.subject = s;
    t.predicate = p;
    t.object = o;
    t.asserted_at = at;
    t.confidence = conf;
    return t;
}

// Creates a record carrying `provenance` so triples can cite it.
kb::RecordId source_record(Engine& e, kb::KnowledgeBase& base, const std::string& text,
                           std::vector<std::string> provenance) {
    kb::MemoryRecord r;
    r.id = e.gen_id();
    r.ns = base.ns();
    r.content = text;
    r.created_at = e.now();
    r.last_access = e.now();
    r.provenance = std::move(provenance);
    REQUIRE(base.upsert_record(r).ok);
    return r.id;
}

} // namespace

TEST_CASE("historical-knowledge conflict replaces the old belief, keeping history") {
    TempDir dir("upd-napoleon");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("history");

    auto textbook = source_record(engine, *h.base, "high school history lessons",
                                  {"history-textbook"});
    auto biography = source_record(engine, *h.base, "newly published biography",
                                   {"biography-2024"});

    // Old belief plus corroborating context sharing the biography's sources.
    int64_t t0 = engine.now();
    auto old_belief = triple("ent:Napoleon", "defeatCause", "lit:stubbornness", t0, 0.5);
    old_belief.source_record = textbook;
    h.base->assert_triple(old_belief);

    auto ctx1 = triple("ent:Napoleon", "foughtAt", "ent:Waterloo", t0 + 1);
    ctx1.source_record = biography;
    h.base->assert_triple(ctx1);
    auto ctx2 = triple("ent:Waterloo", "locatedIn", "ent:Belgium", t0 + 2);
    ctx2.source_record = biography;
    h.base->assert_triple(ctx2);

    clock.advance_us(100);
    UpdateProposal proposal;
    proposal.triple = triple("ent:Napoleon", "defeatCause", "lit:intelligenceFailure", 0);
    proposal.triple.source_record = biography;
    proposal.evidence = {"biography-2024"};
    proposal.evidence_confidence = 0.9;
    proposal.source_record = biography;

    auto outcome = h.cognition->update_memory(proposal);
    CHECK(outcome.decision == UpdateDecision::replaced);
    REQUIRE(outcome.conflict_with.has_value());
    CHECK(outcome.conflict_with->object == "lit:stubbornness");
    CHECK(outcome.completeness_q == doctest::Approx(1.0));
    CHECK(outcome.consistency == doctest::Approx(0.9));  // ec * corroboration(=1)
    CHECK(outcome.verification_rounds == 1);

    // Both versions visible through as_of queries: never deleted.
    auto now_live = h.base->query_triples(
        kb::TriplePattern{std::string("ent:Napoleon"), std::string("defeatCause"), std::nullopt});
    REQUIRE(now_live.size() == 1);
    CHECK(now_live[0].object == "lit:intelligenceFailure");
    auto then_live = h.base->query_triples(
        kb::TriplePattern{std::string("ent:Napoleon"), std::string("defeatCause"), std::nullopt},
        t0 + 5);
    REQUIRE(then_live.size() == 1);
    CHECK(then_live[0].object == "lit:stubbornness");
    CHECK(h.base->triple_count(false) >= 4);
}

TEST_CASE("identical proposal reinforces in place without a new version") {
    TempDir dir("upd-reinf");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("history");

    auto src = source_record(engine, *h.base, "encyclopedia", {"encyclopedia"});
    auto existing = triple("ent:sun", "isA", "ent:star", engine.now(), 0.6);
    existing.source_record = src;
    h.base->assert_triple(existing);
    size_t before = h.base->triple_count(false);

    UpdateProposal proposal;
    proposal.triple = triple("ent:sun", "isA", "ent:star", 0);
    proposal.evidence = {"encyclopedia"};
    proposal.evidence_confidence = 0.95;

    auto outcome = h.cognition->update_memory(proposal);
    CHECK(outcome.decision == UpdateDecision::reinforced);
    CHECK_FALSE(outcome.new_version.has_value());
    CHECK(h.base->triple_count(false) == before);  // no new assertion
    auto live = h.base->query_triples(
        kb::TriplePattern{std::string("ent:sun"), std::string("isA"), std::nullopt});
    REQUIRE(live.size() == 1);
    CHECK(live[0].confidence == doctest::Approx(0.95));  // max(old, evidence)
    // Source record reinforced.
    CHECK(h.base->peek_record(src)->access_count >= 1);
}

TEST_CASE("novel subject-predicate coexists as an independent trace") {
    TempDir dir("upd-novel");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("history");

    UpdateProposal proposal;
    proposal.triple = triple("ent:moon", "orbits", "ent:earth", 0);
    proposal.evidence = {"observation"};
    proposal.evidence_confidence = 0.8;

    auto outcome = h.cognition->update_memory(proposal);
    CHECK(outcome.decision == UpdateDecision::coexists);
    REQUIRE(outcome.new_version.has_value());
    auto live = h.base->query_triples(
        kb::TriplePattern{std::string("ent:moon"), std::nullopt, std::nullopt});
    REQUIRE(live.size() == 1);
    CHECK(live[0].confidence == doctest::Approx(0.8));
}

TEST_CASE("weak uncorroborated proposals are rejected with no state change") {
    TempDir dir("upd-reject");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("history");

    h.base->assert_triple(triple("ent:x", "color", "lit:red", engine.now(), 0.95));
    size_t total_before = h.base->triple_count(false);

    clock.advance_us(10);
    UpdateProposal proposal;
    proposal.triple = triple("ent:x", "color", "lit:blue", 0);
    proposal.evidence = {"rumor"};
    proposal.evidence_confidence = 0.3;

    auto outcome = h.cognition->update_memory(proposal);
    CHECK(outcome.decision == UpdateDecision::rejected);
    CHECK(outcome.verification_rounds >= 1);
    CHECK(h.base->triple_count(false) == total_before);
    auto live = h.base->query_triples(
        kb::TriplePattern{std::string("ent:x"), std::string("color"), std::nullopt});
    REQUIRE(live.size() == 1);
    CHECK(live[0].object == "lit:red");
}

TEST_CASE("external validator rounds can rescue a borderline proposal") {
    TempDir dir("upd-validator");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("history");

    auto src = source_record(engine, *h.base, "archive", {"archive"});
    h.base->assert_triple(triple("ent:y", "status", "lit:old", engine.now(), 0.5));

    clock.advance_us(10);
    UpdateProposal proposal;
    proposal.triple = triple("ent:y", "status", "lit:new", 0);
    proposal.triple.source_record = src;
    proposal.evidence = {"archive"};
    proposal.evidence_confidence = 0.9;
    proposal.source_record = src;

    // Without a validator: empty neighborhood floor 0.5 -> 0.45 < 0.7, reject.
    auto rejected = h.cognition->update_memory(proposal);
    CHECK(rejected.decision == UpdateDecision::rejected);
    CHECK(rejected.verification_rounds == 1);  // no validator, no more rounds

    // Cross-validation raises corroboration; round 2 accepts.
    auto outcome = h.cognition->update_memory(
        proposal, 3, 0.7, [](const UpdateProposal&, const kb::Triple&, int) { return 0.5; });
    CHECK(outcome.decision == UpdateDecision::replaced);
    CHECK(outcome.verification_rounds == 2);
}

TEST_CASE("malformed proposals are rejected up front") {
    TempDir dir("upd-bad");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("history");

    UpdateProposal no_evidence;
    no_evidence.triple = triple("ent:a", "b", "lit:c", 0);
    CHECK_THROWS_AS(h.cognition->update_memory(no_evidence), CognitionError);

    UpdateProposal bad_conf;
    bad_conf.triple = triple("ent:a", "b", "lit:c", 0);
    bad_conf.evidence = {"e"};
    bad_conf.evidence_confidence = 1.5;
    CHECK_THROWS_AS(h.cognition->update_memory(bad_conf), CognitionError);
}

TEST_CASE("randomized conflicts match a straight-line scoring oracle") {
    TempDir dir("upd-oracle");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock, 17));
    auto& h = engine.ns("history");
    std::mt19937_64 rng(29);

    size_t total_before = 0;
    for (int i = 0; i < 60; ++i) {
        std::string subject = "ent:s" + std::to_string(i);
        double oc = 0.1 + static_cast<double>(rng() % 90) / 100.0;
        double ec = 0.1 + static_cast<double>(rng() % 90) / 100.0;
        int corroborators = static_cast<int>(rng() % 4);
        int distractors = static_cast<int>(rng() % 3);
        bool with_sources = rng() % 4 != 0;

        clock.advance_us(50);
        h.base->assert_triple(triple(subject, "claims", "lit:old" + std::to_string(i),
                                     engine.now(), oc));
        auto biography = source_record(engine, *h.base, "src" + std::to_string(i),
                                       {"ev" + std::to_string(i)});
        for (int c = 0; c < corroborators; ++c) {
            auto t = triple(subject, "ctx" + std::to_string(c), "ent:n" + std::to_string(i),
                            engine.now() + c + 1);
            t.source_record = biography;
            h.base->assert_triple(t);
        }
        for (int d = 0; d < distractors; ++d)
            h.base->assert_triple(triple(subject, "noise" + std::to_string(d),
                                         "lit:junk" + std::to_string(i) + "_" +
                                             std::to_string(d),
                                         engine.now() + 10 + d));

        clock.advance_us(50);
        UpdateProposal proposal;
        proposal.triple = triple(subject, "claims", "lit:new" + std::to_string(i), 0);
        proposal.evidence = {"ev" + std::to_string(i)};
        proposal.evidence_confidence = ec;
        if (with_sources) {
            proposal.source_record = biography;
            proposal.triple.source_record = biography;
        }

        // Straight-line oracle of the published scoring rule.
        double cq = (1.0 + (with_sources ? 2.0 : 0.0)) / 3.0;
        int neighborhood = corroborators + distractors;
        double corr = neighborhood == 0
                          ? 0.5
                          : static_cast<double>(corroborators) / neighborhood;
        double s_replace = ec * corr;
        double s_coexist = 0.5 * (ec * corr + oc * (1.0 - corr));
        double s_keep = oc * (1.0 - corr);
        // Candidates ranked by score; ties favor replace > coexist > keep.
        struct Cand {
            const char* name;
            double score;
        };
        std::vector<Cand> ordered{{"replace", s_replace}, {"coexist", s_coexist},
                                  {"keep", s_keep}};
        std::stable_sort(ordered.begin(), ordered.end(),
                         [](const Cand& a, const Cand& b) { return a.score > b.score; });
        std::string decision_expect = "rejected";
        for (const auto& c : ordered) {
            if (c.score * cq >= 0.7) {
                decision_expect = c.name == std::string("replace")   ? "replaced"
                                  : c.name == std::string("coexist") ? "coexists"
                                                                     : "rejected";
                break;
            }
        }

        auto outcome = h.cognition->update_memory(proposal);
        CHECK(to_string(outcome.decision) == decision_expect);

        // Update pipeline never deletes.
        size_t total_now = h.base->triple_count(false);
        CHECK(total_now >= total_before);
        total_before = total_now;
    }
}
