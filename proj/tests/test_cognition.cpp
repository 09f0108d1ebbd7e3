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

EngineConfig cfg(const std::string& dir, const TestClock& clock, uint64_t seed = 5) {
    EngineConfig c;
    c.store_dir = dir;
    c.seed = seed;
    c.clock = clock.fn();
    c.policy.short_capacity = 100'000;
    return c;
}

PatternTerm term(const std::string& t) { return PatternTerm{t}; }
RulePattern pat(const std::string& s, const std::string& p, const std::string& o) {
    return RulePattern{term(s), term(p), term(o)};
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

} // namespace

// ---------------------------------------------------------------- recall

TEST_CASE("recall reconstructs the weekly-routine fixture completely") {
    TempDir dir("cog-recall");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("diary");
    auto embed = engine.config().embedder;

    // A month of weekly routines plus one special event on the queried date.
    int64_t base = engine.now();
    int64_t day_us = static_cast<int64_t>(86'400.0 * 1e6);
    for (int week = 0; week < 4; ++week) {
        coord::Stimulus s;
        s.modality = kb::Modality::structured;
        s.content = R"({"routine":"monday meeting","day":"monday"})";
        s.embedding = embed("monday meeting routine");
        s.entities = {"monday"};
        s.occurred_at = base + week * 7 * day_us;
        h.coordinator->encode(s);
    }
    int64_t query_day = base + 2 * 7 * day_us;
    {
        coord::Stimulus s;
        s.modality = kb::Modality::structured;
        s.content = R"({"special":"birthday dinner","where":"cafe"})";
        s.embedding = embed("special birthday dinner at the cafe");
        s.entities = {"birthday"};
        s.salience = 0.9;
        s.occurred_at = query_day + day_us / 2;
        h.coordinator->encode(s);
    }

    Cue cue;
    cue.time_window = {{query_day, query_day + day_us}};
    cue.embedding = embed("monday meeting");
    cue.entities = {"monday", "birthday"};
    cue.slots = {"routine", "special"};

    auto result = h.cognition->recall(cue);
    CHECK(result.completeness == doctest::Approx(1.0));
    CHECK(result.filled_slots.count("routine") == 1);
    CHECK(result.filled_slots.count("special") == 1);
    CHECK(result.filled_slots["routine"].confidence == doctest::Approx(1.0));
    CHECK(result.rounds_used >= 1);
    CHECK(!result.fragments.empty());

    // Each act of recall reinforces the returned fragments.
    auto special = h.base->peek_record(result.filled_slots["special"].record);
    CHECK(special->access_count >= 1);
}

TEST_CASE("recall edge cases: empty cue, empty store, single fragment") {
    TempDir dir("cog-recall-edge");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("diary");

    CHECK_THROWS_AS(h.cognition->recall(Cue{}), CognitionError);

    Cue cue;
    cue.entities = {"ghost"};
    cue.slots = {"what"};
    auto empty = h.cognition->recall(cue);
    CHECK(empty.completeness == doctest::Approx(0.0));
    CHECK(empty.rounds_used == 1);
    CHECK(empty.coherence == doctest::Approx(1.0));

    auto rec = h.coordinator->encode([&] {
        coord::Stimulus s;
        s.content = "lone what fragment";
        s.embedding = engine.config().embedder("lone fragment");
        s.entities = {"lone"};
        return s;
    }());
    Cue cue2;
    cue2.entities = {"lone"};
    cue2.slots = {"what"};
    auto single = h.cognition->recall(cue2);
    CHECK(single.coherence == doctest::Approx(1.0));  // < 2 embedded fragments
    REQUIRE(single.filled_slots.count("what") == 1);
    CHECK(single.filled_slots["what"].record == rec.id);
}

// -------------------------------------------------------------- associate

TEST_CASE("association: isolated seed and decay chain") {
    TempDir dir("cog-assoc");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("graph");

    Cue lone;
    lone.entities = {"alone"};
    auto hits = h.cognition->associate(lone, 10);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].node == "ent:alone");
    CHECK(hits[0].activation == doctest::Approx(1.0));

    h.base->assert_triple(triple("ent:a", "r", "ent:b", 1));
    h.base->assert_triple(triple("ent:b", "r", "ent:c", 2));
    Cue cue;
    cue.entities = {"a"};
    auto chain = h.cognition->associate(cue, 10);
    std::map<std::string, double> act;
    for (const auto& hit : chain) act[hit.node] = hit.activation;
    CHECK(act["ent:a"] == doctest::Approx(1.0));
    CHECK(act["ent:b"] == doctest::Approx(0.5));
    CHECK(act["ent:c"] == doctest::Approx(0.25));

    CHECK_THROWS_AS(h.cognition->associate(Cue{}, 5), CognitionError);
}

TEST_CASE("association equals brute-force path enumeration on random graphs") {
    TempDir dir("cog-assoc-oracle");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock, 8));
    auto& h = engine.ns("graph");
    std::mt19937_64 rng(12);

    const int n = 18;
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < 60; ++i) {
        int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
        if (a == b) continue;
        if (edges.insert({a, b}).second)
            h.base->assert_triple(triple("ent:n" + std::to_string(a), "r",
                                         "ent:n" + std::to_string(b), i + 1));
    }
    // Undirected adjacency for the oracle.
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }

    auto oracle = [&](int seed) {
        // All simple paths up to 3 hops via explicit nested loops.
        std::map<int, double> act;
        act[seed] += 1.0;
        for (int v1 : adj[seed]) {
            if (v1 == seed) continue;
            act[v1] += 0.5;
            for (int v2 : adj[v1]) {
                if (v2 == seed || v2 == v1) continue;
                act[v2] += 0.25;
                for (int v3 : adj[v2]) {
                    if (v3 == seed || v3 == v1 || v3 == v2) continue;
                    act[v3] += 0.125;
                }
            }
        }
        std::map<std::string, double> out;
        for (auto& [node, a] : act)
            out["ent:n" + std::to_string(node)] = std::min(1.0, a);
        return out;
    };

    for (int seed : {0, 5, 11}) {
        Cue cue;
        cue.entities = {"n" + std::to_string(seed)};
        auto hits = h.cognition->associate(cue, 1000);
        auto expect = oracle(seed);
        REQUIRE(hits.size() == expect.size());
        for (const auto& hit : hits) {
            REQUIRE(expect.count(hit.node) == 1);
            CHECK(hit.activation == doctest::Approx(expect[hit.node]).epsilon(1e-9));
            CHECK(hit.activation > 0.0);
            CHECK(hit.activation <= 1.0);
        }
    }
}

// ----------------------------------------------------------------- reason

TEST_CASE("reason: mushroom rule derives and asserts the toxic-risk fact") {
    TempDir dir("cog-reason");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("mind");

    h.base->assert_triple(triple("ent:m1", "isA", "ent:mushroom", 1));
    h.base->assert_triple(triple("ent:m1", "hasFeature", "lit:redCap", 2));

    Rule rule;
    rule.id = "toxic-feature";
    rule.premises = {pat("?x", "isA", "ent:mushroom"), pat("?x", "hasFeature", "lit:redCap")};
    rule.conclusion = pat("?x", "isToxicRisk", "lit:high");
    rule.confidence = 0.9;

    auto proof = h.cognition->reason(pat("?x", "isToxicRisk", "lit:high"), {rule});
    CHECK(proof.strategy == "deductive");
    REQUIRE(proof.answers.size() == 1);
    CHECK(proof.answers[0].at("?x") == "ent:m1");
    REQUIRE(proof.trace.size() == 1);
    CHECK(proof.trace[0].rule_id == "toxic-feature");
    CHECK(proof.trace[0].premises.size() == 2);

    // Derived fact asserted back with product confidence.
    auto derived = h.base->query_triples(
        kb::TriplePattern{std::string("ent:m1"), std::string("isToxicRisk"), std::nullopt});
    REQUIRE(derived.size() == 1);
    CHECK(derived[0].confidence == doctest::Approx(0.9));
}

TEST_CASE("reason with an empty rule set answers only stored triples") {
    TempDir dir("cog-reason-empty");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("mind");
    h.base->assert_triple(triple("ent:a", "knows", "ent:b", 1));

    // No stored match and no case base yet: nothing to answer.
    auto none = h.cognition->reason(pat("ent:b", "knows", "?who"), {});
    CHECK(none.answers.empty());
    CHECK(none.strategy == "none");

    auto direct = h.cognition->reason(pat("ent:a", "knows", "?who"), {});
    CHECK(direct.strategy == "deductive");
    REQUIRE(direct.answers.size() == 1);
    CHECK(direct.answers[0].at("?who") == "ent:b");
}

TEST_CASE("unsafe rules and oversized premise lists are rejected") {
    Rule bad;
    bad.id = "unsafe";
    bad.premises = {pat("?x", "p", "?y")};
    bad.conclusion = pat("?z", "q", "?x");  // ?z unbound
    CHECK_THROWS_AS(validate_rule(bad), CognitionError);

    Rule big;
    big.id = "big";
    for (int i = 0; i < 6; ++i) big.premises.push_back(pat("?a", "p" + std::to_string(i), "?b"));
    big.conclusion = pat("?a", "q", "?b");
    CHECK_THROWS_AS(validate_rule(big), CognitionError);
}

TEST_CASE("forward chaining equals a naive saturation oracle on random instances") {
    std::mt19937_64 rng(21);
    for (int instance = 0; instance < 40; ++instance) {
        // Random base facts.
        std::vector<GroundFact> base;
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        int nfacts = 5 + static_cast<int>(rng() % 45);
        for (int i = 0; i < nfacts; ++i) {
            GroundFact f{"e" + std::to_string(rng() % 8), "p" + std::to_string(rng() % 4),
                         "e" + std::to_string(rng() % 8), 1.0};
            if (seen.insert({f.subject, f.predicate, f.object}).second) base.push_back(f);
        }
        // Random safe rules.
        std::vector<Rule> rules;
        int nrules = 1 + static_cast<int>(rng() % 5);
        for (int r = 0; r < nrules; ++r) {
            Rule rule;
            rule.id = "r" + std::to_string(r);
            int nprem = 1 + static_cast<int>(rng() % 2);
            std::vector<std::string> vars{"?x", "?y", "?z"};
            for (int pr = 0; pr < nprem; ++pr)
                rule.premises.push_back(pat(vars[rng() % 2], "p" + std::to_string(rng() % 4),
                                            vars[1 + rng() % 2]));
            rule.conclusion =
                pat(rule.premises[0].subject.text, "p" + std::to_string(rng() % 4),
                    rule.premises[nprem - 1].object.text);
            rules.push_back(rule);
        }

        auto derived = saturate(base, rules, 4);

        // Naive oracle: repeatedly instantiate every rule by brute force.
        std::set<std::tuple<std::string, std::string, std::string>> oracle;
        std::map<std::tuple<std::string, std::string, std::string>, int> depth;
        for (const auto& f : base) {
            oracle.insert({f.subject, f.predicate, f.object});
            depth[{f.subject, f.predicate, f.object}] = 0;
        }
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<std::tuple<std::string, std::string, std::string>> facts(
                oracle.begin(), oracle.end());
            for (const auto& rule : rules) {
                std::function<void(size_t, std::map<std::string, std::string>, int)> rec =
                    [&](size_t i, std::map<std::string, std::string> b, int d) {
                        if (i == rule.premises.size()) {
                            auto resolve = [&](const PatternTerm& t) {
                                return t.is_var() ? b.at(t.text) : t.text;
                            };
                            std::tuple<std::string, std::string, std::string> concl{
                                resolve(rule.conclusion.subject),
                                resolve(rule.conclusion.predicate),
                                resolve(rule.conclusion.object)};
                            if (d + 1 > 4) return;
                            if (!oracle.count(concl)) {
                                oracle.insert(concl);
                                depth[concl] = d + 1;
                                changed = true;
                            }
                            return;
                        }
                        for (const auto& f : facts) {
                            auto nb = b;
                            auto unify = [&](const PatternTerm& t, const std::string& v) {
                                if (!t.is_var()) return t.text == v;
                                auto it = nb.find(t.text);
                                if (it != nb.end()) return it->second == v;
                                nb[t.text] = v;
                                return true;
                            };
                            auto saved = nb;
                            if (unify(rule.premises[i].subject, std::get<0>(f)) &&
                                unify(rule.premises[i].predicate, std::get<1>(f)) &&
                                unify(rule.premises[i].object, std::get<2>(f))) {
                                rec(i + 1, nb, std::max(d, depth[f]));
                            }
                            nb = saved;
                        }
                    };
                rec(0, {}, 0);
            }
        }

        std::set<std::tuple<std::string, std::string, std::string>> got;
        for (const auto& f : base) got.insert({f.subject, f.predicate, f.object});
        for (const auto& d : derived) got.insert({d.fact.subject, d.fact.predicate,
                                                   d.fact.object});
        CHECK(got == oracle);
    }
}

// --------------------------------------------------- heuristic + conflict

TEST_CASE("heuristic path: case base retrieval and conflict monitoring") {
    TempDir dir("cog-heur");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("mind");

    // No case base: absent.
    CHECK_FALSE(h.cognition->heuristic_suggest(pat("?x", "isToxicRisk", "lit:high")).has_value());

    h.base->assert_triple(triple("ent:m1", "isA", "ent:mushroom", 1));
    Rule rule;
    rule.id = "r";
    rule.premises = {pat("?x", "isA", "ent:mushroom")};
    rule.conclusion = pat("?x", "risk", "lit:low");
    auto first = h.cognition->reason(pat("?x", "risk", "lit:low"), {rule});
    REQUIRE(first.strategy == "deductive");

    // Exact prior case: similarity 1 within 1e-6.
    auto hint = h.cognition->heuristic_suggest(pat("?x", "risk", "lit:low"));
    REQUIRE(hint.has_value());
    CHECK(hint->second == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(hint->first == first.answers);

    // Make the stored case stale: new facts change the deductive answer.
    clock.advance_us(10);
    h.base->assert_triple(triple("ent:m2", "isA", "ent:mushroom", engine.now()));
    auto second = h.cognition->reason(pat("?x", "risk", "lit:low"), {rule});
    CHECK(second.strategy == "deductive");
    CHECK(second.conflict_logged);  // intuition said {m1}, deduction {m1, m2}
    CHECK(second.answers.size() == 2);
    // The conflict informed reflect(): heuristic weight dropped below 0.5.
    auto w = h.cognition->strategy_weights();
    CHECK(w.weights.at("heuristic") == doctest::Approx(0.4));
}

// ---------------------------------------------------------------- predict

TEST_CASE("prediction: transition counts, ties, degenerate streams") {
    TempDir dir("cog-predict");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("mind");

    CHECK_FALSE(h.cognition->predict("nostream", {"A"}).has_value());

    for (const auto& label : {"A", "B", "A", "B", "A"}) {
        clock.advance_us(10);
        h.cognition->append_event("walk", label);
    }
    auto p = h.cognition->predict("walk", {"A"});
    REQUIRE(p.has_value());
    CHECK(p->label == "B");
    CHECK(p->confidence == doctest::Approx(1.0));

    // Transition-count oracle for context [B].
    auto pb = h.cognition->predict("walk", {"B"});
    REQUIRE(pb.has_value());
    CHECK(pb->label == "A");
    CHECK(pb->confidence == doctest::Approx(1.0));

    // Empty context: stream-initial label.
    auto init = h.cognition->predict("walk", {});
    REQUIRE(init.has_value());
    CHECK(init->label == "A");

    // Single-event stream has no successors.
    clock.advance_us(10);
    h.cognition->append_event("solo", "Z");
    CHECK_FALSE(h.cognition->predict("solo", {"Z"}).has_value());

    // Tie A->B once, A->C once: lexicographic rule picks B.
    for (const auto& label : {"A", "B", "A", "C"}) {
        clock.advance_us(10);
        h.cognition->append_event("tie", label);
    }
    auto tie = h.cognition->predict("tie", {"A"});
    REQUIRE(tie.has_value());
    CHECK(tie->label == "B");
    CHECK(tie->confidence == doctest::Approx(0.5));

    // Confidences over successors of [A] sum to 1 (B and C each carry 0.5).
    CHECK(tie->confidence + 0.5 == doctest::Approx(1.0));
}

// ---------------------------------------------------------------- reflect

TEST_CASE("reflect: EMA updates, persistence, bounds") {
    TempDir dir("cog-reflect");
    TestClock clock;
    Engine engine(cfg(dir.str(), clock));
    auto& h = engine.ns("mind");

    auto w0 = h.cognition->strategy_weights();
    CHECK(w0.weights.at("heuristic") == doctest::Approx(0.5));
    CHECK(w0.weights.at("deductive") == doctest::Approx(0.5));

    auto w1 = h.cognition->reflect(Outcome{"t1", "heuristic", true});
    CHECK(w1.weights.at("heuristic") == doctest::Approx(0.6));
    auto w2 = h.cognition->reflect(Outcome{"t2", "deductive", false});
    CHECK(w2.weights.at("deductive") == doctest::Approx(0.4));

    CHECK_THROWS_AS(h.cognition->reflect(Outcome{"t3", "astrology", true}), CognitionError);

    // Any outcome sequence keeps weights in [0, 1]; successes approach 1.
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto w = h.cognition->reflect(Outcome{"t", "heuristic", rng() % 2 == 0});
        CHECK(w.weights.at("heuristic") >= 0.0);
        CHECK(w.weights.at("heuristic") <= 1.0);
    }
    double prev = h.cognition->strategy_weights().weights.at("heuristic");
    for (int i = 0; i < 30; ++i) {
        double w = h.cognition->reflect(Outcome{"t", "heuristic", true}).weights.at("heuristic");
        CHECK(w >= prev);
        prev = w;
    }
    CHECK(prev > 0.95);

    // Weights persist as facts.
    CHECK(h.base->get_fact("strategy:heuristic").has_value());
}
