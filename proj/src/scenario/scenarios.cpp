#include "colma/scenario/scenarios.hpp"

#include "colma/common/hash.hpp"

#include <fstream>
#include <memory>
#include <sstream>

namespace colma::scenario {

namespace {

constexpr int64_t kScenarioEpoch = 1'735'689'600'000'000;  // 2025-01-01 UTC, microseconds
constexpr int64_t kDayUs = 86'400ll * 1'000'000;

std::string digest(const kb::Json& j) {
    uint64_t h = stable_hash64(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Script context: drives the engine clock, records transcript steps,
// counts assertions.
struct Script {
    explicit Script(const std::string& which, uint64_t seed, const std::string& work_dir)
        : now(std::make_shared<int64_t>(kScenarioEpoch)) {
        EngineConfig config;
        config.store_dir = work_dir;
        config.seed = seed ? seed : 1;
        auto p = now;
        config.clock = [p] { return *p; };
        engine = std::make_unique<Engine>(std::move(config));
        transcript.scenario = which;
        transcript.seed = seed;

        ns_name = "scenario-" + which;
        for (const auto& pk : engine->store().list_partitions(ns_name)) {
            (void)pk;
            throw ScenarioError("dirty namespace: " + ns_name);
        }
        handle = &engine->ns(ns_name);
    }

    void advance(int64_t us) { *now += us; }

    void step(const std::string& op, const kb::Json& in, const kb::Json& out) {
        transcript.steps.push_back({op, digest(in), digest(out)});
    }

    void expect(bool ok, const std::string& what) {
        if (!ok) throw ScenarioError(transcript.scenario + " assertion failed: " + what);
        ++transcript.assertions_passed;
    }

    std::shared_ptr<int64_t> now;
    std::unique_ptr<Engine> engine;
    Engine::Namespace* handle = nullptr;
    std::string ns_name;
    ScenarioTranscript transcript;
};

kb::Json cue_json(const cog::Cue& cue) {
    kb::Json j;
    j["entities"] = cue.entities;
    j["slots"] = cue.slots;
    if (cue.time_window)
        j["time_window"] = kb::Json::array({cue.time_window->first, cue.time_window->second});
    j["has_embedding"] = cue.embedding.has_value();
    return j;
}

kb::Json recall_json(const cog::ReconstructionResult& r) {
    kb::Json j;
    j["completeness"] = r.completeness;
    j["coherence"] = r.coherence;
    j["rounds_used"] = r.rounds_used;
    kb::Json slots = kb::Json::object();
    for (const auto& [slot, fill] : r.filled_slots) {
        slots[slot] = kb::Json{{"record", fill.record.hex()}, {"confidence", fill.confidence}};
    }
    j["filled_slots"] = std::move(slots);
    kb::Json frags = kb::Json::array();
    for (const auto& id : r.fragments) frags.push_back(id.hex());
    j["fragments"] = std::move(frags);
    return j;
}

// S1: field identification of a toxic mushroom.
void run_s1(Script& s) {
    auto& h = *s.handle;
    auto embed = s.engine->config().embedder;

    coord::Stimulus sighting;
    sighting.modality = kb::Modality::text;
    sighting.content = "wild mushroom with a red cap and white spots, smooth texture";
    sighting.embedding = embed(std::string(sighting.content));
    sighting.entities = {"mushroom-sighting", "redCap"};
    sighting.salience = 0.7;
    auto rec = h.coordinator->encode(sighting);
    s.step("encode", kb::Json{{"content", sighting.content}},
           kb::Json{{"id", rec.id.hex()}, {"tier", kb::to_string(rec.tier)}});
    s.expect(rec.tier == kb::Tier::short_term, "encoded into short-term memory");

    // Stored field knowledge about the observed specimen.
    int64_t t = s.engine->now();
    auto assert_spo = [&](const std::string& sub, const std::string& p, const std::string& o) {
        kb::Triple tr;
        tr.subject = sub;
        tr.predicate = p;
        tr.object = o;
        tr.asserted_at = ++t;
        tr.source_record = rec.id;
        h.base->assert_triple(tr);
    };
    assert_spo("ent:m1", "isA", "ent:mushroom");
    assert_spo("ent:m1", "hasFeature", "lit:redCap");
    s.step("assert_triple", kb::Json{{"subject", "ent:m1"}}, kb::Json{{"count", 2}});

    cog::Cue features;
    features.entities = {"m1"};
    auto assoc = h.cognition->associate(features, 8);
    kb::Json assoc_out = kb::Json::array();
    for (const auto& hit : assoc)
        assoc_out.push_back(kb::Json{{"node", hit.node}, {"activation", hit.activation}});
    s.step("associate", cue_json(features), assoc_out);
    s.expect(!assoc.empty(), "features associate outward from the specimen");

    // Danger prediction through the stored toxic-feature rule.
    cog::Rule rule;
    rule.id = "toxic-feature";
    rule.premises = {cog::RulePattern{{"?x"}, {"isA"}, {"ent:mushroom"}},
                     cog::RulePattern{{"?x"}, {"hasFeature"}, {"lit:redCap"}}};
    rule.conclusion = cog::RulePattern{{"?x"}, {"isToxicRisk"}, {"lit:high"}};
    rule.confidence = 0.9;
    auto proof = h.cognition->reason(
        cog::RulePattern{{"?x"}, {"isToxicRisk"}, {"lit:high"}}, {rule});
    kb::Json proof_out;
    proof_out["strategy"] = proof.strategy;
    proof_out["answers"] = proof.answers.size();
    s.step("reason", kb::Json{{"goal", "?x isToxicRisk lit:high"}}, proof_out);
    s.expect(proof.answers.size() == 1 && proof.answers[0].at("?x") == "ent:m1",
             "danger predicted for the observed mushroom");

    // The warning commits the observation firmly to memory.
    h.cognition->reflect(cog::Outcome{"s1-identify", "deductive", true});
    s.advance(1'000'000);
    h.coordinator->reinforce(rec.id, 0.3);
    auto after = h.base->peek_record(rec.id);
    s.step("reinforce", kb::Json{{"id", rec.id.hex()}},
           kb::Json{{"salience", after->salience}});
    s.expect(after->salience == 1.0, "high-salience commitment");

    // Characteristic triples stored for future encounters.
    assert_spo("ent:m1", "hasFeature", "lit:whiteSpots");
    assert_spo("ent:m1", "texture", "lit:smooth");
    auto traits = h.base->query_triples(
        kb::TriplePattern{std::string("ent:m1"), std::nullopt, std::nullopt});
    s.step("assert_triple", kb::Json{{"subject", "ent:m1"}},
           kb::Json{{"live_traits", traits.size()}});
    s.expect(traits.size() >= 5, "characteristics committed to memory");
}

// S2: reconstructing what happened on a particular day.
void run_s2(Script& s) {
    auto& h = *s.handle;
    auto embed = s.engine->config().embedder;

    int64_t base = s.engine->now();
    for (int week = 0; week < 4; ++week) {
        coord::Stimulus routine;
        routine.modality = kb::Modality::structured;
        routine.content = R"({"day":"monday","routine":"monday morning meeting"})";
        routine.embedding = embed("monday morning meeting routine");
        routine.entities = {"monday"};
        routine.occurred_at = base + week * 7 * kDayUs;
        h.coordinator->encode(routine);
    }
    int64_t queried_day = base + 14 * kDayUs;
    coord::Stimulus special;
    special.modality = kb::Modality::structured;
    special.content = R"({"special":"birthday dinner","where":"riverside cafe"})";
    special.embedding = embed("special birthday dinner riverside cafe");
    special.entities = {"birthday"};
    special.salience = 0.9;
    special.occurred_at = queried_day + kDayUs / 3;
    h.coordinator->encode(special);
    s.step("encode", kb::Json{{"seeded", 5}}, kb::Json{{"ok", true}});

    s.advance(20 * kDayUs);
    cog::Cue cue;
    cue.time_window = {{queried_day, queried_day + kDayUs}};
    cue.embedding = embed("monday meeting birthday");
    cue.entities = {"monday", "birthday"};
    cue.slots = {"routine", "special"};
    auto result = h.cognition->recall(cue);
    s.step("recall", cue_json(cue), recall_json(result));
    s.expect(result.completeness == 1.0, "both slots reconstructed");
    s.expect(result.filled_slots.count("routine") == 1, "weekly routine retrieved");
    s.expect(result.filled_slots.count("special") == 1, "special event retrieved");
    s.expect(!result.fragments.empty(), "fragments recalled");

    // Recall reinforced what it returned.
    auto one = h.base->peek_record(result.filled_slots.at("special").record);
    s.expect(one->access_count >= 1, "recall updates long-term memory");
}

// S3: solving a problem, reflecting, consolidating the insight.
void run_s3(Script& s) {
    auto& h = *s.handle;

    // Stored formula knowledge.
    int64_t t = s.engine->now();
    auto assert_spo = [&](const std::string& sub, const std::string& p, const std::string& o) {
        kb::Triple tr;
        tr.subject = sub;
        tr.predicate = p;
        tr.object = o;
        tr.asserted_at = ++t;
        h.base->assert_triple(tr);
    };
    assert_spo("ent:problem42", "isA", "ent:quadraticEquation");
    assert_spo("ent:quadraticEquation", "solvedBy", "lit:quadraticFormula");

    // Rules arrive through the documented rule-file format.
    std::stringstream rule_file;
    rule_file
        << R"({"id":"formula-lookup","premises":[["?p","isA","?type"],["?type","solvedBy","?f"]],"conclusion":["?p","useFormula","?f"],"confidence":1.0})"
        << "\n";
    auto rules = cog::parse_rules_jsonl(rule_file);
    s.step("load_rules", kb::Json{{"lines", 1}}, kb::Json{{"rules", rules.size()}});
    s.expect(rules.size() == 1, "rule file parsed");

    auto proof = h.cognition->reason(
        cog::RulePattern{{"ent:problem42"}, {"useFormula"}, {"?f"}}, rules);
    kb::Json proof_out;
    proof_out["strategy"] = proof.strategy;
    proof_out["answers"] = proof.answers.size();
    proof_out["conflict"] = proof.conflict_logged;
    s.step("reason", kb::Json{{"goal", "ent:problem42 useFormula ?f"}}, proof_out);
    s.expect(proof.answers.size() == 1 &&
                 proof.answers[0].at("?f") == "lit:quadraticFormula",
             "relevant formula retrieved and applied");

    auto weights = h.cognition->reflect(cog::Outcome{"s3-problem42", "deductive", true});
    s.step("reflect", kb::Json{{"strategy", "deductive"}, {"success", true}},
           kb::Json{{"deductive", weights.weights.at("deductive")}});
    s.expect(weights.weights.at("deductive") > 0.5, "successful strategy strengthened");

    // The solved case consolidates toward long-term memory across ticks.
    auto cases = h.base->records_of_entity("__cases");
    s.expect(cases.size() == 1, "solved case recorded");
    h.coordinator->reinforce(cases[0], 0.5);
    s.advance(1'000'000);
    auto r1 = h.coordinator->consolidate_tick(s.engine->now());
    s.advance(1'000'000);
    auto r2 = h.coordinator->consolidate_tick(s.engine->now());
    kb::Json ticks;
    ticks["first_promotions"] = r1.promoted.size();
    ticks["second_promotions"] = r2.promoted.size();
    s.step("consolidate_tick", kb::Json{{"ticks", 2}}, ticks);
    auto stored_case = h.base->peek_record(cases[0]);
    s.expect(stored_case->tier == kb::Tier::long_term,
             "insight consolidated into long-term memory");
}

// S4: conflicting historical knowledge is verified and reconsolidated.
void run_s4(Script& s) {
    auto& h = *s.handle;

    auto make_source = [&](const std::string& text, const std::string& provenance) {
        kb::MemoryRecord r;
        r.id = s.engine->gen_id();
        r.ns = h.base->ns();
        r.content = text;
        r.created_at = s.engine->now();
        r.last_access = r.created_at;
        r.provenance = {provenance};
        h.base->upsert_record(r);
        return r.id;
    };
    auto textbook = make_source("high school history lessons", "history-textbook");
    auto biography = make_source("newly published Napoleon biography", "biography-2024");

    int64_t t0 = s.engine->now();
    kb::Triple old_belief;
    old_belief.subject = "ent:Napoleon";
    old_belief.predicate = "defeatCause";
    old_belief.object = "lit:stubbornness";
    old_belief.confidence = 0.5;
    old_belief.asserted_at = t0;
    old_belief.source_record = textbook;
    h.base->assert_triple(old_belief);

    kb::Triple ctx1;
    ctx1.subject = "ent:Napoleon";
    ctx1.predicate = "foughtAt";
    ctx1.object = "ent:Waterloo";
    ctx1.asserted_at = t0 + 1;
    ctx1.source_record = biography;
    h.base->assert_triple(ctx1);
    kb::Triple ctx2;
    ctx2.subject = "ent:Waterloo";
    ctx2.predicate = "locatedIn";
    ctx2.object = "ent:Belgium";
    ctx2.asserted_at = t0 + 2;
    ctx2.source_record = biography;
    h.base->assert_triple(ctx2);
    s.step("assert_triple", kb::Json{{"seeded", 3}}, kb::Json{{"ok", true}});

    s.advance(1'000'000);
    cog::UpdateProposal proposal;
    proposal.triple.subject = "ent:Napoleon";
    proposal.triple.predicate = "defeatCause";
    proposal.triple.object = "lit:intelligenceFailure";
    proposal.triple.source_record = biography;
    proposal.evidence = {"biography-2024"};
    proposal.evidence_confidence = 0.9;
    proposal.source_record = biography;

    auto outcome = h.cognition->update_memory(proposal);
    kb::Json out;
    out["decision"] = cog::to_string(outcome.decision);
    out["consistency"] = outcome.consistency;
    out["completeness_q"] = outcome.completeness_q;
    out["rounds"] = outcome.verification_rounds;
    s.step("update_memory", kb::Json{{"object", proposal.triple.object}}, out);
    s.expect(outcome.decision == cog::UpdateDecision::replaced,
             "conflicting belief replaced after verification");

    auto live = h.base->query_triples(kb::TriplePattern{std::string("ent:Napoleon"),
                                                        std::string("defeatCause"),
                                                        std::nullopt});
    s.expect(live.size() == 1 && live[0].object == "lit:intelligenceFailure",
             "new explanation live");
    auto historical = h.base->query_triples(
        kb::TriplePattern{std::string("ent:Napoleon"), std::string("defeatCause"),
                          std::nullopt},
        t0 + 2);
    s.expect(historical.size() == 1 && historical[0].object == "lit:stubbornness",
             "old belief still visible at historical as_of");
    s.step("query_triples", kb::Json{{"as_of", "historical"}},
           kb::Json{{"object", historical.empty() ? "" : historical[0].object}});
}

} // namespace

std::string ScenarioTranscript::to_jsonl() const {
    std::string out;
    for (size_t i = 0; i < steps.size(); ++i) {
        kb::Json j;
        j["scenario"] = scenario;
        j["step"] = i + 1;
        j["op"] = steps[i].op;
        j["in"] = steps[i].in_digest;
        j["out"] = steps[i].out_digest;
        out += j.dump();
        out += '\n';
    }
    kb::Json summary;
    summary["scenario"] = scenario;
    summary["steps"] = steps.size();
    summary["assertions_passed"] = assertions_passed;
    summary["seed"] = seed;
    out += summary.dump();
    out += '\n';
    return out;
}

ScenarioTranscript run_scenario(const std::string& which, uint64_t seed,
                                const std::string& work_dir) {
    Script script(which, seed, work_dir);
    if (which == "S1") run_s1(script);
    else if (which == "S2") run_s2(script);
    else if (which == "S3") run_s3(script);
    else if (which == "S4") run_s4(script);
    else throw ScenarioError("unknown scenario: " + which + " (expected S1..S4)");
    return script.transcript;
}

} // namespace colma::scenario
