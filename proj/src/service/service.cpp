#include "colma/service/service.hpp"

#include "colma/common/bytes.hpp"
#include "colma/storage/wal.hpp"

namespace colma::service {

namespace {

kb::Json error_response(const kb::Json& request_id, const std::string& code,
                        const std::string& message) {
    kb::Json r;
    r["request_id"] = request_id;
    r["status"] = "error";
    r["error"] = kb::Json{{"code", code}, {"message", message}};
    return r;
}

kb::RecordId parse_id(const kb::Json& j, const char* field) {
    auto id = kb::RecordId::parse(j.at(field).get<std::string>());
    if (!id) throw kb::KnowledgeError(std::string("bad record id in ") + field);
    return *id;
}

} // namespace

ServiceCore::ServiceCore(Engine& engine, std::vector<Principal> principals)
    : engine_(engine), principals_(std::move(principals)) {}

const std::vector<std::string>& ServiceCore::op_names() {
    static const std::vector<std::string> ops = {
        "put_record",       "get_record",  "assert_triple", "query_triples",
        "knn",              "recall",      "associate",     "reason",
        "predict",          "reflect",     "update_memory", "consolidate_tick",
        "forget_tick",      "sync_delta",  "apply_delta",   "stats",
    };
    return ops;
}

kb::Json ServiceCore::dispatch_line(const std::string& line) {
    kb::Json req = kb::Json::parse(line, nullptr, false);
    if (req.is_discarded())
        return error_response(nullptr, "bad_json", "request is not valid JSON");
    return dispatch(req);
}

kb::Json ServiceCore::dispatch(const kb::Json& request) {
    kb::Json request_id = request.is_object() ? request.value("request_id", kb::Json()) : kb::Json();
    if (!request.is_object())
        return error_response(request_id, "bad_request", "request must be a JSON object");
    if (request.value("v", 0) != 1)
        return error_response(request_id, "bad_request", "missing or unsupported protocol version (want v:1)");

    std::string op = request.value("op", "");
    std::string ns = request.value("namespace", "");
    std::string token = request.value("token", "");

    auto principal = resolve_principal(principals_, token);
    if (!principal) return error_response(request_id, "unauthorized", "unknown token");

    const auto& ops = op_names();
    if (std::find(ops.begin(), ops.end(), op) == ops.end())
        return error_response(request_id, "unknown_op", "unknown op: " + op);
    if (ns.empty())
        return error_response(request_id, "bad_request", "namespace is required");
    if (!authorize(*principal, ns, op))
        return error_response(request_id, "unauthorized", "operation not permitted in namespace");

    try {
        kb::Json payload = request.value("payload", kb::Json::object());
        kb::Json result = handle(op, ns, payload);
        kb::Json resp;
        resp["request_id"] = request_id;
        resp["status"] = "ok";
        resp["payload"] = std::move(result);
        return resp;
    } catch (const std::exception& e) {
        return error_response(request_id, "engine_error", e.what());
    }
}

kb::Json ServiceCore::handle(const std::string& op, const std::string& ns,
                             const kb::Json& payload) {
    auto& h = engine_.ns(ns);

    if (op == "put_record") {
        kb::Json rec = payload.at("record");
        if (!rec.contains("id")) rec["id"] = engine_.gen_id().hex();
        if (!rec.contains("namespace")) rec["namespace"] = ns;
        if (!rec.contains("created_at")) rec["created_at"] = engine_.now();
        if (!rec.contains("last_access")) rec["last_access"] = rec["created_at"];
        if (!rec.contains("access_count")) rec["access_count"] = 0;
        if (!rec.contains("salience")) rec["salience"] = 0.5;
        if (!rec.contains("tier")) rec["tier"] = "short";
        if (!rec.contains("version")) rec["version"] = 1;
        if (!rec.contains("modality")) rec["modality"] = "text";
        kb::MemoryRecord r = kb::record_from_json(rec);
        if (r.ns != ns) throw kb::KnowledgeError("record namespace must match request namespace");
        return upsert_payload(h.base->upsert_record(std::move(r)));
    }
    if (op == "get_record") {
        std::optional<uint64_t> version;
        if (payload.contains("version")) version = payload.at("version").get<uint64_t>();
        return record_payload(h.base->get_record(parse_id(payload, "id"), version));
    }
    if (op == "assert_triple") {
        kb::Triple t = kb::triple_from_json(payload.at("triple"));
        if (t.asserted_at == 0) t.asserted_at = engine_.now();
        return kb::Json{{"triple", kb::triple_to_json(h.base->assert_triple(std::move(t)))}};
    }
    if (op == "query_triples") {
        kb::TriplePattern pattern;
        if (payload.contains("subject")) pattern.subject = payload.at("subject").get<std::string>();
        if (payload.contains("predicate"))
            pattern.predicate = payload.at("predicate").get<std::string>();
        if (payload.contains("object")) pattern.object = payload.at("object").get<std::string>();
        std::optional<int64_t> as_of;
        if (payload.contains("as_of")) as_of = payload.at("as_of").get<int64_t>();
        return triples_payload(h.base->query_triples(pattern, as_of));
    }
    if (op == "knn") {
        std::vector<float> query;
        if (payload.contains("embedding")) {
            for (const auto& v : payload.at("embedding")) query.push_back(v.get<float>());
        } else if (payload.contains("text")) {
            query = engine_.config().embedder(payload.at("text").get<std::string>());
        } else {
            throw kb::KnowledgeError("knn needs an embedding or text");
        }
        size_t k = payload.value("k", size_t{10});
        kb::KnnMode mode =
            payload.value("mode", std::string("exact")) == "approx" ? kb::KnnMode::approx
                                                                    : kb::KnnMode::exact;
        return knn_payload(h.base->knn(query, k, mode));
    }
    if (op == "recall") {
        cog::Cue cue = cue_from_json(payload.at("cue"), engine_.config().embedder);
        size_t rounds = payload.value("max_rounds", size_t{5});
        double tau = payload.value("accept_threshold", 0.7);
        return recall_payload(h.cognition->recall(cue, rounds, tau));
    }
    if (op == "associate") {
        cog::Cue cue = cue_from_json(payload.at("cue"), engine_.config().embedder);
        size_t k = payload.value("k", size_t{10});
        return associate_payload(h.cognition->associate(cue, k));
    }
    if (op == "reason") {
        cog::RulePattern goal = pattern_from_array(payload.at("goal"));
        std::vector<cog::Rule> rules;
        if (payload.contains("rules")) {
            for (const auto& rj : payload.at("rules")) {
                cog::Rule r;
                r.id = rj.value("id", "rule-" + std::to_string(rules.size()));
                for (const auto& p : rj.at("premises"))
                    r.premises.push_back(pattern_from_array(p));
                r.conclusion = pattern_from_array(rj.at("conclusion"));
                r.confidence = rj.value("confidence", 1.0);
                rules.push_back(std::move(r));
            }
        }
        int depth = payload.value("max_depth", 4);
        return reason_payload(h.cognition->reason(goal, rules, depth));
    }
    if (op == "predict") {
        std::vector<std::string> context =
            payload.value("context", std::vector<std::string>{});
        return predict_payload(
            h.cognition->predict(payload.at("stream").get<std::string>(), context));
    }
    if (op == "reflect") {
        cog::Outcome outcome;
        outcome.task_id = payload.value("task_id", "");
        outcome.strategy = payload.at("strategy").get<std::string>();
        outcome.success = payload.at("success").get<bool>();
        return weights_payload(h.cognition->reflect(outcome));
    }
    if (op == "update_memory") {
        cog::UpdateProposal proposal = proposal_from_json(payload.at("proposal"));
        int rounds = payload.value("max_rounds", 3);
        double q = payload.value("accept_q", 0.7);
        return update_payload(h.cognition->update_memory(proposal, rounds, q));
    }
    if (op == "consolidate_tick") {
        std::lock_guard lk(tick_mu_);
        int64_t now = payload.value("now", engine_.now());
        return tick_payload(h.coordinator->consolidate_tick(now));
    }
    if (op == "forget_tick") {
        std::lock_guard lk(tick_mu_);
        int64_t now = payload.value("now", engine_.now());
        kb::Json ids = kb::Json::array();
        for (const auto& id : h.coordinator->forget_tick(now)) ids.push_back(id.hex());
        return kb::Json{{"archived", std::move(ids)}};
    }
    if (op == "sync_delta") {
        storage::PartitionKey pk{ns, payload.at("entity").get<std::string>()};
        uint64_t since = payload.value("since_seqno", uint64_t{0});
        return mutations_payload(engine_.store().sync_delta(pk, since),
                                 engine_.store().max_seqno());
    }
    if (op == "apply_delta") {
        std::vector<storage::Mutation> batch;
        for (const auto& hexstr : payload.at("mutations")) {
            storage::Mutation m =
                storage::decode_mutation(from_hex(hexstr.get<std::string>()));
            if (m.partition.ns != ns)
                throw kb::KnowledgeError("delta partition outside request namespace");
            batch.push_back(std::move(m));
        }
        return kb::Json{{"max_seqno", engine_.store().apply_delta(batch)}};
    }
    if (op == "stats") {
        auto& base = *h.base;
        kb::Json j;
        j["namespace"] = ns;
        j["records"] = base.record_ids().size();
        j["triples_live"] = engine_.config().graph_enabled ? base.triple_count(true) : 0;
        j["triples_total"] = engine_.config().graph_enabled ? base.triple_count(false) : 0;
        j["facts"] = base.fact_count();
        j["store_max_seqno"] = engine_.store().max_seqno();
        j["store_segments"] = engine_.store().segment_count();
        return j;
    }
    throw kb::KnowledgeError("unhandled op: " + op);
}

// ----------------------------------------------------------- serializers

kb::Json record_payload(const std::optional<kb::MemoryRecord>& r) {
    kb::Json j;
    j["record"] = r ? kb::record_to_json(*r) : kb::Json();
    return j;
}

kb::Json upsert_payload(const kb::UpsertOutcome& out) {
    kb::Json j;
    j["ok"] = out.ok;
    j["id"] = out.id.hex();
    j["version"] = out.version;
    j["current_version"] = out.current_version;
    if (!out.error.empty()) j["error"] = out.error;
    return j;
}

kb::Json triples_payload(const std::vector<kb::Triple>& ts) {
    kb::Json arr = kb::Json::array();
    for (const auto& t : ts) arr.push_back(kb::triple_to_json(t));
    return kb::Json{{"triples", std::move(arr)}};
}

kb::Json knn_payload(const std::vector<kb::ScoredId>& hits) {
    kb::Json arr = kb::Json::array();
    for (const auto& h : hits) arr.push_back(kb::Json{{"id", h.id.hex()}, {"score", h.score}});
    return kb::Json{{"hits", std::move(arr)}};
}

kb::Json recall_payload(const cog::ReconstructionResult& r) {
    kb::Json slots = kb::Json::object();
    for (const auto& [slot, fill] : r.filled_slots)
        slots[slot] = kb::Json{{"record", fill.record.hex()}, {"confidence", fill.confidence}};
    kb::Json frags = kb::Json::array();
    for (const auto& id : r.fragments) frags.push_back(id.hex());
    kb::Json j;
    j["filled_slots"] = std::move(slots);
    j["completeness"] = r.completeness;
    j["coherence"] = r.coherence;
    j["rounds_used"] = r.rounds_used;
    j["fragments"] = std::move(frags);
    return j;
}

kb::Json associate_payload(const std::vector<cog::AssociationHit>& hits) {
    kb::Json arr = kb::Json::array();
    for (const auto& h : hits)
        arr.push_back(kb::Json{{"node", h.node}, {"activation", h.activation}});
    return kb::Json{{"hits", std::move(arr)}};
}

kb::Json reason_payload(const cog::ProofResult& proof) {
    kb::Json answers = kb::Json::array();
    for (const auto& b : proof.answers) {
        kb::Json bj = kb::Json::object();
        for (const auto& [var, val] : b) bj[var] = val;
        answers.push_back(std::move(bj));
    }
    kb::Json trace = kb::Json::array();
    for (const auto& d : proof.trace) {
        kb::Json premises = kb::Json::array();
        for (const auto& p : d.premises)
            premises.push_back(kb::Json::array({p.subject, p.predicate, p.object}));
        trace.push_back(kb::Json{
            {"fact", kb::Json::array({d.fact.subject, d.fact.predicate, d.fact.object})},
            {"confidence", d.fact.confidence},
            {"rule", d.rule_id},
            {"premises", std::move(premises)},
            {"depth", d.depth}});
    }
    kb::Json j;
    j["answers"] = std::move(answers);
    j["strategy"] = proof.strategy;
    j["confidence"] = proof.confidence;
    j["conflict_logged"] = proof.conflict_logged;
    j["trace"] = std::move(trace);
    return j;
}

kb::Json predict_payload(const std::optional<cog::Prediction>& p) {
    kb::Json j;
    j["prediction"] =
        p ? kb::Json{{"label", p->label}, {"confidence", p->confidence}} : kb::Json();
    return j;
}

kb::Json weights_payload(const cog::StrategyWeights& w) {
    kb::Json weights = kb::Json::object();
    for (const auto& [name, value] : w.weights) weights[name] = value;
    return kb::Json{{"weights", std::move(weights)}, {"ema_alpha", w.ema_alpha}};
}

kb::Json update_payload(const cog::UpdateOutcome& out) {
    kb::Json j;
    j["decision"] = cog::to_string(out.decision);
    if (out.new_version)
        j["new_version"] = kb::Json{{"key", out.new_version->first},
                                    {"version", out.new_version->second}};
    if (out.conflict_with) j["conflict_with"] = kb::triple_to_json(*out.conflict_with);
    j["verification_rounds"] = out.verification_rounds;
    j["consistency"] = out.consistency;
    j["completeness_q"] = out.completeness_q;
    return j;
}

kb::Json tick_payload(const coord::TickReport& report) {
    kb::Json promoted = kb::Json::array();
    for (const auto& p : report.promoted)
        promoted.push_back(kb::Json::array(
            {p.id.hex(), kb::to_string(p.from), kb::to_string(p.to)}));
    kb::Json archived = kb::Json::array();
    for (const auto& id : report.archived) archived.push_back(id.hex());
    kb::Json j;
    j["promoted"] = std::move(promoted);
    j["archived"] = std::move(archived);
    j["evaluated"] = report.evaluated;
    return j;
}

kb::Json mutations_payload(const std::vector<storage::Mutation>& batch, uint64_t max_seqno) {
    kb::Json arr = kb::Json::array();
    for (const auto& m : batch) arr.push_back(to_hex(storage::encode_mutation(m)));
    return kb::Json{{"mutations", std::move(arr)}, {"max_seqno", max_seqno}};
}

cog::Cue cue_from_json(const kb::Json& j, const scenario::Embedder& embed) {
    cog::Cue cue;
    if (j.contains("text_tokens"))
        cue.text_tokens = j.at("text_tokens").get<std::vector<std::string>>();
    if (j.contains("embedding")) {
        std::vector<float> v;
        for (const auto& x : j.at("embedding")) v.push_back(x.get<float>());
        cue.embedding = std::move(v);
    } else if (j.contains("text")) {
        cue.embedding = embed(j.at("text").get<std::string>());
    }
    if (j.contains("entities")) cue.entities = j.at("entities").get<std::vector<std::string>>();
    if (j.contains("time_window")) {
        const auto& w = j.at("time_window");
        cue.time_window = {{w.at(0).get<int64_t>(), w.at(1).get<int64_t>()}};
    }
    if (j.contains("slots")) cue.slots = j.at("slots").get<std::vector<std::string>>();
    if (j.contains("salience_tags"))
        cue.salience_tags = j.at("salience_tags").get<std::vector<std::string>>();
    return cue;
}

cog::RulePattern pattern_from_array(const kb::Json& j) {
    if (!j.is_array() || j.size() != 3)
        throw kb::KnowledgeError("pattern must be [subject, predicate, object]");
    return cog::RulePattern{{j[0].get<std::string>()},
                            {j[1].get<std::string>()},
                            {j[2].get<std::string>()}};
}

cog::UpdateProposal proposal_from_json(const kb::Json& j) {
    cog::UpdateProposal p;
    p.triple = kb::triple_from_json(j.at("triple"));
    p.evidence = j.at("evidence").get<std::vector<std::string>>();
    p.evidence_confidence = j.value("evidence_confidence", 1.0);
    if (j.contains("source_record")) {
        auto id = kb::RecordId::parse(j.at("source_record").get<std::string>());
        if (!id) throw kb::KnowledgeError("bad source_record id");
        p.source_record = *id;
    }
    return p;
}

} // namespace colma::service
