#include "colma/cognition/cognition.hpp"

#include "colma/knowledge/json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace colma::cog {

namespace {

constexpr const char* kCaseEntity = "__cases";
constexpr const char* kStrategyFactPrefix = "strategy:";

std::string triple_key(const kb::Triple& t) {
    return t.subject + "|" + t.predicate + "|" + t.object;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Bindings bindings_from_json(const kb::Json& j) {
    Bindings b;
    for (auto it = j.begin(); it != j.end(); ++it) b[it.key()] = it.value().get<std::string>();
    return b;
}

kb::Json bindings_to_json(const Bindings& b) {
    kb::Json j = kb::Json::object();
    for (const auto& [k, v] : b) j[k] = v;
    return j;
}

} // namespace

std::string to_string(UpdateDecision d) {
    switch (d) {
        case UpdateDecision::reinforced: return "reinforced";
        case UpdateDecision::replaced: return "replaced";
        case UpdateDecision::coexists: return "coexists";
        case UpdateDecision::rejected: return "rejected";
    }
    return "rejected";
}

Cognition::Cognition(kb::KnowledgeBase& base, coord::Coordinator& coordinator,
                     scenario::Embedder embedder, Clock clock, coord::IdGen idgen)
    : base_(base), coord_(coordinator), embed_(std::move(embedder)), clock_(std::move(clock)),
      idgen_(std::move(idgen)) {}

std::string Cognition::pattern_text(const RulePattern& goal) {
    return goal.subject.text + " " + goal.predicate.text + " " + goal.object.text;
}

// ---------------------------------------------------------------- recall

namespace {

// Slot-name match against a fragment: structured JSON key beats a plain
// token hit, which beats embedding similarity.
double slot_match(const std::string& slot, const kb::MemoryRecord& r,
                  const std::optional<std::vector<float>>& cue_embedding) {
    if (r.modality == kb::Modality::structured) {
        kb::Json j = kb::Json::parse(r.content, nullptr, false);
        if (j.is_object() && j.contains(slot)) return 1.0;
    }
    auto tokens = scenario::tokenize(std::string(r.content));
    auto slot_tokens = scenario::tokenize(slot);
    if (!slot_tokens.empty()) {
        bool all = true;
        for (const auto& st : slot_tokens)
            if (std::find(tokens.begin(), tokens.end(), st) == tokens.end()) all = false;
        if (all) return 0.8;
    }
    if (cue_embedding && r.embedding) {
        double c = kb::cosine_similarity(*cue_embedding, *r.embedding);
        if (c > 0) return c * 0.6;
    }
    return 0.0;
}

} // namespace

ReconstructionResult Cognition::recall(const Cue& cue, size_t max_rounds,
                                       double accept_threshold) {
    if (cue.empty()) throw CognitionError("empty cue");
    if (max_rounds == 0) max_rounds = 1;

    // Round 1 gathering: time window, vector neighborhood, entity links.
    std::set<kb::RecordId> fragment_ids;
    auto add_visible = [&](const kb::RecordId& id) {
        if (base_.peek_record(id)) fragment_ids.insert(id);
    };
    if (cue.time_window)
        for (const auto& id : base_.records_in_window(cue.time_window->first,
                                                      cue.time_window->second))
            add_visible(id);
    if (cue.embedding)
        for (const auto& hit : base_.knn(*cue.embedding, 16, kb::KnnMode::exact))
            add_visible(hit.id);
    for (const auto& e : cue.entities)
        for (const auto& id : base_.records_of_entity(e)) add_visible(id);

    ReconstructionResult best;
    best.rounds_used = 1;
    size_t round = 0;
    bool have_best = false;

    while (round < max_rounds) {
        ++round;
        ReconstructionResult cur;
        cur.rounds_used = round;
        cur.fragments.assign(fragment_ids.begin(), fragment_ids.end());

        std::vector<kb::MemoryRecord> fragments;
        for (const auto& id : cur.fragments)
            if (auto r = base_.peek_record(id)) fragments.push_back(std::move(*r));

        for (const auto& slot : cue.slots) {
            const kb::MemoryRecord* chosen = nullptr;
            double chosen_score = 0.0;
            for (const auto& f : fragments) {
                double s = slot_match(slot, f, cue.embedding);
                if (s <= 0) continue;
                // Affective congruence reduced to salience as the tiebreak.
                if (!chosen || s > chosen_score ||
                    (s == chosen_score && (f.salience > chosen->salience ||
                                           (f.salience == chosen->salience &&
                                            f.id < chosen->id)))) {
                    chosen = &f;
                    chosen_score = s;
                }
            }
            if (chosen) cur.filled_slots[slot] = SlotFill{chosen->id, chosen_score};
        }

        if (cue.slots.empty()) {
            cur.completeness = fragments.empty() ? 0.0 : 1.0;
        } else {
            cur.completeness =
                static_cast<double>(cur.filled_slots.size()) / cue.slots.size();
        }

        std::vector<const std::vector<float>*> embs;
        for (const auto& f : fragments)
            if (f.embedding) embs.push_back(&*f.embedding);
        if (embs.size() < 2) {
            cur.coherence = 1.0;
        } else {
            double sum = 0.0;
            size_t pairs = 0;
            for (size_t i = 0; i < embs.size(); ++i)
                for (size_t j = i + 1; j < embs.size(); ++j) {
                    sum += kb::cosine_similarity(*embs[i], *embs[j]);
                    ++pairs;
                }
            cur.coherence = clamp01(sum / static_cast<double>(pairs));
        }

        if (!have_best || cur.score() > best.score()) {
            best = cur;
            have_best = true;
        }
        best.rounds_used = round;

        if (best.score() >= accept_threshold || round >= max_rounds) break;

        // Expand via association seeded on the highest-confidence fills.
        std::vector<std::pair<double, kb::RecordId>> fills;
        for (const auto& [slot, fill] : cur.filled_slots) {
            (void)slot;
            fills.emplace_back(fill.confidence, fill.record);
        }
        std::sort(fills.begin(), fills.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        Cue expand;
        for (size_t i = 0; i < fills.size() && i < 3; ++i) {
            // Entities mentioning this record.
            for (const auto& t : base_.query_triples(kb::TriplePattern{
                     std::nullopt, std::string("mentionedIn"),
                     std::string(kb::kRecordPrefix) + fills[i].second.hex()}))
                expand.entities.push_back(t.subject);
        }
        if (expand.entities.empty()) expand.entities = cue.entities;
        if (expand.entities.empty()) break;  // nothing to spread from
        size_t before = fragment_ids.size();
        for (const auto& hit : associate(expand, 8)) {
            if (hit.node.rfind(kb::kRecordPrefix, 0) == 0) {
                if (auto id = kb::RecordId::parse(hit.node.substr(4))) add_visible(*id);
            } else if (hit.node.rfind(kb::kEntityPrefix, 0) == 0) {
                for (const auto& id : base_.records_of_entity(hit.node)) add_visible(id);
            }
        }
        if (fragment_ids.size() == before) break;  // no new fragments to try
    }

    // Each act of recall updates long-term memory.
    for (const auto& id : best.fragments) coord_.reinforce(id, kRecallReinforce);
    return best;
}

// ------------------------------------------------------------- associate

void Cognition::spread_from(const std::string& seed,
                            std::map<std::string, double>& activation) const {
    // DFS over simple paths up to kMaxHops, both edge directions.
    std::vector<std::string> path{seed};
    std::set<std::string> on_path{seed};
    std::function<void(const std::string&, int)> walk = [&](const std::string& node, int depth) {
        if (depth >= kMaxHops) return;
        std::vector<std::string> nexts;
        for (const auto& t :
             base_.query_triples(kb::TriplePattern{node, std::nullopt, std::nullopt}))
            nexts.push_back(t.object);
        for (const auto& t :
             base_.query_triples(kb::TriplePattern{std::nullopt, std::nullopt, node}))
            nexts.push_back(t.subject);
        for (const auto& next : nexts) {
            if (on_path.count(next)) continue;  // simple paths only
            activation[next] += std::pow(kHopDecay, depth + 1);
            on_path.insert(next);
            walk(next, depth + 1);
            on_path.erase(next);
        }
    };
    walk(seed, 0);
}

std::vector<AssociationHit> Cognition::associate(const Cue& cue, size_t k) {
    if (cue.entities.empty() && !cue.embedding)
        throw CognitionError("associate needs entities or an embedding");

    std::map<std::string, double> activation;
    for (const auto& e : cue.entities) {
        std::string seed = kb::KnowledgeBase::normalize_entity(e);
        activation[seed] += 1.0;
        spread_from(seed, activation);
    }
    if (cue.embedding) {
        for (const auto& hit : base_.knn(*cue.embedding, k, kb::KnnMode::exact)) {
            if (hit.score <= 0) continue;
            activation[std::string(kb::kRecordPrefix) + hit.id.hex()] +=
                hit.score * kKnnActivationWeight;
        }
    }

    std::vector<AssociationHit> hits;
    hits.reserve(activation.size());
    for (const auto& [node, act] : activation) hits.push_back({node, clamp01(act)});
    std::sort(hits.begin(), hits.end(), [](const AssociationHit& a, const AssociationHit& b) {
        if (a.activation != b.activation) return a.activation > b.activation;
        return a.node < b.node;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

// ---------------------------------------------------------------- reason

std::vector<GroundFact> Cognition::live_facts() const {
    std::vector<GroundFact> facts;
    for (const auto& t : base_.query_triples(kb::TriplePattern{}))
        facts.push_back({t.subject, t.predicate, t.object, t.confidence});
    return facts;
}

double Cognition::strategy_weight(const std::string& name) const {
    if (auto f = base_.get_fact(kStrategyFactPrefix + name)) {
        try {
            return std::stod(f->value);
        } catch (...) {
        }
    }
    return 0.5;
}

StrategyWeights Cognition::strategy_weights() const {
    StrategyWeights w;
    w.weights["heuristic"] = strategy_weight("heuristic");
    w.weights["deductive"] = strategy_weight("deductive");
    return w;
}

ProofResult Cognition::reason(const RulePattern& goal, const std::vector<Rule>& rules,
                              int max_depth) {
    for (const auto& r : rules) validate_rule(r);

    // Strategy weights order which path runs first; both always run so the
    // conflict monitor can compare them, and deduction wins disagreements.
    bool heuristic_first = strategy_weight("heuristic") > strategy_weight("deductive");

    std::optional<std::pair<std::vector<Bindings>, double>> hint;
    auto run_heuristic = [&] { hint = heuristic_suggest(goal); };

    std::vector<GroundFact> facts;
    std::vector<Derivation> derived;
    std::vector<Bindings> deduced;
    auto run_deductive = [&] {
        facts = live_facts();
        derived = saturate(facts, rules, max_depth);
        deduced = answer_goal(facts, derived, goal);
    };

    if (heuristic_first) {
        run_heuristic();
        run_deductive();
    } else {
        run_deductive();
        run_heuristic();
    }

    ProofResult out;
    out.trace = derived;
    if (!deduced.empty()) {
        out.answers = deduced;
        out.strategy = "deductive";
        double conf = 0.0;
        std::set<GroundFact> all(facts.begin(), facts.end());
        for (const auto& d : derived) all.insert(d.fact);
        for (const auto& f : all) {
            Bindings b;
            RulePattern g = goal;
            auto matches = match_pattern({f}, g, b);
            if (!matches.empty()) conf = std::max(conf, f.confidence);
        }
        out.confidence = conf;

        if (hint) {
            auto a = hint->first;
            auto b = deduced;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b) {
                // Conflict monitor: intuition disagreed, deduction wins,
                // the reflection loop hears about the failure.
                out.conflict_logged = true;
                reflect(Outcome{pattern_text(goal), "heuristic", false});
            }
        }

        // Reinforcement stage: verified derived facts become triples.
        int64_t now = clock_();
        for (const auto& d : derived) {
            kb::Triple t;
            t.subject = d.fact.subject;
            t.predicate = d.fact.predicate;
            t.object = d.fact.object;
            t.confidence = std::clamp(d.fact.confidence, 1e-9, 1.0);
            t.asserted_at = now;
            base_.assert_triple(std::move(t));
        }

        // Remember the solved case for future heuristics.
        kb::Json case_json;
        case_json["goal"] = pattern_text(goal);
        kb::Json answers = kb::Json::array();
        for (const auto& b : deduced) answers.push_back(bindings_to_json(b));
        case_json["answers"] = std::move(answers);
        coord::Stimulus stim;
        stim.modality = kb::Modality::structured;
        stim.content = kb::canon(case_json);
        stim.embedding = embed_(pattern_text(goal));
        stim.entities = {kCaseEntity};
        coord_.encode(stim);
    } else if (hint) {
        out.answers = hint->first;
        out.strategy = "heuristic";
        out.confidence = hint->second;
    } else {
        out.strategy = "none";
    }
    return out;
}

std::optional<std::pair<std::vector<Bindings>, double>> Cognition::heuristic_suggest(
    const RulePattern& goal) const {
    std::vector<float> q;
    try {
        q = embed_(pattern_text(goal));
    } catch (...) {
        return std::nullopt;
    }
    const kb::RecordId* best = nullptr;
    double best_sim = 0.0;
    std::vector<kb::RecordId> ids = base_.records_of_entity(kCaseEntity);
    std::vector<std::pair<kb::RecordId, kb::MemoryRecord>> cases;
    for (const auto& id : ids)
        if (auto r = base_.peek_record(id); r && r->embedding)
            cases.emplace_back(id, std::move(*r));
    for (const auto& [id, r] : cases) {
        double s = kb::cosine_similarity(q, *r.embedding);
        if (s <= 0) continue;
        if (!best || s > best_sim || (s == best_sim && id < *best)) {
            best = &id;
            best_sim = s;
        }
    }
    if (!best) return std::nullopt;
    auto rec = base_.peek_record(*best);
    kb::Json j = kb::Json::parse(rec->content, nullptr, false);
    if (!j.is_object() || !j.contains("answers")) return std::nullopt;
    std::vector<Bindings> answers;
    for (const auto& a : j.at("answers")) answers.push_back(bindings_from_json(a));
    return std::make_pair(std::move(answers), best_sim);
}

// ---------------------------------------------------------------- predict

kb::RecordId Cognition::append_event(const std::string& stream_id, const std::string& label,
                                     int64_t occurred_at) {
    int64_t at = occurred_at != 0 ? occurred_at : clock_();
    coord::Stimulus stim;
    stim.modality = kb::Modality::event;
    stim.content = label;
    stim.occurred_at = at;
    auto rec = coord_.encode(stim);
    base_.append_stream_event(stream_id, label, at, rec.id);
    return rec.id;
}

std::vector<std::string> Cognition::stream_labels(const std::string& stream_id) const {
    return base_.stream_events(stream_id);
}

std::optional<Prediction> Cognition::predict(const std::string& stream_id,
                                             const std::vector<std::string>& context) const {
    auto labels = stream_labels(stream_id);
    if (labels.empty()) return std::nullopt;

    if (context.empty()) {
        // Most frequent stream-initial label; a single stream has one.
        return Prediction{labels.front(), 1.0};
    }
    const std::string& last = context.back();
    std::map<std::string, size_t> successors;
    size_t total = 0;
    for (size_t i = 0; i + 1 < labels.size(); ++i) {
        if (labels[i] != last) continue;
        successors[labels[i + 1]] += 1;
        ++total;
    }
    if (total == 0) return std::nullopt;
    // argmax count, ties broken lexicographically ascending (map order).
    const std::string* best = nullptr;
    size_t best_count = 0;
    for (const auto& [label, count] : successors)
        if (count > best_count) {
            best = &label;
            best_count = count;
        }
    return Prediction{*best, static_cast<double>(best_count) / static_cast<double>(total)};
}

// ---------------------------------------------------------------- reflect

StrategyWeights Cognition::reflect(const Outcome& outcome) {
    if (outcome.strategy != "heuristic" && outcome.strategy != "deductive")
        throw CognitionError("unknown strategy: " + outcome.strategy);
    StrategyWeights w = strategy_weights();
    double& target = w.weights[outcome.strategy];
    target = (1.0 - w.ema_alpha) * target + w.ema_alpha * (outcome.success ? 1.0 : 0.0);
    for (const auto& [name, value] : w.weights)
        base_.put_fact(kStrategyFactPrefix + name, kb::Json(value).dump());
    return w;
}

// ----------------------------------------------------------- update_memory

double Cognition::proposal_completeness(const UpdateProposal& proposal) {
    int present = 0;
    if (!proposal.evidence.empty()) ++present;
    if (proposal.source_record) ++present;
    if (proposal.triple.source_record) ++present;
    return static_cast<double>(present) / 3.0;
}

double Cognition::corroboration(const UpdateProposal& proposal,
                                const kb::Triple& old_triple) const {
    (void)old_triple;
    auto hood = base_.neighbors(proposal.triple.subject, 2, kb::Direction::both);
    std::set<std::string> evidence(proposal.evidence.begin(), proposal.evidence.end());

    size_t total = 0, shared = 0;
    for (const auto& t : base_.query_triples(kb::TriplePattern{})) {
        if (!hood.count(t.subject) && !hood.count(t.object)) continue;
        // The contested claim itself is not independent context.
        if (t.subject == proposal.triple.subject && t.predicate == proposal.triple.predicate)
            continue;
        ++total;
        if (!t.source_record) continue;
        auto rec = base_.peek_record(t.source_record.value(), std::nullopt);
        if (!rec) {
            // Head may be archived; read any stored version for provenance.
            continue;
        }
        for (const auto& src : rec->provenance)
            if (evidence.count(src)) {
                ++shared;
                break;
            }
    }
    if (total == 0) return 0.5;  // empty neighborhood floor
    return static_cast<double>(shared) / static_cast<double>(total);
}

std::optional<kb::Triple> Cognition::conflicting_triple(const kb::Triple& proposed) const {
    std::optional<kb::Triple> best;
    for (const auto& t : base_.query_triples(
             kb::TriplePattern{proposed.subject, proposed.predicate, std::nullopt})) {
        if (t.object == proposed.object) continue;
        if (!best || t.confidence > best->confidence ||
            (t.confidence == best->confidence && t.asserted_at < best->asserted_at))
            best = t;
    }
    return best;
}

UpdateOutcome Cognition::update_memory(const UpdateProposal& proposal, int max_rounds,
                                       double accept_q, const Validator& validator) {
    if (proposal.evidence.empty()) throw CognitionError("proposal evidence must be non-empty");
    if (proposal.evidence_confidence <= 0.0 || proposal.evidence_confidence > 1.0)
        throw CognitionError("evidence confidence must be in (0, 1]");
    if (proposal.triple.subject.empty() || proposal.triple.predicate.empty() ||
        proposal.triple.object.empty())
        throw CognitionError("malformed proposal triple");
    if (max_rounds < 1) max_rounds = 1;

    UpdateOutcome out;
    out.completeness_q = proposal_completeness(proposal);
    const auto& p = proposal.triple;
    int64_t now = clock_();

    auto reinforce_sources = [&](const std::optional<kb::RecordId>& a,
                                 const std::optional<kb::RecordId>& b) {
        for (const auto& id : {a, b})
            if (id && base_.peek_record(*id)) coord_.reinforce(*id, kRecallReinforce);
    };

    // (1) RETRIEVE + (2) COMPARE.
    if (auto exact = base_.query_triples(kb::TriplePattern{p.subject, p.predicate, p.object});
        !exact.empty()) {
        const kb::Triple& old = exact.front();
        double merged = std::max(old.confidence, proposal.evidence_confidence);
        base_.set_triple_confidence(p.subject, p.predicate, p.object, merged);
        reinforce_sources(old.source_record, proposal.source_record);
        out.decision = UpdateDecision::reinforced;
        out.consistency = 1.0;
        return out;
    }

    auto conflict = conflicting_triple(p);
    if (!conflict) {
        // Novel assertion: a new independent memory trace.
        kb::Triple t = p;
        t.confidence = proposal.evidence_confidence;
        t.asserted_at = now;
        t.retracted_at.reset();
        t.source_record = proposal.source_record;
        const kb::Triple& stored = base_.assert_triple(std::move(t));
        out.decision = UpdateDecision::coexists;
        out.new_version = {triple_key(stored), static_cast<uint64_t>(stored.asserted_at)};
        out.consistency = 1.0;
        return out;
    }

    // (3) VERIFY: score candidate resolutions over up to max_rounds.
    out.conflict_with = conflict;
    double oc = conflict->confidence;
    double ec = proposal.evidence_confidence;
    double corr = corroboration(proposal, *conflict);
    double cq = out.completeness_q;

    enum class Candidate { replace, coexist, keep_old };
    Candidate winner = Candidate::keep_old;
    bool accepted = false;
    int round = 0;
    double best_score = 0.0;
    while (round < max_rounds && !accepted) {
        if (round >= 1 && !validator) break;  // no new information can arrive
        ++round;
        if (round > 1) corr = clamp01(corr + validator(proposal, *conflict, round));
        struct Scored {
            Candidate c;
            double score;
            int priority;  // replace > coexist > keep_old on ties
        };
        std::vector<Scored> candidates{
            {Candidate::replace, ec * corr, 0},
            {Candidate::coexist, 0.5 * (ec * corr + oc * (1.0 - corr)), 1},
            {Candidate::keep_old, oc * (1.0 - corr), 2},
        };
        std::sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.priority < b.priority;
        });
        best_score = std::max(best_score, candidates.front().score);
        for (const auto& c : candidates) {
            if (c.score * cq >= accept_q) {
                winner = c.c;
                out.consistency = c.score;
                accepted = true;
                break;
            }
        }
    }
    out.verification_rounds = round;

    if (!accepted) {
        out.decision = UpdateDecision::rejected;
        out.consistency = best_score;
        return out;
    }

    // (4) RECONSOLIDATE.
    switch (winner) {
        case Candidate::replace: {
            base_.retract_triple(conflict->subject, conflict->predicate, conflict->object, now);
            kb::Triple t = p;
            t.confidence = ec;
            t.asserted_at = now;
            t.retracted_at.reset();
            t.source_record = proposal.source_record;
            const kb::Triple& stored = base_.assert_triple(std::move(t));
            // Supersedes link: the old assertion stays queryable at as_of.
            kb::Json link;
            link["supersedes"] = triple_key(*conflict);
            link["superseded_at"] = conflict->asserted_at;
            base_.put_fact("__supersedes:" + triple_key(stored) + "@" +
                               std::to_string(stored.asserted_at),
                           kb::canon(link));
            reinforce_sources(proposal.source_record, std::nullopt);
            out.decision = UpdateDecision::replaced;
            out.new_version = {triple_key(stored), static_cast<uint64_t>(stored.asserted_at)};
            break;
        }
        case Candidate::coexist: {
            kb::Triple t = p;
            t.confidence = ec;
            t.asserted_at = now;
            t.retracted_at.reset();
            t.source_record = proposal.source_record;
            const kb::Triple& stored = base_.assert_triple(std::move(t));
            out.decision = UpdateDecision::coexists;
            out.new_version = {triple_key(stored), static_cast<uint64_t>(stored.asserted_at)};
            break;
        }
        case Candidate::keep_old:
            out.decision = UpdateDecision::rejected;  // no state change
            break;
    }
    return out;
}

} // namespace colma::cog
