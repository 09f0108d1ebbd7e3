#include "colma/cognition/chaining.hpp"

#include "json.hpp"

#include <algorithm>
#include <istream>
#include <map>

namespace colma::cog {

void validate_rule(const Rule& rule) {
    if (rule.premises.empty()) throw CognitionError("rule needs at least one premise");
    if (rule.premises.size() > 5) throw CognitionError("rule premise count exceeds 5");
    if (rule.confidence <= 0.0 || rule.confidence > 1.0)
        throw CognitionError("rule confidence must be in (0, 1]");
    std::set<std::string> premise_vars;
    for (const auto& p : rule.premises)
        for (const auto* t : {&p.subject, &p.predicate, &p.object})
            if (t->is_var()) premise_vars.insert(t->text);
    for (const auto* t : {&rule.conclusion.subject, &rule.conclusion.predicate,
                          &rule.conclusion.object})
        if (t->is_var() && !premise_vars.count(t->text))
            throw CognitionError("non-safe rule: conclusion variable " + t->text +
                                 " not bound by any premise");
}

namespace {

bool unify_term(const PatternTerm& term, const std::string& value, Bindings& b) {
    if (!term.is_var()) return term.text == value;
    auto it = b.find(term.text);
    if (it != b.end()) return it->second == value;
    b[term.text] = value;
    return true;
}

} // namespace

std::vector<Bindings> match_pattern(const std::set<GroundFact>& facts, const RulePattern& pattern,
                                    const Bindings& base) {
    std::vector<Bindings> out;
    for (const auto& f : facts) {
        Bindings b = base;
        if (unify_term(pattern.subject, f.subject, b) &&
            unify_term(pattern.predicate, f.predicate, b) &&
            unify_term(pattern.object, f.object, b))
            out.push_back(std::move(b));
    }
    return out;
}

GroundFact instantiate(const RulePattern& pattern, const Bindings& b, double confidence) {
    auto resolve = [&](const PatternTerm& t) -> std::string {
        if (!t.is_var()) return t.text;
        auto it = b.find(t.text);
        if (it == b.end()) throw CognitionError("unbound variable " + t.text);
        return it->second;
    };
    return GroundFact{resolve(pattern.subject), resolve(pattern.predicate),
                      resolve(pattern.object), confidence};
}

std::vector<Derivation> saturate(const std::vector<GroundFact>& base,
                                 const std::vector<Rule>& rules, int max_depth) {
    for (const auto& r : rules) validate_rule(r);

    std::set<GroundFact> known(base.begin(), base.end());
    std::map<GroundFact, double> confidence;  // best known confidence
    std::map<GroundFact, int> depth;
    for (const auto& f : base) {
        auto it = confidence.find(f);
        if (it == confidence.end() || f.confidence > it->second) confidence[f] = f.confidence;
        depth[f] = 0;
    }

    std::map<GroundFact, Derivation> derivations;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& rule : rules) {
            // Join premises left to right.
            std::vector<std::pair<Bindings, std::vector<GroundFact>>> partial{{Bindings{}, {}}};
            for (const auto& premise : rule.premises) {
                std::vector<std::pair<Bindings, std::vector<GroundFact>>> next;
                for (const auto& [b, used] : partial) {
                    for (const auto& f : known) {
                        Bindings nb = b;
                        if (unify_term(premise.subject, f.subject, nb) &&
                            unify_term(premise.predicate, f.predicate, nb) &&
                            unify_term(premise.object, f.object, nb)) {
                            auto nused = used;
                            // Canonical stored copy carries best confidence.
                            GroundFact stored = f;
                            stored.confidence = confidence[f];
                            nused.push_back(stored);
                            next.emplace_back(std::move(nb), std::move(nused));
                        }
                    }
                }
                partial = std::move(next);
                if (partial.empty()) break;
            }
            for (const auto& [b, premises] : partial) {
                double conf = rule.confidence;
                int d = 0;
                for (const auto& pf : premises) {
                    conf *= pf.confidence;
                    d = std::max(d, depth[pf]);
                }
                int new_depth = d + 1;
                if (new_depth > max_depth) continue;
                GroundFact concl = instantiate(rule.conclusion, b, conf);
                auto it = confidence.find(concl);
                bool fresh = it == confidence.end();
                bool better = !fresh && conf > it->second && depth[concl] >= new_depth;
                if (fresh) {
                    confidence[concl] = conf;
                    depth[concl] = new_depth;
                    known.insert(concl);
                    derivations[concl] = Derivation{concl, rule.id, premises, new_depth};
                    changed = true;
                } else if (better) {
                    confidence[concl] = conf;
                    derivations[concl] = Derivation{concl, rule.id, premises, new_depth};
                    changed = true;
                }
            }
        }
    }

    std::vector<Derivation> out;
    out.reserve(derivations.size());
    for (auto& [f, d] : derivations) {
        Derivation copy = d;
        copy.fact.confidence = confidence[f];
        out.push_back(std::move(copy));
    }
    return out;
}

std::vector<Bindings> answer_goal(const std::vector<GroundFact>& base,
                                  const std::vector<Derivation>& derived,
                                  const RulePattern& goal) {
    std::set<GroundFact> all(base.begin(), base.end());
    for (const auto& d : derived) all.insert(d.fact);
    auto matches = match_pattern(all, goal, {});
    std::vector<Bindings> out;
    for (auto& m : matches)
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
    return out;
}

namespace {

RulePattern pattern_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3)
        throw CognitionError("rule pattern must be a 3-element array");
    return RulePattern{PatternTerm{j[0].get<std::string>()},
                       PatternTerm{j[1].get<std::string>()},
                       PatternTerm{j[2].get<std::string>()}};
}

nlohmann::json pattern_to_json(const RulePattern& p) {
    return nlohmann::json::array({p.subject.text, p.predicate.text, p.object.text});
}

} // namespace

std::vector<Rule> parse_rules_jsonl(std::istream& in) {
    std::vector<Rule> rules;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw CognitionError("malformed rule line: " + line);
        Rule r;
        r.id = j.value("id", "rule-" + std::to_string(rules.size()));
        for (const auto& p : j.at("premises")) r.premises.push_back(pattern_from_json(p));
        r.conclusion = pattern_from_json(j.at("conclusion"));
        r.confidence = j.value("confidence", 1.0);
        validate_rule(r);
        rules.push_back(std::move(r));
    }
    return rules;
}

std::string rule_to_jsonl(const Rule& rule) {
    nlohmann::json j;
    j["id"] = rule.id;
    nlohmann::json prem = nlohmann::json::array();
    for (const auto& p : rule.premises) prem.push_back(pattern_to_json(p));
    j["premises"] = std::move(prem);
    j["conclusion"] = pattern_to_json(rule.conclusion);
    j["confidence"] = rule.confidence;
    return j.dump();
}

} // namespace colma::cog
