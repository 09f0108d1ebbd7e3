#pragma once
// Forward chaining to fixpoint over ground facts. Pure: no store access,
// fully deterministic, so tests can oracle it with naive saturation.

#include "colma/cognition/types.hpp"

#include <set>
#include <vector>

namespace colma::cog {

// Throws CognitionError for non-safe rules or > 5 premises.
void validate_rule(const Rule& rule);

// Matches `pattern` against `facts`, one Bindings per match, extending
// `base` bindings. Deterministic order (facts are iterated sorted).
std::vector<Bindings> match_pattern(const std::set<GroundFact>& facts, const RulePattern& pattern,
                                    const Bindings& base);

// Applies rules until fixpoint. Every derived fact records its derivation;
// depth is bounded by max_depth (stored facts are depth 0). Confidence of a
// derived fact is rule confidence times the product of premise confidences
// (the maximum over alternative derivations).
std::vector<Derivation> saturate(const std::vector<GroundFact>& base,
                                 const std::vector<Rule>& rules, int max_depth);

// Substitutes bindings into a pattern; throws if a variable is unbound.
GroundFact instantiate(const RulePattern& pattern, const Bindings& b, double confidence);

// Answers a goal pattern over base + derived facts: one Bindings per match
// (variables in the goal), deduplicated, deterministic order.
std::vector<Bindings> answer_goal(const std::vector<GroundFact>& base,
                                  const std::vector<Derivation>& derived,
                                  const RulePattern& goal);

// Rule file format: JSON Lines, one rule per line:
//   {"id": "...", "premises": [["?x","isA","ent:mushroom"], ...],
//    "conclusion": ["?x","isToxicRisk","lit:high"], "confidence": 0.9}
// Premises/conclusion are 3-element [subject, predicate, object] arrays;
// "?"-prefixed terms are variables. Confidence defaults to 1.
std::vector<Rule> parse_rules_jsonl(std::istream& in);
std::string rule_to_jsonl(const Rule& rule);

} // namespace colma::cog
