#pragma once
// Functionality Layer domain types: multimodal cues, reconstruction
// results, inference rules, update proposals/outcomes, strategy weights.

#include "colma/knowledge/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace colma::cog {

struct CognitionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Cue {
    std::vector<std::string> text_tokens;
    std::optional<std::vector<float>> embedding;
    std::vector<std::string> entities;
    std::optional<std::pair<int64_t, int64_t>> time_window;
    std::vector<std::string> slots;
    std::vector<std::string> salience_tags;

    bool empty() const {
        return text_tokens.empty() && !embedding && entities.empty() && !time_window;
    }
};

struct SlotFill {
    kb::RecordId record;
    double confidence = 0.0;
};

struct ReconstructionResult {
    std::map<std::string, SlotFill> filled_slots;
    double completeness = 0.0;  // filled / requested
    double coherence = 1.0;     // mean pairwise cosine of fragment embeddings
    size_t rounds_used = 1;
    std::vector<kb::RecordId> fragments;

    double score() const { return completeness * coherence; }
};

// Rule patterns: "?x"-prefixed terms are variables.
struct PatternTerm {
    std::string text;
    bool is_var() const { return !text.empty() && text.front() == '?'; }
};

struct RulePattern {
    PatternTerm subject, predicate, object;
};

struct Rule {
    std::string id;
    std::vector<RulePattern> premises;  // <= 5, joined on shared variables
    RulePattern conclusion;             // conclusion vars subset of premise vars
    double confidence = 1.0;
};

using Bindings = std::map<std::string, std::string>;

struct GroundFact {
    std::string subject, predicate, object;
    double confidence = 1.0;

    auto tied() const { return std::tie(subject, predicate, object); }
    bool operator<(const GroundFact& o) const { return tied() < o.tied(); }
    bool operator==(const GroundFact& o) const { return tied() == o.tied(); }
};

struct Derivation {
    GroundFact fact;
    std::string rule_id;
    std::vector<GroundFact> premises;
    int depth = 1;  // 1 + max premise depth; stored facts are depth 0
};

struct ProofResult {
    std::vector<Bindings> answers;
    std::string strategy;  // "deductive" | "heuristic" | "none"
    double confidence = 0.0;
    bool conflict_logged = false;
    std::vector<Derivation> trace;
};

struct UpdateProposal {
    kb::Triple triple;
    std::vector<std::string> evidence;  // non-empty provenance strings
    double evidence_confidence = 1.0;   // (0, 1]
    std::optional<kb::RecordId> source_record;
};

enum class UpdateDecision { reinforced, replaced, coexists, rejected };

std::string to_string(UpdateDecision d);

struct UpdateOutcome {
    UpdateDecision decision = UpdateDecision::rejected;
    // Key "s|p|o" plus the assertion timestamp acting as the version.
    std::optional<std::pair<std::string, uint64_t>> new_version;
    std::optional<kb::Triple> conflict_with;
    int verification_rounds = 0;
    double consistency = 0.0;
    double completeness_q = 0.0;
};

struct StrategyWeights {
    std::map<std::string, double> weights;  // "heuristic", "deductive" in [0,1]
    double ema_alpha = 0.2;
};

struct Outcome {
    std::string task_id;
    std::string strategy;  // "heuristic" | "deductive"
    bool success = false;
};

} // namespace colma::cog
