#pragma once
// The six cognitive operations over the knowledge and coordination layers:
// recall (iterative reconstruction), associate (spreading activation),
// reason (dual-path with conflict monitoring), predict (first-order
// transitions), reflect (strategy weight EMA), update_memory
// (retrieve-compare-verify-reconsolidate).

#include "colma/cognition/chaining.hpp"
#include "colma/cognition/types.hpp"
#include "colma/coordination/coordinator.hpp"
#include "colma/knowledge/knowledge_base.hpp"
#include "colma/scenario/embedder.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace colma::cog {

// External cross-validation hook for update_memory: returns extra
// corroboration in [0, 1] for a verification round.
using Validator = std::function<double(const UpdateProposal&, const kb::Triple& old_triple,
                                       int round)>;

struct AssociationHit {
    std::string node;  // entity, literal, or rec:<hex>
    double activation = 0.0;
};

struct Prediction {
    std::string label;
    double confidence = 0.0;
};

class Cognition {
public:
    static constexpr double kHopDecay = 0.5;
    static constexpr int kMaxHops = 3;
    static constexpr double kKnnActivationWeight = 0.8;
    static constexpr double kRecallReinforce = 0.05;

    Cognition(kb::KnowledgeBase& base, coord::Coordinator& coordinator,
              scenario::Embedder embedder, Clock clock, coord::IdGen idgen);

    // S2 pipeline. Throws CognitionError on an empty cue.
    ReconstructionResult recall(const Cue& cue, size_t max_rounds = 5,
                                double accept_threshold = 0.7);

    // Spreading activation: per-hop decay 0.5, max 3 hops, activation
    // additive across simple paths then clamped to 1; knn hits weighted 0.8.
    std::vector<AssociationHit> associate(const Cue& cue, size_t k);

    // Dual-path reasoning; deduction wins conflicts and verified derived
    // facts are asserted back with product confidences.
    ProofResult reason(const RulePattern& goal, const std::vector<Rule>& rules,
                       int max_depth = 4);

    // Case-based path: nearest previously solved case, no side effects.
    std::optional<std::pair<std::vector<Bindings>, double>> heuristic_suggest(
        const RulePattern& goal) const;

    // First-order transitions over an event stream.
    std::optional<Prediction> predict(const std::string& stream_id,
                                      const std::vector<std::string>& context) const;

    // EMA strategy-weight update, persisted as facts.
    StrategyWeights reflect(const Outcome& outcome);
    StrategyWeights strategy_weights() const;

    // S4 pipeline.
    UpdateOutcome update_memory(const UpdateProposal& proposal, int max_rounds = 3,
                                double accept_q = 0.7, const Validator& validator = {});

    // Stores one event into a stream (clustering-time-ordered) and encodes
    // it as an event record.
    kb::RecordId append_event(const std::string& stream_id, const std::string& label,
                              int64_t occurred_at = 0);

    // Straight-line helpers, exposed for oracle tests.
    static std::string pattern_text(const RulePattern& goal);
    double corroboration(const UpdateProposal& proposal, const kb::Triple& old_triple) const;
    static double proposal_completeness(const UpdateProposal& proposal);

private:
    std::vector<GroundFact> live_facts() const;
    std::vector<std::string> stream_labels(const std::string& stream_id) const;
    void spread_from(const std::string& seed, std::map<std::string, double>& activation) const;
    std::optional<kb::Triple> conflicting_triple(const kb::Triple& proposed) const;
    double strategy_weight(const std::string& name) const;

    kb::KnowledgeBase& base_;
    coord::Coordinator& coord_;
    scenario::Embedder embed_;
    Clock clock_;
    coord::IdGen idgen_;
};

} // namespace colma::cog
