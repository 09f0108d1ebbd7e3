#pragma once
// Request dispatch for the line-protocol API. Requests are JSON objects
//   {"v":1, "op":..., "namespace":..., "token":..., "request_id":..., "payload":{...}}
// and responses
//   {"request_id":..., "status":"ok"|"error", "payload":...} |
//   {"request_id":..., "status":"error", "error":{"code":..., "message":...}}
// Ops map 1:1 onto engine operations; payload schemas live next to their
// serializers below so wire responses equal in-process results.

#include "colma/engine.hpp"
#include "colma/service/auth.hpp"

#include <mutex>
#include <string>
#include <vector>

namespace colma::service {

class ServiceCore {
public:
    ServiceCore(Engine& engine, std::vector<Principal> principals);

    // Full envelope handling; never throws.
    kb::Json dispatch(const kb::Json& request);
    kb::Json dispatch_line(const std::string& line);  // bad JSON -> error response

    static const std::vector<std::string>& op_names();

private:
    kb::Json handle(const std::string& op, const std::string& ns, const kb::Json& payload);

    Engine& engine_;
    std::vector<Principal> principals_;
    std::mutex tick_mu_;  // ticks never overlap
};

// Payload serializers, shared by the service and the wire-fidelity tests.
kb::Json record_payload(const std::optional<kb::MemoryRecord>& r);
kb::Json upsert_payload(const kb::UpsertOutcome& out);
kb::Json triples_payload(const std::vector<kb::Triple>& ts);
kb::Json knn_payload(const std::vector<kb::ScoredId>& hits);
kb::Json recall_payload(const cog::ReconstructionResult& r);
kb::Json associate_payload(const std::vector<cog::AssociationHit>& hits);
kb::Json reason_payload(const cog::ProofResult& proof);
kb::Json predict_payload(const std::optional<cog::Prediction>& p);
kb::Json weights_payload(const cog::StrategyWeights& w);
kb::Json update_payload(const cog::UpdateOutcome& out);
kb::Json tick_payload(const coord::TickReport& report);
kb::Json mutations_payload(const std::vector<storage::Mutation>& batch, uint64_t max_seqno);

cog::Cue cue_from_json(const kb::Json& j, const scenario::Embedder& embed);
cog::RulePattern pattern_from_array(const kb::Json& j);
cog::UpdateProposal proposal_from_json(const kb::Json& j);

} // namespace colma::service
