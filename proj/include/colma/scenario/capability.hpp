#pragma once
// Executable capability matrix: one concrete probe per architectural
// dimension, run against throwaway engines so evaluation never touches
// caller state. Dimensions: Multi-modal, Similarity, Indexing, Sync,
// Entity Model, Time Series, Versioning, Distributed, Linking,
// Compression, Online Update, Reasoning.

#include "colma/engine.hpp"

#include <map>
#include <string>
#include <vector>

namespace colma::scenario {

enum class Support { supported, partial, unsupported };

std::string to_string(Support s);

struct CapabilityReport {
    std::map<std::string, Support> dimensions;  // exactly the 12
    std::vector<std::string> footnotes;         // documented deviations

    kb::Json to_json() const;
    bool all_supported() const;
};

extern const std::vector<std::string> kCapabilityDimensions;

// Probes run in scratch stores derived from `prototype` (its policy, ann,
// and graph_enabled settings); prototype state is never modified.
CapabilityReport eval_capabilities(const EngineConfig& prototype);

} // namespace colma::scenario
