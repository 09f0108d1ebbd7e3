#pragma once
// User Scenario Layer: deterministic end-to-end scripts (S1 mushroom
// identification, S2 daily recall, S3 problem solving, S4 knowledge
// updating) driven against a seeded engine with a synthetic clock.
// Identical seeds produce byte-identical transcripts.

#include "colma/engine.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace colma::scenario {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TranscriptStep {
    std::string op;
    std::string in_digest;
    std::string out_digest;
};

struct ScenarioTranscript {
    std::string scenario;  // "S1".."S4"
    std::vector<TranscriptStep> steps;
    size_t assertions_passed = 0;
    uint64_t seed = 0;

    // JSON Lines rendering; the determinism contract is on these bytes.
    std::string to_jsonl() const;
};

// Runs one scripted scenario in its own namespace of a fresh engine rooted
// at work_dir. Throws ScenarioError when the namespace already holds data.
ScenarioTranscript run_scenario(const std::string& which, uint64_t seed,
                                const std::string& work_dir);

} // namespace colma::scenario
