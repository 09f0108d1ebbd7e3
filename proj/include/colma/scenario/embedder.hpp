#pragma once
// Deterministic test embedder standing in for modality encoders.
//
// text -> lowercase alphanumeric tokens; each token's stable_hash64 seeds a
// splitmix64 stream yielding `dim` components in [-1, 1); token vectors are
// summed and L2-normalized. Equal texts give bitwise-identical vectors.

#include <functional>
#include <string>
#include <vector>

namespace colma::scenario {

std::vector<float> test_embed(const std::string& text, size_t dim = 64);

using Embedder = std::function<std::vector<float>(const std::string&)>;

inline Embedder make_test_embedder(size_t dim) {
    return [dim](const std::string& text) { return test_embed(text, dim); };
}

std::vector<std::string> tokenize(const std::string& text);

} // namespace colma::scenario
