#include "colma/scenario/embedder.hpp"

#include "colma/common/hash.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace colma::scenario {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::vector<float> test_embed(const std::string& text, size_t dim) {
    if (text.empty()) throw std::invalid_argument("cannot embed empty text");
    auto tokens = tokenize(text);
    if (tokens.empty()) throw std::invalid_argument("no tokens to embed");

    std::vector<double> acc(dim, 0.0);
    for (const auto& tok : tokens) {
        SplitMix stream(stable_hash64(tok));
        for (size_t i = 0; i < dim; ++i) acc[i] += stream.next_unit() * 2.0 - 1.0;
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(dim);
    if (norm == 0.0) {
        // Degenerate cancellation: fall back to a unit basis vector keyed
        // on the first token so the result stays a unit vector.
        out[stable_hash64(tokens.front()) % dim] = 1.0f;
        return out;
    }
    for (size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

} // namespace colma::scenario
