#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colma/knowledge/vector_index.hpp"
#include "colma/scenario/embedder.hpp"

#include <cmath>

using namespace colma::scenario;

TEST_CASE("equal texts embed to identical unit vectors") {
    auto a = test_embed("red cap mushroom");
    auto b = test_embed("red cap mushroom");
    CHECK(a == b);  // bitwise

    double norm = 0.0;
    for (float v : a) norm += static_cast<double>(v) * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK(a.size() == 64);
    CHECK(test_embed("text", 32).size() == 32);
    CHECK_THROWS(test_embed(""));
    CHECK_THROWS(test_embed("  .,!  "));
}

TEST_CASE("tokenization is case- and punctuation-insensitive") {
    CHECK(test_embed("Red Cap, Mushroom!") == test_embed("red cap mushroom"));
    CHECK(tokenize("Hello, World-42") == std::vector<std::string>{"hello", "world", "42"});
}

TEST_CASE("shared tokens pull embeddings together") {
    auto mushroom = test_embed("red cap mushroom");
    auto fungus = test_embed("red cap fungus");
    auto stocks = test_embed("stock market report");
    double close = colma::kb::cosine_similarity(mushroom, fungus);
    double far = colma::kb::cosine_similarity(mushroom, stocks);
    CHECK(close > far);
    CHECK(close > 0.3);  // two of three tokens shared
}
