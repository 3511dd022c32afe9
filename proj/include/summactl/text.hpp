#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace summactl {

// One word of a text. `surface` is the whitespace-delimited slice as it
// appeared; `norm` is the lowercased form with boundary punctuation stripped.
// Internal punctuation (hyphens, apostrophes) is kept, so "state-of-the-art"
// stays one word.
struct Token {
    std::string surface;
    std::string norm;

    bool operator==(const Token&) const = default;
};

struct TokenSeq {
    std::vector<Token> tokens;
    std::string source_text;

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
};

// Splits on Unicode whitespace, strips leading/trailing punctuation from each
// piece, lowercases the norm, and drops pieces that normalize to empty.
// Pure and deterministic; empty input yields an empty sequence.
TokenSeq tokenize(std::string_view text);

std::size_t word_count(const TokenSeq& seq);

// Normalized forms in token order; convenience for metrics and tests.
std::vector<std::string> norms(const TokenSeq& seq);

}  // namespace summactl
