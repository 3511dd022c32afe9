#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "summactl/embedding.hpp"
#include "summactl/errors.hpp"
#include "summactl/text.hpp"

namespace summactl {

enum class AttributeKind { Extractiveness, Length, Topic, Speaker };

std::string_view to_string(AttributeKind kind);
AttributeKind attribute_kind_from(std::string_view name);  // throws ParseError

// Extractiveness and length are numerical attributes (window success rules);
// topic and speaker are linguistic (floor success rules).
bool is_numerical(AttributeKind kind);

// Score of one attribute on the 0-100 scale.
struct Measurement {
    AttributeKind kind;
    double value;
};

// Everything a measurement may need besides the summary itself.
// topics must be non-empty when measuring Topic; speaker_utterances when
// measuring Speaker.
struct MeasurementContext {
    TokenSeq source;
    std::vector<std::string> topics;
    std::vector<std::string> speaker_utterances;
    std::string speaker_name;  // used by prompt construction
};

// Percentage of summary tokens whose norm appears anywhere in the source
// (type membership; summary duplicates each counted).
Measurement extractiveness(const TokenSeq& summary, const TokenSeq& source);

// Summary word count as a percentage of the source word count, capped at 100.
Measurement length_ratio(const TokenSeq& summary, const TokenSeq& source);

// Mean scaled similarity between each topic and every summary word, averaged
// over topics. Topics are normalized the same way summary words are.
Measurement topic_score(const TokenSeq& summary, const std::vector<std::string>& topics,
                        EmbeddingProvider& provider);

// Greedy-matching embedding F1 between the summary and the concatenated
// utterances: precision = mean over summary tokens of the best cosine against
// the reference, recall symmetric, harmonic mean scaled to 0-100.
Measurement speaker_score(const TokenSeq& summary, const std::vector<std::string>& utterances,
                          EmbeddingProvider& provider);

// Dispatch on kind. `provider` may be null for the numerical kinds.
Measurement measure(AttributeKind kind, const TokenSeq& summary, const MeasurementContext& ctx,
                    EmbeddingProvider* provider);

}  // namespace summactl
