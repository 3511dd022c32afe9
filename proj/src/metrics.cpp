#include "summactl/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace summactl {

std::string_view to_string(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::Extractiveness: return "extractiveness";
        case AttributeKind::Length: return "length";
        case AttributeKind::Topic: return "topic";
        case AttributeKind::Speaker: return "speaker";
    }
    return "?";
}

AttributeKind attribute_kind_from(std::string_view name) {
    if (name == "extractiveness") return AttributeKind::Extractiveness;
    if (name == "length") return AttributeKind::Length;
    if (name == "topic") return AttributeKind::Topic;
    if (name == "speaker") return AttributeKind::Speaker;
    throw ParseError("unknown attribute kind: " + std::string(name));
}

bool is_numerical(AttributeKind kind) {
    return kind == AttributeKind::Extractiveness || kind == AttributeKind::Length;
}

Measurement extractiveness(const TokenSeq& summary, const TokenSeq& source) {
    if (summary.empty()) throw EmptySummary();
    std::unordered_set<std::string_view> source_norms;
    for (const auto& t : source.tokens) source_norms.insert(t.norm);
    std::size_t reused = 0;
    for (const auto& t : summary.tokens) {
        if (source_norms.contains(t.norm)) ++reused;
    }
    return {AttributeKind::Extractiveness,
            100.0 * static_cast<double>(reused) / static_cast<double>(summary.size())};
}

Measurement length_ratio(const TokenSeq& summary, const TokenSeq& source) {
    if (source.empty()) throw EmptySource();
    double ratio = 100.0 * static_cast<double>(summary.size()) / static_cast<double>(source.size());
    return {AttributeKind::Length, std::min(ratio, 100.0)};
}

namespace {

// Embeds every distinct string once and returns per-input vectors.
std::vector<EmbeddingVector> embed_all(const std::vector<std::string>& inputs,
                                       EmbeddingProvider& provider) {
    std::vector<std::string> distinct;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& s : inputs) {
        if (index.emplace(s, distinct.size()).second) distinct.push_back(s);
    }
    auto vectors = provider.embed_many(distinct);
    std::vector<EmbeddingVector> out;
    out.reserve(inputs.size());
    for (const auto& s : inputs) out.push_back(vectors[index.at(s)]);
    return out;
}

// Topics arrive as raw annotation strings; normalize them like summary words
// so "Jobs" and "jobs" embed identically.
std::string normalize_unit(const std::string& raw) {
    auto seq = tokenize(raw);
    std::string joined;
    for (const auto& t : seq.tokens) {
        if (!joined.empty()) joined.push_back(' ');
        joined += t.norm;
    }
    return joined;
}

}  // namespace

Measurement topic_score(const TokenSeq& summary, const std::vector<std::string>& topics,
                        EmbeddingProvider& provider) {
    if (summary.empty()) throw EmptySummary();
    if (topics.empty()) throw EmptyTopics();

    std::vector<std::string> topic_units;
    for (const auto& t : topics) {
        std::string unit = normalize_unit(t);
        if (unit.empty()) throw EmptyTopics("topic normalizes to empty: \"" + t + "\"");
        topic_units.push_back(std::move(unit));
    }
    auto topic_vecs = embed_all(topic_units, provider);
    auto word_vecs = embed_all(norms(summary), provider);

    double total = 0.0;
    for (const auto& topic_vec : topic_vecs) {
        double sum = 0.0;
        for (const auto& word_vec : word_vecs) {
            sum += similarity_scaled(topic_vec, word_vec);
        }
        total += sum / static_cast<double>(word_vecs.size());
    }
    return {AttributeKind::Topic, total / static_cast<double>(topic_vecs.size())};
}

Measurement speaker_score(const TokenSeq& summary, const std::vector<std::string>& utterances,
                          EmbeddingProvider& provider) {
    if (summary.empty()) throw EmptySummary();
    if (utterances.empty()) throw EmptyUtterances();

    std::string concatenated;
    for (const auto& u : utterances) {
        if (!concatenated.empty()) concatenated.push_back('\n');
        concatenated += u;
    }
    TokenSeq reference = tokenize(concatenated);
    if (reference.empty()) throw EmptyUtterances("utterances contain no tokens");

    auto summary_vecs = embed_all(norms(summary), provider);
    auto reference_vecs = embed_all(norms(reference), provider);

    double precision = 0.0;
    for (const auto& s : summary_vecs) {
        double best = -1.0;
        for (const auto& r : reference_vecs) best = std::max(best, cosine(s, r));
        precision += best;
    }
    precision /= static_cast<double>(summary_vecs.size());

    double recall = 0.0;
    for (const auto& r : reference_vecs) {
        double best = -1.0;
        for (const auto& s : summary_vecs) best = std::max(best, cosine(r, s));
        recall += best;
    }
    recall /= static_cast<double>(reference_vecs.size());

    double denom = precision + recall;
    double f1 = denom <= 0.0 ? 0.0 : 2.0 * precision * recall / denom;
    return {AttributeKind::Speaker, 100.0 * std::max(0.0, f1)};
}

Measurement measure(AttributeKind kind, const TokenSeq& summary, const MeasurementContext& ctx,
                    EmbeddingProvider* provider) {
    switch (kind) {
        case AttributeKind::Extractiveness:
            return extractiveness(summary, ctx.source);
        case AttributeKind::Length:
            return length_ratio(summary, ctx.source);
        case AttributeKind::Topic:
            if (!provider) throw ProviderUnavailable("topic measurement needs an embedding provider");
            return topic_score(summary, ctx.topics, *provider);
        case AttributeKind::Speaker:
            if (!provider) throw ProviderUnavailable("speaker measurement needs an embedding provider");
            return speaker_score(summary, ctx.speaker_utterances, *provider);
    }
    throw Error("unreachable attribute kind");
}

}  // namespace summactl
