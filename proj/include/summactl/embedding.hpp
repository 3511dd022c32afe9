#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "summactl/errors.hpp"

namespace summactl {

// Unit-length vector; providers must emit vectors with L2 norm 1 within 1e-6.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    double l2_norm() const;
};

// Dot product of unit vectors, clamped to [-1, 1]. Equal vectors compare to
// exactly 1 so identical strings always score a full match.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// 100 * max(0, cosine): the 0-100 scale used by every threshold in the engine.
double similarity_scaled(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual const std::string& name() const = 0;
    virtual std::size_t dim() const = 0;

    // Unit vector for one text unit; deterministic for a fixed provider
    // configuration. Throws EmptyUnit on empty input.
    virtual EmbeddingVector embed(const std::string& unit) = 0;

    // Batched variant; the default loops over embed().
    virtual std::vector<EmbeddingVector> embed_many(const std::vector<std::string>& units);
};

// Offline provider: the unit's bytes seed a pseudo-random unit vector.
// Pure lock-free computation, usable from any number of threads.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dim = 256, std::uint64_t seed = 0);

    const std::string& name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    EmbeddingVector embed(const std::string& unit) override;

private:
    std::string name_;
    std::size_t dim_;
    std::uint64_t seed_;
};

struct RemoteEmbeddingConfig {
    std::string endpoint;      // full URL of the embeddings route
    std::string model;
    std::string bearer_token;  // supply from the environment, never from flags
    int max_attempts = 3;
    int timeout_seconds = 60;
    int backoff_base_ms = 250;
};

// Speaks the standard embeddings wire format:
//   POST {"model": ..., "input": [...]}
//   -> {"data": [{"index": i, "embedding": [...]}, ...]}
// Vectors are re-normalized to unit length on receipt and cached per unit
// string. Safe to share across concurrent runs.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(RemoteEmbeddingConfig config);

    const std::string& name() const override { return name_; }
    std::size_t dim() const override;
    EmbeddingVector embed(const std::string& unit) override;
    std::vector<EmbeddingVector> embed_many(const std::vector<std::string>& units) override;

private:
    std::vector<EmbeddingVector> fetch(const std::vector<std::string>& units);

    RemoteEmbeddingConfig config_;
    std::string name_;
    mutable std::shared_mutex cache_mutex_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
    std::size_t dim_ = 0;  // learned from the first response
};

}  // namespace summactl
