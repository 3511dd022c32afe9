#include "summactl/embedding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "summactl/http_util.hpp"

namespace summactl {

using nlohmann::json;

double EmbeddingVector::l2_norm() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("cosine: dimensions differ (" + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()) + ")");
    }
    if (a.values == b.values) return 1.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot, -1.0, 1.0);
}

double similarity_scaled(const EmbeddingVector& a, const EmbeddingVector& b) {
    return 100.0 * std::max(0.0, cosine(a, b));
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_many(const std::vector<std::string>& units) {
    std::vector<EmbeddingVector> out;
    out.reserve(units.size());
    for (const auto& u : units) out.push_back(embed(u));
    return out;
}

// ---------------------------------------------------------------------------
// Hash provider
// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::uint64_t state, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        state ^= p[i];
        state *= 1099511628211ULL;
    }
    return state;
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& s) {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

}  // namespace

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : name_("hash-" + std::to_string(dim)), dim_(dim), seed_(seed) {}

EmbeddingVector HashEmbeddingProvider::embed(const std::string& unit) {
    if (unit.empty()) throw EmptyUnit();

    std::uint64_t state = fnv1a(14695981039346656037ULL, &seed_, sizeof(seed_));
    state = fnv1a(state, unit.data(), unit.size());

    // Box-Muller over a splitmix64 stream: isotropic gaussian, then normalize.
    EmbeddingVector vec;
    vec.values.resize(dim_);
    for (std::size_t i = 0; i < dim_; i += 2) {
        double u1 = 1.0 - uniform01(state);  // (0, 1]
        double u2 = uniform01(state);
        double r = std::sqrt(-2.0 * std::log(u1));
        vec.values[i] = r * std::cos(2.0 * M_PI * u2);
        if (i + 1 < dim_) vec.values[i + 1] = r * std::sin(2.0 * M_PI * u2);
    }
    double norm = vec.l2_norm();
    if (norm < 1e-12) {
        vec.values.assign(dim_, 0.0);
        vec.values[0] = 1.0;
        return vec;
    }
    for (double& v : vec.values) v /= norm;
    return vec;
}

// ---------------------------------------------------------------------------
// Remote provider
// ---------------------------------------------------------------------------

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEmbeddingConfig config)
    : config_(std::move(config)), name_("remote:" + config_.model) {}

std::size_t RemoteEmbeddingProvider::dim() const {
    std::shared_lock lock(cache_mutex_);
    return dim_;
}

EmbeddingVector RemoteEmbeddingProvider::embed(const std::string& unit) {
    return embed_many({unit}).front();
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_many(const std::vector<std::string>& units) {
    for (const auto& u : units) {
        if (u.empty()) throw EmptyUnit();
    }

    std::vector<EmbeddingVector> out(units.size());
    std::vector<std::size_t> missing;
    {
        std::shared_lock lock(cache_mutex_);
        for (std::size_t i = 0; i < units.size(); ++i) {
            auto it = cache_.find(units[i]);
            if (it != cache_.end()) {
                out[i] = it->second;
            } else {
                missing.push_back(i);
            }
        }
    }
    if (missing.empty()) return out;

    // Deduplicate before hitting the network.
    std::vector<std::string> to_fetch;
    for (std::size_t idx : missing) {
        if (std::find(to_fetch.begin(), to_fetch.end(), units[idx]) == to_fetch.end()) {
            to_fetch.push_back(units[idx]);
        }
    }
    std::vector<EmbeddingVector> fetched = fetch(to_fetch);

    {
        std::unique_lock lock(cache_mutex_);
        for (std::size_t k = 0; k < to_fetch.size(); ++k) {
            cache_[to_fetch[k]] = fetched[k];
            if (dim_ == 0) dim_ = fetched[k].dim();
        }
        for (std::size_t idx : missing) {
            out[idx] = cache_.at(units[idx]);
        }
    }
    return out;
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::fetch(const std::vector<std::string>& units) {
    json body = {{"model", config_.model}, {"input", units}};
    const std::string payload = body.dump();

    HttpTarget target = split_url(config_.endpoint);
    std::string last_error;

    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            auto delay = std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 2));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(target.base);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.bearer_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.bearer_token);
        }
        auto res = client.Post(target.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429 || res->status == 408) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProviderUnavailable("embeddings endpoint returned HTTP " +
                                      std::to_string(res->status));
        }

        json parsed;
        try {
            parsed = json::parse(res->body);
            const auto& data = parsed.at("data");
            std::vector<EmbeddingVector> vectors(units.size());
            std::vector<bool> seen(units.size(), false);
            for (const auto& item : data) {
                auto index = item.at("index").get<std::size_t>();
                if (index >= units.size()) {
                    throw ProviderUnavailable("embeddings response index out of range");
                }
                EmbeddingVector vec;
                vec.values = item.at("embedding").get<std::vector<double>>();
                double norm = vec.l2_norm();
                if (norm < 1e-12) {
                    throw ProviderUnavailable("embeddings response contains a zero vector");
                }
                for (double& v : vec.values) v /= norm;
                vectors[index] = std::move(vec);
                seen[index] = true;
            }
            if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
                throw ProviderUnavailable("embeddings response is missing entries");
            }
            return vectors;
        } catch (const json::exception& ex) {
            throw ProviderUnavailable(std::string("malformed embeddings response: ") + ex.what());
        }
    }
    throw ProviderUnavailable("embeddings endpoint unreachable after " +
                              std::to_string(config_.max_attempts) + " attempts (" + last_error + ")");
}

}  // namespace summactl
