// Shared test helpers: independent metric oracles, deterministic text
// generators, temp-dir and process plumbing. The oracles are deliberately
// naive double-loop implementations kept apart from the library code paths
// they check.
#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "summactl/embedding.hpp"
#include "summactl/text.hpp"

namespace testsupport {

// --- naive oracles -----------------------------------------------------

inline double naive_cosine(const summactl::EmbeddingVector& a, const summactl::EmbeddingVector& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot;
}

inline double naive_scaled(const summactl::EmbeddingVector& a, const summactl::EmbeddingVector& b) {
    return 100.0 * std::max(0.0, std::min(1.0, naive_cosine(a, b)));
}

inline double naive_extractiveness(const std::vector<std::string>& summary_norms,
                                   const std::vector<std::string>& source_norms) {
    std::size_t reused = 0;
    for (const auto& s : summary_norms) {
        for (const auto& d : source_norms) {
            if (s == d) {
                ++reused;
                break;
            }
        }
    }
    return 100.0 * static_cast<double>(reused) / static_cast<double>(summary_norms.size());
}

inline double naive_length_ratio(std::size_t summary_words, std::size_t source_words) {
    double ratio = 100.0 * static_cast<double>(summary_words) / static_cast<double>(source_words);
    return ratio > 100.0 ? 100.0 : ratio;
}

inline double naive_topic(const std::vector<std::string>& summary_norms,
                          const std::vector<std::string>& topic_units,
                          summactl::EmbeddingProvider& provider) {
    double total = 0.0;
    for (const auto& topic : topic_units) {
        auto topic_vec = provider.embed(topic);
        double sum = 0.0;
        for (const auto& word : summary_norms) {
            sum += naive_scaled(topic_vec, provider.embed(word));
        }
        total += sum / static_cast<double>(summary_norms.size());
    }
    return total / static_cast<double>(topic_units.size());
}

// Full similarity matrix, then row/column maxima: the textbook greedy
// matching route.
inline double naive_speaker(const std::vector<std::string>& summary_norms,
                            const std::vector<std::string>& reference_norms,
                            summactl::EmbeddingProvider& provider) {
    std::vector<summactl::EmbeddingVector> s_vecs;
    std::vector<summactl::EmbeddingVector> r_vecs;
    for (const auto& n : summary_norms) s_vecs.push_back(provider.embed(n));
    for (const auto& n : reference_norms) r_vecs.push_back(provider.embed(n));

    std::vector<std::vector<double>> matrix(s_vecs.size(), std::vector<double>(r_vecs.size()));
    for (std::size_t i = 0; i < s_vecs.size(); ++i) {
        for (std::size_t j = 0; j < r_vecs.size(); ++j) {
            matrix[i][j] = std::min(1.0, std::max(-1.0, naive_cosine(s_vecs[i], r_vecs[j])));
        }
    }
    double precision = 0.0;
    for (std::size_t i = 0; i < s_vecs.size(); ++i) {
        precision += *std::max_element(matrix[i].begin(), matrix[i].end());
    }
    precision /= static_cast<double>(s_vecs.size());
    double recall = 0.0;
    for (std::size_t j = 0; j < r_vecs.size(); ++j) {
        double best = -1.0;
        for (std::size_t i = 0; i < s_vecs.size(); ++i) best = std::max(best, matrix[i][j]);
        recall += best;
    }
    recall /= static_cast<double>(r_vecs.size());
    double denom = precision + recall;
    double f1 = denom <= 0.0 ? 0.0 : 2.0 * precision * recall / denom;
    return 100.0 * std::max(0.0, f1);
}

inline double naive_rmse(const std::vector<double>& requested, const std::vector<double>& measured) {
    double acc = 0.0;
    for (std::size_t i = 0; i < requested.size(); ++i) {
        acc += (measured[i] - requested[i]) * (measured[i] - requested[i]);
    }
    return std::sqrt(acc / static_cast<double>(requested.size()));
}

// --- deterministic random text -----------------------------------------

// Texts built from a small shared vocabulary so summary/source overlap is
// common; some punctuation mixed in to exercise normalization.
class TextGenerator {
public:
    explicit TextGenerator(unsigned seed) : rng_(seed) {
        static const char* const kStems[] = {"river",  "market", "council", "budget", "storm",
                                             "harbor", "signal", "garden",  "treaty", "engine",
                                             "betray", "quorum", "lantern", "meadow", "parcel",
                                             "violet", "summit", "ballot",  "copper", "whisper"};
        for (const char* stem : kStems) vocabulary_.emplace_back(stem);
    }

    std::string word() {
        std::uniform_int_distribution<std::size_t> pick(0, vocabulary_.size() - 1);
        return vocabulary_[pick(rng_)];
    }

    std::string text(std::size_t min_words, std::size_t max_words) {
        std::uniform_int_distribution<std::size_t> count(min_words, max_words);
        std::uniform_int_distribution<int> punct(0, 9);
        std::size_t n = count(rng_);
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            if (!out.empty()) out.push_back(' ');
            out += word();
            if (punct(rng_) == 0) out.push_back(',');
        }
        if (!out.empty() && punct(rng_) < 5) out.push_back('.');
        return out;
    }

private:
    std::mt19937 rng_;
    std::vector<std::string> vocabulary_;
};

// --- filesystem / process helpers ---------------------------------------

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("summactl_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter_++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct CommandResult {
    int exit_code;
    std::string output;  // stdout only
};

inline CommandResult run_cli(const std::string& args) {
    TempDir dir("cli_out");
    auto out_path = dir.file("stdout.txt");
    std::string command = std::string(SUMMACTL_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2>/dev/null";
    int status = std::system(command.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = read_file(out_path);
    return result;
}

}  // namespace testsupport
