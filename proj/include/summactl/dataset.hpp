#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "summactl/control.hpp"
#include "summactl/embedding.hpp"
#include "summactl/metrics.hpp"

#include <json.hpp>

namespace summactl {

enum class ExtractivenessLabel { Normal, High, Fully };
enum class LengthLabel { Short, Normal, Long };

std::string_view to_string(ExtractivenessLabel label);
std::string_view to_string(LengthLabel label);
ExtractivenessLabel extractiveness_label_from(std::string_view name);  // throws ParseError
LengthLabel length_label_from(std::string_view name);                  // throws ParseError

struct DialogueTurn {
    std::string speaker;
    std::string utterance;
};

struct Sample {
    std::string id;
    std::string source;
    std::string reference_summary;
    std::optional<ExtractivenessLabel> extractiveness_label;
    std::optional<LengthLabel> length_label;
    std::vector<std::string> topics;
    std::optional<std::string> speaker;
    std::vector<DialogueTurn> turns;  // present only for dialogue corpora

    bool is_dialogue() const { return !turns.empty(); }

    // Text handed to prompts: dialogue turns render as "SPEAKER: utterance"
    // lines in order; document samples use the raw source.
    std::string prompt_source() const;

    // The named speaker's utterances, in document order.
    std::vector<std::string> utterances_of(const std::string& speaker_name) const;
};

// Numerical targets and similarity floors behind each dataset label. Every
// value can be overridden from configuration.
struct LabelMap {
    double ext_normal = 85.0;
    double ext_high = 90.0;
    double ext_fully = 100.0;
    double len_short = 7.5;
    double len_normal = 20.0;
    double len_long = 32.5;
    double topic_floor = 74.0;
    double speaker_floor = 75.0;
    double window_half_width = 5.0;

    double extractiveness_target(ExtractivenessLabel label) const;
    double length_target(LengthLabel label) const;
    // Named override, e.g. set("len_normal", 15.0). Throws ParseError on an
    // unknown key.
    void set(std::string_view key, double value);
};

// JSON-lines corpus, one sample per line:
//   {"id","source","reference","ext_label","len_label","topics":[...]}
// with dialogue records additionally carrying
//   {"speaker","turns":[{"speaker","utterance"},...]}
std::vector<Sample> load_corpus(const std::filesystem::path& path);

Sample sample_from_json(const nlohmann::json& record);  // throws MissingField/ParseError
nlohmann::json sample_to_json(const Sample& sample);

// One target per requested kind, or LabelMissing when the sample lacks the
// label/topics/speaker that kind needs.
std::vector<AttributeTarget> targets_for(const Sample& sample, const LabelMap& labels,
                                         const std::vector<AttributeKind>& requested);

// Measurement context for the requested kinds (tokenized source, topics,
// target speaker's utterances).
MeasurementContext context_for(const Sample& sample, const std::vector<AttributeKind>& requested);

struct ThresholdOverrides {
    std::optional<double> topic_floor;
    std::optional<double> speaker_floor;
};

// Recomputes the linguistic floors under a given provider: the minimum score
// of the reference summaries, rounded down to one decimal. Samples lacking
// topics (or speaker turns) do not contribute to that floor.
ThresholdOverrides derive_thresholds(const std::vector<Sample>& training,
                                     EmbeddingProvider& provider);  // throws EmptyInput

}  // namespace summactl
