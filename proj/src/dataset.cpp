#include "summactl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace summactl {

using nlohmann::json;

std::string_view to_string(ExtractivenessLabel label) {
    switch (label) {
        case ExtractivenessLabel::Normal: return "normal";
        case ExtractivenessLabel::High: return "high";
        case ExtractivenessLabel::Fully: return "fully";
    }
    return "?";
}

std::string_view to_string(LengthLabel label) {
    switch (label) {
        case LengthLabel::Short: return "short";
        case LengthLabel::Normal: return "normal";
        case LengthLabel::Long: return "long";
    }
    return "?";
}

ExtractivenessLabel extractiveness_label_from(std::string_view name) {
    if (name == "normal") return ExtractivenessLabel::Normal;
    if (name == "high") return ExtractivenessLabel::High;
    if (name == "fully") return ExtractivenessLabel::Fully;
    throw ParseError("unknown extractiveness label: " + std::string(name));
}

LengthLabel length_label_from(std::string_view name) {
    if (name == "short") return LengthLabel::Short;
    if (name == "normal") return LengthLabel::Normal;
    if (name == "long") return LengthLabel::Long;
    throw ParseError("unknown length label: " + std::string(name));
}

std::string Sample::prompt_source() const {
    if (!is_dialogue()) return source;
    std::string rendered;
    for (const auto& turn : turns) {
        if (!rendered.empty()) rendered.push_back('\n');
        rendered += turn.speaker + ": " + turn.utterance;
    }
    return rendered;
}

std::vector<std::string> Sample::utterances_of(const std::string& speaker_name) const {
    std::vector<std::string> out;
    for (const auto& turn : turns) {
        if (turn.speaker == speaker_name) out.push_back(turn.utterance);
    }
    return out;
}

double LabelMap::extractiveness_target(ExtractivenessLabel label) const {
    switch (label) {
        case ExtractivenessLabel::Normal: return ext_normal;
        case ExtractivenessLabel::High: return ext_high;
        case ExtractivenessLabel::Fully: return ext_fully;
    }
    return 0.0;
}

double LabelMap::length_target(LengthLabel label) const {
    switch (label) {
        case LengthLabel::Short: return len_short;
        case LengthLabel::Normal: return len_normal;
        case LengthLabel::Long: return len_long;
    }
    return 0.0;
}

void LabelMap::set(std::string_view key, double value) {
    if (value <= 0.0 || value > 100.0) {
        throw ParseError("label value out of range (0, 100]: " + std::string(key));
    }
    if (key == "ext_normal") ext_normal = value;
    else if (key == "ext_high") ext_high = value;
    else if (key == "ext_fully") ext_fully = value;
    else if (key == "len_short") len_short = value;
    else if (key == "len_normal") len_normal = value;
    else if (key == "len_long") len_long = value;
    else if (key == "topic_floor") topic_floor = value;
    else if (key == "speaker_floor") speaker_floor = value;
    else if (key == "half_width") window_half_width = value;
    else throw ParseError("unknown label override: " + std::string(key));
}

namespace {

std::string require_string(const json& record, const char* field) {
    if (!record.contains(field)) throw MissingField(field);
    if (!record.at(field).is_string()) {
        throw ParseError(std::string("field is not a string: ") + field);
    }
    return record.at(field).get<std::string>();
}

}  // namespace

Sample sample_from_json(const json& record) {
    if (!record.is_object()) throw ParseError("sample record is not an object");

    Sample sample;
    sample.id = require_string(record, "id");
    if (record.contains("reference")) {
        sample.reference_summary = require_string(record, "reference");
    }

    if (record.contains("turns")) {
        if (!record.at("turns").is_array()) throw ParseError("turns is not an array");
        for (const auto& turn : record.at("turns")) {
            sample.turns.push_back({require_string(turn, "speaker"),
                                    require_string(turn, "utterance")});
        }
    }
    if (record.contains("source")) {
        sample.source = require_string(record, "source");
    }
    if (sample.source.empty() && sample.turns.empty()) {
        throw MissingField("source");
    }

    if (record.contains("ext_label") && !record.at("ext_label").is_null()) {
        sample.extractiveness_label =
            extractiveness_label_from(require_string(record, "ext_label"));
    }
    if (record.contains("len_label") && !record.at("len_label").is_null()) {
        sample.length_label = length_label_from(require_string(record, "len_label"));
    }
    if (record.contains("topics")) {
        if (!record.at("topics").is_array()) throw ParseError("topics is not an array");
        for (const auto& t : record.at("topics")) {
            if (!t.is_string()) throw ParseError("topic is not a string");
            sample.topics.push_back(t.get<std::string>());
        }
    }
    if (record.contains("speaker") && !record.at("speaker").is_null()) {
        sample.speaker = require_string(record, "speaker");
        if (sample.turns.empty()) {
            throw ParseError("sample " + sample.id + " names a speaker but has no turns");
        }
        bool found = std::any_of(sample.turns.begin(), sample.turns.end(),
                                 [&](const DialogueTurn& t) { return t.speaker == *sample.speaker; });
        if (!found) {
            throw ParseError("sample " + sample.id + ": speaker \"" + *sample.speaker +
                             "\" not among turn speakers");
        }
    }
    return sample;
}

json sample_to_json(const Sample& sample) {
    json record;
    record["id"] = sample.id;
    if (!sample.source.empty()) record["source"] = sample.source;
    if (!sample.reference_summary.empty()) record["reference"] = sample.reference_summary;
    if (sample.extractiveness_label) {
        record["ext_label"] = std::string(to_string(*sample.extractiveness_label));
    }
    if (sample.length_label) record["len_label"] = std::string(to_string(*sample.length_label));
    if (!sample.topics.empty()) record["topics"] = sample.topics;
    if (sample.speaker) record["speaker"] = *sample.speaker;
    if (!sample.turns.empty()) {
        json turns = json::array();
        for (const auto& turn : sample.turns) {
            turns.push_back({{"speaker", turn.speaker}, {"utterance", turn.utterance}});
        }
        record["turns"] = std::move(turns);
    }
    return record;
}

std::vector<Sample> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus: " + path.string());

    std::vector<Sample> samples;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            samples.push_back(sample_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw ParseError("line " + std::to_string(line_number) + ": " + ex.what());
        } catch (const MissingField&) {
            throw;
        } catch (const ParseError& ex) {
            throw ParseError("line " + std::to_string(line_number) + ": " + ex.what());
        }
    }
    return samples;
}

std::vector<AttributeTarget> targets_for(const Sample& sample, const LabelMap& labels,
                                         const std::vector<AttributeKind>& requested) {
    std::vector<AttributeTarget> targets;
    for (AttributeKind kind : requested) {
        switch (kind) {
            case AttributeKind::Extractiveness:
                if (!sample.extractiveness_label) {
                    throw LabelMissing("sample " + sample.id + " has no extractiveness label");
                }
                targets.push_back(AttributeTarget::window(
                    kind, labels.extractiveness_target(*sample.extractiveness_label),
                    labels.window_half_width,
                    std::string(to_string(*sample.extractiveness_label))));
                break;
            case AttributeKind::Length:
                if (!sample.length_label) {
                    throw LabelMissing("sample " + sample.id + " has no length label");
                }
                targets.push_back(AttributeTarget::window(
                    kind, labels.length_target(*sample.length_label), labels.window_half_width,
                    std::string(to_string(*sample.length_label))));
                break;
            case AttributeKind::Topic:
                if (sample.topics.empty()) {
                    throw LabelMissing("sample " + sample.id + " has no topics");
                }
                targets.push_back(AttributeTarget::floor(kind, labels.topic_floor));
                break;
            case AttributeKind::Speaker:
                if (!sample.speaker) {
                    throw LabelMissing("sample " + sample.id + " has no speaker");
                }
                targets.push_back(AttributeTarget::floor(kind, labels.speaker_floor));
                break;
        }
    }
    return targets;
}

MeasurementContext context_for(const Sample& sample, const std::vector<AttributeKind>& requested) {
    MeasurementContext ctx;
    ctx.source = tokenize(sample.prompt_source());
    for (AttributeKind kind : requested) {
        if (kind == AttributeKind::Topic) ctx.topics = sample.topics;
        if (kind == AttributeKind::Speaker && sample.speaker) {
            ctx.speaker_name = *sample.speaker;
            ctx.speaker_utterances = sample.utterances_of(*sample.speaker);
        }
    }
    return ctx;
}

ThresholdOverrides derive_thresholds(const std::vector<Sample>& training,
                                     EmbeddingProvider& provider) {
    if (training.empty()) throw EmptyInput("no training samples");

    // Round down to one decimal, guarding against values like 74.8 sitting an
    // ulp below the grid.
    const auto floor_1dp = [](double v) { return std::floor(v * 10.0 + 1e-9) / 10.0; };

    ThresholdOverrides overrides;
    std::vector<double> topic_scores;
    std::vector<double> speaker_scores;
    for (const auto& sample : training) {
        if (sample.reference_summary.empty()) continue;
        TokenSeq reference = tokenize(sample.reference_summary);
        if (reference.empty()) continue;
        if (!sample.topics.empty()) {
            topic_scores.push_back(topic_score(reference, sample.topics, provider).value);
        }
        if (sample.speaker && !sample.turns.empty()) {
            auto utterances = sample.utterances_of(*sample.speaker);
            if (!utterances.empty()) {
                speaker_scores.push_back(speaker_score(reference, utterances, provider).value);
            }
        }
    }
    if (topic_scores.empty() && speaker_scores.empty()) {
        throw EmptyInput("no sample contributes a reference score");
    }
    if (!topic_scores.empty()) {
        overrides.topic_floor = floor_1dp(*std::min_element(topic_scores.begin(), topic_scores.end()));
    }
    if (!speaker_scores.empty()) {
        overrides.speaker_floor =
            floor_1dp(*std::min_element(speaker_scores.begin(), speaker_scores.end()));
    }
    return overrides;
}

}  // namespace summactl
