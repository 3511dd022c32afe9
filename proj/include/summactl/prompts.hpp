#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "summactl/chat.hpp"
#include "summactl/control.hpp"
#include "summactl/errors.hpp"
#include "summactl/metrics.hpp"

namespace summactl {

// Number formatting used inside prompts: one decimal, e.g. "72.0".
std::string format_score(double value);

// Substitutes {placeholder} tokens. Throws UnresolvedPlaceholder when a
// placeholder has no value.
std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values);

// Per-attribute prompt texts loaded from a directory:
//   <dir>/system.txt
//   <dir>/<attribute>/initial.txt   task statement; knows {target} etc.
//   <dir>/<attribute>/iter.txt      terse regenerate notice, no numbers
//   <dir>/<attribute>/sai.txt       step-by-step measurement recipe
//   <dir>/<attribute>/seg.txt       explain-the-miss directive
// Templates are plain UTF-8 with {placeholder} tokens; editing them needs no
// rebuild. Allowed placeholders: {document}, {target}, {previous_summary},
// {measured_value}, {topic_list}, {speaker_name}.
class PromptBundle {
public:
    static PromptBundle load(const std::filesystem::path& dir);

    const std::string& system_persona() const { return system_; }
    const std::string& initial_template(AttributeKind kind) const;
    const std::string& iter_template(AttributeKind kind) const;
    const std::string& sai_template(AttributeKind kind) const;
    const std::string& seg_template(AttributeKind kind) const;

private:
    struct AttributeTemplates {
        std::string initial;
        std::string iter;
        std::string sai;
        std::string seg;
    };

    PromptBundle() = default;
    const AttributeTemplates& for_kind(AttributeKind kind) const;

    std::string system_;
    AttributeTemplates templates_[4];
};

// Initial instruction: [system persona; task + document + format directive].
ChatExchange build_initial(const std::string& doc, const AttributeTarget& target,
                           const MeasurementContext& ctx, const PromptBundle& bundle,
                           const ChatOptions& options);

// Refinement turn, a fresh two-message exchange whose user content restates
// the full state in a fixed order: document, original task, previous summary,
// then the strategy-specific guidance. Iter appends only a regenerate notice;
// Sai appends the measurement recipe with the measured value; Gte appends the
// recipe plus the self-explanation directive.
ChatExchange build_refinement(Strategy strategy, const std::string& doc,
                              const AttributeTarget& target, const MeasurementContext& ctx,
                              const std::string& previous_summary, const Measurement& measured,
                              const PromptBundle& bundle, const ChatOptions& options);

// Mixed-attribute variants. The initial prompt states every target; each
// refinement focuses one attribute while restating all targets, so adjusting
// one is less likely to wreck the others.
ChatExchange build_initial_mixed(const std::string& doc,
                                 std::span<const AttributeTarget> targets,
                                 const MeasurementContext& ctx, const PromptBundle& bundle,
                                 const ChatOptions& options);

ChatExchange build_refinement_mixed(const std::string& doc,
                                    std::span<const AttributeTarget> targets,
                                    const AttributeTarget& focus,
                                    const MeasurementContext& ctx,
                                    const std::string& previous_summary,
                                    const Measurement& measured_focus,
                                    const PromptBundle& bundle, const ChatOptions& options);

}  // namespace summactl
