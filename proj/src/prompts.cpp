#include "summactl/prompts.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace summactl {

namespace {

constexpr std::array<const char*, 6> kKnownPlaceholders = {
    "document", "target", "previous_summary", "measured_value", "topic_list", "speaker_name"};

const std::string kFormatDirective =
    "Return only the final summary between a line containing exactly " +
    std::string(kSummaryOpen) + " and a line containing exactly " + std::string(kSummaryClose) +
    ".";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read prompt template: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    // Trim a single trailing newline left by editors.
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

bool placeholder_char(char c) {
    return (c >= 'a' && c <= 'z') || c == '_';
}

// Placeholder names present in a template, for load-time validation.
void validate_placeholders(const std::string& tpl, const std::string& origin) {
    std::size_t i = 0;
    while ((i = tpl.find('{', i)) != std::string::npos) {
        std::size_t j = i + 1;
        while (j < tpl.size() && placeholder_char(tpl[j])) ++j;
        if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
            std::string name = tpl.substr(i + 1, j - i - 1);
            bool known = false;
            for (const char* k : kKnownPlaceholders) {
                if (name == k) { known = true; break; }
            }
            if (!known) {
                throw UnresolvedPlaceholder(origin + ": unknown placeholder {" + name + "}");
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
}

std::string join_sections(const std::vector<std::string>& sections) {
    std::string out;
    for (const auto& s : sections) {
        if (s.empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += s;
    }
    return out;
}

// Values available for substitution in the current loop state.
std::map<std::string, std::string> base_values(const std::string& doc,
                                               const MeasurementContext& ctx) {
    std::map<std::string, std::string> values;
    values["document"] = doc;
    if (!ctx.topics.empty()) {
        std::string joined;
        for (const auto& t : ctx.topics) {
            if (!joined.empty()) joined += ", ";
            joined += t;
        }
        values["topic_list"] = joined;
    }
    if (!ctx.speaker_name.empty()) values["speaker_name"] = ctx.speaker_name;
    return values;
}

std::string resolve_initial(const AttributeTarget& target, const MeasurementContext& ctx,
                            const std::string& doc, const PromptBundle& bundle) {
    auto values = base_values(doc, ctx);
    values["target"] = format_score(target.goal_value());
    return render_template(bundle.initial_template(target.kind), values);
}

ChatExchange make_exchange(const PromptBundle& bundle, std::string user_content,
                           const ChatOptions& options) {
    ChatExchange exchange;
    exchange.model_id = options.model_id;
    exchange.temperature = options.temperature;
    exchange.max_output_tokens = options.max_output_tokens;
    exchange.messages.push_back({Role::System, bundle.system_persona()});
    exchange.messages.push_back({Role::User, std::move(user_content)});
    return exchange;
}

}  // namespace

std::string format_score(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.1f", value);
    return buffer;
}

std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] != '{') {
            out.push_back(tpl[i++]);
            continue;
        }
        std::size_t j = i + 1;
        while (j < tpl.size() && placeholder_char(tpl[j])) ++j;
        if (j < tpl.size() && tpl[j] == '}' && j > i + 1) {
            std::string name = tpl.substr(i + 1, j - i - 1);
            auto it = values.find(name);
            if (it == values.end()) {
                throw UnresolvedPlaceholder("no value for placeholder {" + name + "}");
            }
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(tpl[i++]);
        }
    }
    return out;
}

PromptBundle PromptBundle::load(const std::filesystem::path& dir) {
    PromptBundle bundle;
    bundle.system_ = read_file(dir / "system.txt");

    constexpr AttributeKind kinds[] = {AttributeKind::Extractiveness, AttributeKind::Length,
                                       AttributeKind::Topic, AttributeKind::Speaker};
    for (AttributeKind kind : kinds) {
        auto subdir = dir / std::string(to_string(kind));
        auto& t = bundle.templates_[static_cast<int>(kind)];
        t.initial = read_file(subdir / "initial.txt");
        t.iter = read_file(subdir / "iter.txt");
        t.sai = read_file(subdir / "sai.txt");
        t.seg = read_file(subdir / "seg.txt");
        for (const auto& [tpl, file] :
             {std::pair{&t.initial, "initial.txt"}, {&t.iter, "iter.txt"},
              {&t.sai, "sai.txt"}, {&t.seg, "seg.txt"}}) {
            validate_placeholders(*tpl, (subdir / file).string());
        }
    }
    return bundle;
}

const PromptBundle::AttributeTemplates& PromptBundle::for_kind(AttributeKind kind) const {
    return templates_[static_cast<int>(kind)];
}

const std::string& PromptBundle::initial_template(AttributeKind kind) const {
    return for_kind(kind).initial;
}
const std::string& PromptBundle::iter_template(AttributeKind kind) const {
    return for_kind(kind).iter;
}
const std::string& PromptBundle::sai_template(AttributeKind kind) const {
    return for_kind(kind).sai;
}
const std::string& PromptBundle::seg_template(AttributeKind kind) const {
    return for_kind(kind).seg;
}

ChatExchange build_initial(const std::string& doc, const AttributeTarget& target,
                           const MeasurementContext& ctx, const PromptBundle& bundle,
                           const ChatOptions& options) {
    if (doc.empty()) throw EmptyInput("document is empty");
    std::string content = join_sections({
        resolve_initial(target, ctx, doc, bundle),
        "Document:\n" + doc,
        kFormatDirective,
    });
    return make_exchange(bundle, std::move(content), options);
}

ChatExchange build_refinement(Strategy strategy, const std::string& doc,
                              const AttributeTarget& target, const MeasurementContext& ctx,
                              const std::string& previous_summary, const Measurement& measured,
                              const PromptBundle& bundle, const ChatOptions& options) {
    if (previous_summary.empty()) throw EmptyInput("previous summary is empty");
    if (measured.kind != target.kind) {
        throw KindMismatch("refinement measured kind does not match the target kind");
    }

    auto values = base_values(doc, ctx);
    values["target"] = format_score(target.goal_value());
    values["previous_summary"] = previous_summary;
    values["measured_value"] = format_score(measured.value);

    std::vector<std::string> sections = {
        "Document:\n" + doc,
        "Original task:\n" + resolve_initial(target, ctx, doc, bundle),
        "Previous summary:\n" + previous_summary,
    };
    switch (strategy) {
        case Strategy::Iter:
            sections.push_back(render_template(bundle.iter_template(target.kind), values));
            break;
        case Strategy::Sai:
            sections.push_back(render_template(bundle.sai_template(target.kind), values));
            break;
        case Strategy::Gte:
            sections.push_back(render_template(bundle.sai_template(target.kind), values));
            sections.push_back(render_template(bundle.seg_template(target.kind), values));
            break;
    }
    sections.push_back(kFormatDirective);
    return make_exchange(bundle, join_sections(sections), options);
}

namespace {

std::string resolve_all_initials(std::span<const AttributeTarget> targets,
                                 const MeasurementContext& ctx, const std::string& doc,
                                 const PromptBundle& bundle) {
    std::string joined;
    for (const auto& target : targets) {
        if (!joined.empty()) joined.push_back('\n');
        joined += resolve_initial(target, ctx, doc, bundle);
    }
    return joined;
}

}  // namespace

ChatExchange build_initial_mixed(const std::string& doc,
                                 std::span<const AttributeTarget> targets,
                                 const MeasurementContext& ctx, const PromptBundle& bundle,
                                 const ChatOptions& options) {
    if (doc.empty()) throw EmptyInput("document is empty");
    if (targets.empty()) throw EmptyInput("no targets");
    std::string content = join_sections({
        resolve_all_initials(targets, ctx, doc, bundle),
        "Document:\n" + doc,
        kFormatDirective,
    });
    return make_exchange(bundle, std::move(content), options);
}

ChatExchange build_refinement_mixed(const std::string& doc,
                                    std::span<const AttributeTarget> targets,
                                    const AttributeTarget& focus,
                                    const MeasurementContext& ctx,
                                    const std::string& previous_summary,
                                    const Measurement& measured_focus,
                                    const PromptBundle& bundle, const ChatOptions& options) {
    if (previous_summary.empty()) throw EmptyInput("previous summary is empty");
    if (measured_focus.kind != focus.kind) {
        throw KindMismatch("mixed refinement measured kind does not match the focus kind");
    }

    auto values = base_values(doc, ctx);
    values["target"] = format_score(focus.goal_value());
    values["previous_summary"] = previous_summary;
    values["measured_value"] = format_score(measured_focus.value);

    std::vector<std::string> sections = {
        "Document:\n" + doc,
        "Original task:\n" + resolve_all_initials(targets, ctx, doc, bundle),
        "Previous summary:\n" + previous_summary,
        render_template(bundle.sai_template(focus.kind), values),
        render_template(bundle.seg_template(focus.kind), values),
        kFormatDirective,
    };
    return make_exchange(bundle, join_sections(sections), options);
}

}  // namespace summactl
