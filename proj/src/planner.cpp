#include "summactl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "summactl/prompts.hpp"

namespace summactl {

double misalignment(const Measurement& measured, const AttributeTarget& target) {
    if (measured.kind != target.kind) {
        throw KindMismatch("misalignment of " + std::string(to_string(measured.kind)) +
                           " against a " + std::string(to_string(target.kind)) + " target");
    }
    if (const auto* w = std::get_if<Window>(&target.rule)) {
        return std::fabs(measured.value - w->target) / w->half_width;
    }
    const auto& f = std::get<Floor>(target.rule);
    return std::max(0.0, f.threshold - measured.value) / f.threshold;
}

namespace {

void validate_mixed(const MixedTarget& mixed) {
    if (mixed.targets.size() < 2 || mixed.targets.size() > 4) {
        throw EmptyInput("mixed control needs 2-4 targets, got " +
                         std::to_string(mixed.targets.size()));
    }
    std::set<AttributeKind> kinds;
    for (const auto& t : mixed.targets) {
        if (!kinds.insert(t.kind).second) {
            throw KindMismatch("duplicate target kind: " + std::string(to_string(t.kind)));
        }
    }
}

std::vector<KindMeasurement> measure_all(const std::string& summary, const MixedTarget& mixed,
                                         EmbeddingProvider* provider) {
    TokenSeq tokens = tokenize(summary);
    std::vector<KindMeasurement> out;
    out.reserve(mixed.targets.size());
    for (const auto& target : mixed.targets) {
        Measurement m = measure(target.kind, tokens, mixed.ctx, provider);
        out.push_back({target.kind, m, check(m, target)});
    }
    return out;
}

const KindMeasurement& find_kind(const std::vector<KindMeasurement>& measurements,
                                 AttributeKind kind) {
    for (const auto& km : measurements) {
        if (km.kind == kind) return km;
    }
    throw KindMismatch("kind not measured: " + std::string(to_string(kind)));
}

}  // namespace

MixedTrace run_min_planning(const std::string& doc, const MixedTarget& mixed,
                            const LoopConfig& config, ChatModel& model,
                            const PromptBundle& bundle, EmbeddingProvider* provider,
                            std::string sample_id) {
    if (doc.empty()) throw EmptyInput("document is empty");
    validate_mixed(mixed);

    MixedTrace trace;
    trace.sample_id = std::move(sample_id);
    trace.targets = mixed.targets;

    try {
        // Mixed-draft: one prompt stating all targets, then measure every kind.
        trace.draft.prompt = build_initial_mixed(doc, mixed.targets, mixed.ctx, bundle, config.chat);
        trace.draft.raw_reply = model.complete(trace.draft.prompt);
        trace.draft.summary = extract_summary(trace.draft.raw_reply);
        trace.draft.measurements = measure_all(trace.draft.summary, mixed, provider);

        // Order the unsatisfied kinds worst-first by draft misalignment.
        // Ties: numerical kinds before linguistic, then by kind name.
        struct Planned {
            const AttributeTarget* target;
            double misalign;
        };
        std::vector<Planned> plan;
        for (const auto& target : mixed.targets) {
            const auto& km = find_kind(trace.draft.measurements, target.kind);
            if (km.satisfied) continue;
            plan.push_back({&target, misalignment(km.measured, target)});
        }
        std::sort(plan.begin(), plan.end(), [](const Planned& a, const Planned& b) {
            if (a.misalign != b.misalign) return a.misalign > b.misalign;
            bool a_num = is_numerical(a.target->kind);
            bool b_num = is_numerical(b.target->kind);
            if (a_num != b_num) return a_num;
            return to_string(a.target->kind) < to_string(b.target->kind);
        });

        trace.passes.reserve(plan.size());
        const MixedStep* previous = &trace.draft;
        for (const auto& planned : plan) {
            const AttributeTarget& focus = *planned.target;
            MixedPass pass;
            pass.focus = focus.kind;
            pass.draft_misalignment = planned.misalign;

            const auto& measured_focus = find_kind(previous->measurements, focus.kind).measured;
            pass.step.prompt = build_refinement_mixed(doc, mixed.targets, focus, mixed.ctx,
                                                      previous->summary, measured_focus, bundle,
                                                      config.chat);
            pass.step.raw_reply = model.complete(pass.step.prompt);
            pass.step.summary = extract_summary(pass.step.raw_reply);
            pass.step.measurements = measure_all(pass.step.summary, mixed, provider);

            trace.passes.push_back(std::move(pass));
            previous = &trace.passes.back().step;
        }
        trace.final_measurements = previous->measurements;
        return trace;
    } catch (const Error& ex) {
        trace.aborted = true;
        trace.abort_reason = ex.what();
        return trace;
    }
}

}  // namespace summactl
