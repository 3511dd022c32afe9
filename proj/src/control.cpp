#include "summactl/control.hpp"

#include <algorithm>
#include <cmath>

#include "summactl/prompts.hpp"

namespace summactl {

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::Iter: return "iter";
        case Strategy::Sai: return "sai";
        case Strategy::Gte: return "gte";
    }
    return "?";
}

Strategy strategy_from(std::string_view name) {
    if (name == "iter") return Strategy::Iter;
    if (name == "sai") return Strategy::Sai;
    if (name == "gte") return Strategy::Gte;
    throw ParseError("unknown strategy: " + std::string(name));
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Success: return "success";
        case Outcome::Failure: return "failure";
        case Outcome::Aborted: return "aborted";
    }
    return "?";
}

Outcome outcome_from(std::string_view name) {
    if (name == "success") return Outcome::Success;
    if (name == "failure") return Outcome::Failure;
    if (name == "aborted") return Outcome::Aborted;
    throw ParseError("unknown outcome: " + std::string(name));
}

AttributeTarget AttributeTarget::window(AttributeKind kind, double target, double half_width,
                                        std::string label) {
    if (!is_numerical(kind)) {
        throw KindMismatch("window rules apply to numerical attributes, not " +
                           std::string(to_string(kind)));
    }
    if (half_width <= 0.0) throw KindMismatch("window half-width must be positive");
    return {kind, Window{target, half_width}, std::move(label)};
}

AttributeTarget AttributeTarget::floor(AttributeKind kind, double threshold, std::string label) {
    if (is_numerical(kind)) {
        throw KindMismatch("floor rules apply to linguistic attributes, not " +
                           std::string(to_string(kind)));
    }
    if (threshold <= 0.0 || threshold > 100.0) {
        throw KindMismatch("floor threshold must lie in (0, 100]");
    }
    return {kind, Floor{threshold}, std::move(label)};
}

double AttributeTarget::goal_value() const {
    if (const auto* w = std::get_if<Window>(&rule)) return w->target;
    return std::get<Floor>(rule).threshold;
}

bool check(const Measurement& measured, const AttributeTarget& target) {
    if (measured.kind != target.kind) {
        throw KindMismatch("measured " + std::string(to_string(measured.kind)) +
                           " against a " + std::string(to_string(target.kind)) + " target");
    }
    if (const auto* w = std::get_if<Window>(&target.rule)) {
        return std::fabs(measured.value - w->target) <= w->half_width;
    }
    return measured.value >= std::get<Floor>(target.rule).threshold;
}

Floor derive_floor(const std::vector<double>& reference_scores) {
    if (reference_scores.empty()) throw EmptyInput("no reference scores");
    return Floor{*std::min_element(reference_scores.begin(), reference_scores.end())};
}

namespace {

void validate_context(const AttributeTarget& target, const MeasurementContext& ctx) {
    switch (target.kind) {
        case AttributeKind::Extractiveness:
        case AttributeKind::Length:
            if (ctx.source.empty()) throw EmptySource();
            break;
        case AttributeKind::Topic:
            if (ctx.topics.empty()) throw EmptyTopics();
            break;
        case AttributeKind::Speaker:
            if (ctx.speaker_utterances.empty()) throw EmptyUtterances();
            break;
    }
}

}  // namespace

IterationTrace run_control(const std::string& doc, const MeasurementContext& ctx,
                           const AttributeTarget& target, const LoopConfig& config,
                           ChatModel& model, const PromptBundle& bundle,
                           EmbeddingProvider* provider, std::string sample_id) {
    if (doc.empty()) throw EmptyInput("document is empty");
    if (config.max_iterations < 1) throw ParseError("max_iterations must be at least 1");
    validate_context(target, ctx);

    IterationTrace trace;
    trace.sample_id = std::move(sample_id);
    trace.target = target;
    trace.strategy = config.strategy;
    trace.max_iterations = config.max_iterations;

    try {
        ChatExchange exchange = build_initial(doc, target, ctx, bundle, config.chat);
        for (int index = 0;; ++index) {
            IterationRecord record;
            record.index = index;
            record.prompt = exchange;
            record.raw_reply = model.complete(exchange);
            record.summary = extract_summary(record.raw_reply);
            record.measured = measure(target.kind, tokenize(record.summary), ctx, provider);
            record.satisfied = check(record.measured, target);
            trace.records.push_back(std::move(record));

            if (trace.records.back().satisfied) {
                trace.outcome = Outcome::Success;
                trace.at_iteration = index;
                return trace;
            }
            if (index >= config.max_iterations) {
                trace.outcome = Outcome::Failure;
                return trace;
            }
            exchange = build_refinement(config.strategy, doc, target, ctx,
                                        trace.records.back().summary,
                                        trace.records.back().measured, bundle, config.chat);
        }
    } catch (const Error& ex) {
        trace.outcome = Outcome::Aborted;
        trace.abort_reason = ex.what();
        return trace;
    }
}

}  // namespace summactl
