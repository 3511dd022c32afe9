#include "summactl/trace_json.hpp"

namespace summactl {

using nlohmann::json;

namespace {

// json::at with SchemaError instead of a bare json exception.
const json& field(const json& j, const char* name) {
    if (!j.contains(name)) throw SchemaError(std::string("missing field: ") + name);
    return j.at(name);
}

template <typename T>
T get_as(const json& j, const char* name) {
    try {
        return field(j, name).get<T>();
    } catch (const json::exception& ex) {
        throw SchemaError(std::string("bad field ") + name + ": " + ex.what());
    }
}

json measurement_to_json(const Measurement& m) {
    return {{"kind", std::string(to_string(m.kind))}, {"value", m.value}};
}

Measurement measurement_from_json(const json& j) {
    return {attribute_kind_from(get_as<std::string>(j, "kind")), get_as<double>(j, "value")};
}

json record_to_json(const IterationRecord& r) {
    return {{"index", r.index},
            {"prompt", exchange_to_json(r.prompt)},
            {"raw_reply", r.raw_reply},
            {"summary", r.summary},
            {"measured", measurement_to_json(r.measured)},
            {"satisfied", r.satisfied}};
}

IterationRecord record_from_json(const json& j) {
    IterationRecord r;
    r.index = get_as<int>(j, "index");
    r.prompt = exchange_from_json(field(j, "prompt"));
    r.raw_reply = get_as<std::string>(j, "raw_reply");
    r.summary = get_as<std::string>(j, "summary");
    r.measured = measurement_from_json(field(j, "measured"));
    r.satisfied = get_as<bool>(j, "satisfied");
    return r;
}

json kind_measurement_to_json(const KindMeasurement& km) {
    return {{"kind", std::string(to_string(km.kind))},
            {"measured", measurement_to_json(km.measured)},
            {"satisfied", km.satisfied}};
}

KindMeasurement kind_measurement_from_json(const json& j) {
    KindMeasurement km;
    km.kind = attribute_kind_from(get_as<std::string>(j, "kind"));
    km.measured = measurement_from_json(field(j, "measured"));
    km.satisfied = get_as<bool>(j, "satisfied");
    return km;
}

json step_to_json(const MixedStep& step) {
    json measurements = json::array();
    for (const auto& km : step.measurements) measurements.push_back(kind_measurement_to_json(km));
    return {{"prompt", exchange_to_json(step.prompt)},
            {"raw_reply", step.raw_reply},
            {"summary", step.summary},
            {"measurements", std::move(measurements)}};
}

MixedStep step_from_json(const json& j) {
    MixedStep step;
    step.prompt = exchange_from_json(field(j, "prompt"));
    step.raw_reply = get_as<std::string>(j, "raw_reply");
    step.summary = get_as<std::string>(j, "summary");
    for (const auto& km : field(j, "measurements")) {
        step.measurements.push_back(kind_measurement_from_json(km));
    }
    return step;
}

}  // namespace

json exchange_to_json(const ChatExchange& exchange) {
    json messages = json::array();
    for (const auto& msg : exchange.messages) {
        messages.push_back({{"role", std::string(to_string(msg.role))}, {"content", msg.content}});
    }
    return {{"messages", std::move(messages)},
            {"model_id", exchange.model_id},
            {"temperature", exchange.temperature},
            {"max_output_tokens", exchange.max_output_tokens}};
}

ChatExchange exchange_from_json(const json& j) {
    ChatExchange exchange;
    exchange.model_id = get_as<std::string>(j, "model_id");
    exchange.temperature = get_as<double>(j, "temperature");
    exchange.max_output_tokens = get_as<int>(j, "max_output_tokens");
    std::size_t index = 0;
    for (const auto& msg : field(j, "messages")) {
        Role role;
        try {
            role = role_from(get_as<std::string>(msg, "role"));
        } catch (const ParseError& ex) {
            throw SchemaError(ex.what());
        }
        if (role == Role::System && index != 0) {
            throw SchemaError("system message must come first and at most once");
        }
        exchange.messages.push_back({role, get_as<std::string>(msg, "content")});
        ++index;
    }
    return exchange;
}

json target_to_json(const AttributeTarget& target) {
    json rule;
    if (const auto* w = std::get_if<Window>(&target.rule)) {
        rule = {{"type", "window"}, {"target", w->target}, {"half_width", w->half_width}};
    } else {
        rule = {{"type", "floor"}, {"threshold", std::get<Floor>(target.rule).threshold}};
    }
    json j = {{"kind", std::string(to_string(target.kind))}, {"rule", std::move(rule)}};
    if (!target.label.empty()) j["label"] = target.label;
    return j;
}

AttributeTarget target_from_json(const json& j) {
    AttributeKind kind;
    try {
        kind = attribute_kind_from(get_as<std::string>(j, "kind"));
    } catch (const ParseError& ex) {
        throw SchemaError(ex.what());
    }
    const json& rule = field(j, "rule");
    std::string label = j.value("label", "");
    auto type = get_as<std::string>(rule, "type");
    try {
        if (type == "window") {
            return AttributeTarget::window(kind, get_as<double>(rule, "target"),
                                           get_as<double>(rule, "half_width"), std::move(label));
        }
        if (type == "floor") {
            return AttributeTarget::floor(kind, get_as<double>(rule, "threshold"),
                                          std::move(label));
        }
    } catch (const KindMismatch& ex) {
        throw SchemaError(ex.what());
    }
    throw SchemaError("unknown rule type: " + type);
}

json trace_to_json(const IterationTrace& trace) {
    json records = json::array();
    for (const auto& r : trace.records) records.push_back(record_to_json(r));
    json j = {{"sample_id", trace.sample_id},
              {"strategy", std::string(to_string(trace.strategy))},
              {"max_iterations", trace.max_iterations},
              {"target", target_to_json(trace.target)},
              {"records", std::move(records)},
              {"outcome", std::string(to_string(trace.outcome))}};
    if (trace.outcome == Outcome::Success) j["at_iteration"] = trace.at_iteration;
    if (trace.outcome == Outcome::Aborted) j["abort_reason"] = trace.abort_reason;
    return j;
}

IterationTrace trace_from_json(const json& j) {
    IterationTrace trace;
    trace.sample_id = get_as<std::string>(j, "sample_id");
    try {
        trace.strategy = strategy_from(get_as<std::string>(j, "strategy"));
        trace.outcome = outcome_from(get_as<std::string>(j, "outcome"));
    } catch (const ParseError& ex) {
        throw SchemaError(ex.what());
    }
    trace.max_iterations = get_as<int>(j, "max_iterations");
    trace.target = target_from_json(field(j, "target"));
    for (const auto& r : field(j, "records")) trace.records.push_back(record_from_json(r));
    if (trace.outcome == Outcome::Success) trace.at_iteration = get_as<int>(j, "at_iteration");
    if (trace.outcome == Outcome::Aborted) trace.abort_reason = get_as<std::string>(j, "abort_reason");
    validate_trace(trace);
    return trace;
}

json mixed_trace_to_json(const MixedTrace& trace) {
    json targets = json::array();
    for (const auto& t : trace.targets) targets.push_back(target_to_json(t));
    json passes = json::array();
    for (const auto& p : trace.passes) {
        passes.push_back({{"focus", std::string(to_string(p.focus))},
                          {"draft_misalignment", p.draft_misalignment},
                          {"step", step_to_json(p.step)}});
    }
    json finals = json::array();
    for (const auto& km : trace.final_measurements) finals.push_back(kind_measurement_to_json(km));
    json j = {{"sample_id", trace.sample_id},
              {"targets", std::move(targets)},
              {"draft", step_to_json(trace.draft)},
              {"passes", std::move(passes)},
              {"final_measurements", std::move(finals)}};
    if (trace.aborted) {
        j["aborted"] = true;
        j["abort_reason"] = trace.abort_reason;
    }
    return j;
}

MixedTrace mixed_trace_from_json(const json& j) {
    MixedTrace trace;
    trace.sample_id = get_as<std::string>(j, "sample_id");
    for (const auto& t : field(j, "targets")) trace.targets.push_back(target_from_json(t));
    trace.draft = step_from_json(field(j, "draft"));
    for (const auto& p : field(j, "passes")) {
        MixedPass pass;
        try {
            pass.focus = attribute_kind_from(get_as<std::string>(p, "focus"));
        } catch (const ParseError& ex) {
            throw SchemaError(ex.what());
        }
        pass.draft_misalignment = get_as<double>(p, "draft_misalignment");
        pass.step = step_from_json(field(p, "step"));
        trace.passes.push_back(std::move(pass));
    }
    for (const auto& km : field(j, "final_measurements")) {
        trace.final_measurements.push_back(kind_measurement_from_json(km));
    }
    if (j.value("aborted", false)) {
        trace.aborted = true;
        trace.abort_reason = get_as<std::string>(j, "abort_reason");
    }
    return trace;
}

std::string serialize_trace_line(const IterationTrace& trace, const std::string& fingerprint) {
    json line = {{"type", "control"}, {"fingerprint", fingerprint}, {"trace", trace_to_json(trace)}};
    return line.dump() + "\n";
}

std::string serialize_trace_line(const MixedTrace& trace, const std::string& fingerprint) {
    json line = {{"type", "mixed"}, {"fingerprint", fingerprint}, {"trace", mixed_trace_to_json(trace)}};
    return line.dump() + "\n";
}

void validate_trace(const IterationTrace& trace) {
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        if (trace.records[i].index != static_cast<int>(i)) {
            throw SchemaError("record indices are not consecutive from 0");
        }
    }
    int first_satisfied = -1;
    for (const auto& r : trace.records) {
        if (r.satisfied) {
            first_satisfied = r.index;
            break;
        }
    }
    switch (trace.outcome) {
        case Outcome::Success:
            if (trace.records.empty() || !trace.records.back().satisfied) {
                throw SchemaError("success trace must end with a satisfied record");
            }
            if (trace.at_iteration != first_satisfied) {
                throw SchemaError("at_iteration must be the first satisfied record");
            }
            break;
        case Outcome::Failure:
            if (first_satisfied != -1) {
                throw SchemaError("failure trace contains a satisfied record");
            }
            if (static_cast<int>(trace.records.size()) != trace.max_iterations + 1) {
                throw SchemaError("failure trace must have max_iterations + 1 records");
            }
            break;
        case Outcome::Aborted:
            break;
    }
}

}  // namespace summactl
