#pragma once

#include <string>

#include <json.hpp>

#include "summactl/control.hpp"
#include "summactl/planner.hpp"

namespace summactl {

// JSON codecs for persisted traces. nlohmann keeps object keys sorted, so a
// given trace always serializes to the same bytes.

nlohmann::json exchange_to_json(const ChatExchange& exchange);
ChatExchange exchange_from_json(const nlohmann::json& j);  // throws SchemaError

nlohmann::json target_to_json(const AttributeTarget& target);
AttributeTarget target_from_json(const nlohmann::json& j);  // throws SchemaError

nlohmann::json trace_to_json(const IterationTrace& trace);
IterationTrace trace_from_json(const nlohmann::json& j);  // throws SchemaError

nlohmann::json mixed_trace_to_json(const MixedTrace& trace);
MixedTrace mixed_trace_from_json(const nlohmann::json& j);  // throws SchemaError

// One store line, newline-terminated: {"type","fingerprint","trace"}.
std::string serialize_trace_line(const IterationTrace& trace, const std::string& fingerprint);
std::string serialize_trace_line(const MixedTrace& trace, const std::string& fingerprint);

// Checks the structural invariants a well-formed trace must satisfy
// (consecutive record indices, outcome consistent with the records).
// Throws SchemaError on violation.
void validate_trace(const IterationTrace& trace);

}  // namespace summactl
