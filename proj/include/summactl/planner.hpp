#pragma once

#include <string>
#include <vector>

#include "summactl/control.hpp"

namespace summactl {

class PromptBundle;

// Mixed-attribute request: 2-4 targets of pairwise distinct kinds over one
// measurement context.
struct MixedTarget {
    std::vector<AttributeTarget> targets;
    MeasurementContext ctx;
};

// How far a measurement is from satisfying its rule, normalized so window and
// floor kinds compare: windows in half-width units, floors as the relative
// shortfall. Satisfied floors clamp to zero.
double misalignment(const Measurement& measured, const AttributeTarget& target);

struct KindMeasurement {
    AttributeKind kind;
    Measurement measured;
    bool satisfied = false;
};

// One generation step of a mixed run with every requested kind re-measured on
// its summary.
struct MixedStep {
    ChatExchange prompt;
    std::string raw_reply;
    std::string summary;
    std::vector<KindMeasurement> measurements;
};

struct MixedPass {
    AttributeKind focus;
    double draft_misalignment = 0.0;
    MixedStep step;
};

struct MixedTrace {
    std::string sample_id;
    std::vector<AttributeTarget> targets;
    MixedStep draft;                         // the mixed-draft
    std::vector<MixedPass> passes;           // ordered by descending draft misalignment
    std::vector<KindMeasurement> final_measurements;  // from the last summary
    bool aborted = false;
    std::string abort_reason;
};

// Min-planning: one mixed draft, then exactly one Gte refinement per kind the
// draft left unsatisfied, worst first. No per-attribute iteration. Satisfied
// kinds are skipped; every pass restates all targets and re-measures every
// kind afterwards.
MixedTrace run_min_planning(const std::string& doc, const MixedTarget& mixed,
                            const LoopConfig& config, ChatModel& model,
                            const PromptBundle& bundle, EmbeddingProvider* provider,
                            std::string sample_id = {});

}  // namespace summactl
