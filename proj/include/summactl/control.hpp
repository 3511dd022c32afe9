#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "summactl/chat.hpp"
#include "summactl/errors.hpp"
#include "summactl/metrics.hpp"

namespace summactl {

class PromptBundle;

// Refinement strategies, weakest to strongest:
//   Iter - regenerate with a terse failure notice
//   Sai  - add the step-by-step measurement recipe and the measured value
//   Gte  - Sai plus a directive to explain the previous miss before rewriting
enum class Strategy { Iter, Sai, Gte };

std::string_view to_string(Strategy strategy);
Strategy strategy_from(std::string_view name);  // throws ParseError

// Success rules. Numerical attributes must land within +-half_width of the
// target; linguistic attributes must reach a minimum similarity. Both bounds
// are inclusive.
struct Window {
    double target;
    double half_width = 5.0;
};

struct Floor {
    double threshold;
};

using SuccessRule = std::variant<Window, Floor>;

struct AttributeTarget {
    AttributeKind kind;
    SuccessRule rule;
    std::string label;  // dataset label this target came from, e.g. "short"

    // Factories enforce the kind/rule pairing: windows for numerical kinds,
    // floors for linguistic kinds. Throw KindMismatch otherwise.
    static AttributeTarget window(AttributeKind kind, double target, double half_width = 5.0,
                                  std::string label = {});
    static AttributeTarget floor(AttributeKind kind, double threshold, std::string label = {});

    bool is_window() const { return std::holds_alternative<Window>(rule); }
    // The number stated in prompts: window target or floor threshold.
    double goal_value() const;
};

// True when the measurement satisfies the target's rule.
bool check(const Measurement& measured, const AttributeTarget& target);  // throws KindMismatch

// Threshold derivation rule: the minimum of the reference scores.
Floor derive_floor(const std::vector<double>& reference_scores);  // throws EmptyInput

struct LoopConfig {
    int max_iterations = 20;
    Strategy strategy = Strategy::Gte;
    ChatOptions chat;
};

struct IterationRecord {
    int index = 0;  // 0 = initial draft
    ChatExchange prompt;
    std::string raw_reply;
    std::string summary;
    Measurement measured;
    bool satisfied = false;
};

enum class Outcome { Success, Failure, Aborted };

std::string_view to_string(Outcome outcome);
Outcome outcome_from(std::string_view name);  // throws ParseError

struct IterationTrace {
    std::string sample_id;
    AttributeTarget target;
    Strategy strategy = Strategy::Gte;
    int max_iterations = 20;
    std::vector<IterationRecord> records;
    Outcome outcome = Outcome::Failure;
    int at_iteration = -1;     // set on Success
    std::string abort_reason;  // set on Aborted

    bool aborted() const { return outcome == Outcome::Aborted; }
};

// The control loop: draft, measure, check, refine until the rule holds or the
// iteration cap is hit. Model or provider errors do not escape; the trace
// comes back with the completed records and an aborted marker so
// infrastructure failures never masquerade as controllability failures.
IterationTrace run_control(const std::string& doc, const MeasurementContext& ctx,
                           const AttributeTarget& target, const LoopConfig& config,
                           ChatModel& model, const PromptBundle& bundle,
                           EmbeddingProvider* provider, std::string sample_id = {});

}  // namespace summactl
