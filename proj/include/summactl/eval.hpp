#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "summactl/control.hpp"
#include "summactl/planner.hpp"

namespace summactl {

// A persisted collection of traces from one run configuration.
struct RunSet {
    std::vector<IterationTrace> control_traces;
    std::vector<MixedTrace> mixed_traces;
    std::string config_fingerprint;
};

// Aggregates over the non-aborted control traces. avg_iterations counts
// draft-only successes as 0; the refinements-only variant drops them. Both
// are empty when no success qualifies.
struct ControlStats {
    double failure_rate = 0.0;  // percent
    std::optional<double> avg_iterations;
    std::optional<double> avg_iterations_refinements_only;
    int n_success = 0;
    int n_failure = 0;
};

struct StatsReport {
    ControlStats overall;
    std::map<std::string, ControlStats> by_label;  // label, or kind name when unlabeled
};

// Throws EmptyPopulation when no non-aborted control trace exists.
StatsReport compute_stats(const RunSet& runs);

// sqrt(mean((measured - requested)^2)). Throws LengthMismatch / EmptyInput.
double rmse(const std::vector<double>& requested, const std::vector<double>& measured);

// --- trace store: append-only JSON lines, one trace per line ---

struct TraceLine {
    std::string fingerprint;
    std::optional<IterationTrace> control;
    std::optional<MixedTrace> mixed;
};

// Streams the store line by line without buffering the whole file; each
// parsed trace is handed to the visitor and released. Returns the number of
// traces visited. Throws SchemaError naming the offending line.
std::size_t for_each_trace(const std::filesystem::path& path,
                           const std::function<void(TraceLine&&)>& visit);

RunSet load_runset(const std::filesystem::path& path);

void append_trace(std::ostream& out, const IterationTrace& trace, const std::string& fingerprint);
void append_trace(std::ostream& out, const MixedTrace& trace, const std::string& fingerprint);

// --- reporting ---

// "0.00% / 2.87", with the iteration side rendered as the retry glyph when no
// success exists to average over.
std::string format_cell(const ControlStats& stats);

nlohmann::json stats_to_json(const StatsReport& stats);

struct ReportDocument {
    std::string table;             // aligned text table
    nlohmann::json json_twin;      // same cells, machine readable
    std::string trajectories_csv;  // per-iteration measured values
};

// Throws EmptyPopulation when the run set has no usable traces at all.
ReportDocument report(const RunSet& runs);

}  // namespace summactl
