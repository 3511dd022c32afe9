#include "summactl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "summactl/trace_json.hpp"

namespace summactl {

using nlohmann::json;

namespace {

constexpr const char* kRetryGlyph = "↺";  // rendered for "no successful iteration count"

std::string group_key(const IterationTrace& trace) {
    if (!trace.target.label.empty()) return trace.target.label;
    return std::string(to_string(trace.target.kind));
}

ControlStats stats_over(const std::vector<const IterationTrace*>& traces) {
    ControlStats stats;
    double sum_all = 0.0;
    double sum_refined = 0.0;
    int n_refined = 0;
    for (const auto* trace : traces) {
        if (trace->outcome == Outcome::Success) {
            ++stats.n_success;
            sum_all += trace->at_iteration;
            if (trace->at_iteration >= 1) {
                ++n_refined;
                sum_refined += trace->at_iteration;
            }
        } else if (trace->outcome == Outcome::Failure) {
            ++stats.n_failure;
        }
    }
    int population = stats.n_success + stats.n_failure;
    if (population == 0) throw EmptyPopulation();
    stats.failure_rate = 100.0 * stats.n_failure / population;
    if (stats.n_success > 0) stats.avg_iterations = sum_all / stats.n_success;
    if (n_refined > 0) stats.avg_iterations_refinements_only = sum_refined / n_refined;
    return stats;
}

}  // namespace

StatsReport compute_stats(const RunSet& runs) {
    std::vector<const IterationTrace*> usable;
    std::map<std::string, std::vector<const IterationTrace*>> groups;
    for (const auto& trace : runs.control_traces) {
        if (trace.aborted()) continue;
        usable.push_back(&trace);
        groups[group_key(trace)].push_back(&trace);
    }
    if (usable.empty()) throw EmptyPopulation();

    StatsReport report;
    report.overall = stats_over(usable);
    for (const auto& [label, traces] : groups) {
        report.by_label.emplace(label, stats_over(traces));
    }
    return report;
}

double rmse(const std::vector<double>& requested, const std::vector<double>& measured) {
    if (requested.size() != measured.size()) {
        throw LengthMismatch("rmse inputs differ in length (" + std::to_string(requested.size()) +
                             " vs " + std::to_string(measured.size()) + ")");
    }
    if (requested.empty()) throw EmptyInput("rmse of empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < requested.size(); ++i) {
        double d = measured[i] - requested[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(requested.size()));
}

// ---------------------------------------------------------------------------
// Trace store
// ---------------------------------------------------------------------------

std::size_t for_each_trace(const std::filesystem::path& path,
                           const std::function<void(TraceLine&&)>& visit) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace store: " + path.string());

    std::string line;
    std::size_t line_number = 0;
    std::size_t visited = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        TraceLine parsed;
        try {
            json j = json::parse(line);
            parsed.fingerprint = j.value("fingerprint", "");
            auto type = j.at("type").get<std::string>();
            if (type == "control") {
                parsed.control = trace_from_json(j.at("trace"));
            } else if (type == "mixed") {
                parsed.mixed = mixed_trace_from_json(j.at("trace"));
            } else {
                throw SchemaError("unknown trace type: " + type);
            }
        } catch (const json::exception& ex) {
            throw SchemaError("line " + std::to_string(line_number) + ": " + ex.what());
        } catch (const SchemaError& ex) {
            throw SchemaError("line " + std::to_string(line_number) + ": " + ex.what());
        }
        visit(std::move(parsed));
        ++visited;
    }
    return visited;
}

RunSet load_runset(const std::filesystem::path& path) {
    RunSet runs;
    bool first = true;
    std::size_t line_number = 0;
    for_each_trace(path, [&](TraceLine&& line) {
        ++line_number;
        if (first) {
            runs.config_fingerprint = line.fingerprint;
            first = false;
        } else if (line.fingerprint != runs.config_fingerprint) {
            throw SchemaError("trace " + std::to_string(line_number) +
                              " has a different config fingerprint");
        }
        if (line.control) runs.control_traces.push_back(std::move(*line.control));
        if (line.mixed) runs.mixed_traces.push_back(std::move(*line.mixed));
    });
    return runs;
}

void append_trace(std::ostream& out, const IterationTrace& trace, const std::string& fingerprint) {
    out << serialize_trace_line(trace, fingerprint);
    out.flush();
    if (!out) throw IoError("failed to append trace");
}

void append_trace(std::ostream& out, const MixedTrace& trace, const std::string& fingerprint) {
    out << serialize_trace_line(trace, fingerprint);
    out.flush();
    if (!out) throw IoError("failed to append trace");
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

namespace {

std::string fixed2(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    return buffer;
}

json control_stats_json(const ControlStats& stats) {
    json j = {{"cell", format_cell(stats)},
              {"failure_rate", stats.failure_rate},
              {"n_success", stats.n_success},
              {"n_failure", stats.n_failure}};
    if (stats.avg_iterations) j["avg_iterations"] = *stats.avg_iterations;
    if (stats.avg_iterations_refinements_only) {
        j["avg_iterations_refinements_only"] = *stats.avg_iterations_refinements_only;
    }
    return j;
}

void append_row(std::string& table, const std::string& left, const std::string& right) {
    table += left;
    table += std::string(left.size() < 18 ? 18 - left.size() : 1, ' ');
    table += right;
    table += "\n";
}

}  // namespace

std::string format_cell(const ControlStats& stats) {
    std::string iter = stats.avg_iterations ? fixed2(*stats.avg_iterations) : kRetryGlyph;
    return fixed2(stats.failure_rate) + "% / " + iter;
}

json stats_to_json(const StatsReport& stats) {
    json groups = json::object();
    for (const auto& [label, s] : stats.by_label) groups[label] = control_stats_json(s);
    return {{"overall", control_stats_json(stats.overall)}, {"groups", std::move(groups)}};
}

ReportDocument report(const RunSet& runs) {
    ReportDocument doc;
    doc.json_twin = json::object();
    doc.json_twin["fingerprint"] = runs.config_fingerprint;
    doc.trajectories_csv = "sample_id,kind,label,iteration,measured,satisfied\n";

    bool has_control = std::any_of(runs.control_traces.begin(), runs.control_traces.end(),
                                   [](const IterationTrace& t) { return !t.aborted(); });
    bool has_mixed = std::any_of(runs.mixed_traces.begin(), runs.mixed_traces.end(),
                                 [](const MixedTrace& t) { return !t.aborted; });
    if (!has_control && !has_mixed) throw EmptyPopulation();

    const auto csv_row = [&](const std::string& sample_id, AttributeKind kind,
                             const std::string& label, int iteration, double measured,
                             bool satisfied) {
        char buffer[64];
        std::snprintf(buffer, sizeof(buffer), "%.4f", measured);
        doc.trajectories_csv += sample_id + "," + std::string(to_string(kind)) + "," + label +
                                "," + std::to_string(iteration) + "," + buffer + "," +
                                (satisfied ? "true" : "false") + "\n";
    };

    if (has_control) {
        StatsReport stats = compute_stats(runs);
        json stats_json = stats_to_json(stats);
        stats_json["fingerprint"] = runs.config_fingerprint;
        doc.json_twin = std::move(stats_json);

        append_row(doc.table, "group", "failure% / avg-iter");
        for (const auto& [label, s] : stats.by_label) append_row(doc.table, label, format_cell(s));
        append_row(doc.table, "overall", format_cell(stats.overall));

        for (const auto& trace : runs.control_traces) {
            if (trace.aborted()) continue;
            for (const auto& record : trace.records) {
                csv_row(trace.sample_id, trace.target.kind, trace.target.label, record.index,
                        record.measured.value, record.satisfied);
            }
        }
    }

    if (has_mixed) {
        // Numerical attributes: rMSE between requested window targets and the
        // final measured values. Linguistic attributes have one-sided floors,
        // so they report the satisfaction rate instead.
        std::map<AttributeKind, std::pair<std::vector<double>, std::vector<double>>> numeric;
        std::map<AttributeKind, std::pair<int, int>> floors;  // satisfied, total
        for (const auto& trace : runs.mixed_traces) {
            if (trace.aborted) continue;
            for (const auto& target : trace.targets) {
                auto it = std::find_if(trace.final_measurements.begin(),
                                       trace.final_measurements.end(),
                                       [&](const KindMeasurement& km) { return km.kind == target.kind; });
                if (it == trace.final_measurements.end()) continue;
                if (target.is_window()) {
                    numeric[target.kind].first.push_back(target.goal_value());
                    numeric[target.kind].second.push_back(it->measured.value);
                } else {
                    auto& [ok, total] = floors[target.kind];
                    if (it->satisfied) ++ok;
                    ++total;
                }
            }
            int step = 0;
            for (const auto& km : trace.draft.measurements) {
                csv_row(trace.sample_id, km.kind, "mixed", step, km.measured.value, km.satisfied);
            }
            for (const auto& pass : trace.passes) {
                ++step;
                for (const auto& km : pass.step.measurements) {
                    csv_row(trace.sample_id, km.kind, "mixed", step, km.measured.value, km.satisfied);
                }
            }
        }

        json mixed_json = json::object();
        if (!doc.table.empty()) doc.table += "\n";
        append_row(doc.table, "mixed attribute", "rMSE | floor-satisfied%");
        json rmse_json = json::object();
        for (const auto& [kind, pair] : numeric) {
            double value = rmse(pair.first, pair.second);
            append_row(doc.table, std::string(to_string(kind)), fixed2(value));
            rmse_json[std::string(to_string(kind))] = value;
        }
        json floor_json = json::object();
        for (const auto& [kind, counts] : floors) {
            double rate = counts.second == 0 ? 0.0 : 100.0 * counts.first / counts.second;
            append_row(doc.table, std::string(to_string(kind)), fixed2(rate) + "%");
            floor_json[std::string(to_string(kind))] = rate;
        }
        mixed_json["rmse"] = std::move(rmse_json);
        mixed_json["floor_satisfied"] = std::move(floor_json);
        doc.json_twin["mixed"] = std::move(mixed_json);
        if (!doc.json_twin.contains("fingerprint")) {
            doc.json_twin["fingerprint"] = runs.config_fingerprint;
        }
    }

    return doc;
}

}  // namespace summactl
