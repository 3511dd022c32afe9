#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "summactl/eval.hpp"
#include "summactl/trace_json.hpp"
#include "support.hpp"

using namespace summactl;
using namespace testsupport;
using nlohmann::json;

namespace {

ChatExchange tiny_exchange() {
    ChatExchange exchange;
    exchange.model_id = "scripted";
    exchange.messages = {{Role::System, "persona"}, {Role::User, "prompt"}};
    return exchange;
}

IterationRecord make_record(int index, double value, bool satisfied) {
    IterationRecord r;
    r.index = index;
    r.prompt = tiny_exchange();
    r.raw_reply = "reply " + std::to_string(index);
    r.summary = "summary " + std::to_string(index);
    r.measured = {AttributeKind::Extractiveness, value};
    r.satisfied = satisfied;
    return r;
}

// Success trace with records 0..at_iteration, only the last satisfied.
IterationTrace success_trace(const std::string& id, int at_iteration,
                             const std::string& label = "normal") {
    IterationTrace trace;
    trace.sample_id = id;
    trace.target = AttributeTarget::window(AttributeKind::Extractiveness, 85.0, 5.0, label);
    trace.strategy = Strategy::Gte;
    trace.max_iterations = 20;
    for (int i = 0; i < at_iteration; ++i) trace.records.push_back(make_record(i, 60.0, false));
    trace.records.push_back(make_record(at_iteration, 85.0, true));
    trace.outcome = Outcome::Success;
    trace.at_iteration = at_iteration;
    return trace;
}

IterationTrace failure_trace(const std::string& id, int max_iterations = 20,
                             const std::string& label = "normal") {
    IterationTrace trace;
    trace.sample_id = id;
    trace.target = AttributeTarget::window(AttributeKind::Extractiveness, 85.0, 5.0, label);
    trace.strategy = Strategy::Gte;
    trace.max_iterations = max_iterations;
    for (int i = 0; i <= max_iterations; ++i) trace.records.push_back(make_record(i, 40.0, false));
    trace.outcome = Outcome::Failure;
    return trace;
}

IterationTrace aborted_trace(const std::string& id) {
    IterationTrace trace;
    trace.sample_id = id;
    trace.target = AttributeTarget::window(AttributeKind::Extractiveness, 85.0);
    trace.strategy = Strategy::Gte;
    trace.max_iterations = 20;
    trace.records.push_back(make_record(0, 40.0, false));
    trace.outcome = Outcome::Aborted;
    trace.abort_reason = "endpoint went away";
    return trace;
}

// The ten-trace fixture: 2 failures plus successes at [0,0,1,2,3,0,4,2].
RunSet ten_trace_fixture() {
    RunSet runs;
    runs.config_fingerprint = "fixture";
    const int iterations[] = {0, 0, 1, 2, 3, 0, 4, 2};
    int id = 0;
    for (int at : iterations) {
        runs.control_traces.push_back(success_trace("s" + std::to_string(id++), at));
    }
    runs.control_traces.push_back(failure_trace("f1"));
    runs.control_traces.push_back(failure_trace("f2"));
    return runs;
}

}  // namespace

TEST_CASE("compute_stats: the ten-trace fixture") {
    auto stats = compute_stats(ten_trace_fixture());
    CHECK(stats.overall.failure_rate == 20.0);
    REQUIRE(stats.overall.avg_iterations.has_value());
    CHECK(*stats.overall.avg_iterations == 1.5);
    REQUIRE(stats.overall.avg_iterations_refinements_only.has_value());
    CHECK(*stats.overall.avg_iterations_refinements_only == doctest::Approx(12.0 / 5.0));
    CHECK(stats.overall.n_success == 8);
    CHECK(stats.overall.n_failure == 2);
}

TEST_CASE("compute_stats: brute-force recount agrees") {
    auto runs = ten_trace_fixture();
    auto stats = compute_stats(runs);

    // independent traversal of the raw traces
    int failures = 0;
    int successes = 0;
    double iteration_sum = 0.0;
    for (const auto& trace : runs.control_traces) {
        if (trace.outcome == Outcome::Failure) ++failures;
        if (trace.outcome == Outcome::Success) {
            ++successes;
            int first_satisfied = -1;
            for (const auto& r : trace.records) {
                if (r.satisfied) {
                    first_satisfied = r.index;
                    break;
                }
            }
            iteration_sum += first_satisfied;
        }
    }
    CHECK(stats.overall.n_failure == failures);
    CHECK(stats.overall.n_success == successes);
    CHECK(*stats.overall.avg_iterations == iteration_sum / successes);
    CHECK(stats.overall.failure_rate == 100.0 * failures / (failures + successes));
}

TEST_CASE("compute_stats: grouping by label") {
    RunSet runs;
    runs.control_traces.push_back(success_trace("a", 2, "short"));
    runs.control_traces.push_back(success_trace("b", 4, "short"));
    runs.control_traces.push_back(failure_trace("c", 20, "long"));
    auto stats = compute_stats(runs);
    REQUIRE(stats.by_label.size() == 2);
    CHECK(*stats.by_label.at("short").avg_iterations == 3.0);
    CHECK(stats.by_label.at("short").failure_rate == 0.0);
    CHECK(stats.by_label.at("long").failure_rate == 100.0);
    CHECK(!stats.by_label.at("long").avg_iterations.has_value());
}

TEST_CASE("compute_stats: aborted traces never count") {
    auto runs = ten_trace_fixture();
    runs.control_traces.push_back(aborted_trace("x"));
    auto stats = compute_stats(runs);
    CHECK(stats.overall.n_success + stats.overall.n_failure == 10);

    RunSet only_aborted;
    only_aborted.control_traces.push_back(aborted_trace("y"));
    CHECK_THROWS_AS(compute_stats(only_aborted), EmptyPopulation);
    CHECK_THROWS_AS(compute_stats(RunSet{}), EmptyPopulation);
}

TEST_CASE("format_cell: failure and iteration cell rendering") {
    ControlStats stats;
    stats.failure_rate = 0.0;
    stats.avg_iterations = 2.87;
    CHECK(format_cell(stats) == "0.00% / 2.87");

    ControlStats all_fail;
    all_fail.failure_rate = 100.0;
    CHECK(format_cell(all_fail) == "100.00% / ↺");

    ControlStats draft_only;
    draft_only.failure_rate = 0.0;
    draft_only.avg_iterations = 0.0;
    CHECK(format_cell(draft_only) == "0.00% / 0.00");
}

TEST_CASE("rmse: arithmetic and error paths") {
    CHECK(rmse({85.0, 90.0}, {85.0, 90.0}) == 0.0);
    CHECK(rmse({85.0, 90.0}, {80.0, 95.0}) == 5.0);
    CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), LengthMismatch);
    CHECK_THROWS_AS(rmse({}, {}), EmptyInput);
}

TEST_CASE("rmse: random vectors match the naive oracle") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    std::vector<double> requested;
    std::vector<double> measured;
    for (int i = 0; i < 100; ++i) {
        requested.push_back(dist(rng));
        measured.push_back(dist(rng));
    }
    CHECK(rmse(requested, measured) ==
          doctest::Approx(naive_rmse(requested, measured)).epsilon(1e-12));
}

TEST_CASE("persist and load round-trip structurally") {
    TempDir dir("store");
    auto path = dir.file("traces.jsonl");
    auto runs = ten_trace_fixture();
    {
        std::ofstream out(path);
        for (const auto& trace : runs.control_traces) {
            append_trace(out, trace, runs.config_fingerprint);
        }
    }
    auto loaded = load_runset(path);
    CHECK(loaded.config_fingerprint == runs.config_fingerprint);
    REQUIRE(loaded.control_traces.size() == runs.control_traces.size());
    for (std::size_t i = 0; i < loaded.control_traces.size(); ++i) {
        CHECK(trace_to_json(loaded.control_traces[i]) == trace_to_json(runs.control_traces[i]));
    }
}

TEST_CASE("load: truncated line is named") {
    TempDir dir("store_bad");
    auto path = dir.file("traces.jsonl");
    auto good = serialize_trace_line(success_trace("a", 1), "fp");
    std::string truncated = good.substr(0, good.size() / 2);
    write_file(path, good + good + truncated);
    try {
        load_runset(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& ex) {
        CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("load: invariant violations are schema errors") {
    TempDir dir("store_bad2");
    auto path = dir.file("traces.jsonl");

    // success trace whose last record is not satisfied
    auto trace = success_trace("a", 1);
    trace.records.back().satisfied = false;
    json line = {{"type", "control"}, {"fingerprint", "fp"}, {"trace", trace_to_json(trace)}};
    write_file(path, line.dump() + "\n");
    CHECK_THROWS_AS(load_runset(path), SchemaError);

    // mismatched fingerprints across lines
    write_file(path, serialize_trace_line(success_trace("a", 1), "fp1") +
                         serialize_trace_line(success_trace("b", 1), "fp2"));
    CHECK_THROWS_AS(load_runset(path), SchemaError);
}

TEST_CASE("report: table and json twin agree cell for cell") {
    RunSet runs;
    runs.config_fingerprint = "fp";
    runs.control_traces.push_back(success_trace("a", 2, "short"));
    runs.control_traces.push_back(success_trace("b", 3, "short"));
    runs.control_traces.push_back(failure_trace("c", 20, "long"));
    runs.control_traces.push_back(success_trace("d", 0, "long"));

    auto doc = report(runs);

    // parse the text table back: "<group> <spaces> <cell>"
    std::istringstream table(doc.table);
    std::string line;
    std::getline(table, line);  // header
    int rows = 0;
    while (std::getline(table, line)) {
        if (line.empty()) break;
        auto split = line.find_first_of(' ');
        REQUIRE(split != std::string::npos);
        std::string group = line.substr(0, split);
        auto value_start = line.find_first_not_of(' ', split);
        std::string cell = line.substr(value_start);
        ++rows;
        if (group == "overall") {
            CHECK(doc.json_twin["overall"]["cell"] == cell);
        } else {
            CHECK(doc.json_twin["groups"][group]["cell"] == cell);
        }
    }
    CHECK(rows == 3);  // short, long, overall

    // trajectories: one row per record plus the header
    std::size_t expected_rows = 0;
    for (const auto& trace : runs.control_traces) expected_rows += trace.records.size();
    std::size_t newline_count =
        static_cast<std::size_t>(std::count(doc.trajectories_csv.begin(),
                                            doc.trajectories_csv.end(), '\n'));
    CHECK(newline_count == expected_rows + 1);

    CHECK_THROWS_AS(report(RunSet{}), EmptyPopulation);
}

TEST_CASE("report: all-fail group renders the retry glyph") {
    RunSet runs;
    runs.config_fingerprint = "fp";
    runs.control_traces.push_back(failure_trace("a", 20, "long"));
    auto doc = report(runs);
    CHECK(doc.table.find("100.00% / ↺") != std::string::npos);
}

TEST_CASE("report: mixed traces produce rmse and floor sections") {
    RunSet runs;
    runs.config_fingerprint = "fp";

    MixedTrace trace;
    trace.sample_id = "m";
    trace.targets = {AttributeTarget::window(AttributeKind::Extractiveness, 85.0),
                     AttributeTarget::floor(AttributeKind::Topic, 74.0)};
    trace.draft.summary = "draft";
    trace.draft.prompt = tiny_exchange();
    trace.draft.measurements = {
        {AttributeKind::Extractiveness, {AttributeKind::Extractiveness, 70.0}, false},
        {AttributeKind::Topic, {AttributeKind::Topic, 80.0}, true}};
    trace.final_measurements = {
        {AttributeKind::Extractiveness, {AttributeKind::Extractiveness, 80.0}, true},
        {AttributeKind::Topic, {AttributeKind::Topic, 76.0}, true}};
    runs.mixed_traces.push_back(trace);

    auto doc = report(runs);
    CHECK(doc.json_twin["mixed"]["rmse"]["extractiveness"] == 5.0);
    CHECK(doc.json_twin["mixed"]["floor_satisfied"]["topic"] == 100.0);
    CHECK(doc.table.find("extractiveness") != std::string::npos);
}
