#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "summactl/chat.hpp"
#include "summactl/control.hpp"
#include "summactl/dataset.hpp"
#include "summactl/embedding.hpp"
#include "summactl/eval.hpp"
#include "summactl/metrics.hpp"
#include "summactl/planner.hpp"
#include "summactl/prompts.hpp"
#include "summactl/trace_json.hpp"

namespace {

using namespace summactl;
using nlohmann::json;

std::string env_or_empty(const char* name) {
    const char* value = std::getenv(name);
    return value ? value : "";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

std::uint64_t fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunArgs {
    std::string dataset;
    std::string out;
    std::string prompts_dir = "prompts";
    std::string attribute;
    std::string attributes;  // comma list for mixed control
    std::string label;
    std::string strategy = "gte";
    std::string scripted;
    std::string model_endpoint;
    std::string model_id;
    std::string provider = "hash";
    std::string provider_endpoint;
    std::string embed_model;
    int hash_dim = 256;
    std::uint64_t hash_seed = 0;
    int max_iterations = 20;
    int workers = 1;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::vector<std::string> overrides;
};

LabelMap label_map_from(const std::vector<std::string>& overrides) {
    LabelMap labels;
    for (const auto& entry : overrides) {
        auto eq = entry.find('=');
        if (eq == std::string::npos) throw ParseError("override must be key=value: " + entry);
        labels.set(entry.substr(0, eq), std::stod(entry.substr(eq + 1)));
    }
    return labels;
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunArgs& args) {
    if (args.provider == "hash") {
        return std::make_unique<HashEmbeddingProvider>(static_cast<std::size_t>(args.hash_dim),
                                                       args.hash_seed);
    }
    if (args.provider == "remote") {
        if (args.provider_endpoint.empty() || args.embed_model.empty()) {
            throw ParseError("remote provider needs --provider-endpoint and --embed-model");
        }
        RemoteEmbeddingConfig config;
        config.endpoint = args.provider_endpoint;
        config.model = args.embed_model;
        config.bearer_token = env_or_empty("SUMMACTL_EMBED_API_KEY");
        return std::make_unique<RemoteEmbeddingProvider>(std::move(config));
    }
    throw ParseError("unknown provider: " + args.provider + " (use hash or remote)");
}

std::string build_fingerprint(const RunArgs& args, const std::vector<AttributeKind>& kinds,
                              const LabelMap& labels, const std::string& script_blob) {
    std::ostringstream fp;
    fp << "mode=" << (kinds.size() > 1 ? "mixed" : "control");
    fp << ";attrs=";
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (i) fp << "+";
        fp << to_string(kinds[i]);
    }
    fp << ";strategy=" << args.strategy;
    if (!args.scripted.empty()) {
        fp << ";model=scripted:" << std::hex << fnv1a_hex(script_blob) << std::dec;
    } else {
        fp << ";model=" << args.model_id;
    }
    if (args.provider == "hash") {
        fp << ";provider=hash:" << args.hash_dim << ":" << args.hash_seed;
    } else {
        fp << ";provider=remote:" << args.embed_model;
    }
    fp << ";max_iterations=" << args.max_iterations;
    if (!args.label.empty()) fp << ";label=" << args.label;
    fp << ";labels=" << labels.ext_normal << "," << labels.ext_high << "," << labels.ext_fully
       << "," << labels.len_short << "," << labels.len_normal << "," << labels.len_long << ","
       << labels.topic_floor << "," << labels.speaker_floor << "," << labels.window_half_width;
    return fp.str();
}

int cmd_run(const RunArgs& args) {
    if (args.attribute.empty() == args.attributes.empty()) {
        std::cerr << "error: give exactly one of --attribute or --attributes\n";
        return 1;
    }
    std::vector<AttributeKind> kinds;
    for (const auto& name : split_csv(args.attribute.empty() ? args.attributes : args.attribute)) {
        kinds.push_back(attribute_kind_from(name));
    }
    const bool mixed = kinds.size() > 1;
    if (mixed && (kinds.size() < 2 || kinds.size() > 4)) {
        std::cerr << "error: mixed control takes 2-4 attributes\n";
        return 1;
    }
    if (args.scripted.empty() && (args.model_endpoint.empty() || args.model_id.empty())) {
        std::cerr << "error: non-scripted runs need --model-endpoint and --model\n";
        return 1;
    }
    if (!args.label.empty() && (mixed || !is_numerical(kinds[0]))) {
        std::cerr << "error: --label applies to single numerical-attribute runs\n";
        return 1;
    }

    LabelMap labels = label_map_from(args.overrides);
    std::string script_blob;
    std::vector<std::string> script;
    if (!args.scripted.empty()) {
        script_blob = read_text_file(args.scripted);
        script = json::parse(script_blob).get<std::vector<std::string>>();
    }

    PromptBundle bundle = PromptBundle::load(args.prompts_dir);
    std::vector<Sample> corpus = load_corpus(args.dataset);
    auto provider = make_provider(args);

    std::shared_ptr<RemoteChatModel> remote_model;
    if (args.scripted.empty()) {
        RemoteChatConfig config;
        config.endpoint = args.model_endpoint;
        config.bearer_token = env_or_empty("SUMMACTL_CHAT_API_KEY");
        config.max_in_flight = std::max(1, args.workers);
        remote_model = std::make_shared<RemoteChatModel>(std::move(config));
    }

    LoopConfig loop;
    loop.max_iterations = args.max_iterations;
    loop.strategy = strategy_from(args.strategy);
    loop.chat.model_id = args.scripted.empty() ? args.model_id : "scripted";
    loop.chat.temperature = args.temperature;
    loop.chat.max_output_tokens = args.max_output_tokens;

    const std::string fingerprint = build_fingerprint(args, kinds, labels, script_blob);

    // Resume: skip sample ids already present under the same configuration.
    std::set<std::string> done;
    if (std::filesystem::exists(args.out) && std::filesystem::file_size(args.out) > 0) {
        for_each_trace(args.out, [&](TraceLine&& line) {
            if (line.fingerprint != fingerprint) {
                throw SchemaError("output file " + args.out +
                                  " holds traces from a different configuration");
            }
            done.insert(line.control ? line.control->sample_id : line.mixed->sample_id);
        });
        if (!done.empty()) {
            std::cerr << "[run] resuming: " << done.size() << " sample(s) already done\n";
        }
    }

    struct Job {
        const Sample* sample;
        std::vector<AttributeTarget> targets;
        MeasurementContext ctx;
    };
    std::vector<Job> jobs;
    int skipped = 0;
    for (const auto& sample : corpus) {
        if (done.contains(sample.id)) continue;
        try {
            Job job;
            job.sample = &sample;
            if (!args.label.empty()) {
                AttributeKind kind = kinds[0];
                double value = kind == AttributeKind::Extractiveness
                                   ? labels.extractiveness_target(extractiveness_label_from(args.label))
                                   : labels.length_target(length_label_from(args.label));
                job.targets = {AttributeTarget::window(kind, value, labels.window_half_width,
                                                       args.label)};
            } else {
                job.targets = targets_for(sample, labels, kinds);
            }
            job.ctx = context_for(sample, kinds);
            jobs.push_back(std::move(job));
        } catch (const LabelMissing& ex) {
            std::cerr << "[run] skip: " << ex.what() << "\n";
            ++skipped;
        }
    }

    std::ofstream out(args.out, std::ios::app);
    if (!out) {
        std::cerr << "error: cannot open output file: " << args.out << "\n";
        return 1;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> any_aborted{false};
    std::atomic<bool> worker_failed{false};
    std::mutex write_mutex;
    std::string first_error;

    auto worker = [&]() {
        while (!worker_failed) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job& job = jobs[i];
            try {
                const std::string doc = job.sample->prompt_source();

                // Scripted models hold a cursor, so each sample gets a fresh one.
                std::unique_ptr<ScriptedModel> scripted_model;
                ChatModel* model = remote_model.get();
                if (!args.scripted.empty()) {
                    scripted_model = std::make_unique<ScriptedModel>(script);
                    model = scripted_model.get();
                }

                if (mixed) {
                    MixedTarget target{job.targets, job.ctx};
                    MixedTrace trace = run_min_planning(doc, target, loop, *model, bundle,
                                                        provider.get(), job.sample->id);
                    if (trace.aborted) any_aborted = true;
                    std::lock_guard lock(write_mutex);
                    append_trace(out, trace, fingerprint);
                    std::cerr << "[run] " << job.sample->id << ": "
                              << (trace.aborted
                                      ? "aborted"
                                      : std::to_string(trace.passes.size()) + " pass(es)")
                              << "\n";
                } else {
                    IterationTrace trace = run_control(doc, job.ctx, job.targets[0], loop, *model,
                                                       bundle, provider.get(), job.sample->id);
                    if (trace.aborted()) any_aborted = true;
                    std::lock_guard lock(write_mutex);
                    append_trace(out, trace, fingerprint);
                    std::cerr << "[run] " << job.sample->id << ": " << to_string(trace.outcome)
                              << (trace.outcome == Outcome::Success
                                      ? " at iteration " + std::to_string(trace.at_iteration)
                                      : "")
                              << "\n";
                }
            } catch (const std::exception& ex) {
                std::lock_guard lock(write_mutex);
                if (first_error.empty()) first_error = ex.what();
                worker_failed = true;
            }
        }
    };

    int thread_count = std::max(1, args.workers);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (worker_failed) {
        std::cerr << "error: " << first_error << "\n";
        return 1;
    }
    std::cerr << "[run] wrote " << jobs.size() << " trace(s) to " << args.out;
    if (skipped) std::cerr << " (skipped " << skipped << ")";
    std::cerr << "\n";
    return any_aborted ? 2 : 0;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::string kind;
    std::string summary_path;
    std::string source_path;
    std::string topics;
    std::string utterances_path;
    std::string provider = "hash";
    std::string provider_endpoint;
    std::string embed_model;
    int hash_dim = 256;
    std::uint64_t hash_seed = 0;
};

std::unique_ptr<EmbeddingProvider> metrics_provider(const MetricsArgs& args) {
    RunArgs shim;
    shim.provider = args.provider;
    shim.provider_endpoint = args.provider_endpoint;
    shim.embed_model = args.embed_model;
    shim.hash_dim = args.hash_dim;
    shim.hash_seed = args.hash_seed;
    return make_provider(shim);
}

int cmd_metrics(const MetricsArgs& args) {
    AttributeKind kind = attribute_kind_from(args.kind);
    TokenSeq summary = tokenize(read_text_file(args.summary_path));

    Measurement result{kind, 0.0};
    switch (kind) {
        case AttributeKind::Extractiveness:
        case AttributeKind::Length: {
            if (args.source_path.empty()) throw ParseError("--source is required for " + args.kind);
            TokenSeq source = tokenize(read_text_file(args.source_path));
            result = kind == AttributeKind::Extractiveness ? extractiveness(summary, source)
                                                           : length_ratio(summary, source);
            break;
        }
        case AttributeKind::Topic: {
            auto topics = split_csv(args.topics);
            if (topics.empty()) throw ParseError("--topics is required for topic");
            result = topic_score(summary, topics, *metrics_provider(args));
            break;
        }
        case AttributeKind::Speaker: {
            if (args.utterances_path.empty()) {
                throw ParseError("--utterances is required for speaker");
            }
            auto utterances = read_lines(args.utterances_path);
            result = speaker_score(summary, utterances, *metrics_provider(args));
            break;
        }
    }
    std::printf("%s\n", format_score(result.value).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval / report
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& traces_path, bool as_json) {
    RunSet runs = load_runset(traces_path);
    ReportDocument doc = report(runs);
    if (as_json) {
        std::cout << doc.json_twin.dump(2) << "\n";
        return 0;
    }
    std::size_t aborted = 0;
    for (const auto& t : runs.control_traces) aborted += t.aborted() ? 1 : 0;
    for (const auto& t : runs.mixed_traces) aborted += t.aborted ? 1 : 0;
    std::cout << "traces: " << runs.control_traces.size() + runs.mixed_traces.size()
              << " (aborted " << aborted << ")\n";
    if (!runs.control_traces.empty()) {
        StatsReport stats = compute_stats(runs);
        std::cout << "overall: " << format_cell(stats.overall) << "  (n_success "
                  << stats.overall.n_success << ", n_failure " << stats.overall.n_failure << ")\n";
        if (stats.overall.avg_iterations_refinements_only) {
            char buffer[32];
            std::snprintf(buffer, sizeof(buffer), "%.2f",
                          *stats.overall.avg_iterations_refinements_only);
            std::cout << "avg iterations, refinements only: " << buffer << "\n";
        }
        for (const auto& [label, s] : stats.by_label) {
            std::cout << "label " << label << ": " << format_cell(s) << "\n";
        }
    }
    if (doc.json_twin.contains("mixed")) {
        std::cout << "mixed: " << doc.json_twin["mixed"].dump() << "\n";
    }
    return 0;
}

int cmd_report(const std::string& traces_path, const std::string& out_dir) {
    RunSet runs = load_runset(traces_path);
    ReportDocument doc = report(runs);
    std::filesystem::create_directories(out_dir);
    const auto write = [&](const char* name, const std::string& content) {
        std::ofstream f(std::filesystem::path(out_dir) / name, std::ios::binary);
        if (!f) throw IoError(std::string("cannot write ") + name);
        f << content;
    };
    write("report.txt", doc.table);
    write("report.json", doc.json_twin.dump(2) + "\n");
    write("trajectories.csv", doc.trajectories_csv);
    std::cout << doc.table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attribute-controlled summarization engine"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run the control loop over a corpus");
    run->add_option("--dataset", run_args.dataset, "JSONL corpus")->required();
    run->add_option("--out", run_args.out, "trace output file (JSONL, append)")->required();
    run->add_option("--attribute", run_args.attribute, "single attribute to control");
    run->add_option("--attributes", run_args.attributes, "comma list for mixed control");
    run->add_option("--label", run_args.label, "label override, e.g. short");
    run->add_option("--strategy", run_args.strategy, "iter|sai|gte (default gte)");
    run->add_option("--scripted", run_args.scripted, "JSON file with scripted model replies");
    run->add_option("--model-endpoint", run_args.model_endpoint, "chat completions URL");
    run->add_option("--model", run_args.model_id, "model id sent to the endpoint");
    run->add_option("--provider", run_args.provider, "hash|remote (default hash)");
    run->add_option("--provider-endpoint", run_args.provider_endpoint, "embeddings URL");
    run->add_option("--embed-model", run_args.embed_model, "embedding model id");
    run->add_option("--hash-dim", run_args.hash_dim, "hash provider dimension");
    run->add_option("--hash-seed", run_args.hash_seed, "hash provider seed");
    run->add_option("--max-iterations", run_args.max_iterations, "iteration cap (default 20)");
    run->add_option("--workers", run_args.workers, "parallel samples (default 1)");
    run->add_option("--prompts", run_args.prompts_dir, "prompt template directory");
    run->add_option("--temperature", run_args.temperature, "decoding temperature (default 0)");
    run->add_option("--max-output-tokens", run_args.max_output_tokens, "reply token cap");
    run->add_option("--override", run_args.overrides, "label map override key=value");

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "measure one attribute of a summary");
    metrics->add_option("--kind", metrics_args.kind, "attribute kind")->required();
    metrics->add_option("--summary", metrics_args.summary_path, "summary text file")->required();
    metrics->add_option("--source", metrics_args.source_path, "source text file");
    metrics->add_option("--topics", metrics_args.topics, "comma-separated topics");
    metrics->add_option("--utterances", metrics_args.utterances_path,
                        "speaker utterances, one per line");
    metrics->add_option("--provider", metrics_args.provider, "hash|remote (default hash)");
    metrics->add_option("--provider-endpoint", metrics_args.provider_endpoint, "embeddings URL");
    metrics->add_option("--embed-model", metrics_args.embed_model, "embedding model id");
    metrics->add_option("--hash-dim", metrics_args.hash_dim, "hash provider dimension");
    metrics->add_option("--hash-seed", metrics_args.hash_seed, "hash provider seed");

    std::string eval_path;
    bool eval_json = false;
    auto* eval = app.add_subcommand("eval", "aggregate statistics over a trace store");
    eval->add_option("traces", eval_path, "trace store (JSONL)")->required();
    eval->add_flag("--json", eval_json, "print machine-readable stats");

    std::string report_path;
    std::string report_out = "report";
    auto* rep = app.add_subcommand("report", "write report artifacts from a trace store");
    rep->add_option("traces", report_path, "trace store (JSONL)")->required();
    rep->add_option("--out", report_out, "output directory (default report/)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (metrics->parsed()) return cmd_metrics(metrics_args);
        if (eval->parsed()) return cmd_eval(eval_path, eval_json);
        if (rep->parsed()) return cmd_report(report_path, report_out);
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
