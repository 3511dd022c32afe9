#include <doctest.h>

#include "summactl/control.hpp"
#include "summactl/prompts.hpp"
#include "summactl/trace_json.hpp"
#include "support.hpp"

using namespace summactl;
using namespace testsupport;

namespace {

const std::string kPromptsDir = SUMMACTL_PROMPTS_DIR;

std::string numbered_words(const std::string& prefix, int from, int count) {
    std::string out;
    for (int i = from; i < from + count; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += prefix + std::to_string(i);
    }
    return out;
}

// Source of 60 distinct words plus summaries measuring exactly 70/80/86
// extractiveness against it.
struct ExtractivenessFixture {
    std::string source = numbered_words("w", 0, 60);
    std::string at_70 = numbered_words("w", 0, 7) + " " + numbered_words("z", 0, 3);
    std::string at_80 = numbered_words("w", 0, 8) + " " + numbered_words("z", 0, 2);
    std::string at_86 = numbered_words("w", 0, 43) + " " + numbered_words("z", 0, 7);

    MeasurementContext ctx() const {
        MeasurementContext c;
        c.source = tokenize(source);
        return c;
    }
};

}  // namespace

TEST_CASE("check: window boundaries are inclusive") {
    auto target = AttributeTarget::window(AttributeKind::Extractiveness, 85.0);
    auto m = [](double v) { return Measurement{AttributeKind::Extractiveness, v}; };
    CHECK(check(m(80.0), target));
    CHECK(check(m(85.0), target));
    CHECK(check(m(89.0), target));
    CHECK(check(m(90.0), target));
    CHECK(!check(m(79.99), target));
    CHECK(!check(m(90.01), target));
    CHECK(!check(m(90.5), target));
}

TEST_CASE("check: floor boundary is inclusive") {
    auto target = AttributeTarget::floor(AttributeKind::Topic, 74.0);
    CHECK(check(Measurement{AttributeKind::Topic, 74.0}, target));
    CHECK(check(Measurement{AttributeKind::Topic, 74.1}, target));
    CHECK(!check(Measurement{AttributeKind::Topic, 73.9}, target));
}

TEST_CASE("check: kind mismatch is rejected") {
    auto target = AttributeTarget::window(AttributeKind::Length, 20.0);
    CHECK_THROWS_AS(check(Measurement{AttributeKind::Topic, 50.0}, target), KindMismatch);
}

TEST_CASE("attribute targets enforce the kind/rule pairing") {
    CHECK_THROWS_AS(AttributeTarget::window(AttributeKind::Topic, 74.0), KindMismatch);
    CHECK_THROWS_AS(AttributeTarget::floor(AttributeKind::Length, 20.0), KindMismatch);
    CHECK_THROWS_AS(AttributeTarget::window(AttributeKind::Length, 20.0, 0.0), KindMismatch);
    CHECK_THROWS_AS(AttributeTarget::floor(AttributeKind::Topic, 0.0), KindMismatch);
    CHECK_THROWS_AS(AttributeTarget::floor(AttributeKind::Topic, 100.5), KindMismatch);
}

TEST_CASE("derive_floor takes the minimum") {
    CHECK(derive_floor({75.6, 92.0, 80.1}).threshold == 75.6);
    CHECK(derive_floor({74.0}).threshold == 74.0);
    CHECK_THROWS_AS(derive_floor({}), EmptyInput);
}

TEST_CASE("run_control: 70 -> 80 -> 86 fixture succeeds at iteration 2") {
    auto bundle = PromptBundle::load(kPromptsDir);
    ExtractivenessFixture fx;
    // 70 and 80 miss the 90 +-5 window; 86 lands inside it.
    auto target = AttributeTarget::window(AttributeKind::Extractiveness, 90.0);
    LoopConfig config;
    config.strategy = Strategy::Gte;

    ScriptedModel model({fx.at_70, fx.at_80, fx.at_86});
    auto trace = run_control(fx.source, fx.ctx(), target, config, model, bundle, nullptr, "fx");

    REQUIRE(trace.outcome == Outcome::Success);
    CHECK(trace.at_iteration == 2);
    REQUIRE(trace.records.size() == 3);
    CHECK(trace.records[0].measured.value == 70.0);
    CHECK(trace.records[1].measured.value == 80.0);
    CHECK(trace.records[2].measured.value == 86.0);
    CHECK(!trace.records[0].satisfied);
    CHECK(!trace.records[1].satisfied);
    CHECK(trace.records[2].satisfied);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        CHECK(trace.records[i].index == static_cast<int>(i));
    }

    // each refinement prompt references the latest summary and measurement,
    // never an earlier one
    const std::string& second_prompt = trace.records[2].prompt.messages.back().content;
    CHECK(second_prompt.find("Previous summary:\n" + fx.at_80) != std::string::npos);
    CHECK(second_prompt.find("80.0") != std::string::npos);
    CHECK(second_prompt.find("Previous summary:\n" + fx.at_70) == std::string::npos);
}

TEST_CASE("run_control: constant off-target reply fails after the cap") {
    auto bundle = PromptBundle::load(kPromptsDir);
    ExtractivenessFixture fx;
    auto target = AttributeTarget::window(AttributeKind::Extractiveness, 90.0);
    LoopConfig config;
    config.max_iterations = 3;

    ScriptedModel model(std::vector<std::string>(10, fx.at_70));
    auto trace = run_control(fx.source, fx.ctx(), target, config, model, bundle, nullptr);
    CHECK(trace.outcome == Outcome::Failure);
    CHECK(trace.records.size() == 4);  // draft + 3 refinements
    for (const auto& r : trace.records) CHECK(!r.satisfied);
}

TEST_CASE("run_control: first draft can already satisfy a floor") {
    auto bundle = PromptBundle::load(kPromptsDir);
    HashEmbeddingProvider provider(64);
    MeasurementContext ctx;
    ctx.source = tokenize("the harbor report");
    ctx.topics = {"harbor"};
    auto target = AttributeTarget::floor(AttributeKind::Topic, 74.0);
    LoopConfig config;

    ScriptedModel model({"harbor"});  // one-word summary equal to the topic: scores 100
    auto trace = run_control("the harbor report", ctx, target, config, model, bundle, &provider);
    CHECK(trace.outcome == Outcome::Success);
    CHECK(trace.at_iteration == 0);
    CHECK(trace.records.size() == 1);
}

TEST_CASE("run_control: identical inputs serialize byte-identically") {
    auto bundle = PromptBundle::load(kPromptsDir);
    ExtractivenessFixture fx;
    auto target = AttributeTarget::window(AttributeKind::Extractiveness, 90.0);
    LoopConfig config;

    ScriptedModel first({fx.at_70, fx.at_80, fx.at_86});
    ScriptedModel second({fx.at_70, fx.at_80, fx.at_86});
    auto a = run_control(fx.source, fx.ctx(), target, config, first, bundle, nullptr, "s");
    auto b = run_control(fx.source, fx.ctx(), target, config, second, bundle, nullptr, "s");
    CHECK(serialize_trace_line(a, "fp") == serialize_trace_line(b, "fp"));
}

TEST_CASE("run_control: model failure aborts the trace with partial records") {
    auto bundle = PromptBundle::load(kPromptsDir);
    ExtractivenessFixture fx;
    auto target = AttributeTarget::window(AttributeKind::Extractiveness, 90.0);
    LoopConfig config;

    ScriptedModel model({fx.at_70});  // exhausts on the first refinement
    auto trace = run_control(fx.source, fx.ctx(), target, config, model, bundle, nullptr);
    CHECK(trace.outcome == Outcome::Aborted);
    CHECK(trace.aborted());
    CHECK(trace.records.size() == 1);
    CHECK(trace.abort_reason.find("exhausted") != std::string::npos);
}

TEST_CASE("run_control: inconsistent context is rejected up front") {
    auto bundle = PromptBundle::load(kPromptsDir);
    MeasurementContext ctx;
    ctx.source = tokenize("a b c");
    auto target = AttributeTarget::floor(AttributeKind::Topic, 74.0);
    LoopConfig config;
    ScriptedModel model({"x"});
    CHECK_THROWS_AS(run_control("a b c", ctx, target, config, model, bundle, nullptr),
                    EmptyTopics);
    CHECK_THROWS_AS(
        run_control("", ctx, AttributeTarget::window(AttributeKind::Length, 20.0), config, model,
                    bundle, nullptr),
        EmptyInput);

    LoopConfig bad;
    bad.max_iterations = 0;
    CHECK_THROWS_AS(run_control("a b c", ctx,
                                AttributeTarget::window(AttributeKind::Length, 20.0), bad, model,
                                bundle, nullptr),
                    ParseError);
}

namespace {

// Returns the aligned summary only when the refinement prompt names its
// previous measured value and tells it to explain the miss. Deterministic
// stand-in for a model that needs the full guidance to move.
class StubbornModel final : public ChatModel {
public:
    StubbornModel(std::string off_target, std::string on_target, std::string measured_marker,
                  std::string explain_marker)
        : off_(std::move(off_target)),
          on_(std::move(on_target)),
          measured_marker_(std::move(measured_marker)),
          explain_marker_(std::move(explain_marker)) {}

    std::string complete(const ChatExchange& exchange) override {
        const std::string& user = exchange.messages.back().content;
        bool guided = user.find(measured_marker_) != std::string::npos &&
                      user.find(explain_marker_) != std::string::npos;
        return guided ? on_ : off_;
    }

private:
    std::string off_;
    std::string on_;
    std::string measured_marker_;
    std::string explain_marker_;
};

}  // namespace

TEST_CASE("strategy separation: the stubborn model moves under gte only") {
    auto bundle = PromptBundle::load(kPromptsDir);
    const std::string source = "alpha beta gamma delta epsilon zeta";
    MeasurementContext ctx;
    ctx.source = tokenize(source);
    auto target = AttributeTarget::window(AttributeKind::Extractiveness, 85.0);

    const std::string off = "nova pulse quill riven sable";        // extractiveness 0.0
    const std::string on = "alpha beta gamma delta epsilon nova";  // 5/6 = 83.3, inside 85 +-5
    const std::string explain_marker = "explain in one or two sentences";

    LoopConfig config;
    config.max_iterations = 5;

    config.strategy = Strategy::Gte;
    StubbornModel gte_model(off, on, "0.0", explain_marker);
    auto gte_trace = run_control(source, ctx, target, config, gte_model, bundle, nullptr);
    CHECK(gte_trace.outcome == Outcome::Success);
    CHECK(gte_trace.at_iteration == 1);

    config.strategy = Strategy::Iter;
    StubbornModel iter_model(off, on, "0.0", explain_marker);
    auto iter_trace = run_control(source, ctx, target, config, iter_model, bundle, nullptr);
    CHECK(iter_trace.outcome == Outcome::Failure);
    CHECK(iter_trace.records.size() == 6);

    config.strategy = Strategy::Sai;
    StubbornModel sai_model(off, on, "0.0", explain_marker);
    auto sai_trace = run_control(source, ctx, target, config, sai_model, bundle, nullptr);
    CHECK(sai_trace.outcome == Outcome::Failure);
}
