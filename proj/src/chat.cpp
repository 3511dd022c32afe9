#include "summactl/chat.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <semaphore>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "summactl/http_util.hpp"

namespace summactl {

using nlohmann::json;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "?";
}

Role role_from(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    throw ParseError("unknown chat role: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Scripted model
// ---------------------------------------------------------------------------

ScriptedModel::ScriptedModel(std::vector<std::string> script) : script_(std::move(script)) {}

std::string ScriptedModel::complete(const ChatExchange&) {
    if (cursor_ >= script_.size()) {
        throw ScriptExhausted("scripted model exhausted after " +
                              std::to_string(script_.size()) + " replies");
    }
    return script_[cursor_++];
}

// ---------------------------------------------------------------------------
// Remote model
// ---------------------------------------------------------------------------

struct RemoteChatModel::Impl {
    RemoteChatConfig config;
    HttpTarget target;
    std::counting_semaphore<> in_flight;

    explicit Impl(RemoteChatConfig cfg)
        : config(std::move(cfg)),
          target(split_url(config.endpoint)),
          in_flight(std::max(1, config.max_in_flight)) {}
};

RemoteChatModel::RemoteChatModel(RemoteChatConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteChatModel::~RemoteChatModel() = default;

std::string RemoteChatModel::complete(const ChatExchange& exchange) {
    json messages = json::array();
    for (const auto& msg : exchange.messages) {
        messages.push_back({{"role", std::string(to_string(msg.role))}, {"content", msg.content}});
    }
    json body = {{"model", exchange.model_id},
                 {"messages", std::move(messages)},
                 {"temperature", exchange.temperature},
                 {"max_tokens", exchange.max_output_tokens}};
    const std::string payload = body.dump();
    const auto& cfg = impl_->config;

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    std::string last_error;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        if (attempt > 1) {
            auto delay = std::chrono::milliseconds(cfg.backoff_base_ms << (attempt - 2));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(impl_->target.base);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);
        httplib::Headers headers;
        if (!cfg.bearer_token.empty()) {
            headers.emplace("Authorization", "Bearer " + cfg.bearer_token);
        }
        auto res = client.Post(impl_->target.path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429 || res->status == 408) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ModelUnavailable("chat endpoint returned HTTP " + std::to_string(res->status));
        }
        try {
            json parsed = json::parse(res->body);
            const auto& choices = parsed.at("choices");
            if (!choices.is_array() || choices.empty()) {
                throw MalformedResponse("chat response has no choices");
            }
            return choices.at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& ex) {
            throw MalformedResponse(std::string("malformed chat response: ") + ex.what());
        }
    }
    throw ModelUnavailable("chat endpoint unreachable after " + std::to_string(cfg.max_attempts) +
                           " attempts (" + last_error + ")");
}

// ---------------------------------------------------------------------------
// Summary extraction
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace

std::string extract_summary(const std::string& raw) {
    auto lines = split_lines(raw);

    // Last open sentinel that has a close after it wins; replies sometimes
    // restate the block while reasoning, and the final one is the answer.
    for (std::size_t open = lines.size(); open-- > 0;) {
        if (trim(lines[open]) != kSummaryOpen) continue;
        for (std::size_t close = open + 1; close < lines.size(); ++close) {
            if (trim(lines[close]) != kSummaryClose) continue;
            std::string content;
            for (std::size_t i = open + 1; i < close; ++i) {
                if (!content.empty()) content.push_back('\n');
                content += std::string(lines[i]);
            }
            auto trimmed = trim(content);
            if (trimmed.empty()) throw EmptyOutput("sentinel block is empty");
            return std::string(trimmed);
        }
    }

    auto trimmed = trim(raw);
    if (trimmed.empty()) throw EmptyOutput();
    return std::string(trimmed);
}

}  // namespace summactl
