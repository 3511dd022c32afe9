#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "summactl/errors.hpp"

namespace summactl {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role role_from(std::string_view name);  // throws ParseError

struct ChatMessage {
    Role role;
    std::string content;
};

struct ChatExchange {
    std::vector<ChatMessage> messages;  // at most one system message, first
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 1024;
};

// Generation knobs shared by the prompt builders. Temperature defaults to 0:
// iteration-count statistics assume repeatable decoding.
struct ChatOptions {
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 1024;
};

class ChatModel {
public:
    virtual ~ChatModel() = default;
    virtual std::string complete(const ChatExchange& exchange) = 0;
};

// Test double replaying a fixed list of replies in order. Stateful cursor:
// owned by a single run, never shared.
class ScriptedModel final : public ChatModel {
public:
    explicit ScriptedModel(std::vector<std::string> script);

    std::string complete(const ChatExchange& exchange) override;
    std::size_t cursor() const { return cursor_; }

private:
    std::vector<std::string> script_;
    std::size_t cursor_ = 0;
};

struct RemoteChatConfig {
    std::string endpoint;      // full URL of the chat completions route
    std::string bearer_token;  // supply from the environment, never from flags
    int max_attempts = 3;
    int timeout_seconds = 120;  // dialogue sources are long
    int backoff_base_ms = 250;
    int max_in_flight = 4;
};

// Speaks the standard chat completions wire format:
//   POST {"model", "messages": [{"role","content"},...], "temperature", "max_tokens"}
//   -> {"choices": [{"message": {"role","content"}}]}
// Transient failures retry with bounded exponential backoff. Shareable across
// concurrent runs; in-flight requests are capped.
class RemoteChatModel final : public ChatModel {
public:
    explicit RemoteChatModel(RemoteChatConfig config);
    ~RemoteChatModel() override;

    std::string complete(const ChatExchange& exchange) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Sentinel lines the prompts instruct models to wrap summaries in.
inline constexpr std::string_view kSummaryOpen = "<<<SUMMARY";
inline constexpr std::string_view kSummaryClose = ">>>";

// Text inside the last complete sentinel block, or the whole reply trimmed
// when no block is present. Throws EmptyOutput when nothing remains.
std::string extract_summary(const std::string& raw);

}  // namespace summactl
