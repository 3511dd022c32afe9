#pragma once

#include <stdexcept>
#include <string>

namespace summactl {

// Base class for every error raised by the engine.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- text / metric inputs ---

struct EmptySummary : Error {
    EmptySummary() : Error("summary contains no tokens") {}
    explicit EmptySummary(const std::string& what) : Error(what) {}
};

struct EmptySource : Error {
    EmptySource() : Error("source contains no tokens") {}
    explicit EmptySource(const std::string& what) : Error(what) {}
};

struct EmptyTopics : Error {
    EmptyTopics() : Error("no topics given") {}
    explicit EmptyTopics(const std::string& what) : Error(what) {}
};

struct EmptyUtterances : Error {
    EmptyUtterances() : Error("no speaker utterances given") {}
    explicit EmptyUtterances(const std::string& what) : Error(what) {}
};

// --- embeddings ---

struct EmptyUnit : Error {
    EmptyUnit() : Error("cannot embed an empty string") {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct ProviderUnavailable : Error {
    explicit ProviderUnavailable(const std::string& what) : Error(what) {}
};

// --- chat models ---

struct ModelUnavailable : Error {
    explicit ModelUnavailable(const std::string& what) : Error(what) {}
};

struct ScriptExhausted : Error {
    explicit ScriptExhausted(const std::string& what) : Error(what) {}
};

struct MalformedResponse : Error {
    explicit MalformedResponse(const std::string& what) : Error(what) {}
};

struct EmptyOutput : Error {
    EmptyOutput() : Error("model reply contains no extractable summary") {}
    explicit EmptyOutput(const std::string& what) : Error(what) {}
};

// --- prompts ---

struct UnresolvedPlaceholder : Error {
    explicit UnresolvedPlaceholder(const std::string& what) : Error(what) {}
};

// --- targets / rules ---

struct KindMismatch : Error {
    explicit KindMismatch(const std::string& what) : Error(what) {}
};

// --- dataset ---

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

struct MissingField : Error {
    explicit MissingField(const std::string& field)
        : Error("missing field: " + field), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct LabelMissing : Error {
    explicit LabelMissing(const std::string& what) : Error(what) {}
};

// --- evaluation / persistence ---

struct EmptyInput : Error {
    EmptyInput() : Error("empty input") {}
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct EmptyPopulation : Error {
    EmptyPopulation() : Error("no usable traces in population") {}
    explicit EmptyPopulation(const std::string& what) : Error(what) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& what) : Error(what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& what) : Error(what) {}
};

}  // namespace summactl
