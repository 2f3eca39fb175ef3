#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ousynth {

// Every library error carries a short machine-readable kind ("domain",
// "alignment", ...). The CLI prints failures as `error: <kind>: <message>`
// on a single line and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error("domain", m) {}
};

struct AlignmentError : Error {
    explicit AlignmentError(const std::string& m) : Error("alignment", m) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& m) : Error("insufficient_data", m) {}
};

struct DecompositionError : Error {
    explicit DecompositionError(const std::string& m) : Error("decomposition", m) {}
};

struct RankDeficientError : Error {
    explicit RankDeficientError(const std::string& m) : Error("rank_deficient", m) {}
};

struct GenerationError : Error {
    explicit GenerationError(const std::string& m) : Error("generation", m) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse", m) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& m) : Error("schema", m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace ousynth
