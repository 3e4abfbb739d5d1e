#pragma once

#include <stdexcept>
#include <string>

namespace cwgan {

// Failure categories surfaced by the library. The CLI maps these onto process
// exit codes; tests match on the kind rather than message text.
enum class ErrorKind {
    InvalidInput,
    DimensionMismatch,
    RankDeficient,
    Infeasible,
    Diverged,
    RecoveryFailed,
    IncompleteArrangements,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::Diverged: return "Diverged";
        case ErrorKind::RecoveryFailed: return "RecoveryFailed";
        case ErrorKind::IncompleteArrangements: return "IncompleteArrangements";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace cwgan
