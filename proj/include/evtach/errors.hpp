#pragma once

#include <stdexcept>
#include <string>

namespace evtach {

/// Machine-readable failure categories. Every error raised by the library
/// maps to exactly one of these; the CLI turns them into exit codes.
enum class ErrorCategory {
    io,
    format,
    config,
    insufficient_peaks,
};

inline const char* to_string(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::format: return "format";
    case ErrorCategory::config: return "config";
    case ErrorCategory::insufficient_peaks: return "insufficient_peaks";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

/// Malformed input data: bad header, bad field, timestamp regression,
/// truncated payload. Messages carry the offending record index.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error(ErrorCategory::format, message) {}
};

/// Invalid parameter or precondition violation; messages name the field.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

/// Estimation could not find at least two peaks. Usually means the
/// aggregation duration is too long for the phenomenon or the RoI does
/// not see it.
class InsufficientPeaksError : public Error {
public:
    explicit InsufficientPeaksError(const std::string& message)
        : Error(ErrorCategory::insufficient_peaks, message) {}
};

} // namespace evtach
