#pragma once

#include <stdexcept>
#include <string>

namespace ap {

enum class ErrorCode {
    InvalidArgument,
    Io,
    Parse,
    Validation,
    Format,
    Numerical,
    Degenerate,
    Input,
    DatasetEmpty,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code drives the C API status and CLI exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace ap
