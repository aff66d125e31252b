#include "core/error.hpp"

namespace ap {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::Io: return "io-error";
        case ErrorCode::Parse: return "parse-error";
        case ErrorCode::Validation: return "validation-error";
        case ErrorCode::Format: return "format-error";
        case ErrorCode::Numerical: return "numerical-error";
        case ErrorCode::Degenerate: return "degenerate-input";
        case ErrorCode::Input: return "input-error";
        case ErrorCode::DatasetEmpty: return "dataset-empty";
    }
    return "unknown";
}

}  // namespace ap
