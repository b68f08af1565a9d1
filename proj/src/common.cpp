#include "nltrack/common.hpp"

namespace nltrack {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::config_invalid: return "config_invalid";
        case ErrorCode::uniqueness_unsatisfiable: return "uniqueness_unsatisfiable";
        case ErrorCode::unknown_word: return "unknown_word";
        case ErrorCode::length_overflow: return "length_overflow";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::version_mismatch: return "version_mismatch";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::shape_error: return "shape_error";
        case ErrorCode::mode_error: return "mode_error";
        case ErrorCode::degenerate_box: return "degenerate_box";
        case ErrorCode::init_failed: return "init_failed";
        case ErrorCode::nonfinite_loss: return "nonfinite_loss";
        case ErrorCode::incompatible_checkpoint: return "incompatible_checkpoint";
    }
    return "unknown";
}

}  // namespace nltrack
