#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nltrack {

// Machine-parseable error categories. Every thrown Error carries one; the CLI
// maps them to a one-line "error: <code>: <message>" on stderr and a nonzero
// exit status.
enum class ErrorCode {
    config_invalid,
    uniqueness_unsatisfiable,
    unknown_word,
    length_overflow,
    parse_error,
    version_mismatch,
    io_error,
    shape_error,
    mode_error,
    degenerate_box,
    init_failed,
    nonfinite_loss,
    incompatible_checkpoint,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    std::string one_line() const {
        return std::string("error: ") + error_code_name(code_) + ": " + what();
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

// FNV-1a, used for config hashing and seed derivation.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

}  // namespace nltrack
