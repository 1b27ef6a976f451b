#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fvnn {

enum class ErrorCode {
    config,
    dimension,
    shape,
    parameter,
    group,
    empty_data,
    numeric,
    io,
    schema,
    parse,
    state,
    symmetry,
    stratification,
    architecture,
    training,
    batch_composition,
    undefined_constant,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace fvnn
