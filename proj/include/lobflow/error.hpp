#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lobflow {

// Broad failure classes. The CLI maps them onto exit codes 2/3/4.
enum class ErrorCategory { config, data, numerical };

enum class ErrorCode {
    // message-model
    malformed_record,
    unknown_kind,
    non_positive_size,
    invalid_config,
    // lob-engine
    unknown_order_id,
    duplicate_order_id,
    cancel_exceeds_resting,
    execute_exceeds_visible_depth,
    crossing_limit_order,
    empty_side,
    // static-metrics
    insufficient_depth,
    // bucketing-flows
    window_too_long,
    degenerate_window,
    // stats
    too_few_buckets,
    rank_deficient,
    dimension_mismatch,
    too_few_points,
    non_finite_input,
    degenerate_alpha1,
    zero_variance,
    did_not_converge,
    single_class,
    series_too_short,
};

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

// Raised by the parser in strict mode; carries the 1-based input line.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t line, const std::string& reason)
        : Error(code, "line " + std::to_string(line) + ": " + reason), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lobflow
