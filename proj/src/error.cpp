#include "lobflow/error.hpp"

namespace lobflow {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::malformed_record: return "MalformedRecord";
        case ErrorCode::unknown_kind: return "UnknownKind";
        case ErrorCode::non_positive_size: return "NonPositiveSize";
        case ErrorCode::invalid_config: return "InvalidConfig";
        case ErrorCode::unknown_order_id: return "UnknownOrderId";
        case ErrorCode::duplicate_order_id: return "DuplicateOrderId";
        case ErrorCode::cancel_exceeds_resting: return "CancelExceedsResting";
        case ErrorCode::execute_exceeds_visible_depth: return "ExecuteExceedsVisibleDepth";
        case ErrorCode::crossing_limit_order: return "CrossingLimitOrder";
        case ErrorCode::empty_side: return "EmptySide";
        case ErrorCode::insufficient_depth: return "InsufficientDepth";
        case ErrorCode::window_too_long: return "WindowTooLong";
        case ErrorCode::degenerate_window: return "DegenerateWindow";
        case ErrorCode::too_few_buckets: return "TooFewBuckets";
        case ErrorCode::rank_deficient: return "RankDeficient";
        case ErrorCode::dimension_mismatch: return "DimensionMismatch";
        case ErrorCode::too_few_points: return "TooFewPoints";
        case ErrorCode::non_finite_input: return "NonFiniteInput";
        case ErrorCode::degenerate_alpha1: return "DegenerateAlpha1";
        case ErrorCode::zero_variance: return "ZeroVariance";
        case ErrorCode::did_not_converge: return "DidNotConverge";
        case ErrorCode::single_class: return "SingleClass";
        case ErrorCode::series_too_short: return "SeriesTooShort";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_config:
        case ErrorCode::window_too_long:
        case ErrorCode::dimension_mismatch:
            return ErrorCategory::config;
        case ErrorCode::rank_deficient:
        case ErrorCode::degenerate_alpha1:
        case ErrorCode::zero_variance:
        case ErrorCode::did_not_converge:
        case ErrorCode::single_class:
        case ErrorCode::degenerate_window:
        case ErrorCode::non_finite_input:
            return ErrorCategory::numerical;
        default:
            return ErrorCategory::data;
    }
}

}  // namespace lobflow
