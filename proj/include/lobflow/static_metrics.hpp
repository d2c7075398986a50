#pragma once

#include "lobflow/book.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <optional>

namespace lobflow {

// Exact non-negative-denominator fraction, always stored in lowest terms.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    [[nodiscard]] std::int64_t num() const noexcept { return num_; }
    [[nodiscard]] std::int64_t den() const noexcept { return den_; }
    [[nodiscard]] double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

struct MidSpread {
    HalfTicks mid = 0;
    Ticks spread = 0;
};

struct Depth {
    Shares shares = 0;
    bool truncated = false;  // fewer than k occupied levels were available
};

enum class SlopeIntercept { none, fitted };

// Regression through the origin; it matches the quoted slope of the reference
// ladder (0.0611 ticks per 1000 shares) within 1%, the fitted intercept does not.
inline constexpr SlopeIntercept kDefaultSlopeIntercept = SlopeIntercept::none;

MidSpread mid_and_spread(const Snapshot& s);
double book_imbalance(const Snapshot& s);
Depth cumulative_depth(const Snapshot& s, std::size_t k, Side side);

// Volume-weighted distance from the mid (in ticks) of immediately sweeping
// n shares from the given side. Throws InsufficientDepth.
Rational execution_cost(const Snapshot& s, Shares n, Side side);

// Least-squares slope of n -> PI_n over n = 1..n_max, in ticks per share.
double impact_slope(const Snapshot& s, Shares n_max, Side side,
                    SlopeIntercept convention = kDefaultSlopeIntercept);

struct StaticMetrics {
    HalfTicks mid = 0;
    Ticks spread = 0;
    double bi = 0.0;
    std::array<std::array<Shares, 4>, 2> depth{};  // [side][k-1]
    std::array<bool, 2> depth_truncated{};
    Shares pi_shares = 0;                          // N used for PI and slope
    std::array<std::optional<double>, 2> pi{};     // ticks; empty when depth < N
    std::array<std::optional<double>, 2> slope{};  // ticks per share
};

// All of the above at once. pi/slope are left empty when visible depth is
// below n rather than extrapolated.
StaticMetrics compute_static_metrics(const Snapshot& s, Shares n,
                                     SlopeIntercept convention = kDefaultSlopeIntercept);

}  // namespace lobflow
