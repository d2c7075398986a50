#include "lobflow/static_metrics.hpp"

#include "lobflow/error.hpp"

#include <numeric>
#include <string>

namespace lobflow {

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error(ErrorCode::non_finite_input, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const auto g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

namespace {

void require_both_sides(const Snapshot& s) {
    if (s.bids.empty()) throw Error(ErrorCode::empty_side, "bid side is empty");
    if (s.asks.empty()) throw Error(ErrorCode::empty_side, "ask side is empty");
}

// Distance of a level from the mid, in half-ticks (always positive for a
// non-crossed book).
HalfTicks distance_halfticks(Ticks price, HalfTicks mid, Side side) {
    return side == Side::ask ? 2 * price - mid : mid - 2 * price;
}

Shares visible(const Snapshot& s, Side side) {
    Shares total = 0;
    for (const auto& lvl : s.levels(side)) total += lvl.volume;
    return total;
}

void require_depth(const Snapshot& s, Shares n, Side side) {
    if (n < 1) throw Error(ErrorCode::insufficient_depth, "order size must be at least one share");
    const auto avail = visible(s, side);
    if (avail < n)
        throw Error(ErrorCode::insufficient_depth,
                    "N=" + std::to_string(n) + " exceeds visible depth " + std::to_string(avail));
}

}  // namespace

MidSpread mid_and_spread(const Snapshot& s) {
    require_both_sides(s);
    return {s.best_bid() + s.best_ask(), s.best_ask() - s.best_bid()};
}

double book_imbalance(const Snapshot& s) {
    require_both_sides(s);
    const double va = static_cast<double>(s.asks.front().volume);
    const double vb = static_cast<double>(s.bids.front().volume);
    return (va - vb) / (va + vb);
}

Depth cumulative_depth(const Snapshot& s, std::size_t k, Side side) {
    const auto& lv = s.levels(side);
    if (lv.empty()) throw Error(ErrorCode::empty_side, std::string(to_string(side)) + " side is empty");
    Depth d;
    const auto n = std::min(k, lv.size());
    for (std::size_t i = 0; i < n; ++i) d.shares += lv[i].volume;
    d.truncated = k > lv.size();
    return d;
}

Rational execution_cost(const Snapshot& s, Shares n, Side side) {
    require_both_sides(s);
    require_depth(s, n, side);
    const HalfTicks mid = s.best_bid() + s.best_ask();
    __int128 cost = 0;  // half-tick * shares
    Shares left = n;
    for (const auto& lvl : s.levels(side)) {
        const Shares take = std::min(left, lvl.volume);
        cost += static_cast<__int128>(take) * distance_halfticks(lvl.price, mid, side);
        left -= take;
        if (left == 0) break;
    }
    return Rational(static_cast<std::int64_t>(cost), 2 * n);
}

double impact_slope(const Snapshot& s, Shares n_max, Side side, SlopeIntercept convention) {
    require_both_sides(s);
    require_depth(s, n_max, side);
    const HalfTicks mid = s.best_bid() + s.best_ask();

    // Single pass over the per-share grid: cost_n is the cumulative cost of
    // the first n shares, so PI_n = cost_n / n.
    long double sum_npi = 0.0L, sum_pi = 0.0L;
    std::int64_t cost = 0;  // half-ticks * shares
    Shares n = 0;
    for (const auto& lvl : s.levels(side)) {
        const auto dist = distance_halfticks(lvl.price, mid, side);
        for (Shares j = 0; j < lvl.volume && n < n_max; ++j) {
            ++n;
            cost += dist;
            const long double pi = static_cast<long double>(cost) / (2.0L * static_cast<long double>(n));
            sum_npi += static_cast<long double>(n) * pi;
            sum_pi += pi;
        }
        if (n == n_max) break;
    }
    const long double N = static_cast<long double>(n_max);
    const long double sum_n = N * (N + 1.0L) / 2.0L;
    const long double sum_nn = N * (N + 1.0L) * (2.0L * N + 1.0L) / 6.0L;
    if (convention == SlopeIntercept::none) return static_cast<double>(sum_npi / sum_nn);
    const long double sxx = sum_nn - sum_n * sum_n / N;
    if (sxx <= 0.0L) return 0.0;
    return static_cast<double>((sum_npi - sum_n * sum_pi / N) / sxx);
}

StaticMetrics compute_static_metrics(const Snapshot& s, Shares n, SlopeIntercept convention) {
    StaticMetrics m;
    const auto ms = mid_and_spread(s);
    m.mid = ms.mid;
    m.spread = ms.spread;
    m.bi = book_imbalance(s);
    m.pi_shares = n;
    for (auto side : {Side::bid, Side::ask}) {
        const auto i = index(side);
        for (std::size_t k = 1; k <= 4; ++k) {
            const auto d = cumulative_depth(s, k, side);
            m.depth[i][k - 1] = d.shares;
            if (k == 4) m.depth_truncated[i] = d.truncated;
        }
        if (n >= 1 && visible(s, side) >= n) {
            m.pi[i] = execution_cost(s, n, side).to_double();
            m.slope[i] = impact_slope(s, n, side, convention);
        }
    }
    return m;
}

}  // namespace lobflow
