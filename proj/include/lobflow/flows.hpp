#pragma once

#include "lobflow/book.hpp"
#include "lobflow/static_metrics.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lobflow {

// Touch-level limit flow produced by one message, per resting side.
struct TouchFlow {
    std::array<Shares, 2> added{};
    std::array<Shares, 2> cancelled{};

    [[nodiscard]] Shares net(Side s) const { return added[index(s)] - cancelled[index(s)]; }
    TouchFlow& operator+=(const TouchFlow& o);
};

// Evaluated against the book *before* m is applied. An ADD counts when it
// joins or improves the same-side best quote; a CANCEL/DELETE counts when
// the order rests at the current best; MODIFY counts as both.
TouchFlow accumulate_touch_flow(const BookState& book, const Message& m);

// Exponential moving average of trade signs in volume time.
[[nodiscard]] double tima_update(double tima, Shares size, int sign, double beta);

struct BucketRecord {
    std::size_t index = 0;
    Timestamp open_ts = 0;
    Timestamp close_ts = 0;
    Shares volume = 0;  // target V
    Shares vm_buy = 0;
    Shares vm_sell = 0;
    double ti = 0.0;
    std::array<Shares, 2> vl_add{};
    std::array<Shares, 2> vl_cancel{};
    std::optional<HalfTicks> mid_open;
    std::optional<HalfTicks> mid_close;
    double delta_p = 0.0;  // half-ticks; NaN when either mid is unknown
    std::optional<StaticMetrics> open_metrics;
    double tima_open = 0.0;
    std::optional<double> vpin;
    std::int64_t trades = 0;
    bool zero_duration = false;
    bool complete = true;

    [[nodiscard]] Timestamp duration() const { return close_ts - open_ts; }
    [[nodiscard]] Shares vl(Side s) const { return vl_add[lobflow::index(s)] - vl_cancel[lobflow::index(s)]; }
    // Cancellations over additions at the touch; empty when nothing was added.
    [[nodiscard]] std::optional<double> pc(Side s) const;
};

struct FlowSeries {
    Shares bucket_volume = 0;
    Shares pi_shares = 0;
    std::size_t vpin_window = 0;
    std::vector<BucketRecord> buckets;

    [[nodiscard]] std::size_t complete_count() const;
};

struct BucketOptions {
    std::optional<double> tima_beta;     // per-share decay; default 0.5 / V
    std::size_t vpin_window = 20;
    std::optional<Shares> pi_shares;     // default: mean D4 rounded to 100 shares
    SlopeIntercept slope_convention = kDefaultSlopeIntercept;
    bool flip_ti_sign = false;           // TI = (sell - buy) / V instead
    std::size_t snapshot_levels = kMaxSnapshotLevels;
};

// Replays msgs through book and slices the session into buckets of exactly
// V executed shares. Messages stamped before session_start only seed the
// book. The last bucket is flagged complete=false when it did not fill.
FlowSeries bucketize(std::span<const Message> msgs, BookState& book, const SessionConfig& cfg,
                     const BucketOptions& opts = {});

// (1/l) * sum_{i=1..l} |TI_{k-i}| for every bucket k >= l; earlier entries
// are empty. Throws WindowTooLong when l is 0 or exceeds the series.
std::vector<std::optional<double>> vpin(const FlowSeries& series, std::size_t window);

// Pearson correlation; throws DegenerateWindow on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Fixed-width physical-time flows. vm[j] is volume executed against
// resting side j (asks are hit by buys).
struct TimeBucketFlow {
    Timestamp start = 0;
    std::array<Shares, 2> vm{};
    std::array<Shares, 2> vl{};
};

std::vector<TimeBucketFlow> time_bucket_flows(std::span<const Message> msgs, BookState& book,
                                              const SessionConfig& cfg, Timestamp width);

struct CorrelationPoint {
    Timestamp ts = 0;
    std::optional<double> rho;  // empty when the window is degenerate
};

// corr(VM^j, VL^j) over the trailing `window` sub-buckets, one point per
// sub-bucket once the window is full.
std::vector<CorrelationPoint> rolling_flow_correlation(std::span<const TimeBucketFlow> flows, Side side,
                                                       std::size_t window);

struct TradeImpact {
    Timestamp ts = 0;
    double signed_volume = 0.0;  // + buy, - sell
    double mid_change = 0.0;     // half-ticks across the trade
};

std::vector<TradeImpact> trade_impacts(std::span<const Message> msgs, BookState& book, const SessionConfig& cfg);

// Correlation of signed trade volume and mid change over the last m trades.
double toxicity_correlation(std::span<const TradeImpact> trades, std::size_t m = 200);
std::vector<CorrelationPoint> toxicity_trace(std::span<const TradeImpact> trades, std::size_t m = 200);

void write_buckets_csv(std::ostream& out, const FlowSeries& series);
FlowSeries read_buckets_csv(std::string_view text);

}  // namespace lobflow
