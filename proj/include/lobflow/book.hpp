#pragma once

#include "lobflow/message.hpp"

#include <array>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace lobflow {

inline constexpr std::size_t kMaxSnapshotLevels = 30;

struct Fill {
    Ticks price = 0;
    Shares size = 0;
    friend bool operator==(const Fill&, const Fill&) = default;
};

struct PriceLevel {
    Ticks price = 0;
    Shares volume = 0;
    friend bool operator==(const PriceLevel&, const PriceLevel&) = default;
};

// Top-of-book view. Levels are ordered from the touch outwards; occupied
// levels only, so an empty tick in the ladder does not take an index.
struct Snapshot {
    Timestamp ts = 0;
    std::vector<PriceLevel> bids;  // descending price
    std::vector<PriceLevel> asks;  // ascending price

    [[nodiscard]] const std::vector<PriceLevel>& levels(Side s) const { return s == Side::bid ? bids : asks; }
    [[nodiscard]] Ticks best_bid() const { return bids.front().price; }
    [[nodiscard]] Ticks best_ask() const { return asks.front().price; }

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// Running per-side totals backing the volume conservation identity
// added - cancelled - executed == resting.
struct SideLedger {
    Shares added = 0;
    Shares cancelled = 0;
    Shares executed = 0;
    friend bool operator==(const SideLedger&, const SideLedger&) = default;
};

struct RestingOrder {
    Side side = Side::bid;
    Ticks price = 0;
    Shares remaining = 0;
    std::uint64_t seq = 0;
    friend bool operator==(const RestingOrder&, const RestingOrder&) = default;
};

// Two-sided price-level ladder replayed from normalized messages.
//
// Executions walk the opposite ladder from the touch. Inside a level, the
// shares taken are attributed to resting orders in arrival order so that
// later CANCEL/DELETE messages stay consistent with the order index.
// Every operation is atomic: on error the book is left untouched.
class BookState {
public:
    // Applies one message; returns the per-level fills of an EXECUTE.
    std::vector<Fill> apply(const Message& m);
    void apply(const Message& m, std::vector<Fill>& fills);

    [[nodiscard]] Snapshot snapshot(std::size_t k = kMaxSnapshotLevels) const;

    [[nodiscard]] std::optional<Ticks> best(Side s) const;
    [[nodiscard]] Ticks best_bid() const;  // throws EmptySide
    [[nodiscard]] Ticks best_ask() const;  // throws EmptySide
    [[nodiscard]] bool empty(Side s) const { return ladder_size(s) == 0; }
    [[nodiscard]] std::optional<HalfTicks> mid() const;

    [[nodiscard]] Shares volume_at(Side s, Ticks price) const;
    [[nodiscard]] Shares resting_volume(Side s) const;
    [[nodiscard]] std::size_t level_count(Side s) const { return ladder_size(s); }
    [[nodiscard]] const SideLedger& ledger(Side s) const { return ledgers_[index(s)]; }
    [[nodiscard]] const RestingOrder* find_order(OrderId id) const;
    [[nodiscard]] std::size_t order_count() const { return orders_.size(); }
    [[nodiscard]] Timestamp last_ts() const { return last_ts_; }

    // Visits (price, volume) from the touch outwards until fn returns false.
    template <class Fn>
    void for_each_level(Side s, Fn&& fn) const {
        if (s == Side::bid) {
            for (const auto& [p, lvl] : bids_)
                if (!fn(p, lvl.volume)) return;
        } else {
            for (const auto& [p, lvl] : asks_)
                if (!fn(p, lvl.volume)) return;
        }
    }

    friend bool operator==(const BookState& a, const BookState& b);

private:
    struct QueueEntry {
        OrderId id;
        std::uint64_t seq;
        friend bool operator==(const QueueEntry&, const QueueEntry&) = default;
    };
    struct Level {
        Shares volume = 0;
        std::deque<QueueEntry> queue;
        friend bool operator==(const Level&, const Level&) = default;
    };
    using BidLadder = std::map<Ticks, Level, std::greater<>>;
    using AskLadder = std::map<Ticks, Level, std::less<>>;

    [[nodiscard]] std::size_t ladder_size(Side s) const { return s == Side::bid ? bids_.size() : asks_.size(); }

    void add(const Message& m);
    void reduce(OrderId id, Shares amount, bool remove_all, const Message& m);
    void modify(const Message& m);
    void execute(const Message& m, std::vector<Fill>& fills);

    template <class Ladder>
    void consume(Ladder& ladder, Shares size, std::vector<Fill>& fills);
    Level& level_at(Side s, Ticks price);
    void erase_level(Side s, Ticks price);

    BidLadder bids_;
    AskLadder asks_;
    std::unordered_map<OrderId, RestingOrder> orders_;
    std::array<SideLedger, 2> ledgers_{};
    std::array<Shares, 2> resting_{};
    Timestamp last_ts_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace lobflow
