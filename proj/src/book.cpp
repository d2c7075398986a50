#include "lobflow/book.hpp"

#include "lobflow/error.hpp"

#include <string>

namespace lobflow {

namespace {

std::string describe(const Message& m) {
    return std::string(to_string(m.kind)) + " order " + std::to_string(m.order_id) + " at ts " + std::to_string(m.ts);
}

}  // namespace

std::vector<Fill> BookState::apply(const Message& m) {
    std::vector<Fill> fills;
    apply(m, fills);
    return fills;
}

void BookState::apply(const Message& m, std::vector<Fill>& fills) {
    fills.clear();
    switch (m.kind) {
        case MessageKind::add: add(m); break;
        case MessageKind::cancel: reduce(m.order_id, m.size, false, m); break;
        case MessageKind::del: reduce(m.order_id, 0, true, m); break;
        case MessageKind::modify: modify(m); break;
        case MessageKind::execute: execute(m, fills); break;
    }
    last_ts_ = m.ts;
}

BookState::Level& BookState::level_at(Side s, Ticks price) {
    return s == Side::bid ? bids_[price] : asks_[price];
}

void BookState::erase_level(Side s, Ticks price) {
    if (s == Side::bid) bids_.erase(price);
    else asks_.erase(price);
}

void BookState::add(const Message& m) {
    if (m.size <= 0) throw Error(ErrorCode::non_positive_size, describe(m));
    if (m.price <= 0) throw Error(ErrorCode::malformed_record, "non-positive price in " + describe(m));
    if (orders_.contains(m.order_id)) throw Error(ErrorCode::duplicate_order_id, describe(m));
    if (m.side == Side::bid && !asks_.empty() && m.price >= asks_.begin()->first)
        throw Error(ErrorCode::crossing_limit_order, describe(m) + " crosses best ask " + std::to_string(asks_.begin()->first));
    if (m.side == Side::ask && !bids_.empty() && m.price <= bids_.begin()->first)
        throw Error(ErrorCode::crossing_limit_order, describe(m) + " crosses best bid " + std::to_string(bids_.begin()->first));

    auto seq = next_seq_++;
    orders_.emplace(m.order_id, RestingOrder{m.side, m.price, m.size, seq});
    auto& lvl = level_at(m.side, m.price);
    lvl.volume += m.size;
    lvl.queue.push_back({m.order_id, seq});
    ledgers_[index(m.side)].added += m.size;
    resting_[index(m.side)] += m.size;
}

void BookState::reduce(OrderId id, Shares amount, bool remove_all, const Message& m) {
    auto it = orders_.find(id);
    if (it == orders_.end()) throw Error(ErrorCode::unknown_order_id, describe(m));
    auto& order = it->second;
    if (remove_all) amount = order.remaining;
    if (amount < 0) throw Error(ErrorCode::non_positive_size, describe(m));
    if (amount > order.remaining)
        throw Error(ErrorCode::cancel_exceeds_resting,
                    describe(m) + ": cancel " + std::to_string(amount) + " > resting " + std::to_string(order.remaining));
    if (amount == 0) return;

    const auto side = order.side;
    const auto price = order.price;
    auto& lvl = level_at(side, price);
    lvl.volume -= amount;
    order.remaining -= amount;
    ledgers_[index(side)].cancelled += amount;
    resting_[index(side)] -= amount;
    if (order.remaining == 0) orders_.erase(it);
    if (lvl.volume == 0) erase_level(side, price);
}

void BookState::modify(const Message& m) {
    auto it = orders_.find(m.order_id);
    if (it == orders_.end()) throw Error(ErrorCode::unknown_order_id, describe(m));
    if (m.old_size <= 0 || m.new_size < 0) throw Error(ErrorCode::non_positive_size, describe(m));
    auto& order = it->second;
    if (m.old_size > order.remaining)
        throw Error(ErrorCode::cancel_exceeds_resting,
                    describe(m) + ": old_size " + std::to_string(m.old_size) + " > resting " + std::to_string(order.remaining));

    // cancel(old_size) followed by add(new_size) at the same price
    const auto side = order.side;
    const auto price = order.price;
    auto& lvl = level_at(side, price);
    auto& ledger = ledgers_[index(side)];
    ledger.cancelled += m.old_size;
    ledger.added += m.new_size;
    resting_[index(side)] += m.new_size - m.old_size;
    lvl.volume += m.new_size - m.old_size;
    order.remaining += m.new_size - m.old_size;
    if (m.new_size > 0) {
        order.seq = next_seq_++;
        lvl.queue.push_back({m.order_id, order.seq});
    }
    if (order.remaining == 0) orders_.erase(it);
    if (lvl.volume == 0) erase_level(side, price);
}

template <class Ladder>
void BookState::consume(Ladder& ladder, Shares size, std::vector<Fill>& fills) {
    while (size > 0) {
        auto lvl_it = ladder.begin();
        auto& lvl = lvl_it->second;
        const Shares take = std::min(size, lvl.volume);
        fills.push_back({lvl_it->first, take});
        size -= take;
        lvl.volume -= take;

        // attribute to resting orders in arrival order
        Shares left = take;
        while (left > 0) {
            const auto entry = lvl.queue.front();
            auto ord = orders_.find(entry.id);
            if (ord == orders_.end() || ord->second.seq != entry.seq) {
                lvl.queue.pop_front();
                continue;
            }
            const Shares t = std::min(left, ord->second.remaining);
            ord->second.remaining -= t;
            left -= t;
            if (ord->second.remaining == 0) {
                orders_.erase(ord);
                lvl.queue.pop_front();
            }
        }
        if (lvl.volume == 0) ladder.erase(lvl_it);
    }
}

void BookState::execute(const Message& m, std::vector<Fill>& fills) {
    if (m.hidden) return;  // hidden liquidity never rests in the visible ladder
    if (m.size <= 0) throw Error(ErrorCode::non_positive_size, describe(m));
    const Side resting = opposite(m.side);
    if (m.size > resting_[index(resting)])
        throw Error(ErrorCode::execute_exceeds_visible_depth,
                    describe(m) + ": size " + std::to_string(m.size) + " > visible " + std::to_string(resting_[index(resting)]));
    if (resting == Side::ask) consume(asks_, m.size, fills);
    else consume(bids_, m.size, fills);
    ledgers_[index(resting)].executed += m.size;
    resting_[index(resting)] -= m.size;
}

Snapshot BookState::snapshot(std::size_t k) const {
    if (bids_.empty()) throw Error(ErrorCode::empty_side, "bid side is empty");
    if (asks_.empty()) throw Error(ErrorCode::empty_side, "ask side is empty");
    Snapshot s;
    s.ts = last_ts_;
    s.bids.reserve(std::min(k, bids_.size()));
    s.asks.reserve(std::min(k, asks_.size()));
    for (const auto& [p, lvl] : bids_) {
        if (s.bids.size() == k) break;
        s.bids.push_back({p, lvl.volume});
    }
    for (const auto& [p, lvl] : asks_) {
        if (s.asks.size() == k) break;
        s.asks.push_back({p, lvl.volume});
    }
    return s;
}

std::optional<Ticks> BookState::best(Side s) const {
    if (s == Side::bid) return bids_.empty() ? std::nullopt : std::optional<Ticks>(bids_.begin()->first);
    return asks_.empty() ? std::nullopt : std::optional<Ticks>(asks_.begin()->first);
}

Ticks BookState::best_bid() const {
    if (bids_.empty()) throw Error(ErrorCode::empty_side, "bid side is empty");
    return bids_.begin()->first;
}

Ticks BookState::best_ask() const {
    if (asks_.empty()) throw Error(ErrorCode::empty_side, "ask side is empty");
    return asks_.begin()->first;
}

std::optional<HalfTicks> BookState::mid() const {
    if (bids_.empty() || asks_.empty()) return std::nullopt;
    return bids_.begin()->first + asks_.begin()->first;
}

Shares BookState::volume_at(Side s, Ticks price) const {
    if (s == Side::bid) {
        auto it = bids_.find(price);
        return it == bids_.end() ? 0 : it->second.volume;
    }
    auto it = asks_.find(price);
    return it == asks_.end() ? 0 : it->second.volume;
}

Shares BookState::resting_volume(Side s) const { return resting_[index(s)]; }

const RestingOrder* BookState::find_order(OrderId id) const {
    auto it = orders_.find(id);
    return it == orders_.end() ? nullptr : &it->second;
}

bool operator==(const BookState& a, const BookState& b) {
    return a.bids_ == b.bids_ && a.asks_ == b.asks_ && a.orders_ == b.orders_ && a.ledgers_ == b.ledgers_ &&
           a.resting_ == b.resting_ && a.last_ts_ == b.last_ts_ && a.next_seq_ == b.next_seq_;
}

}  // namespace lobflow
