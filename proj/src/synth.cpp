#include "lobflow/synth.hpp"

#include "lobflow/book.hpp"
#include "lobflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

namespace lobflow {

void SynthConfig::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::invalid_config, what); };
    if (mode == SynthMode::message_level) {
        if (levels_per_side < 2) bad("levels_per_side must be at least 2");
        if (depth_profile.empty()) bad("depth_profile must not be empty");
        if (lot <= 0) bad("lot must be positive");
        for (auto v : depth_profile)
            if (v < lot) bad("every depth_profile entry must hold at least one lot");
        if (orders_per_level == 0) bad("orders_per_level must be positive");
        if (bucket_volume <= 0) bad("bucket_volume must be positive");
        if (start_bid <= static_cast<Ticks>(levels_per_side)) bad("start_bid too close to zero");
        if (!(market_rate > 0.0)) bad("market_rate must be positive");
        if (!(mean_trade_lots >= 1.0)) bad("mean_trade_lots must be at least 1");
        for (double r : {touch_add_rate, touch_cancel_rate, deep_add_rate, deep_cancel_rate, hidden_fraction,
                         hockey_gain, hockey_add_drop})
            if (!(r >= 0.0)) bad("intensities must be non-negative");
        for (double p : {buy_fraction, sign_persistence, improve_prob, modify_fraction})
            if (!(p >= 0.0 && p <= 1.0)) bad("probabilities must lie in [0, 1]");
    } else {
        if (n_buckets == 0) bad("n_buckets must be positive");
        if (!(sigma >= 0.0) || !(vl_sd >= 0.0)) bad("sigma and vl_sd must be non-negative");
        if (linear_volume <= 0) bad("linear_volume must be positive");
    }
}

namespace {

enum Stream : std::uint64_t { arrivals = 1, events, sizes, prices, signs, noise, picks };

std::mt19937_64 make_stream(std::uint64_t seed, Stream component) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(component)};
    return std::mt19937_64(seq);
}

class SessionGenerator {
public:
    explicit SessionGenerator(const SynthConfig& cfg)
        : cfg_(cfg),
          arrivals_(make_stream(cfg.seed, arrivals)),
          events_(make_stream(cfg.seed, events)),
          sizes_(make_stream(cfg.seed, sizes)),
          prices_(make_stream(cfg.seed, prices)),
          signs_(make_stream(cfg.seed, signs)),
          picks_(make_stream(cfg.seed, picks)) {}

    std::vector<Message> run() {
        seed_book();
        Timestamp t = cfg_.session_start;
        const Shares target = static_cast<Shares>(cfg_.target_buckets) * cfg_.bucket_volume;
        while (executed_ < target) {
            const auto rates = intensities();
            double total = 0.0;
            for (double r : rates) total += r;
            std::exponential_distribution<double> gap(total);
            t += std::max<Timestamp>(1, static_cast<Timestamp>(std::ceil(gap(arrivals_) * 1e9)));
            replenish(t);
            std::discrete_distribution<int> pick(rates.begin(), rates.end());
            switch (pick(events_)) {
                case 0: market_order(t); break;
                case 1: touch_add(t, Side::bid); break;
                case 2: touch_add(t, Side::ask); break;
                case 3: touch_cancel(t, Side::bid); break;
                case 4: touch_cancel(t, Side::ask); break;
                case 5: deep_add(t); break;
                case 6: deep_cancel(t); break;
            }
        }
        return std::move(out_);
    }

private:
    std::array<double, 7> intensities() const {
        const double excess_up = std::max(0.0, ti_run_ - cfg_.hockey_kink);
        const double excess_down = std::max(0.0, -ti_run_ - cfg_.hockey_kink);
        // buying pressure is active against the ask side
        // cancel intensities scale with resting volume relative to the seeded
        // profile, which keeps queue sizes stationary
        const double touch_ref = static_cast<double>(cfg_.depth_profile.front());
        const double q_bid = static_cast<double>(book_.volume_at(Side::bid, book_.best_bid())) / touch_ref;
        const double q_ask = static_cast<double>(book_.volume_at(Side::ask, book_.best_ask())) / touch_ref;
        const double cancel_ask = cfg_.touch_cancel_rate * q_ask * (1.0 + cfg_.hockey_gain * excess_up);
        const double cancel_bid = cfg_.touch_cancel_rate * q_bid * (1.0 + cfg_.hockey_gain * excess_down);
        const double add_ask = cfg_.touch_add_rate * std::max(0.0, 1.0 - cfg_.hockey_add_drop * excess_up);
        const double add_bid = cfg_.touch_add_rate * std::max(0.0, 1.0 - cfg_.hockey_add_drop * excess_down);
        const double deep = static_cast<double>(book_.resting_volume(Side::bid) + book_.resting_volume(Side::ask) -
                                                book_.volume_at(Side::bid, book_.best_bid()) -
                                                book_.volume_at(Side::ask, book_.best_ask()));
        const double deep_cancel = cfg_.deep_cancel_rate * deep / deep_reference_;
        return {cfg_.market_rate, add_bid, add_ask, cancel_bid, cancel_ask, cfg_.deep_add_rate, deep_cancel};
    }

    Shares lots(double mean) {
        std::geometric_distribution<int> g(1.0 / mean);
        return cfg_.lot * (1 + g(sizes_));
    }

    void emit(const Message& m) {
        book_.apply(m, fills_);
        out_.push_back(m);
        if (m.kind == MessageKind::add) live_[index(m.side)].push_back(m.order_id);
    }

    void add_order(Timestamp t, Side side, Ticks price, Shares size) {
        Message m;
        m.ts = t;
        m.kind = MessageKind::add;
        m.order_id = next_id_++;
        m.side = side;
        m.price = price;
        m.size = size;
        emit(m);
    }

    void seed_book() {
        const Timestamp t0 = cfg_.session_start - kNanosPerSecond;
        double deep = 0.0;
        for (std::size_t i = 1; i < cfg_.levels_per_side; ++i)
            deep += 2.0 * static_cast<double>(cfg_.depth_profile[std::min(i, cfg_.depth_profile.size() - 1)]);
        deep_reference_ = std::max(deep, 1.0);
        for (std::size_t i = 0; i < cfg_.levels_per_side; ++i) {
            const Shares vol = cfg_.depth_profile[std::min(i, cfg_.depth_profile.size() - 1)];
            for (auto side : {Side::bid, Side::ask}) {
                const Ticks price = side == Side::bid ? cfg_.start_bid - static_cast<Ticks>(i)
                                                      : cfg_.start_bid + 1 + static_cast<Ticks>(i);
                const Shares lots_total = vol / cfg_.lot;
                const auto n = std::min<Shares>(static_cast<Shares>(cfg_.orders_per_level), lots_total);
                for (Shares o = 0; o < n; ++o) {
                    const Shares share = lots_total / n + (o < lots_total % n ? 1 : 0);
                    add_order(t0, side, price, share * cfg_.lot);
                }
            }
        }
    }

    // Keeps at least half the configured ladder and enough volume for the
    // largest plausible trade on each side.
    void replenish(Timestamp t) {
        for (auto side : {Side::bid, Side::ask}) {
            const Shares floor_volume = static_cast<Shares>(8.0 * cfg_.mean_trade_lots) * cfg_.lot;
            while (book_.level_count(side) < cfg_.levels_per_side / 2 || book_.resting_volume(side) < floor_volume) {
                Ticks worst = 0;
                book_.for_each_level(side, [&](Ticks p, Shares) {
                    worst = p;
                    return true;
                });
                const Ticks price = side == Side::bid ? worst - 1 : worst + 1;
                if (price <= 0) break;
                add_order(t, side, price, cfg_.depth_profile.back());
            }
        }
    }

    void market_order(Timestamp t) {
        std::bernoulli_distribution repeat(cfg_.sign_persistence), fresh(cfg_.buy_fraction);
        if (!have_sign_ || !repeat(signs_)) last_buy_ = fresh(signs_);
        have_sign_ = true;
        const Side aggressor = last_buy_ ? Side::bid : Side::ask;
        const Side resting = opposite(aggressor);

        if (cfg_.hidden_fraction > 0.0) {
            std::bernoulli_distribution hidden(std::min(1.0, cfg_.hidden_fraction));
            if (hidden(events_)) {
                Message h;
                h.ts = t;
                h.kind = MessageKind::execute;
                h.order_id = next_id_++;
                h.side = aggressor;
                h.size = lots(cfg_.mean_trade_lots);
                h.hidden = true;
                out_.push_back(h);
            }
        }

        Shares size = std::min(lots(cfg_.mean_trade_lots), book_.resting_volume(resting) - cfg_.lot);
        if (size <= 0) return;

        Message m;
        m.ts = t;
        m.kind = MessageKind::execute;
        m.side = aggressor;
        m.size = size;
        m.order_id = next_id_++;
        if (!cfg_.split_executions) {
            m.price = *book_.best(resting);
            emit(m);
        } else {
            // walk the ladder the way the engine will, one message per level
            std::vector<Fill> plan;
            Shares left = size;
            book_.for_each_level(resting, [&](Ticks p, Shares v) {
                const Shares take = std::min(left, v);
                plan.push_back({p, take});
                left -= take;
                return left > 0;
            });
            for (std::size_t i = 0; i < plan.size(); ++i) {
                Message part = m;
                part.size = plan[i].size;
                part.price = plan[i].price;
                if (i > 0) part.order_id = next_id_++;
                emit(part);
            }
        }
        executed_ += size;
        ti_run_ = tima_update(ti_run_, size, last_buy_ ? 1 : -1, 0.5 / static_cast<double>(cfg_.bucket_volume));
    }

    void touch_add(Timestamp t, Side side) {
        const Ticks best = *book_.best(side);
        Ticks price = best;
        const Ticks spread = book_.best_ask() - book_.best_bid();
        if (spread > 1) {
            std::bernoulli_distribution improve(cfg_.improve_prob);
            std::uniform_int_distribution<Ticks> inside(1, spread - 1);
            if (improve(prices_)) price = side == Side::bid ? best + inside(prices_) : best - inside(prices_);
        }
        add_order(t, side, price, lots(2.0));
    }

    // Random live order on a side, optionally restricted to one price.
    std::optional<OrderId> pick_order(Side side, std::optional<Ticks> price, bool exclude_touch) {
        auto& ids = live_[index(side)];
        const auto best = book_.best(side);
        for (int attempt = 0; attempt < 64 && !ids.empty(); ++attempt) {
            std::uniform_int_distribution<std::size_t> u(0, ids.size() - 1);
            const auto i = u(picks_);
            const auto* ord = book_.find_order(ids[i]);
            if (!ord) {
                ids[i] = ids.back();
                ids.pop_back();
                continue;
            }
            if (price && ord->price != *price) continue;
            if (exclude_touch && best && ord->price == *best) continue;
            return ids[i];
        }
        if (price) {
            // fall back to a scan so a touch cancel is never silently lost
            for (auto id : ids) {
                const auto* ord = book_.find_order(id);
                if (ord && ord->price == *price) return id;
            }
        }
        return std::nullopt;
    }

    void cancel_order(Timestamp t, OrderId id) {
        const auto* ord = book_.find_order(id);
        const Side side = ord->side;
        const Shares remaining = ord->remaining;
        // never empty the last level of a side
        if (book_.level_count(side) == 1 && book_.volume_at(side, ord->price) <= remaining) return;

        Message m;
        m.ts = t;
        m.order_id = id;
        m.side = side;
        m.price = ord->price;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double r = u(events_);
        if (r < cfg_.modify_fraction && remaining > cfg_.lot) {
            m.kind = MessageKind::modify;
            m.old_size = remaining;
            m.new_size = remaining - cfg_.lot;
            m.size = remaining;
        } else if (r < cfg_.modify_fraction + 0.5 * (1.0 - cfg_.modify_fraction) || remaining <= cfg_.lot) {
            m.kind = MessageKind::del;
        } else {
            m.kind = MessageKind::cancel;
            std::uniform_int_distribution<Shares> k(1, remaining / cfg_.lot - 1);
            m.size = k(sizes_) * cfg_.lot;
        }
        emit(m);
    }

    void touch_cancel(Timestamp t, Side side) {
        if (auto id = pick_order(side, book_.best(side), false)) cancel_order(t, *id);
    }

    void deep_add(Timestamp t) {
        std::bernoulli_distribution bid_side(0.5);
        const Side side = bid_side(prices_) ? Side::bid : Side::ask;
        std::uniform_int_distribution<Ticks> offset(1, static_cast<Ticks>(cfg_.levels_per_side) - 1);
        const Ticks best = *book_.best(side);
        const Ticks price = side == Side::bid ? best - offset(prices_) : best + offset(prices_);
        if (price <= 0) return;
        add_order(t, side, price, lots(2.0));
    }

    void deep_cancel(Timestamp t) {
        std::bernoulli_distribution bid_side(0.5);
        const Side side = bid_side(prices_) ? Side::bid : Side::ask;
        if (auto id = pick_order(side, std::nullopt, true)) cancel_order(t, *id);
    }

    const SynthConfig& cfg_;
    std::mt19937_64 arrivals_, events_, sizes_, prices_, signs_, picks_;
    BookState book_;
    std::vector<Fill> fills_;
    std::vector<Message> out_;
    std::array<std::vector<OrderId>, 2> live_;
    OrderId next_id_ = 1;
    Shares executed_ = 0;
    double ti_run_ = 0.0;
    double deep_reference_ = 1.0;
    bool have_sign_ = false;
    bool last_buy_ = true;
};

}  // namespace

std::vector<Message> generate_session(const SynthConfig& cfg) {
    if (cfg.mode != SynthMode::message_level) throw Error(ErrorCode::invalid_config, "generate_session needs message-level mode");
    cfg.validate();
    return SessionGenerator(cfg).run();
}

FlowSeries sample_linear_buckets(const SynthConfig& cfg) {
    if (cfg.mode != SynthMode::bucket_level) throw Error(ErrorCode::invalid_config, "sample_linear_buckets needs bucket-level mode");
    cfg.validate();
    auto flows = make_stream(cfg.seed, sizes);
    auto noise = make_stream(cfg.seed, Stream::noise);
    std::uniform_real_distribution<double> ti_dist(-1.0, 1.0);
    std::normal_distribution<double> vl_dist(cfg.vl_mean, cfg.vl_sd);
    std::normal_distribution<double> eps(0.0, 1.0);

    const Shares V = cfg.linear_volume;
    const double Vd = static_cast<double>(V);
    FlowSeries series;
    series.bucket_volume = V;
    series.buckets.reserve(cfg.n_buckets);
    for (std::size_t k = 0; k < cfg.n_buckets; ++k) {
        BucketRecord b;
        b.index = k;
        b.open_ts = cfg.session_start + static_cast<Timestamp>(k) * 60 * kNanosPerSecond;
        b.close_ts = b.open_ts + 60 * kNanosPerSecond;
        b.volume = V;
        b.vm_buy = std::llround(Vd * (1.0 + ti_dist(flows)) / 2.0);
        b.vm_sell = V - b.vm_buy;
        b.ti = static_cast<double>(b.vm_buy - b.vm_sell) / Vd;
        for (auto side : {Side::bid, Side::ask}) {
            const Shares net = std::llround(Vd * vl_dist(flows));
            const Shares add = std::max<Shares>(net, 0) + V / 2;
            b.vl_add[index(side)] = add;
            b.vl_cancel[index(side)] = add - net;
        }
        const double net_vl = static_cast<double>(b.vl(Side::bid) - b.vl(Side::ask)) / Vd;
        b.delta_p = cfg.alpha0 + cfg.alpha1 * b.ti + cfg.alpha2 * net_vl + cfg.sigma * eps(noise);
        b.trades = 1;
        series.buckets.push_back(b);
    }
    return series;
}

}  // namespace lobflow
