#include "lobflow/flows.hpp"

#include "lobflow/csv.hpp"
#include "lobflow/error.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace lobflow {

TouchFlow& TouchFlow::operator+=(const TouchFlow& o) {
    for (std::size_t i = 0; i < 2; ++i) {
        added[i] += o.added[i];
        cancelled[i] += o.cancelled[i];
    }
    return *this;
}

namespace {

bool joins_or_improves_touch(const BookState& book, Side side, Ticks price) {
    const auto best = book.best(side);
    if (!best) return true;
    return side == Side::bid ? price >= *best : price <= *best;
}

bool at_touch(const BookState& book, Side side, Ticks price) {
    const auto best = book.best(side);
    return best && *best == price;
}

}  // namespace

TouchFlow accumulate_touch_flow(const BookState& book, const Message& m) {
    TouchFlow f;
    switch (m.kind) {
        case MessageKind::add:
            if (joins_or_improves_touch(book, m.side, m.price)) f.added[index(m.side)] += m.size;
            break;
        case MessageKind::cancel:
        case MessageKind::del: {
            const auto* order = book.find_order(m.order_id);
            if (!order || !at_touch(book, order->side, order->price)) break;
            const Shares amount = m.kind == MessageKind::del ? order->remaining : std::min(m.size, order->remaining);
            f.cancelled[index(order->side)] += amount;
            break;
        }
        case MessageKind::modify: {
            const auto* order = book.find_order(m.order_id);
            if (!order || !at_touch(book, order->side, order->price)) break;
            f.cancelled[index(order->side)] += m.old_size;
            f.added[index(order->side)] += m.new_size;
            break;
        }
        case MessageKind::execute:
            break;
    }
    return f;
}

double tima_update(double tima, Shares size, int sign, double beta) {
    const double w = std::exp(-beta * static_cast<double>(size));
    return w * tima + (1.0 - w) * static_cast<double>(sign);
}

std::optional<double> BucketRecord::pc(Side s) const {
    const auto add = vl_add[lobflow::index(s)];
    if (add == 0) return std::nullopt;
    return static_cast<double>(vl_cancel[lobflow::index(s)]) / static_cast<double>(add);
}

std::size_t FlowSeries::complete_count() const {
    std::size_t n = 0;
    for (const auto& b : buckets) n += b.complete ? 1 : 0;
    return n;
}

namespace {

struct OpenBucket {
    BucketRecord rec;
    std::optional<Snapshot> snap;
    Shares executed() const { return rec.vm_buy + rec.vm_sell; }
};

double trade_imbalance(Shares buy, Shares sell, bool flip) {
    const auto total = buy + sell;
    if (total == 0) return 0.0;
    const double ti = static_cast<double>(buy - sell) / static_cast<double>(total);
    return flip ? -ti : ti;
}

Shares round_to_hundred(double x) {
    auto n = static_cast<Shares>(std::llround(x / 100.0)) * 100;
    return n < 100 ? 100 : n;
}

}  // namespace

FlowSeries bucketize(std::span<const Message> msgs, BookState& book, const SessionConfig& cfg,
                     const BucketOptions& opts) {
    cfg.validate();
    const Shares V = cfg.bucket_volume;
    const double beta = opts.tima_beta.value_or(0.5 / static_cast<double>(V));

    FlowSeries series;
    series.bucket_volume = V;
    std::vector<std::optional<Snapshot>> open_snaps;

    auto take_snapshot = [&]() -> std::optional<Snapshot> {
        if (book.empty(Side::bid) || book.empty(Side::ask)) return std::nullopt;
        return book.snapshot(opts.snapshot_levels);
    };

    double tima = 0.0;
    std::optional<OpenBucket> cur;
    auto open_bucket = [&](Timestamp ts) {
        OpenBucket b;
        b.rec.index = series.buckets.size();
        b.rec.open_ts = ts;
        b.rec.volume = V;
        b.rec.mid_open = book.mid();
        b.rec.tima_open = tima;
        b.snap = take_snapshot();
        if (b.snap) b.snap->ts = ts;
        cur = std::move(b);
    };
    auto close_bucket = [&](Timestamp ts, bool complete) {
        auto& r = cur->rec;
        r.close_ts = ts;
        r.mid_close = book.mid();
        r.delta_p = (r.mid_open && r.mid_close) ? static_cast<double>(*r.mid_close - *r.mid_open) : std::nan("");
        r.ti = trade_imbalance(r.vm_buy, r.vm_sell, opts.flip_ti_sign);
        r.zero_duration = r.close_ts == r.open_ts;
        r.complete = complete;
        open_snaps.push_back(std::move(cur->snap));
        series.buckets.push_back(r);
        cur.reset();
    };

    std::vector<Fill> fills;
    bool any_in_bucket = false;
    Timestamp last_ts = cfg.session_start;
    for (const auto& m : msgs) {
        if (m.ts > cfg.session_end) break;
        if (m.ts < cfg.session_start) {
            book.apply(m, fills);
            continue;
        }
        if (!cur) open_bucket(cfg.session_start);
        if (m.kind == MessageKind::execute && m.hidden) continue;

        const auto flow = accumulate_touch_flow(book, m);
        for (std::size_t i = 0; i < 2; ++i) {
            cur->rec.vl_add[i] += flow.added[i];
            cur->rec.vl_cancel[i] += flow.cancelled[i];
        }
        book.apply(m, fills);
        any_in_bucket = true;
        last_ts = m.ts;
        if (m.kind != MessageKind::execute) continue;

        const bool buy = m.side == Side::bid;
        tima = tima_update(tima, m.size, buy ? 1 : -1, beta);
        ++cur->rec.trades;
        Shares left = m.size;
        while (left > 0) {
            const Shares take = std::min(left, V - cur->executed());
            (buy ? cur->rec.vm_buy : cur->rec.vm_sell) += take;
            left -= take;
            if (cur->executed() == V) {
                close_bucket(m.ts, true);
                open_bucket(m.ts);
                any_in_bucket = false;
                // the remainder of a split trade belongs to the new bucket
                if (left > 0) ++cur->rec.trades;
            }
        }
    }
    if (cur && (any_in_bucket || cur->executed() > 0)) close_bucket(last_ts, false);

    // PI/slope need the session-wide N before they can be evaluated.
    Shares n = 0;
    if (opts.pi_shares) {
        n = *opts.pi_shares;
    } else {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& s : open_snaps) {
            if (!s) continue;
            sum += 0.5 * static_cast<double>(cumulative_depth(*s, 4, Side::bid).shares +
                                             cumulative_depth(*s, 4, Side::ask).shares);
            ++count;
        }
        n = count ? round_to_hundred(sum / static_cast<double>(count)) : 100;
    }
    series.pi_shares = n;
    for (std::size_t k = 0; k < series.buckets.size(); ++k)
        if (open_snaps[k]) series.buckets[k].open_metrics = compute_static_metrics(*open_snaps[k], n, opts.slope_convention);

    series.vpin_window = opts.vpin_window;
    if (opts.vpin_window > 0 && opts.vpin_window <= series.buckets.size()) {
        auto trace = vpin(series, opts.vpin_window);
        for (std::size_t k = 0; k < trace.size(); ++k) series.buckets[k].vpin = trace[k];
    }
    return series;
}

std::vector<std::optional<double>> vpin(const FlowSeries& series, std::size_t window) {
    const auto& b = series.buckets;
    if (window == 0 || window > b.size())
        throw Error(ErrorCode::window_too_long,
                    "window " + std::to_string(window) + " with " + std::to_string(b.size()) + " buckets");
    std::vector<std::optional<double>> out(b.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (k >= window) {
            out[k] = sum / static_cast<double>(window);
            sum -= std::abs(b[k - window].ti);
        }
        sum += std::abs(b[k].ti);
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::dimension_mismatch, "pearson: length mismatch");
    if (x.size() < 3) throw Error(ErrorCode::degenerate_window, "fewer than 3 observations");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw Error(ErrorCode::degenerate_window, "zero variance in window");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<TimeBucketFlow> time_bucket_flows(std::span<const Message> msgs, BookState& book,
                                              const SessionConfig& cfg, Timestamp width) {
    cfg.validate();
    if (width <= 0) throw Error(ErrorCode::invalid_config, "sub-bucket width must be positive");
    std::vector<TimeBucketFlow> out;
    std::vector<Fill> fills;
    for (const auto& m : msgs) {
        if (m.ts > cfg.session_end) break;
        if (m.ts < cfg.session_start) {
            book.apply(m, fills);
            continue;
        }
        if (m.kind == MessageKind::execute && m.hidden) continue;
        const auto slot = static_cast<std::size_t>((m.ts - cfg.session_start) / width);
        while (out.size() <= slot) out.push_back({cfg.session_start + static_cast<Timestamp>(out.size()) * width, {}, {}});
        auto& tb = out[slot];
        const auto flow = accumulate_touch_flow(book, m);
        book.apply(m, fills);
        for (auto s : {Side::bid, Side::ask}) tb.vl[index(s)] += flow.net(s);
        if (m.kind == MessageKind::execute) tb.vm[index(opposite(m.side))] += m.size;
    }
    return out;
}

std::vector<CorrelationPoint> rolling_flow_correlation(std::span<const TimeBucketFlow> flows, Side side,
                                                       std::size_t window) {
    if (window < 3) throw Error(ErrorCode::invalid_config, "correlation window needs at least 3 sub-buckets");
    if (window > flows.size())
        throw Error(ErrorCode::window_too_long,
                    "window " + std::to_string(window) + " > " + std::to_string(flows.size()) + " sub-buckets");
    std::vector<CorrelationPoint> out;
    std::vector<double> vm(window), vl(window);
    for (std::size_t end = window; end <= flows.size(); ++end) {
        for (std::size_t i = 0; i < window; ++i) {
            const auto& f = flows[end - window + i];
            vm[i] = static_cast<double>(f.vm[index(side)]);
            vl[i] = static_cast<double>(f.vl[index(side)]);
        }
        CorrelationPoint p;
        p.ts = flows[end - 1].start;
        try {
            p.rho = pearson(vm, vl);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::degenerate_window) throw;
        }
        out.push_back(p);
    }
    return out;
}

std::vector<TradeImpact> trade_impacts(std::span<const Message> msgs, BookState& book, const SessionConfig& cfg) {
    std::vector<TradeImpact> out;
    std::vector<Fill> fills;
    for (const auto& m : msgs) {
        if (m.ts > cfg.session_end) break;
        if (m.kind == MessageKind::execute && m.hidden) continue;
        if (m.ts < cfg.session_start || m.kind != MessageKind::execute) {
            book.apply(m, fills);
            continue;
        }
        const auto before = book.mid();
        book.apply(m, fills);
        const auto after = book.mid();
        const double sign = m.side == Side::bid ? 1.0 : -1.0;
        out.push_back({m.ts, sign * static_cast<double>(m.size),
                       (before && after) ? static_cast<double>(*after - *before) : 0.0});
    }
    return out;
}

namespace {

std::optional<double> window_corr(std::span<const TradeImpact> w, bool strict) {
    std::vector<double> x(w.size()), y(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        x[i] = w[i].signed_volume;
        y[i] = w[i].mid_change;
    }
    if (strict) return pearson(x, y);
    try {
        return pearson(x, y);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_window) throw;
        return std::nullopt;
    }
}

}  // namespace

double toxicity_correlation(std::span<const TradeImpact> trades, std::size_t m) {
    if (m < 3) throw Error(ErrorCode::invalid_config, "toxicity window needs at least 3 trades");
    if (trades.size() < m)
        throw Error(ErrorCode::window_too_long,
                    "need " + std::to_string(m) + " trades, have " + std::to_string(trades.size()));
    return *window_corr(trades.subspan(trades.size() - m), true);
}

std::vector<CorrelationPoint> toxicity_trace(std::span<const TradeImpact> trades, std::size_t m) {
    if (m < 3) throw Error(ErrorCode::invalid_config, "toxicity window needs at least 3 trades");
    std::vector<CorrelationPoint> out;
    for (std::size_t end = m; end <= trades.size(); ++end)
        out.push_back({trades[end - 1].ts, window_corr(trades.subspan(end - m, m), false)});
    return out;
}

// ---- bucket CSV ----

namespace {

constexpr const char* kBucketColumns[] = {
    "index", "open_ts", "close_ts", "duration_ns", "volume", "vm_buy", "vm_sell", "ti",
    "vl_bid", "vl_ask", "vl_add_bid", "vl_cancel_bid", "vl_add_ask", "vl_cancel_ask", "pc_bid", "pc_ask",
    "mid_open", "mid_close", "delta_p", "spread_open", "bi_open",
    "d1_bid", "d2_bid", "d3_bid", "d4_bid", "d1_ask", "d2_ask", "d3_ask", "d4_ask",
    "pi_n", "pi_bid", "pi_ask", "slope_bid", "slope_ask",
    "tima_open", "vpin", "trades", "zero_duration", "complete"};

std::string opt_int(const std::optional<HalfTicks>& v) { return v ? std::to_string(*v) : std::string{}; }

}  // namespace

void write_buckets_csv(std::ostream& out, const FlowSeries& series) {
    out << "# volume buckets: shares for volumes, half-ticks for mid/delta_p, ticks for spread and pi,\n"
        << "# ticks per share for slope, nanoseconds since midnight for timestamps\n"
        << "# bucket_volume=" << series.bucket_volume << " pi_shares=" << series.pi_shares
        << " vpin_window=" << series.vpin_window << '\n';
    bool first = true;
    for (const char* c : kBucketColumns) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    out << '\n';
    for (const auto& b : series.buckets) {
        out << b.index << ',' << b.open_ts << ',' << b.close_ts << ',' << b.duration() << ',' << b.volume << ','
            << b.vm_buy << ',' << b.vm_sell << ',' << csv::fmt(b.ti) << ',' << b.vl(Side::bid) << ','
            << b.vl(Side::ask) << ',' << b.vl_add[0] << ',' << b.vl_cancel[0] << ',' << b.vl_add[1] << ','
            << b.vl_cancel[1] << ',' << csv::fmt(b.pc(Side::bid)) << ',' << csv::fmt(b.pc(Side::ask)) << ','
            << opt_int(b.mid_open) << ',' << opt_int(b.mid_close) << ',' << csv::fmt(b.delta_p) << ',';
        if (const auto& m = b.open_metrics) {
            out << m->spread << ',' << csv::fmt(m->bi) << ',';
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t k = 0; k < 4; ++k) out << m->depth[s][k] << ',';
            out << m->pi_shares << ',' << csv::fmt(m->pi[0]) << ',' << csv::fmt(m->pi[1]) << ','
                << csv::fmt(m->slope[0]) << ',' << csv::fmt(m->slope[1]) << ',';
        } else {
            out << std::string(15, ',');
        }
        out << csv::fmt(b.tima_open) << ',' << csv::fmt(b.vpin) << ',' << b.trades << ',' << (b.zero_duration ? 1 : 0)
            << ',' << (b.complete ? 1 : 0) << '\n';
    }
}

FlowSeries read_buckets_csv(std::string_view text) {
    const auto table = csv::parse(text);
    FlowSeries series;
    std::size_t col[std::size(kBucketColumns)];
    for (std::size_t i = 0; i < std::size(kBucketColumns); ++i) col[i] = table.column(kBucketColumns[i]);

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.row_lines[r];
        auto cell = [&](std::size_t i) -> std::string_view { return row[col[i]]; };
        auto req_int = [&](std::size_t i) -> long long {
            auto v = csv::to_int(cell(i), line);
            if (!v) throw ParseError(ErrorCode::malformed_record, line, std::string("empty ") + kBucketColumns[i]);
            return *v;
        };
        auto opt_d = [&](std::size_t i) { return csv::to_double(cell(i), line); };

        BucketRecord b;
        b.index = static_cast<std::size_t>(req_int(0));
        b.open_ts = req_int(1);
        b.close_ts = req_int(2);
        b.volume = req_int(4);
        b.vm_buy = req_int(5);
        b.vm_sell = req_int(6);
        b.ti = opt_d(7).value_or(0.0);
        b.vl_add[0] = req_int(10);
        b.vl_cancel[0] = req_int(11);
        b.vl_add[1] = req_int(12);
        b.vl_cancel[1] = req_int(13);
        if (auto v = csv::to_int(cell(16), line)) b.mid_open = *v;
        if (auto v = csv::to_int(cell(17), line)) b.mid_close = *v;
        b.delta_p = opt_d(18).value_or(std::nan(""));
        if (auto spread = csv::to_int(cell(19), line)) {
            StaticMetrics m;
            m.spread = *spread;
            m.mid = b.mid_open.value_or(0);
            m.bi = opt_d(20).value_or(0.0);
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t k = 0; k < 4; ++k) m.depth[s][k] = csv::to_int(cell(21 + 4 * s + k), line).value_or(0);
            m.pi_shares = csv::to_int(cell(29), line).value_or(0);
            m.pi[0] = opt_d(30);
            m.pi[1] = opt_d(31);
            m.slope[0] = opt_d(32);
            m.slope[1] = opt_d(33);
            b.open_metrics = m;
            series.pi_shares = m.pi_shares;
        }
        b.tima_open = opt_d(34).value_or(0.0);
        b.vpin = opt_d(35);
        b.trades = req_int(36);
        b.zero_duration = req_int(37) != 0;
        b.complete = req_int(38) != 0;
        if (series.bucket_volume == 0) series.bucket_volume = b.volume;
        series.buckets.push_back(b);
    }
    const auto key = text.find("vpin_window=");
    if (key != std::string_view::npos) {
        const auto start = key + std::string_view("vpin_window=").size();
        const auto end = text.find_first_of(" \r\n", start);
        if (auto v = csv::to_int(text.substr(start, end - start), 0)) series.vpin_window = static_cast<std::size_t>(*v);
    }
    return series;
}

}  // namespace lobflow
