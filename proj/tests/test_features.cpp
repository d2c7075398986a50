#include "lobflow/error.hpp"
#include "lobflow/features.hpp"
#include "lobflow/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace lobflow;

namespace {

FlowSeries toy_series(std::size_t n) {
    FlowSeries s;
    s.bucket_volume = 1000;
    s.vpin_window = 3;
    for (std::size_t k = 0; k < n; ++k) {
        BucketRecord b;
        b.index = k;
        b.open_ts = static_cast<Timestamp>(k + 1) * kNanosPerSecond;
        b.close_ts = b.open_ts + kNanosPerSecond;
        b.volume = 1000;
        b.vm_buy = static_cast<Shares>(100 + 37 * k % 800);
        b.vm_sell = 1000 - b.vm_buy;
        b.ti = static_cast<double>(b.vm_buy - b.vm_sell) / 1000.0;
        b.vl_add = {static_cast<Shares>(300 + k), static_cast<Shares>(500 + 2 * k)};
        b.vl_cancel = {100, 200};
        b.mid_open = static_cast<HalfTicks>(5000 + k);
        b.mid_close = static_cast<HalfTicks>(5001 + k);
        b.delta_p = 1.0;
        StaticMetrics m;
        m.bi = 0.1 * static_cast<double>(k % 5);
        m.spread = 1;
        m.pi = {0.5, 0.6};
        m.slope = {1e-4, 2e-4};
        b.open_metrics = m;
        b.vpin = 0.5;
        s.buckets.push_back(b);
    }
    return s;
}

}  // namespace

TEST_CASE("alignment arithmetic") {
    const auto fm = build_feature_matrix(toy_series(25));
    CHECK(fm.rows.size() <= 5);
    CHECK(fm.rows.size() == 5);
    CHECK(fm.rows.front().bucket == 20);
    CHECK_THROWS_AS(build_feature_matrix(toy_series(20)), Error);
}

TEST_CASE("lagged columns equal the stored values of earlier buckets") {
    const auto s = toy_series(40);
    const auto fm = build_feature_matrix(s);
    const auto c5 = fm.column("ti_lag5");
    const auto cvl = fm.column("vl_bid_lag10");
    for (const auto& r : fm.rows) {
        CHECK(r.values[c5] == s.buckets[r.bucket - 5].ti);
        CHECK(r.values[cvl] == static_cast<double>(s.buckets[r.bucket - 10].vl(Side::bid)) / 1000.0);
        CHECK(r.values[fm.column("delta_p")] == s.buckets[r.bucket].delta_p);
        CHECK(r.values[fm.column("net_vl")] ==
              doctest::Approx((static_cast<double>(s.buckets[r.bucket].vl(Side::bid) - s.buckets[r.bucket].vl(Side::ask))) / 1000.0));
        const double avg = (s.buckets[r.bucket - 1].ti + s.buckets[r.bucket - 2].ti + s.buckets[r.bucket - 3].ti) / 3.0;
        CHECK(r.values[fm.column("ti_avg3")] == doctest::Approx(avg));
    }
}

TEST_CASE("ineligible buckets are excluded") {
    auto s = toy_series(30);
    s.buckets[24].zero_duration = true;
    s.buckets[24].close_ts = s.buckets[24].open_ts;
    s.buckets[26].delta_p = std::nan("");
    s.buckets[29].complete = false;
    const auto fm = build_feature_matrix(s);
    for (const auto& r : fm.rows) {
        CHECK(r.bucket != 24);
        CHECK(r.bucket != 26);
        CHECK(r.bucket != 29);
    }
    CHECK(fm.rows.size() == 6);  // row 27 also goes: its lag-1 delta_p is bucket 26
}

TEST_CASE("optional covariates stay blank rather than dropping the row") {
    auto s = toy_series(25);
    s.buckets[22].open_metrics->pi = {std::nullopt, std::nullopt};
    s.buckets[23].vl_add = {0, 0};
    s.buckets[23].vl_cancel = {0, 0};
    const auto fm = build_feature_matrix(s);
    CHECK(fm.rows.size() == 5);
    CHECK(std::isnan(fm.rows[2].values[fm.column("pi_ask")]));
    CHECK(std::isnan(fm.rows[3].values[fm.column("pc_bid")]));
    CHECK(fm.finite_rows({"ti", "pi_ask"}).size() == 4);
    CHECK(fm.finite_rows({"ti", "pc_bid", "pi_ask"}).size() == 3);
}

TEST_CASE("feature CSV round trip") {
    const auto fm = build_feature_matrix(toy_series(30));
    std::ostringstream out;
    write_features_csv(out, fm);
    const auto back = read_features_csv(out.str());
    CHECK(back.columns == fm.columns);
    REQUIRE(back.rows.size() == fm.rows.size());
    for (std::size_t r = 0; r < fm.rows.size(); ++r) {
        CHECK(back.rows[r].bucket == fm.rows[r].bucket);
        CHECK(back.rows[r].values == fm.rows[r].values);
    }
}

TEST_CASE("features from a replayed synthetic session") {
    SynthConfig sc;
    sc.seed = 12;
    sc.target_buckets = 60;
    const auto msgs = generate_session(sc);
    SessionConfig cfg;
    cfg.bucket_volume = sc.bucket_volume;
    BookState book;
    const auto s = bucketize(msgs, book, cfg);
    const auto fm = build_feature_matrix(s);
    CHECK(fm.rows.size() >= 30);
    for (const auto& r : fm.rows) CHECK(fit_eligible(s.buckets[r.bucket]));
}
