#include "fixtures.hpp"

#include "lobflow/error.hpp"
#include "lobflow/static_metrics.hpp"

#include <doctest.h>

#include <random>

using namespace lobflow;
using namespace lobflow::testing;

namespace {

Snapshot make_snapshot(Ticks bid, Ticks ask, std::vector<Shares> bid_q, std::vector<Shares> ask_q) {
    Snapshot s;
    for (std::size_t i = 0; i < bid_q.size(); ++i) s.bids.push_back({bid - static_cast<Ticks>(i), bid_q[i]});
    for (std::size_t i = 0; i < ask_q.size(); ++i) s.asks.push_back({ask + static_cast<Ticks>(i), ask_q[i]});
    return s;
}

// Oracle: expand the ladder share by share and average distances directly.
std::vector<double> brute_force_pi(const Snapshot& s, Shares n_max, Side side) {
    const double mid = 0.5 * static_cast<double>(s.best_bid() + s.best_ask());
    std::vector<double> per_share;
    for (const auto& lvl : s.levels(side))
        for (Shares j = 0; j < lvl.volume; ++j)
            per_share.push_back(side == Side::ask ? static_cast<double>(lvl.price) - mid : mid - static_cast<double>(lvl.price));
    std::vector<double> pi;
    double cum = 0.0;
    for (Shares n = 1; n <= n_max; ++n) {
        cum += per_share[static_cast<std::size_t>(n - 1)];
        pi.push_back(cum / static_cast<double>(n));
    }
    return pi;
}

double ols_through_origin(const std::vector<double>& pi) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        sxy += n * pi[i];
        sxx += n * n;
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("mid and spread on the half-tick grid") {
    auto s = make_snapshot(2629, 2630, {100}, {100});
    CHECK(mid_and_spread(s).mid == 5259);
    CHECK(mid_and_spread(s).spread == 1);
    s = make_snapshot(2629, 2631, {100}, {100});
    CHECK(mid_and_spread(s).spread == 2);
    const auto shifted = make_snapshot(2639, 2641, {100}, {100});
    CHECK(mid_and_spread(shifted).mid == mid_and_spread(s).mid + 20);
    CHECK(mid_and_spread(shifted).spread == mid_and_spread(s).spread);
}

TEST_CASE("book imbalance") {
    CHECK(book_imbalance(make_snapshot(10, 11, {500}, {500})) == 0.0);
    CHECK(book_imbalance(make_snapshot(10, 11, {24000}, {8000})) == doctest::Approx(-0.5).epsilon(1e-15));
    const auto a = make_snapshot(10, 11, {300}, {700});
    const auto b = make_snapshot(10, 11, {700}, {300});
    CHECK(book_imbalance(a) == -book_imbalance(b));
    CHECK_THROWS_AS(book_imbalance(make_snapshot(10, 11, {}, {5})), Error);
}

TEST_CASE("cumulative depth counts occupied levels") {
    const auto s = reference_book().snapshot();
    CHECK(cumulative_depth(s, 1, Side::ask).shares == 8000);
    CHECK(cumulative_depth(s, 2, Side::ask).shares == 18000);
    const auto all = cumulative_depth(s, 9, Side::ask);
    CHECK(all.shares == 40000);
    CHECK(all.truncated);

    // a gap in the ladder does not take an index
    Snapshot gap;
    gap.bids = {{100, 10}};
    gap.asks = {{101, 5}, {104, 7}};
    CHECK(cumulative_depth(gap, 2, Side::ask).shares == 12);
    CHECK_FALSE(cumulative_depth(gap, 2, Side::ask).truncated);
}

TEST_CASE("execution cost on the reference ladder") {
    const auto s = reference_book().snapshot();
    CHECK(execution_cost(s, 30000, Side::ask) == Rational(9, 5));
    CHECK(execution_cost(s, 8000, Side::ask) == Rational(1, 2));
    CHECK(execution_cost(s, 1, Side::ask) == Rational(1, 2));
    CHECK(execution_cost(s, 18000, Side::ask) == Rational(19000, 18000));
    CHECK_THROWS_AS(execution_cost(s, 40001, Side::ask), Error);
}

TEST_CASE("execution cost uses true price distance across gaps") {
    Snapshot s;
    s.bids = {{100, 10}};
    s.asks = {{101, 10}, {103, 10}};
    // 10 shares at 0.5 ticks, 10 at 2.5 ticks
    CHECK(execution_cost(s, 20, Side::ask) == Rational(3, 2));
}

TEST_CASE("execution cost is non-decreasing and flat at half-spread on the first queue") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<Shares> q(1, 400);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Shares> asks(6), bids(3);
        for (auto& v : asks) v = q(rng);
        for (auto& v : bids) v = q(rng);
        const Ticks spread = 1 + trial % 3;
        const auto s = make_snapshot(500, 500 + spread, bids, asks);
        Rational prev(0);
        Shares total = 0;
        for (auto v : asks) total += v;
        for (Shares n = 1; n <= total; n += 7) {
            const auto pi = execution_cost(s, n, Side::ask);
            CHECK(pi >= prev);
            if (n <= asks[0]) CHECK(pi == Rational(spread, 2));
            prev = pi;
        }
    }
}

TEST_CASE("impact slope on the reference ladder") {
    const auto s = reference_book().snapshot();
    const double slope = impact_slope(s, 30000, Side::ask);
    CHECK(slope * 1000.0 == doctest::Approx(0.0611).epsilon(0.01));
    CHECK(0.5 / slope == doctest::Approx(8176).epsilon(0.01));
    // streaming pass agrees with the brute-force grid
    CHECK(slope == doctest::Approx(ols_through_origin(brute_force_pi(s, 30000, Side::ask))).epsilon(1e-12));
    // the intercept convention is well away from the published value
    const double fitted = impact_slope(s, 30000, Side::ask, SlopeIntercept::fitted);
    CHECK(std::abs(fitted * 1000.0 / 0.0611 - 1.0) > 0.05);
}

TEST_CASE("impact slope of a rectangular book") {
    for (Shares w : {100, 1000, 4000}) {
        const std::vector<Shares> levels(10, w);
        const auto s = make_snapshot(1000, 1001, levels, levels);
        const double slope = impact_slope(s, 10 * w, Side::ask);
        CHECK(slope * 2.0 * static_cast<double>(w) == doctest::Approx(1.0).epsilon(0.02));
        CHECK(slope == doctest::Approx(ols_through_origin(brute_force_pi(s, 10 * w, Side::ask))).epsilon(1e-12));

        const std::vector<Shares> doubled(10, 2 * w);
        const auto s2 = make_snapshot(1000, 1001, doubled, doubled);
        CHECK(impact_slope(s2, 10 * w, Side::bid) == doctest::Approx(slope / 2.0).epsilon(0.05));
    }
}

TEST_CASE("compute_static_metrics flags missing depth instead of extrapolating") {
    const auto s = reference_book().snapshot();
    const auto m = compute_static_metrics(s, 30000);
    CHECK(m.pi[index(Side::ask)].value() == doctest::Approx(1.8));
    CHECK_FALSE(m.pi[index(Side::bid)].has_value());  // only 8000 bid shares
    CHECK(m.depth[index(Side::ask)][3] == 40000);
    CHECK(m.depth_truncated[index(Side::bid)]);
    CHECK(m.spread == 1);
}
