#include "lobflow/error.hpp"
#include "lobflow/stats.hpp"
#include "lobflow/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lobflow;
using namespace lobflow::stats;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_config;
}

}  // namespace

TEST_CASE("OLS exact fits") {
    Eigen::MatrixXd X(5, 1);
    X << 1, 2, 3, 4, 5;
    const Eigen::VectorXd y = 2.0 * X.col(0);
    const auto fit = ols_fit(X, y, true, {"x"});
    CHECK(fit.names.front() == "intercept");
    CHECK(*fit.coefficient("x") == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(*fit.coefficient("intercept")) < 1e-12);
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK_FALSE(fit.coefficient("missing").has_value());
}

TEST_CASE("OLS errors") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 2, 4, 3, 6, 4, 8;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 5;
    CHECK(code_of([&] { ols_fit(X, y, true); }) == ErrorCode::rank_deficient);
    Eigen::VectorXd short_y(3);
    short_y << 1, 2, 3;
    CHECK(code_of([&] { ols_fit(X, short_y, false); }) == ErrorCode::dimension_mismatch);
    CHECK(category_of(ErrorCode::rank_deficient) == ErrorCategory::numerical);
}

TEST_CASE("OLS Monte Carlo recovery and residual orthogonality") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> nl(0.0, 1.0), eps(0.0, 0.1);
    const int n = 10000;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = u(rng);
        X(i, 1) = nl(rng);
        y[i] = 0.3 + 1.2 * X(i, 0) + 0.7 * X(i, 1) + eps(rng);
    }
    const auto fit = ols_fit(X, y, true, {"ti", "nl"});
    CHECK(*fit.coefficient("intercept") == doctest::Approx(0.3).epsilon(0.02 / 0.3));
    CHECK(std::abs(*fit.coefficient("ti") - 1.2) < 0.02);
    CHECK(std::abs(*fit.coefficient("nl") - 0.7) < 0.02);
    CHECK(*fit.standard_error("ti") > 0.0);
    const double scale = X.norm() * fit.residuals.norm();
    CHECK(std::abs(fit.residuals.sum()) < 1e-8 * std::sqrt(double(n)) * fit.residuals.norm());
    for (int j = 0; j < 2; ++j) CHECK(std::abs(X.col(j).dot(fit.residuals)) < 1e-8 * scale);
}

TEST_CASE("R squared") {
    const std::vector<double> y{1, 2, 3};
    CHECK(r_squared(y, std::vector<double>{1, 2, 4}) == doctest::Approx(0.5));
    CHECK(r_squared(y, y) == 1.0);
    CHECK(r_squared(y, std::vector<double>{2, 2, 2}) == 0.0);
    const std::vector<double> flat{3, 3, 3};
    CHECK(code_of([&] { (void)r_squared(flat, y); }) == ErrorCode::zero_variance);
}

TEST_CASE("NetLiq beta") {
    ModelFit fit;
    fit.names = {"intercept", "ti", "net_vl"};
    fit.coef = Eigen::Vector3d(0.0, 2.0, 0.0);
    CHECK(netliq_beta(fit).beta == 0.0);
    fit.coef = Eigen::Vector3d(0.1, 2.0, 2.0);
    CHECK(netliq_beta(fit).beta == 1.0);
    fit.coef = Eigen::Vector3d(0.1, 0.0, 2.0);
    CHECK(code_of([&] { (void)netliq_beta(fit); }) == ErrorCode::degenerate_alpha1);

    const std::vector<double> ti{0.5, -1.0}, nv{1.0, 0.5};
    const auto s = netliq_series(ti, nv, 0.6);
    CHECK(s[0] == doctest::Approx(1.1));
    CHECK(s[1] == doctest::Approx(-0.7));
}

namespace {

ModelFit fit_linear_buckets(const FlowSeries& s) {
    const auto n = static_cast<Eigen::Index>(s.buckets.size());
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    const double V = static_cast<double>(s.bucket_volume);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = s.buckets[static_cast<std::size_t>(i)];
        X(i, 0) = b.ti;
        X(i, 1) = static_cast<double>(b.vl(Side::bid) - b.vl(Side::ask)) / V;
        y[i] = b.delta_p;
    }
    return ols_fit(X, y, true, {"ti", "net_vl"});
}

}  // namespace

TEST_CASE("linear bucket oracle") {
    SynthConfig sc;
    sc.mode = SynthMode::bucket_level;
    sc.n_buckets = 10000;
    SUBCASE("noiseless data is recovered exactly") {
        sc.sigma = 0.0;
        sc.alpha0 = 0.25;
        const auto fit = fit_linear_buckets(sample_linear_buckets(sc));
        CHECK(std::abs(*fit.coefficient("intercept") - 0.25) < 1e-10);
        CHECK(std::abs(*fit.coefficient("ti") - 1.0) < 1e-10);
        CHECK(std::abs(*fit.coefficient("net_vl") - 0.6) < 1e-10);
    }
    SUBCASE("beta within tolerance") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            sc.seed = seed;
            CHECK(std::abs(netliq_beta(fit_linear_buckets(sample_linear_buckets(sc))).beta - 0.6) < 0.02);
        }
    }
    SUBCASE("absent limit-flow effect is insignificant") {
        sc.alpha2 = 0.0;
        int significant = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            sc.seed = seed;
            const auto fit = fit_linear_buckets(sample_linear_buckets(sc));
            significant += std::abs(*fit.coefficient("net_vl")) > 3.0 * *fit.standard_error("net_vl") ? 1 : 0;
        }
        CHECK(significant <= 1);
    }
}

TEST_CASE("scarce liquidity labels") {
    std::vector<double> r{3.0, -3.0, 0.0, 0.5, -0.5, 0.0, 0.0, 0.0};
    const double sd = stdev(r);
    const auto base = scarce_liquidity_labels(r, 1.5);
    CHECK(base.threshold == doctest::Approx(1.5 * sd));
    CHECK(base.ask == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0, 0});
    CHECK(base.bid == std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0, 0, 0});
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(base.ask[i] * base.bid[i] == 0);

    std::vector<double> scaled(r);
    for (auto& v : scaled) v *= 37.5;
    const auto s2 = scarce_liquidity_labels(scaled, 1.5);
    CHECK(s2.ask == base.ask);
    CHECK(s2.bid == base.bid);

    const std::vector<double> zero(10, 0.0);
    CHECK(code_of([&] { (void)scarce_liquidity_labels(zero); }) == ErrorCode::zero_variance);
    CHECK(code_of([&] { (void)scarce_liquidity_labels(r, 0.0); }) == ErrorCode::invalid_config);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    std::vector<double> g(100000);
    for (auto& v : g) v = z(rng);
    const auto lab = scarce_liquidity_labels(g);
    CHECK(std::abs(lab.freq_ask - 0.0668) < 0.005);
    CHECK(std::abs(lab.freq_bid - 0.0668) < 0.005);
}

TEST_CASE("logistic regression") {
    std::mt19937_64 rng(21);
    SUBCASE("intercept only matches the sample frequency") {
        std::bernoulli_distribution b(0.3);
        std::vector<std::uint8_t> y(1000);
        for (auto& v : y) v = b(rng);
        const double freq = static_cast<double>(std::count(y.begin(), y.end(), 1)) / 1000.0;
        const Eigen::MatrixXd X(1000, 0);
        const auto fit = logistic_fit(X, y);
        for (Eigen::Index i = 0; i < fit.model.fitted.size(); ++i) REQUIRE(std::abs(fit.model.fitted[i] - freq) < 1e-8);
        double total = 0.0;
        for (const auto& bin : fit.calibration) total += bin.share;
        CHECK(total == doctest::Approx(100.0));
    }
    SUBCASE("coefficients recovered") {
        const int n = 100000;
        std::normal_distribution<double> x(0.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::MatrixXd X(n, 1);
        std::vector<std::uint8_t> y(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = x(rng);
            y[static_cast<std::size_t>(i)] = u(rng) < 1.0 / (1.0 + std::exp(-(-3.0 + 2.0 * X(i, 0))));
        }
        const auto fit = logistic_fit(X, y, {}, {"x"});
        CHECK(*fit.model.coefficient("intercept") == doctest::Approx(-3.0).epsilon(0.05));
        CHECK(*fit.model.coefficient("x") == doctest::Approx(2.0).epsilon(0.05));
        CHECK(fit.model.fitted.mean() == doctest::Approx(std::count(y.begin(), y.end(), 1) / double(n)).epsilon(1e-8));
        REQUIRE(fit.calibration.size() == 3);
        CHECK(fit.calibration[0].label == "Low");
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& bin : fit.calibration) {
            total += bin.share;
            count += bin.count;
        }
        CHECK(total == doctest::Approx(100.0));
        CHECK(count == static_cast<std::size_t>(n));
    }
    SUBCASE("separable data") {
        Eigen::MatrixXd X(20, 1);
        std::vector<std::uint8_t> y(20);
        for (int i = 0; i < 20; ++i) {
            X(i, 0) = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
            y[static_cast<std::size_t>(i)] = i >= 10;
        }
        LogisticOptions unpenalized;
        unpenalized.ridge = 0.0;
        CHECK(code_of([&] { (void)logistic_fit(X, y, unpenalized); }) == ErrorCode::did_not_converge);
        const auto fit = logistic_fit(X, y);
        CHECK(fit.model.coef.allFinite());
        CHECK(fit.model.coef[1] > 0.0);
    }
    SUBCASE("single class") {
        Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 1);
        std::vector<std::uint8_t> y(10, 1);
        CHECK(code_of([&] { (void)logistic_fit(X, y); }) == ErrorCode::single_class);
    }
}

TEST_CASE("autocorrelation") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> z;
    SUBCASE("AR(1)") {
        std::vector<double> x(100000);
        double prev = 0.0;
        for (auto& v : x) v = prev = 0.5 * prev + z(rng);
        const auto r = acf(x, 5);
        CHECK(std::abs(r.r[0] - 0.5) < 0.01);
        CHECK(std::abs(r.r[1] - 0.25) < 0.02);
        CHECK(r.band == doctest::Approx(1.96 / std::sqrt(100000.0)));
    }
    SUBCASE("white noise") {
        int ok = 0;
        for (int seed = 0; seed < 100; ++seed) {
            std::vector<double> x(10000);
            for (auto& v : x) v = z(rng);
            ok += acf(x, 20).outside_band() <= 3 ? 1 : 0;
        }
        CHECK(ok >= 95);
    }
    SUBCASE("errors") {
        const std::vector<double> flat(50, 1.0);
        CHECK(code_of([&] { (void)acf(flat, 5); }) == ErrorCode::zero_variance);
        const std::vector<double> shortx{1, 2, 3};
        CHECK(code_of([&] { (void)acf(shortx, 2); }) == ErrorCode::series_too_short);
    }
}
