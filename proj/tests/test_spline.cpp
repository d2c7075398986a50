#include "lobflow/error.hpp"
#include "lobflow/spline.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lobflow;
using namespace lobflow::stats;

namespace {

std::vector<double> uniform_x(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST_CASE("B-spline rows form a partition of unity") {
    for (double x : {-1.0, -0.73, 0.0, 0.123, 0.5, 0.99999, 1.0}) {
        const auto row = bspline_row(x, 10, -1.0, 1.0);
        CHECK(row.size() == 14);
        CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(row.minCoeff() >= 0.0);
        CHECK((row.array() > 0.0).count() <= 4);
    }
}

TEST_CASE("default smoothing grid") {
    const auto g = default_lambda_grid();
    REQUIRE(g.size() == 13);
    CHECK(g.front() == doctest::Approx(1e-4));
    CHECK(g.back() == doctest::Approx(1e4));
    CHECK(g[6] == doctest::Approx(1.0));
}

TEST_CASE("spline reproduces its penalty null space") {
    const auto x = uniform_x(200, 1);
    std::vector<double> c(x.size(), 3.25), lin(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) lin[i] = -0.4 + 1.7 * x[i];
    const auto fc = spline_gam_fit(x, c);
    const auto fl = spline_gam_fit(x, lin);
    for (double t = -1.0; t <= 1.0; t += 0.01) {
        CHECK(std::abs(fc(t) - 3.25) < 1e-8);
        CHECK(std::abs(fl(t) - (-0.4 + 1.7 * t)) < 1e-6);
    }
    CHECK(fl.model.residuals.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("spline recovers a smooth curve from noise") {
    const std::size_t n = 10000;
    const auto x = uniform_x(n, 7);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> eps(0.0, 0.2);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(3.0 * x[i]) + eps(rng);
    const auto fit = spline_gam_fit(x, y);
    double worst = 0.0;
    for (double t = -0.9; t <= 0.9; t += 0.001) worst = std::max(worst, std::abs(fit(t) - std::tanh(3.0 * t)));
    CHECK(worst <= 0.05);
    CHECK(fit.edf > 2.0);
    CHECK(fit.edf < 14.0);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(fit.model.residuals[static_cast<Eigen::Index>(i)] == doctest::Approx(y[i] - fit(x[i])).epsilon(1e-9));
}

TEST_CASE("spline input validation") {
    auto x = uniform_x(99, 2);
    std::vector<double> y(99, 1.0);
    CHECK_THROWS_AS(spline_gam_fit(x, y), Error);  // fewer than 10 K points
    x = uniform_x(200, 2);
    y.assign(200, 1.0);
    y[5] = std::nan("");
    try {
        (void)spline_gam_fit(x, y);
        FAIL("expected NonFiniteInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite_input);
    }
    y[5] = 1.0;
    x[3] = 1.5;
    CHECK_THROWS_AS(spline_gam_fit(x, y), Error);
}
