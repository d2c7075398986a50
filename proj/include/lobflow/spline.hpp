#pragma once

#include "lobflow/stats.hpp"

#include <span>
#include <vector>

namespace lobflow::stats {

struct SplineOptions {
    std::size_t knots = 10;  // interior, equally spaced
    double lo = -1.0;
    double hi = 1.0;
    std::vector<double> lambdas;  // empty: 13 log-spaced points on [1e-4, 1e4]
};

std::vector<double> default_lambda_grid();

// Penalized cubic regression spline: uniform B-spline basis, second-order
// difference penalty on the coefficients, smoothing parameter chosen by GCV.
class SplineFit {
public:
    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] std::vector<double> evaluate(std::span<const double> x) const;

    ModelFit model;        // coef are the B-spline weights
    double lambda = 0.0;
    double edf = 0.0;      // trace of the hat matrix
    double gcv = 0.0;
    double lo = -1.0, hi = 1.0;
    std::size_t knots = 0;
};

SplineFit spline_gam_fit(std::span<const double> x, std::span<const double> y, const SplineOptions& opts = {});

// Row of the B-spline design matrix at x (K + 4 entries).
Eigen::RowVectorXd bspline_row(double x, std::size_t knots, double lo, double hi);

}  // namespace lobflow::stats
