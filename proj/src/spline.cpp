#include "lobflow/spline.hpp"

#include "lobflow/error.hpp"

#include <cmath>
#include <limits>

namespace lobflow::stats {

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -4.0 + 8.0 * i / 12.0));
    return grid;
}

Eigen::RowVectorXd bspline_row(double x, std::size_t knots, double lo, double hi) {
    const auto basis = static_cast<Eigen::Index>(knots + 4);
    const double h = (hi - lo) / static_cast<double>(knots + 1);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(basis);
    double pos = (x - lo) / h;
    auto interval = static_cast<Eigen::Index>(std::floor(pos));
    interval = std::clamp<Eigen::Index>(interval, 0, static_cast<Eigen::Index>(knots));
    const double u = pos - static_cast<double>(interval);
    const double u2 = u * u, u3 = u2 * u;
    row[interval] = (1.0 - u) * (1.0 - u) * (1.0 - u) / 6.0;
    row[interval + 1] = (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0;
    row[interval + 2] = (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0;
    row[interval + 3] = u3 / 6.0;
    return row;
}

double SplineFit::operator()(double x) const {
    return bspline_row(std::clamp(x, lo, hi), knots, lo, hi).dot(model.coef);
}

std::vector<double> SplineFit::evaluate(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(x.size());
    for (double v : x) out.push_back((*this)(v));
    return out;
}

SplineFit spline_gam_fit(std::span<const double> x, std::span<const double> y, const SplineOptions& opts) {
    if (x.size() != y.size()) throw Error(ErrorCode::dimension_mismatch, "spline: x and y lengths differ");
    if (opts.knots < 1 || !(opts.hi > opts.lo)) throw Error(ErrorCode::invalid_config, "bad spline knot configuration");
    if (x.size() < 10 * opts.knots)
        throw Error(ErrorCode::too_few_points,
                    std::to_string(x.size()) + " points for " + std::to_string(opts.knots) + " knots (need 10 per knot)");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorCode::non_finite_input, "non-finite input");
        if (x[i] < opts.lo || x[i] > opts.hi)
            throw Error(ErrorCode::non_finite_input, "x = " + std::to_string(x[i]) + " outside the spline domain");
    }

    const auto n = static_cast<Eigen::Index>(x.size());
    const auto p = static_cast<Eigen::Index>(opts.knots + 4);
    Eigen::MatrixXd B(n, p);
    for (Eigen::Index i = 0; i < n; ++i) B.row(i) = bspline_row(x[static_cast<std::size_t>(i)], opts.knots, opts.lo, opts.hi);
    const Eigen::VectorXd yv = to_vector(y);

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p - 2, p);
    for (Eigen::Index r = 0; r < p - 2; ++r) {
        D(r, r) = 1.0;
        D(r, r + 1) = -2.0;
        D(r, r + 2) = 1.0;
    }
    const Eigen::MatrixXd BtB = B.transpose() * B;
    const Eigen::MatrixXd P = D.transpose() * D;
    const Eigen::VectorXd Bty = B.transpose() * yv;

    SplineFit best;
    best.gcv = std::numeric_limits<double>::infinity();
    const auto grid = opts.lambdas.empty() ? default_lambda_grid() : opts.lambdas;
    for (double lambda : grid) {
        const Eigen::MatrixXd A = BtB + lambda * P;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        if (ldlt.info() != Eigen::Success) continue;
        const Eigen::VectorXd c = ldlt.solve(Bty);
        const double edf = ldlt.solve(BtB).trace();
        const double rss = (yv - B * c).squaredNorm();
        const double denom = static_cast<double>(n) - edf;
        if (denom <= 0.0) continue;
        const double gcv = static_cast<double>(n) * rss / (denom * denom);
        if (gcv < best.gcv) {
            best.gcv = gcv;
            best.lambda = lambda;
            best.edf = edf;
            best.model.coef = c;
        }
    }
    if (!std::isfinite(best.gcv)) throw Error(ErrorCode::did_not_converge, "no admissible smoothing parameter");

    best.lo = opts.lo;
    best.hi = opts.hi;
    best.knots = opts.knots;
    auto& m = best.model;
    m.kind = ModelKind::spline_gam;
    for (Eigen::Index j = 0; j < p; ++j) m.names.push_back("b" + std::to_string(j));
    m.fitted = B * m.coef;
    m.residuals = yv - m.fitted;
    m.deviance = m.residuals.squaredNorm();
    const double ss_tot = (yv.array() - yv.mean()).square().sum();
    m.r2 = ss_tot > 0.0 ? 1.0 - m.deviance / ss_tot : std::nan("");
    return best;
}

}  // namespace lobflow::stats
