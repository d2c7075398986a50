#include "lobflow/stats.hpp"

#include "lobflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lobflow::stats {

std::optional<double> ModelFit::coefficient(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return coef[static_cast<Eigen::Index>(i)];
    return std::nullopt;
}

std::optional<double> ModelFit::standard_error(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name && std_err.size() > static_cast<Eigen::Index>(i)) return std_err[static_cast<Eigen::Index>(i)];
    return std::nullopt;
}

Eigen::VectorXd to_vector(std::span<const double> x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

double mean(std::span<const double> x) {
    if (x.empty()) return std::nan("");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stdev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

namespace {

void require_finite(const Eigen::MatrixXd& X, const char* what) {
    if (!X.allFinite()) throw Error(ErrorCode::non_finite_input, std::string(what) + " contains non-finite values");
}

std::vector<std::string> column_names(std::vector<std::string> names, Eigen::Index cols, bool intercept) {
    if (names.empty())
        for (Eigen::Index j = 0; j < cols; ++j) names.push_back("x" + std::to_string(j + 1));
    if (static_cast<Eigen::Index>(names.size()) != cols)
        throw Error(ErrorCode::dimension_mismatch, "column name count does not match X");
    if (intercept) names.insert(names.begin(), "intercept");
    return names;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X, bool intercept) {
    if (!intercept) return X;
    Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(X.cols()) = X;
    return Z;
}

}  // namespace

ModelFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool intercept, std::vector<std::string> names) {
    if (X.rows() != y.size()) throw Error(ErrorCode::dimension_mismatch, "X rows != y length");
    require_finite(X, "X");
    require_finite(y, "y");
    ModelFit fit;
    fit.kind = ModelKind::ols;
    fit.names = column_names(std::move(names), X.cols(), intercept);
    const Eigen::MatrixXd Z = with_intercept(X, intercept);
    const auto n = Z.rows(), p = Z.cols();
    if (n <= p) throw Error(ErrorCode::rank_deficient, "need more rows than columns");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < p)
        throw Error(ErrorCode::rank_deficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));
    fit.coef = qr.solve(y);
    fit.fitted = Z * fit.coef;
    fit.residuals = y - fit.fitted;
    fit.deviance = fit.residuals.squaredNorm();

    const double ybar = y.mean();
    const double ss_tot = (y.array() - ybar).square().sum();
    fit.r2 = ss_tot > 0.0 ? 1.0 - fit.deviance / ss_tot : std::nan("");

    // (Z'Z)^{-1} = P R^{-1} R^{-T} P'
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();
    const double sigma2 = fit.deviance / static_cast<double>(n - p);
    fit.std_err = (cov.diagonal() * sigma2).array().sqrt();
    return fit;
}

double r_squared(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw Error(ErrorCode::dimension_mismatch, "r_squared: length mismatch");
    const double m = mean(y);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - m) * (y[i] - m);
    }
    if (!(ss_tot > 0.0)) throw Error(ErrorCode::zero_variance, "response has zero variance");
    return 1.0 - ss_res / ss_tot;
}

NetLiq netliq_beta(const ModelFit& fit, const std::string& ti_name, const std::string& net_vl_name) {
    const auto a1 = fit.coefficient(ti_name);
    const auto a2 = fit.coefficient(net_vl_name);
    if (!a1 || !a2) throw Error(ErrorCode::dimension_mismatch, "fit lacks '" + ti_name + "' or '" + net_vl_name + "'");
    if (*a1 == 0.0 || !std::isfinite(*a1)) throw Error(ErrorCode::degenerate_alpha1, "TI coefficient is zero");
    NetLiq out;
    out.alpha0 = fit.coefficient("intercept").value_or(0.0);
    out.alpha1 = *a1;
    out.alpha2 = *a2;
    out.beta = *a2 / *a1;
    return out;
}

std::vector<double> netliq_series(std::span<const double> ti, std::span<const double> net_vl, double beta) {
    if (ti.size() != net_vl.size()) throw Error(ErrorCode::dimension_mismatch, "netliq: length mismatch");
    std::vector<double> out(ti.size());
    for (std::size_t i = 0; i < ti.size(); ++i) out[i] = ti[i] + beta * net_vl[i];
    return out;
}

ScarceLabels scarce_liquidity_labels(std::span<const double> residuals, double multiplier) {
    if (!(multiplier > 0.0)) throw Error(ErrorCode::invalid_config, "scarcity multiplier must be positive");
    for (double r : residuals)
        if (!std::isfinite(r)) throw Error(ErrorCode::non_finite_input, "non-finite residual");
    ScarceLabels out;
    out.multiplier = multiplier;
    out.stdev = stdev(residuals);
    if (!(out.stdev > 0.0)) throw Error(ErrorCode::zero_variance, "residuals have zero variance");
    out.threshold = multiplier * out.stdev;
    out.ask.resize(residuals.size());
    out.bid.resize(residuals.size());
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        out.ask[i] = residuals[i] >= out.threshold;
        out.bid[i] = residuals[i] <= -out.threshold;
        na += out.ask[i];
        nb += out.bid[i];
    }
    out.freq_ask = static_cast<double>(na) / static_cast<double>(residuals.size());
    out.freq_bid = static_cast<double>(nb) / static_cast<double>(residuals.size());
    return out;
}

std::vector<CalibrationBin> calibration_table(std::span<const double> prob, std::span<const std::uint8_t> labels) {
    if (prob.size() != labels.size()) throw Error(ErrorCode::dimension_mismatch, "calibration: length mismatch");
    std::vector<CalibrationBin> bins{{"Low", 0.0, 0.1}, {"Med", 0.1, 0.5}, {"High", 0.5, 1.0}};
    std::vector<double> psum(bins.size(), 0.0);
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const std::size_t b = prob[i] < 0.1 ? 0 : (prob[i] < 0.5 ? 1 : 2);
        ++bins[b].count;
        bins[b].positives += labels[i] ? 1 : 0;
        psum[b] += prob[i];
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        auto& bin = bins[b];
        bin.share = prob.empty() ? 0.0 : 100.0 * static_cast<double>(bin.count) / static_cast<double>(prob.size());
        if (bin.count) {
            bin.observed = static_cast<double>(bin.positives) / static_cast<double>(bin.count);
            bin.mean_predicted = psum[b] / static_cast<double>(bin.count);
        }
    }
    return bins;
}

namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

LogisticFit logistic_fit(const Eigen::MatrixXd& X, std::span<const std::uint8_t> labels, const LogisticOptions& opts,
                         std::vector<std::string> names) {
    if (X.rows() != static_cast<Eigen::Index>(labels.size()))
        throw Error(ErrorCode::dimension_mismatch, "X rows != label count");
    require_finite(X, "X");
    const auto positives = std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size()))
        throw Error(ErrorCode::single_class, "labels contain a single class");
    if (opts.ridge < 0.0) throw Error(ErrorCode::invalid_config, "ridge must be non-negative");

    LogisticFit out;
    auto& fit = out.model;
    fit.kind = ModelKind::logistic;
    fit.names = column_names(std::move(names), X.cols(), opts.intercept);
    const Eigen::MatrixXd Z = with_intercept(X, opts.intercept);
    const auto n = Z.rows(), p = Z.cols();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

    // ridge applies to slopes only so the intercept score equation stays exact
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, opts.ridge);
    if (opts.intercept) penalty[0] = 0.0;

    auto objective = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = Z * b;
        double nll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) nll += log1pexp(eta[i]) - y[i] * eta[i];
        return nll + 0.5 * (penalty.array() * b.array().square()).sum();
    };

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    if (opts.intercept) {
        const double ybar = y.mean();
        b[0] = std::log(ybar / (1.0 - ybar));
    }
    double obj = objective(b);
    bool converged = false;
    Eigen::MatrixXd H(p, p);
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        fit.iterations = it;
        const Eigen::VectorXd eta = Z * b;
        Eigen::VectorXd mu(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = sigmoid(eta[i]);
            w[i] = mu[i] * (1.0 - mu[i]);
        }
        const Eigen::VectorXd grad = Z.transpose() * (y - mu) - penalty.cwiseProduct(b);
        H.noalias() = Z.transpose() * w.asDiagonal() * Z;
        H.diagonal() += penalty;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-300)
            throw Error(ErrorCode::did_not_converge, "information matrix became singular after " + std::to_string(it) + " iterations");
        Eigen::VectorXd step = ldlt.solve(grad);
        if (!step.allFinite())
            throw Error(ErrorCode::did_not_converge, "non-finite Newton step after " + std::to_string(it) + " iterations");

        // step halving keeps the penalized likelihood monotone
        double t = 1.0;
        Eigen::VectorXd cand = b + step;
        double cand_obj = objective(cand);
        while (cand_obj > obj + 1e-12 * std::abs(obj) && t > 1e-10) {
            t *= 0.5;
            cand = b + t * step;
            cand_obj = objective(cand);
        }
        const double max_step = (t * step).cwiseAbs().maxCoeff();
        b = cand;
        obj = cand_obj;
        if (max_step < opts.tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(ErrorCode::did_not_converge, "no convergence within " + std::to_string(opts.max_iter) + " iterations");

    fit.coef = b;
    const Eigen::VectorXd eta = Z * b;
    fit.fitted.resize(n);
    Eigen::VectorXd w(n);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        fit.fitted[i] = sigmoid(eta[i]);
        w[i] = fit.fitted[i] * (1.0 - fit.fitted[i]);
        ll += y[i] * eta[i] - log1pexp(eta[i]);
    }
    fit.residuals = y - fit.fitted;
    fit.deviance = -2.0 * ll;
    H.noalias() = Z.transpose() * w.asDiagonal() * Z;
    H.diagonal() += penalty;
    const Eigen::MatrixXd cov = H.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    fit.std_err = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

    // McFadden pseudo-R^2 against the intercept-only likelihood
    const double ybar = y.mean();
    const double ll0 = static_cast<double>(n) * (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));
    fit.r2 = 1.0 - ll / ll0;

    std::vector<double> prob(fit.fitted.data(), fit.fitted.data() + n);
    out.calibration = calibration_table(prob, labels);
    return out;
}

std::size_t AcfResult::outside_band() const {
    return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [&](double v) { return std::abs(v) > band; }));
}

AcfResult acf(std::span<const double> x, std::size_t max_lag) {
    if (max_lag == 0 || x.size() <= max_lag + 1)
        throw Error(ErrorCode::series_too_short,
                    "series of length " + std::to_string(x.size()) + " for " + std::to_string(max_lag) + " lags");
    for (double v : x)
        if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_input, "non-finite value in series");
    const double m = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    if (!(c0 > 0.0)) throw Error(ErrorCode::zero_variance, "series has zero variance");

    AcfResult out;
    out.n = x.size();
    out.band = 1.96 / std::sqrt(static_cast<double>(x.size()));
    out.r.resize(max_lag);
    for (std::size_t h = 1; h <= max_lag; ++h) {
        double ch = 0.0;
        for (std::size_t t = 0; t + h < x.size(); ++t) ch += (x[t] - m) * (x[t + h] - m);
        out.r[h - 1] = ch / c0;
    }
    return out;
}

}  // namespace lobflow::stats
