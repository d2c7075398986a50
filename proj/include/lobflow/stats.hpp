#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lobflow::stats {

enum class ModelKind { ols, spline_gam, logistic };

struct ModelFit {
    ModelKind kind = ModelKind::ols;
    std::vector<std::string> names;  // one per coefficient, "intercept" first when fitted
    Eigen::VectorXd coef;
    Eigen::VectorXd std_err;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    double r2 = 0.0;
    double deviance = 0.0;  // RSS for least squares, -2 log L for logistic
    std::size_t iterations = 0;

    [[nodiscard]] std::optional<double> coefficient(const std::string& name) const;
    [[nodiscard]] std::optional<double> standard_error(const std::string& name) const;
};

// Least squares via column-pivoted QR. names label the columns of X; an
// intercept column is prepended when requested.
ModelFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool intercept,
                 std::vector<std::string> names = {});

double r_squared(std::span<const double> y, std::span<const double> yhat);

struct NetLiq {
    double alpha0 = 0.0;
    double alpha1 = 0.0;  // on TI
    double alpha2 = 0.0;  // on (VL_bid - VL_ask) / V
    double beta = 0.0;
};

// beta = alpha2 / alpha1 from a fit with columns named ti_name / net_vl_name.
NetLiq netliq_beta(const ModelFit& fit, const std::string& ti_name = "ti", const std::string& net_vl_name = "net_vl");

// TI + beta * (VL_bid - VL_ask) / V, with VL already normalized.
std::vector<double> netliq_series(std::span<const double> ti, std::span<const double> net_vl, double beta);

struct ScarceLabels {
    std::vector<std::uint8_t> ask;  // residual >= threshold
    std::vector<std::uint8_t> bid;  // residual <= -threshold
    double multiplier = 1.5;
    double stdev = 0.0;
    double threshold = 0.0;
    double freq_ask = 0.0;
    double freq_bid = 0.0;
};

ScarceLabels scarce_liquidity_labels(std::span<const double> residuals, double multiplier = 1.5);

struct LogisticOptions {
    double ridge = 1e-6;  // L2 on slopes; keeps separable data finite
    bool intercept = true;
    std::size_t max_iter = 100;
    double tol = 1e-8;
};

struct CalibrationBin {
    std::string label;
    double lo = 0.0, hi = 1.0;  // [lo, hi)
    std::size_t count = 0;
    std::size_t positives = 0;
    double share = 0.0;        // percent of rows
    double observed = 0.0;     // positives / count
    double mean_predicted = 0.0;
};

struct LogisticFit {
    ModelFit model;
    std::vector<CalibrationBin> calibration;  // Low < 0.1 <= Med < 0.5 <= High
};

// Maximum likelihood by damped IRLS. Throws SingleClass or DidNotConverge.
LogisticFit logistic_fit(const Eigen::MatrixXd& X, std::span<const std::uint8_t> labels,
                         const LogisticOptions& opts = {}, std::vector<std::string> names = {});

std::vector<CalibrationBin> calibration_table(std::span<const double> prob, std::span<const std::uint8_t> labels);

struct AcfResult {
    std::vector<double> r;  // r[h-1] is the lag-h autocorrelation
    double band = 0.0;      // 1.96 / sqrt(n)
    std::size_t n = 0;

    [[nodiscard]] std::size_t outside_band() const;
};

AcfResult acf(std::span<const double> x, std::size_t max_lag);

double mean(std::span<const double> x);
double stdev(std::span<const double> x);  // sample (n - 1)

Eigen::VectorXd to_vector(std::span<const double> x);

}  // namespace lobflow::stats
