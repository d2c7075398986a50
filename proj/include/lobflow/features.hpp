#pragma once

#include "lobflow/flows.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lobflow {

struct FeatureOptions {
    std::vector<std::size_t> lags{1, 5, 10, 20};
    bool normalize_vl = true;  // divide touch flows by V
};

struct FeatureRow {
    std::size_t bucket = 0;
    std::vector<double> values;  // aligned with FeatureMatrix::columns
};

// Rows need finite flows and lags; static covariates that cannot be
// evaluated (PI beyond visible depth, PC without touch adds) are NaN.
// Response delta_p followed by contemporaneous, static-at-open, lagged and
// moving-average covariates. Column names are stable and exported as-is.
struct FeatureMatrix {
    std::vector<std::string> columns;
    std::vector<FeatureRow> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const;  // throws
    [[nodiscard]] Eigen::VectorXd vector(std::string_view name) const;
    [[nodiscard]] Eigen::MatrixXd matrix(const std::vector<std::string>& names) const;
    // Rows whose named columns are all finite; optional covariates can be blank.
    [[nodiscard]] std::vector<std::size_t> finite_rows(const std::vector<std::string>& names) const;
    [[nodiscard]] FeatureMatrix subset(const std::vector<std::size_t>& keep) const;
};

// Buckets that can enter a fit: complete, positive duration, known delta_p.
[[nodiscard]] bool fit_eligible(const BucketRecord& b);

FeatureMatrix build_feature_matrix(const FlowSeries& series, const FeatureOptions& opts = {});

void write_features_csv(std::ostream& out, const FeatureMatrix& fm);
FeatureMatrix read_features_csv(std::string_view text);

}  // namespace lobflow
