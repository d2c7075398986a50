#include "lobflow/features.hpp"

#include "lobflow/csv.hpp"
#include "lobflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace lobflow {

bool fit_eligible(const BucketRecord& b) {
    return b.complete && !b.zero_duration && std::isfinite(b.delta_p);
}

std::size_t FeatureMatrix::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw Error(ErrorCode::dimension_mismatch, "no feature column '" + std::string(name) + "'");
}

Eigen::VectorXd FeatureMatrix::vector(std::string_view name) const {
    const auto c = column(name);
    Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = rows[r].values[c];
    return v;
}

Eigen::MatrixXd FeatureMatrix::matrix(const std::vector<std::string>& names) const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = vector(names[j]);
    return X;
}

namespace {

constexpr std::size_t kContemporaneous = 20;  // columns before the lag block

}  // namespace

std::vector<std::size_t> FeatureMatrix::finite_rows(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    for (const auto& n : names) cols.push_back(column(n));
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (std::all_of(cols.begin(), cols.end(), [&](std::size_t c) { return std::isfinite(rows[r].values[c]); }))
            out.push_back(r);
    return out;
}

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& keep) const {
    FeatureMatrix out;
    out.columns = columns;
    for (auto r : keep) out.rows.push_back(rows[r]);
    return out;
}

FeatureMatrix build_feature_matrix(const FlowSeries& series, const FeatureOptions& opts) {
    if (opts.lags.empty() || std::find(opts.lags.begin(), opts.lags.end(), 0u) != opts.lags.end())
        throw Error(ErrorCode::invalid_config, "lags must be positive");
    const std::size_t max_lag = *std::max_element(opts.lags.begin(), opts.lags.end());
    const std::size_t start = std::max<std::size_t>(max_lag, 3);
    const auto& b = series.buckets;
    if (b.size() < max_lag + 1)
        throw Error(ErrorCode::too_few_buckets,
                    std::to_string(b.size()) + " buckets for maximum lag " + std::to_string(max_lag));

    const double scale = opts.normalize_vl ? static_cast<double>(series.bucket_volume) : 1.0;
    auto vl = [&](const BucketRecord& r, Side s) { return static_cast<double>(r.vl(s)) / scale; };

    FeatureMatrix fm;
    fm.columns = {"delta_p", "ti", "vl_ask", "vl_bid", "net_vl", "pc_ask", "pc_bid",
                  "bi", "d1_ask", "d1_bid", "d2_ask", "d2_bid", "pi_ask", "pi_bid", "slope_ask", "slope_bid",
                  "tod_s", "duration_s", "tima", "vpin"};
    for (auto l : opts.lags) {
        const auto s = std::to_string(l);
        for (const char* base : {"ti_lag", "vl_ask_lag", "vl_bid_lag", "delta_p_lag"}) fm.columns.push_back(base + s);
    }
    fm.columns.insert(fm.columns.end(), {"ti_avg3", "bi_avg4", "mid_trend"});

    const double nan = std::nan("");
    for (std::size_t k = start; k < b.size(); ++k) {
        const auto& cur = b[k];
        if (!fit_eligible(cur) || !cur.open_metrics) continue;
        const auto& om = *cur.open_metrics;
        FeatureRow row;
        row.bucket = cur.index;
        auto& v = row.values;
        v = {cur.delta_p,
             cur.ti,
             vl(cur, Side::ask),
             vl(cur, Side::bid),
             vl(cur, Side::bid) - vl(cur, Side::ask),
             cur.pc(Side::ask).value_or(nan),
             cur.pc(Side::bid).value_or(nan),
             om.bi,
             static_cast<double>(om.depth[index(Side::ask)][0]),
             static_cast<double>(om.depth[index(Side::bid)][0]),
             static_cast<double>(om.depth[index(Side::ask)][1]),
             static_cast<double>(om.depth[index(Side::bid)][1]),
             om.pi[index(Side::ask)].value_or(nan),
             om.pi[index(Side::bid)].value_or(nan),
             om.slope[index(Side::ask)].value_or(nan),
             om.slope[index(Side::bid)].value_or(nan),
             static_cast<double>(cur.open_ts) / static_cast<double>(kNanosPerSecond),
             static_cast<double>(cur.duration()) / static_cast<double>(kNanosPerSecond),
             cur.tima_open,
             cur.vpin.value_or(nan)};
        for (auto l : opts.lags) {
            const auto& lag = b[k - l];
            v.push_back(lag.ti);
            v.push_back(vl(lag, Side::ask));
            v.push_back(vl(lag, Side::bid));
            v.push_back(lag.delta_p);
        }
        v.push_back((b[k - 3].ti + b[k - 2].ti + b[k - 1].ti) / 3.0);
        double bi_sum = 0.0;
        for (std::size_t j = k - 3; j <= k; ++j)
            bi_sum += b[j].open_metrics ? b[j].open_metrics->bi : nan;
        v.push_back(bi_sum / 4.0);
        const auto& past = b[k - max_lag];
        v.push_back(cur.mid_open && past.mid_open ? static_cast<double>(*cur.mid_open - *past.mid_open) : nan);

        // static covariates may be blank (thin book, no touch adds); flows and lags may not
        const auto finite = [](double x) { return std::isfinite(x); };
        const auto lag_begin = v.begin() + static_cast<std::ptrdiff_t>(kContemporaneous);
        const auto lag_end = lag_begin + static_cast<std::ptrdiff_t>(4 * opts.lags.size());
        if (std::all_of(v.begin(), v.begin() + 5, finite) && std::all_of(lag_begin, lag_end, finite))
            fm.rows.push_back(std::move(row));
    }
    return fm;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& fm) {
    out << "bucket";
    for (const auto& c : fm.columns) out << ',' << c;
    out << '\n';
    for (const auto& r : fm.rows) {
        out << r.bucket;
        for (double v : r.values) out << ',' << csv::fmt(v);
        out << '\n';
    }
}

FeatureMatrix read_features_csv(std::string_view text) {
    const auto t = csv::parse(text);
    if (t.header.empty() || t.header.front() != "bucket")
        throw ParseError(ErrorCode::malformed_record, 1, "feature CSV must start with a 'bucket' column");
    FeatureMatrix fm;
    fm.columns.assign(t.header.begin() + 1, t.header.end());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        FeatureRow fr;
        fr.bucket = static_cast<std::size_t>(csv::to_int(row[0], t.row_lines[r]).value_or(0));
        for (std::size_t c = 1; c < row.size(); ++c)
            fr.values.push_back(csv::to_double(row[c], t.row_lines[r]).value_or(std::nan("")));
        fm.rows.push_back(std::move(fr));
    }
    return fm;
}

}  // namespace lobflow
