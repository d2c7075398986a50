#include "lobflow/book.hpp"
#include "lobflow/csv.hpp"
#include "lobflow/error.hpp"
#include "lobflow/features.hpp"
#include "lobflow/flows.hpp"
#include "lobflow/message.hpp"
#include "lobflow/spline.hpp"
#include "lobflow/static_metrics.hpp"
#include "lobflow/stats.hpp"
#include "lobflow/synth.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace lobflow;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

Error config_error(const std::string& what) { return Error(ErrorCode::invalid_config, what); }

// "10:00", "09:30:00.5" or plain nanoseconds since midnight.
Timestamp parse_clock(const std::string& s) {
    if (s.find(':') == std::string::npos) {
        if (auto v = csv::to_int(s)) return *v;
        throw config_error("bad time '" + s + "'");
    }
    int h = 0, m = 0;
    double sec = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    in >> h >> c1 >> m;
    if (in >> c2) in >> sec;
    if (!in.eof() && in.fail()) throw config_error("bad time '" + s + "'");
    if (c1 != ':' || (c2 && c2 != ':') || h < 0 || h > 23 || m < 0 || m > 59 || sec < 0.0 || sec >= 60.0)
        throw config_error("bad time '" + s + "'");
    return (static_cast<Timestamp>(h) * 3600 + m * 60) * kNanosPerSecond +
           static_cast<Timestamp>(std::llround(sec * 1e9));
}

// "5400s", "30s", "1.5h", "250ms"; a bare number means seconds.
Timestamp parse_duration(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw config_error("bad duration '" + s + "'");
    }
    const std::string unit = s.substr(pos);
    static const std::map<std::string, double> scale{{"", 1e9}, {"s", 1e9}, {"ms", 1e6}, {"us", 1e3},
                                                     {"ns", 1.0}, {"m", 60e9}, {"min", 60e9}, {"h", 3600e9}};
    const auto it = scale.find(unit);
    if (it == scale.end() || !(v > 0.0)) throw config_error("bad duration '" + s + "'");
    return static_cast<Timestamp>(std::llround(v * it->second));
}

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    return csv::read_file(path);
}

// Runs fn against the output file, or stdout for "" / "-".
void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    fn(out);
    if (!out) throw Error(ErrorCode::malformed_record, "write to '" + path + "' failed");
}

StreamFormat stream_format(const std::string& fmt, const std::string& path) {
    if (fmt == "ndjson") return StreamFormat::ndjson;
    if (fmt == "csv") return StreamFormat::csv;
    if (fmt == "auto" || fmt.empty())
        return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0 ? StreamFormat::csv : StreamFormat::ndjson;
    throw config_error("unknown format '" + fmt + "'");
}

std::string fmt6(double v) {
    std::ostringstream o;
    o << std::setprecision(6) << v;
    return o.str();
}

struct Common {
    std::string input, output, format = "auto";
    bool strict = false;
    double tick_size = 0.01;
    std::string session_start = "10:00", session_end = "15:45";
    Shares bucket_volume = 20000;

    SessionConfig session() const {
        SessionConfig cfg;
        cfg.tick_size = tick_size;
        cfg.session_start = parse_clock(session_start);
        cfg.session_end = parse_clock(session_end);
        cfg.bucket_volume = bucket_volume;
        cfg.validate();
        return cfg;
    }

    std::vector<Message> read_stream() const {
        const auto bytes = read_input(input);
        auto parsed = parse_stream(bytes, stream_format(format, input), strict);
        for (const auto& d : parsed.diagnostics) std::cerr << "skipped line " << d.line << ": " << d.reason << '\n';
        return std::move(parsed.messages);
    }
};

void add_io(CLI::App* app, Common& c, bool stream_input) {
    app->add_option("--input", c.input, "Input file ('-' for stdin)");
    app->add_option("--output", c.output, "Output file ('-' for stdout)");
    if (stream_input) {
        app->add_option("--format", c.format, "Message format: ndjson, csv or auto")->capture_default_str();
        app->add_flag("--strict", c.strict, "Fail on the first malformed record");
    }
}

void add_session(CLI::App* app, Common& c) {
    app->add_option("--tick-size", c.tick_size, "Price units per tick")->capture_default_str();
    app->add_option("--session-start", c.session_start, "Session start, HH:MM[:SS] or ns")->capture_default_str();
    app->add_option("--session-end", c.session_end, "Session end, HH:MM[:SS] or ns")->capture_default_str();
}

void add_bucket_volume(CLI::App* app, Common& c) {
    app->add_option("--bucket-volume,--volume", c.bucket_volume, "Shares per volume bucket")->capture_default_str();
}

FlowSeries read_buckets(const std::string& path) { return read_buckets_csv(read_input(path)); }

std::vector<const BucketRecord*> eligible(const FlowSeries& s) {
    std::vector<const BucketRecord*> out;
    for (const auto& b : s.buckets)
        if (fit_eligible(b)) out.push_back(&b);
    return out;
}

double net_vl(const BucketRecord& b, double scale) {
    return static_cast<double>(b.vl(Side::bid) - b.vl(Side::ask)) / scale;
}

void print_fit(std::ostream& out, const stats::ModelFit& fit) {
    out << std::left << std::setw(16) << "term" << std::setw(16) << "estimate" << "std_err\n";
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        out << std::setw(16) << fit.names[i] << std::setw(16) << fmt6(fit.coef[j])
            << (fit.std_err.size() > j ? fmt6(fit.std_err[j]) : std::string("")) << '\n';
    }
    out << std::right;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volume-bucketed limit order book flow toolkit"};
    app.set_config("--config", "", "Key/value or TOML config file; flags win");
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);

    Common c;
    std::uint64_t seed = 1;
    std::size_t vpin_window = 20;
    std::optional<double> tima_beta;
    std::optional<Shares> pi_shares;
    bool flip_ti = false, raw_vl = false, fitted_intercept = false;
    double sl_multiplier = 1.5;
    std::size_t knots = 10, max_lag = 20, tox_window = 200;
    std::string lags = "1,5,10,20", corr_window = "5400s", corr_subbucket = "30s", corr_kind = "flow";
    std::string column = "delta_p", labels_path, side_name = "ask", residuals_path, covariates;
    std::string levels = "8000,10000,7000,15000";
    Shares pi_n = 30000;
    Ticks pi_spread = 1;
    SynthConfig sc;
    std::string synth_mode = "message";

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic message stream or linear bucket series");
    add_io(synth, c, true);
    synth->add_option("--mode", synth_mode, "message or bucket")->capture_default_str();
    synth->add_option("--seed", seed, "Random seed")->capture_default_str();
    synth->add_option("--target-buckets", sc.target_buckets, "Buckets of executed volume to generate")->capture_default_str();
    synth->add_option("--bucket-volume,--volume", sc.bucket_volume, "Volume per target bucket")->capture_default_str();
    synth->add_option("--start-bid", sc.start_bid)->capture_default_str();
    synth->add_option("--levels-per-side", sc.levels_per_side)->capture_default_str();
    synth->add_option("--market-rate", sc.market_rate)->capture_default_str();
    synth->add_option("--mean-trade-lots", sc.mean_trade_lots)->capture_default_str();
    synth->add_option("--buy-fraction", sc.buy_fraction)->capture_default_str();
    synth->add_option("--sign-persistence", sc.sign_persistence)->capture_default_str();
    synth->add_option("--touch-add-rate", sc.touch_add_rate)->capture_default_str();
    synth->add_option("--touch-cancel-rate", sc.touch_cancel_rate)->capture_default_str();
    synth->add_option("--deep-add-rate", sc.deep_add_rate)->capture_default_str();
    synth->add_option("--deep-cancel-rate", sc.deep_cancel_rate)->capture_default_str();
    synth->add_option("--modify-fraction", sc.modify_fraction)->capture_default_str();
    synth->add_option("--hidden-fraction", sc.hidden_fraction)->capture_default_str();
    synth->add_option("--hockey-kink", sc.hockey_kink)->capture_default_str();
    synth->add_option("--hockey-gain", sc.hockey_gain)->capture_default_str();
    synth->add_option("--hockey-add-drop", sc.hockey_add_drop)->capture_default_str();
    synth->add_option("--n-buckets", sc.n_buckets)->capture_default_str();
    synth->add_option("--alpha0", sc.alpha0)->capture_default_str();
    synth->add_option("--alpha1", sc.alpha1)->capture_default_str();
    synth->add_option("--alpha2", sc.alpha2)->capture_default_str();
    synth->add_option("--sigma", sc.sigma)->capture_default_str();
    synth->add_option("--vl-mean", sc.vl_mean)->capture_default_str();
    synth->add_option("--vl-sd", sc.vl_sd)->capture_default_str();
    synth->add_option("--session-start", c.session_start, "Session start, HH:MM[:SS] or ns")->capture_default_str();

    // ---- replay ----
    auto* replay = app.add_subcommand("replay", "Filter to the session, drop hidden executions, merge split market orders");
    add_io(replay, c, true);
    add_session(replay, c);

    // ---- bucket ----
    auto* bucket = app.add_subcommand("bucket", "Slice a replayed stream into volume buckets");
    add_io(bucket, c, true);
    add_session(bucket, c);
    add_bucket_volume(bucket, c);
    bucket->add_option("--tima-beta", tima_beta, "Per-share TIMA decay (default 0.5/V)");
    bucket->add_option("--vpin-window", vpin_window, "Buckets in the VPIN average")->capture_default_str();
    bucket->add_option("--pi-shares", pi_shares, "N for execution cost and slope (default mean D4)");
    bucket->add_flag("--flip-ti", flip_ti, "TI = (sell - buy) / V");
    bucket->add_flag("--slope-intercept", fitted_intercept, "Fit the impact slope with an intercept");

    // ---- features ----
    auto* features = app.add_subcommand("features", "Build the covariate matrix from a bucket CSV");
    add_io(features, c, false);
    features->add_option("--lags", lags, "Comma-separated bucket lags")->capture_default_str();
    features->add_flag("--raw-vl", raw_vl, "Keep touch flows in shares");

    // ---- fit-ti ----
    auto* fit_ti = app.add_subcommand("fit-ti", "Penalized spline fits of delta_p and touch flows on TI");
    add_io(fit_ti, c, false);
    fit_ti->add_option("--knots", knots, "Interior knots")->capture_default_str();
    fit_ti->add_option("--residuals", residuals_path, "Write per-bucket residuals here");

    // ---- fit-netliq ----
    auto* fit_netliq = app.add_subcommand("fit-netliq", "Linear fit of delta_p on TI and net touch flow, with beta");
    add_io(fit_netliq, c, false);
    fit_netliq->add_flag("--raw-vl", raw_vl, "Regress on touch flows in shares");

    // ---- scarce ----
    auto* scarce = app.add_subcommand("scarce", "Label scarce-liquidity buckets from spline residuals");
    add_io(scarce, c, false);
    scarce->add_option("--sl-multiplier", sl_multiplier, "Threshold in residual standard deviations")->capture_default_str();
    scarce->add_option("--knots", knots, "Interior knots")->capture_default_str();

    // ---- fit-logistic ----
    auto* fit_logistic = app.add_subcommand("fit-logistic", "Logistic model for scarce-liquidity labels");
    add_io(fit_logistic, c, false);
    fit_logistic->add_option("--labels", labels_path, "Labels CSV from 'scarce'")->required();
    fit_logistic->add_option("--side", side_name, "ask or bid")->capture_default_str();
    fit_logistic->add_option("--covariates", covariates, "Comma-separated feature columns");

    // ---- acf ----
    auto* acf_cmd = app.add_subcommand("acf", "Autocorrelation of one CSV column");
    add_io(acf_cmd, c, false);
    acf_cmd->add_option("--column", column, "Column to analyse")->capture_default_str();
    acf_cmd->add_option("--max-lag", max_lag)->capture_default_str();

    // ---- corr ----
    auto* corr = app.add_subcommand("corr", "Rolling flow correlation or trade toxicity correlation");
    add_io(corr, c, true);
    add_session(corr, c);
    corr->add_option("--kind", corr_kind, "flow or toxicity")->capture_default_str();
    corr->add_option("--corr-window", corr_window, "Trailing window")->capture_default_str();
    corr->add_option("--corr-subbucket", corr_subbucket, "Sub-bucket width")->capture_default_str();
    corr->add_option("--tox-window", tox_window, "Trades per toxicity window")->capture_default_str();

    // ---- pi-demo ----
    auto* pi_demo = app.add_subcommand("pi-demo", "Execution cost and impact slope of a literal ask ladder");
    pi_demo->add_option("--levels", levels, "Ask queue sizes on consecutive ticks")->capture_default_str();
    pi_demo->add_option("--N", pi_n, "Shares to sweep")->capture_default_str();
    pi_demo->add_option("--spread", pi_spread, "Spread in ticks")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*synth) {
            sc.seed = seed;
            sc.session_start = parse_clock(c.session_start);
            if (synth_mode == "message") {
                sc.mode = SynthMode::message_level;
                const auto msgs = generate_session(sc);
                const auto fmt = stream_format(c.format, c.output);
                with_output(c.output, [&](std::ostream& out) { write_stream(out, msgs, fmt); });
                std::cerr << "synth: " << msgs.size() << " messages\n";
            } else if (synth_mode == "bucket") {
                sc.mode = SynthMode::bucket_level;
                const auto series = sample_linear_buckets(sc);
                with_output(c.output, [&](std::ostream& out) { write_buckets_csv(out, series); });
                std::cerr << "synth: " << series.buckets.size() << " buckets\n";
            } else {
                throw config_error("--mode must be 'message' or 'bucket'");
            }
        } else if (*replay) {
            const auto cfg = c.session();
            auto msgs = c.read_stream();
            const auto in_count = msgs.size();
            msgs = recombine_market_orders(filter_session(msgs, cfg));
            BookState book;
            std::vector<Fill> fills;
            for (const auto& m : msgs) book.apply(m, fills);
            const auto fmt = stream_format(c.format, c.output.empty() ? c.input : c.output);
            with_output(c.output, [&](std::ostream& out) { write_stream(out, msgs, fmt); });
            std::cerr << "replay: " << in_count << " messages in, " << msgs.size() << " out";
            if (auto b = book.best(Side::bid)) std::cerr << ", best bid " << *b;
            if (auto a = book.best(Side::ask)) std::cerr << ", best ask " << *a;
            std::cerr << '\n';
        } else if (*bucket) {
            const auto cfg = c.session();
            const auto msgs = c.read_stream();
            BucketOptions opts;
            opts.tima_beta = tima_beta;
            opts.vpin_window = vpin_window;
            opts.pi_shares = pi_shares;
            opts.flip_ti_sign = flip_ti;
            opts.slope_convention = fitted_intercept ? SlopeIntercept::fitted : SlopeIntercept::none;
            BookState book;
            const auto series = bucketize(msgs, book, cfg, opts);
            with_output(c.output, [&](std::ostream& out) { write_buckets_csv(out, series); });
            std::cerr << "bucket: " << series.complete_count() << " complete, "
                      << series.buckets.size() - series.complete_count() << " partial, N = " << series.pi_shares << '\n';
        } else if (*features) {
            const auto series = read_buckets(c.input);
            FeatureOptions opts;
            opts.normalize_vl = !raw_vl;
            opts.lags.clear();
            for (const auto& l : split_list(lags)) {
                const auto v = csv::to_int(l);
                if (!v || *v <= 0) throw config_error("bad lag '" + l + "'");
                opts.lags.push_back(static_cast<std::size_t>(*v));
            }
            const auto fm = build_feature_matrix(series, opts);
            with_output(c.output, [&](std::ostream& out) { write_features_csv(out, fm); });
            std::cerr << "features: " << fm.rows.size() << " rows x " << fm.columns.size() << " columns\n";
        } else if (*fit_ti) {
            const auto series = read_buckets(c.input);
            const auto rows = eligible(series);
            const double V = static_cast<double>(series.bucket_volume);
            std::vector<double> ti, dp, vlb, vla;
            for (const auto* b : rows) {
                ti.push_back(b->ti);
                dp.push_back(b->delta_p);
                vlb.push_back(static_cast<double>(b->vl(Side::bid)) / V);
                vla.push_back(static_cast<double>(b->vl(Side::ask)) / V);
            }
            stats::SplineOptions so;
            so.knots = knots;
            const auto g = stats::spline_gam_fit(ti, dp, so);
            const auto gb = stats::spline_gam_fit(ti, vlb, so);
            const auto ga = stats::spline_gam_fit(ti, vla, so);
            Eigen::MatrixXd X = stats::to_vector(ti);
            const auto lin = stats::ols_fit(X, stats::to_vector(dp), true, {"ti"});
            std::cout << "buckets " << rows.size() << "\nspline R2 " << fmt6(g.model.r2) << " (lambda " << fmt6(g.lambda)
                      << ", edf " << fmt6(g.edf) << ")\nlinear R2 " << fmt6(lin.r2) << '\n';
            with_output(c.output, [&](std::ostream& out) {
                out << "ti,delta_p,vl_bid,vl_ask\n";
                for (int i = 0; i <= 100; ++i) {
                    const double x = -1.0 + 0.02 * i;
                    out << csv::fmt(x) << ',' << csv::fmt(g(x)) << ',' << csv::fmt(gb(x)) << ',' << csv::fmt(ga(x)) << '\n';
                }
            });
            if (!residuals_path.empty())
                with_output(residuals_path, [&](std::ostream& out) {
                    out << "bucket,residual\n";
                    for (std::size_t i = 0; i < rows.size(); ++i)
                        out << rows[i]->index << ',' << csv::fmt(g.model.residuals[static_cast<Eigen::Index>(i)]) << '\n';
                });
        } else if (*fit_netliq) {
            const auto series = read_buckets(c.input);
            const auto rows = eligible(series);
            const double scale = raw_vl ? 1.0 : static_cast<double>(series.bucket_volume);
            Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), 2);
            Eigen::VectorXd y(X.rows());
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                const auto& b = *rows[static_cast<std::size_t>(i)];
                X(i, 0) = b.ti;
                X(i, 1) = net_vl(b, scale);
                y[i] = b.delta_p;
            }
            const auto fit = stats::ols_fit(X, y, true, {"ti", "net_vl"});
            const auto nl = stats::netliq_beta(fit);
            std::cout << "buckets " << rows.size() << '\n';
            print_fit(std::cout, fit);
            std::cout << "R2 " << fmt6(fit.r2) << "\nbeta " << fmt6(nl.beta) << '\n';
            if (!c.output.empty()) {
                std::vector<double> ti(rows.size()), nv(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    ti[i] = rows[i]->ti;
                    nv[i] = net_vl(*rows[i], scale);
                }
                const auto s = stats::netliq_series(ti, nv, nl.beta);
                with_output(c.output, [&](std::ostream& out) {
                    out << "bucket,ti,net_vl,netliq,delta_p\n";
                    for (std::size_t i = 0; i < rows.size(); ++i)
                        out << rows[i]->index << ',' << csv::fmt(ti[i]) << ',' << csv::fmt(nv[i]) << ',' << csv::fmt(s[i])
                            << ',' << csv::fmt(rows[i]->delta_p) << '\n';
                });
            }
        } else if (*scarce) {
            const auto series = read_buckets(c.input);
            const auto rows = eligible(series);
            std::vector<double> ti, dp;
            for (const auto* b : rows) {
                ti.push_back(b->ti);
                dp.push_back(b->delta_p);
            }
            stats::SplineOptions so;
            so.knots = knots;
            const auto g = stats::spline_gam_fit(ti, dp, so);
            const std::vector<double> res(g.model.residuals.data(), g.model.residuals.data() + g.model.residuals.size());
            const auto lab = stats::scarce_liquidity_labels(res, sl_multiplier);
            std::cout << "buckets " << rows.size() << "\nthreshold " << fmt6(lab.threshold) << " half-ticks\nSL ask "
                      << fmt6(100.0 * lab.freq_ask) << "%\nSL bid " << fmt6(100.0 * lab.freq_bid) << "%\n";
            with_output(c.output, [&](std::ostream& out) {
                out << "bucket,residual,sl_ask,sl_bid\n";
                for (std::size_t i = 0; i < rows.size(); ++i)
                    out << rows[i]->index << ',' << csv::fmt(res[i]) << ',' << int(lab.ask[i]) << ',' << int(lab.bid[i]) << '\n';
            });
        } else if (*fit_logistic) {
            if (side_name != "ask" && side_name != "bid") throw config_error("--side must be 'ask' or 'bid'");
            const auto fm = read_features_csv(read_input(c.input));
            const auto labels = csv::parse(csv::read_file(labels_path));
            const auto lab_col = labels.column(side_name == "ask" ? "sl_ask" : "sl_bid");
            const auto bucket_col = labels.column("bucket");
            std::map<std::size_t, std::uint8_t> by_bucket;
            for (std::size_t r = 0; r < labels.rows.size(); ++r) {
                const auto b = csv::to_int(labels.rows[r][bucket_col], labels.row_lines[r]);
                const auto v = csv::to_int(labels.rows[r][lab_col], labels.row_lines[r]);
                if (b && v) by_bucket[static_cast<std::size_t>(*b)] = *v != 0;
            }
            auto names = split_list(covariates.empty()
                                        ? "bi,d1_ask,d1_bid,pc_ask,pc_bid,tima,vpin,ti_lag1,vl_ask_lag1,vl_bid_lag1,delta_p_lag1"
                                        : covariates);
            std::vector<std::size_t> keep;
            for (auto r : fm.finite_rows(names))
                if (by_bucket.count(fm.rows[r].bucket)) keep.push_back(r);
            const auto sub = fm.subset(keep);
            std::vector<std::uint8_t> y;
            for (const auto& r : sub.rows) y.push_back(by_bucket.at(r.bucket));
            // scale covariates so the ridge acts evenly across units
            Eigen::MatrixXd X = sub.matrix(names);
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
                const double mu = X.col(j).mean();
                const double sd = std::sqrt((X.col(j).array() - mu).square().sum() / std::max<double>(1.0, double(X.rows() - 1)));
                if (!(sd > 0.0)) throw Error(ErrorCode::zero_variance, "covariate '" + names[std::size_t(j)] + "' is constant");
                X.col(j) = (X.col(j).array() - mu) / sd;
            }
            const auto fit = stats::logistic_fit(X, y, {}, names);
            std::cout << "rows " << y.size() << " (standardized covariates)\n";
            print_fit(std::cout, fit.model);
            std::cout << "pseudo R2 " << fmt6(fit.model.r2) << "\niterations " << fit.model.iterations << '\n';
            with_output(c.output, [&](std::ostream& out) {
                out << "bin,lo,hi,count,share_pct,observed,mean_predicted\n";
                for (const auto& b : fit.calibration)
                    out << b.label << ',' << csv::fmt(b.lo) << ',' << csv::fmt(b.hi) << ',' << b.count << ',' << csv::fmt(b.share)
                        << ',' << csv::fmt(b.observed) << ',' << csv::fmt(b.mean_predicted) << '\n';
            });
        } else if (*acf_cmd) {
            const auto table = csv::parse(read_input(c.input));
            std::vector<double> x;
            const auto complete = table.find("complete");
            const auto zero = table.find("zero_duration");
            const auto col = table.column(column);
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                const auto& row = table.rows[r];
                if (complete && row[*complete] == "0") continue;
                if (zero && row[*zero] == "1") continue;
                if (auto v = csv::to_double(row[col], table.row_lines[r]); v && std::isfinite(*v)) x.push_back(*v);
            }
            const auto res = stats::acf(x, max_lag);
            std::cout << "n " << res.n << ", band +/-" << fmt6(res.band) << ", lags outside " << res.outside_band() << '\n';
            with_output(c.output, [&](std::ostream& out) {
                out << "lag,r,band\n";
                for (std::size_t h = 0; h < res.r.size(); ++h) out << h + 1 << ',' << csv::fmt(res.r[h]) << ',' << csv::fmt(res.band) << '\n';
            });
        } else if (*corr) {
            const auto cfg = c.session();
            const auto msgs = c.read_stream();
            BookState book;
            if (corr_kind == "flow") {
                const auto width = parse_duration(corr_subbucket);
                const auto window = parse_duration(corr_window);
                if (window % width != 0) throw config_error("--corr-window must be a multiple of --corr-subbucket");
                const auto flows = time_bucket_flows(msgs, book, cfg, width);
                const auto n = static_cast<std::size_t>(window / width);
                const auto bid = rolling_flow_correlation(flows, Side::bid, n);
                const auto ask = rolling_flow_correlation(flows, Side::ask, n);
                with_output(c.output, [&](std::ostream& out) {
                    out << "ts,rho_bid,rho_ask\n";
                    for (std::size_t i = 0; i < bid.size(); ++i)
                        out << bid[i].ts << ',' << csv::fmt(bid[i].rho) << ',' << csv::fmt(ask[i].rho) << '\n';
                });
                std::cerr << "corr: " << flows.size() << " sub-buckets, " << bid.size() << " windows\n";
            } else if (corr_kind == "toxicity") {
                const auto trades = trade_impacts(msgs, book, cfg);
                const auto trace = toxicity_trace(trades, tox_window);
                with_output(c.output, [&](std::ostream& out) {
                    out << "ts,rho_tox\n";
                    for (const auto& p : trace) out << p.ts << ',' << csv::fmt(p.rho) << '\n';
                });
                std::cerr << "corr: " << trades.size() << " trades, " << trace.size() << " windows\n";
            } else {
                throw config_error("--kind must be 'flow' or 'toxicity'");
            }
        } else if (*pi_demo) {
            if (pi_spread < 1) throw config_error("--spread must be at least one tick");
            Snapshot s;
            const Ticks bid = 1000;
            Shares total = 0;
            for (const auto& l : split_list(levels)) {
                const auto v = csv::to_int(l);
                if (!v || *v <= 0) throw config_error("bad level size '" + l + "'");
                s.asks.push_back({bid + pi_spread + static_cast<Ticks>(s.asks.size()), *v});
                total += *v;
            }
            if (s.asks.empty()) throw config_error("--levels is empty");
            s.bids.push_back({bid, s.asks.front().volume});
            const auto pi = execution_cost(s, pi_n, Side::ask);
            const double slope = impact_slope(s, pi_n, Side::ask);
            const double slope_fitted = impact_slope(s, pi_n, Side::ask, SlopeIntercept::fitted);
            std::cout << "ask queues " << levels << " on consecutive ticks, spread " << pi_spread << " tick(s), "
                      << total << " shares visible\n";
            std::cout << "PI(" << pi_n << ") = " << pi.num() << '/' << pi.den() << " ticks = " << fmt6(pi.to_double())
                      << " ticks\n";
            std::cout << "S = " << fmt6(slope * 1000.0) << " ticks per 1000 shares (through the origin)\n";
            std::cout << "implied depth 0.5/S = " << fmt6(0.5 / slope) << " shares\n";
            std::cout << "S with fitted intercept = " << fmt6(slope_fitted * 1000.0) << " ticks per 1000 shares\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.category()) {
            case ErrorCategory::config: return kExitConfig;
            case ErrorCategory::data: return kExitData;
            case ErrorCategory::numerical: return kExitNumerical;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
