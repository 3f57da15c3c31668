#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "longmem/analysis.hpp"
#include "longmem/error.hpp"
#include "longmem/parallel.hpp"
#include "longmem/rng.hpp"
#include "longmem/spectral.hpp"

namespace longmem::cli {

using nlohmann::json;
using std::numbers::pi;

namespace {

constexpr int kSchemaVersion = 1;

const char* alternative_name(inference::Alternative alt) {
    switch (alt) {
        case inference::Alternative::greater: return "greater";
        case inference::Alternative::less: return "less";
        case inference::Alternative::two_sided: return "two_sided";
    }
    return "?";
}

json fit_to_json(const EstimateReport& report) {
    const auto& fit = report.fit;
    json j;
    j["schema"] = kSchemaVersion;
    j["d_hat"] = std::vector<double>(fit.d_hat.data(), fit.d_hat.data() + fit.d_hat.size());
    j["normalized_total_memory"] = inference::normalized_total_memory(fit.d_hat);
    j["objective"] = fit.objective;
    j["bandwidth"] = fit.bandwidth;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["grad_norm"] = fit.grad_norm;
    j["active_bounds"] = fit.active_bounds;
    if (!report.gph.empty()) j["gph"] = report.gph;
    return j;
}

json test_to_json(const inference::TestResult& res, bool wald) {
    json j;
    j["statistic"] = res.statistic;
    j["p_value"] = res.p_value;
    j["alpha"] = res.alpha;
    j["reject"] = res.reject;
    if (wald)
        j["df"] = res.df_or_variance;
    else {
        j["alternative"] = alternative_name(res.alternative);
        j["variance"] = res.df_or_variance;
    }
    return j;
}

double sample_mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = sample_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size() - 1);
}

} // namespace

std::size_t BandwidthRule::resolve(Eigen::Index series_len, std::size_t available) const {
    std::size_t m;
    if (explicit_m) {
        m = *explicit_m;
        if (m < 1 || m > available)
            throw validation_error("bandwidth must be in [1, " + std::to_string(available) +
                                   "] for this input");
    } else {
        m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(series_len))));
        m = std::min(std::max<std::size_t>(m, 1), available);
    }
    return m;
}

EstimateReport run_estimate(const TimeSeries& x, const EstimateOptions& opts) {
    const auto pg = spectral::periodogram(x);
    const std::size_t m = opts.bandwidth.resolve(x.length(), pg.size());
    if (m < static_cast<std::size_t>(x.dims()))
        throw degeneracy_error("bandwidth below dimension: m = " + std::to_string(m) +
                               " < p = " + std::to_string(x.dims()));
    gse::GseConfig cfg;
    cfg.bandwidth = m;
    cfg.box_margin = opts.box_margin;
    cfg.grad_tol = opts.grad_tol;
    cfg.max_iters = opts.max_iters;

    EstimateReport report;
    report.fit = gse::estimate(pg, cfg);
    if (opts.with_gph) {
        report.gph.reserve(static_cast<std::size_t>(x.dims()));
        for (Eigen::Index c = 0; c < x.dims(); ++c)
            report.gph.push_back(gse::gph_estimate(pg, c, m));
    }
    return report;
}

void write_estimate(std::ostream& out, const EstimateReport& report, OutputFormat fmt) {
    if (fmt == OutputFormat::json) {
        out << fit_to_json(report).dump(2) << '\n';
        return;
    }
    out << "field,value\n";
    for (Eigen::Index i = 0; i < report.fit.d_hat.size(); ++i)
        out << "d_hat_" << (i + 1) << ',' << format_double(report.fit.d_hat(i)) << '\n';
    out << "normalized_total_memory,"
        << format_double(inference::normalized_total_memory(report.fit.d_hat)) << '\n';
    out << "objective," << format_double(report.fit.objective) << '\n';
    out << "bandwidth," << report.fit.bandwidth << '\n';
    out << "iterations," << report.fit.iterations << '\n';
    out << "converged," << (report.fit.converged ? 1 : 0) << '\n';
    out << "grad_norm," << format_double(report.fit.grad_norm) << '\n';
    for (std::size_t i = 0; i < report.gph.size(); ++i)
        out << "gph_" << (i + 1) << ',' << format_double(report.gph[i]) << '\n';
}

TestReport run_test(const TimeSeries& x, const TestOptions& opts) {
    TestReport report;
    report.estimate = run_estimate(x, opts.estimate);
    report.total_memory = inference::total_memory_test(report.estimate.fit, opts.null_value,
                                                       opts.alternative, opts.alpha);
    if (opts.with_wald) {
        const Eigen::VectorXd d0 =
            Eigen::VectorXd::Constant(report.estimate.fit.d_hat.size(),
                                      opts.null_value /
                                          static_cast<double>(report.estimate.fit.d_hat.size()));
        report.wald = inference::wald_test(report.estimate.fit, d0, opts.alpha);
    }
    return report;
}

void write_test(std::ostream& out, const TestReport& report, OutputFormat fmt) {
    if (fmt == OutputFormat::json) {
        json j;
        j["schema"] = kSchemaVersion;
        j["estimate"] = fit_to_json(report.estimate);
        j["total_memory_test"] = test_to_json(report.total_memory, false);
        if (report.wald) j["wald_test"] = test_to_json(*report.wald, true);
        out << j.dump(2) << '\n';
        return;
    }
    out << "field,value\n";
    out << "statistic," << format_double(report.total_memory.statistic) << '\n';
    out << "p_value," << format_double(report.total_memory.p_value) << '\n';
    out << "reject," << (report.total_memory.reject ? 1 : 0) << '\n';
    if (report.wald) {
        out << "wald_statistic," << format_double(report.wald->statistic) << '\n';
        out << "wald_p_value," << format_double(report.wald->p_value) << '\n';
        out << "wald_reject," << (report.wald->reject ? 1 : 0) << '\n';
    }
}

void run_periodogram(std::ostream& out, const TimeSeries& x, const PeriodogramOptions& opts) {
    const auto pg = spectral::periodogram(x);
    if (opts.smooth_halfwidth) {
        out << "lambda,smoothed_periodogram\n";
        for (const auto& [freq, value] :
             spectral::smoothed_periodogram(pg, opts.coord, *opts.smooth_halfwidth))
            out << format_double(freq) << ',' << format_double(value) << '\n';
        return;
    }
    BandwidthRule rule;
    rule.explicit_m = opts.points;
    const std::size_t m = rule.resolve(x.length(), pg.size());
    out << "neg2_log_lambda,log_periodogram\n";
    for (const auto& [u, v] : spectral::log_periodogram_points(pg, opts.coord, m))
        out << format_double(u) << ',' << format_double(v) << '\n';
}

void run_grid(std::ostream& out, const TimeSeries& x, const GridOptions& opts) {
    if (opts.coords.size() != 1 && opts.coords.size() != 2)
        throw validation_error("grid supports exactly 1 or 2 coordinates");
    if (!(opts.step > 0.0) || opts.to < opts.from)
        throw validation_error("grid range must satisfy from <= to with positive step");
    const auto pg = spectral::periodogram(x);
    const std::size_t m = opts.bandwidth.resolve(x.length(), pg.size());

    std::vector<double> axis;
    for (double v = opts.from; v <= opts.to + 0.5 * opts.step; v += opts.step)
        axis.push_back(v);

    std::vector<Eigen::VectorXd> grid;
    if (opts.coords.size() == 1) {
        for (double v : axis) grid.push_back((Eigen::VectorXd(1) << v).finished());
    } else {
        for (double a : axis)
            for (double b : axis) grid.push_back((Eigen::VectorXd(2) << a, b).finished());
    }
    const auto values = gse::objective_grid(pg, m, opts.coords, grid);

    out << (opts.coords.size() == 1 ? "d,R" : "d1,d2,R") << '\n';
    for (const auto& pt : values) {
        for (Eigen::Index i = 0; i < pt.d.size(); ++i)
            out << format_double(pt.d(i)) << ',';
        if (std::isnan(pt.value))
            out << '\n'; // empty cell marks a degenerate grid point
        else
            out << format_double(pt.value) << '\n';
    }
}

void run_acov(std::ostream& out, const TimeSeries& x, const AcovOptions& opts) {
    const auto sums =
        analysis::acov_trace_partial_sums(analysis::autocovariance(x, opts.max_lag));
    out << "lag,partial_sum\n";
    for (std::size_t k = 0; k < sums.size(); ++k)
        out << k << ',' << format_double(sums[k]) << '\n';
}

std::vector<BiasRow> bias_study(const BiasStudyOptions& opts) {
    if (opts.lengths.empty()) throw validation_error("window size list is empty");
    if (opts.trials < 1) throw validation_error("trials must be at least 1");
    std::vector<std::size_t> windows = opts.lengths;
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    const std::size_t longest = windows.back();

    std::vector<std::vector<double>> estimates(windows.size(),
                                               std::vector<double>(opts.trials, 0.0));
    parallel::for_each_trial(opts.trials, [&](std::size_t trial) {
        simulate::ArfimaSpec spec;
        spec.ar = opts.ar;
        spec.ma = opts.ma;
        spec.d = opts.d;
        spec.sigma = opts.sigma;
        spec.length = longest;
        spec.seed = rng::derive_seed(opts.seed, trial);
        const TimeSeries path = simulate::arfima(spec);

        for (std::size_t i = 0; i < windows.size(); ++i) {
            const Eigen::Index n = static_cast<Eigen::Index>(windows[i]);
            const TimeSeries prefix(path.values.topRows(n));
            EstimateOptions eopts; // sqrt bandwidth rule
            const auto report = run_estimate(prefix, eopts);
            estimates[i][trial] = report.fit.d_hat(0);
        }
    });

    std::vector<BiasRow> rows;
    rows.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        BiasRow row;
        row.window = windows[i];
        row.bandwidth = static_cast<std::size_t>(
            std::floor(std::sqrt(static_cast<double>(windows[i]))));
        row.lambda_cutoff = 2.0 * pi * static_cast<double>(row.bandwidth) /
                            static_cast<double>(windows[i]);
        row.mean_d_hat = sample_mean(estimates[i]);
        rows.push_back(row);
    }
    return rows;
}

void write_bias_rows(std::ostream& out, const std::vector<BiasRow>& rows) {
    out << "N,m,lambda_cutoff,d_hat\n";
    for (const auto& row : rows)
        out << row.window << ',' << row.bandwidth << ','
            << format_double(row.lambda_cutoff) << ',' << format_double(row.mean_d_hat)
            << '\n';
}

std::vector<CalibrationRow> calibrate(const CalibrateOptions& opts) {
    if (opts.bandwidths.empty()) throw validation_error("bandwidth list is empty");
    if (opts.trials < 1) throw validation_error("trials must be at least 1");

    std::vector<std::size_t> bands = opts.bandwidths;
    std::sort(bands.begin(), bands.end());
    bands.erase(std::unique(bands.begin(), bands.end()), bands.end());

    // reject[b][trial]: 0/1 flags, reduced in index order afterwards.
    std::vector<std::vector<int>> wald_rej(bands.size(), std::vector<int>(opts.trials, 0));
    std::vector<std::vector<int>> tm_rej(bands.size(), std::vector<int>(opts.trials, 0));
    std::vector<bool> degenerate(bands.size(), false);
    for (std::size_t b = 0; b < bands.size(); ++b)
        degenerate[b] = bands[b] < static_cast<std::size_t>(opts.p);

    parallel::for_each_trial(opts.trials, [&](std::size_t trial) {
        simulate::MultiFdSpec spec;
        spec.d = Eigen::VectorXd::Zero(opts.p);
        spec.length = opts.length;
        spec.seed = rng::derive_seed(opts.seed, trial);
        const auto pg = spectral::periodogram(simulate::multivariate_fd(spec));
        for (std::size_t b = 0; b < bands.size(); ++b) {
            if (degenerate[b]) continue;
            gse::GseConfig cfg;
            cfg.bandwidth = bands[b];
            const auto fit = gse::estimate(pg, cfg);
            const auto tm =
                inference::total_memory_test(fit, 0.0, inference::Alternative::greater,
                                             opts.alpha);
            const auto wald =
                inference::wald_test(fit, Eigen::VectorXd::Zero(opts.p), opts.alpha);
            tm_rej[b][trial] = tm.reject ? 1 : 0;
            wald_rej[b][trial] = wald.reject ? 1 : 0;
        }
    });

    std::vector<CalibrationRow> rows;
    rows.reserve(bands.size());
    for (std::size_t b = 0; b < bands.size(); ++b) {
        CalibrationRow row;
        row.bandwidth = bands[b];
        row.degenerate = degenerate[b];
        if (!degenerate[b]) {
            int wald_count = 0, tm_count = 0;
            for (std::size_t t = 0; t < opts.trials; ++t) {
                wald_count += wald_rej[b][t];
                tm_count += tm_rej[b][t];
            }
            row.wald_type1 = static_cast<double>(wald_count) / static_cast<double>(opts.trials);
            row.tm_type1 = static_cast<double>(tm_count) / static_cast<double>(opts.trials);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_calibration_rows(std::ostream& out, const std::vector<CalibrationRow>& rows) {
    out << "m,wald_type1,tm_type1,degenerate\n";
    for (const auto& row : rows) {
        out << row.bandwidth << ',';
        if (row.degenerate)
            out << ",,1\n";
        else
            out << format_double(row.wald_type1) << ',' << format_double(row.tm_type1)
                << ",0\n";
    }
}

TmValidation validate_tm(const ValidateTmOptions& opts) {
    if (opts.trials < 1) throw validation_error("trials must be at least 1");
    const std::size_t m = static_cast<std::size_t>(
        std::floor(std::sqrt(static_cast<double>(opts.length))));

    std::vector<double> normalized(opts.trials, 0.0);
    std::vector<double> totals(opts.trials, 0.0);
    std::vector<double> true_normalized(opts.trials, 0.0);
    parallel::for_each_trial(opts.trials, [&](std::size_t trial) {
        const auto spec = simulate::make_preset_spec(opts.setting, opts.p, opts.length,
                                                     rng::derive_seed(opts.seed, trial));
        true_normalized[trial] = spec.d.mean();
        const auto pg = spectral::periodogram(simulate::multivariate_fd(spec));
        gse::GseConfig cfg;
        cfg.bandwidth = m;
        const auto fit = gse::estimate(pg, cfg);
        totals[trial] = inference::total_memory(fit.d_hat);
        normalized[trial] = inference::normalized_total_memory(fit.d_hat);
    });

    TmValidation v;
    switch (opts.setting) {
        case simulate::MfdPreset::zero: v.setting = "zero"; break;
        case simulate::MfdPreset::constant: v.setting = "constant"; break;
        case simulate::MfdPreset::subset: v.setting = "subset"; break;
        case simulate::MfdPreset::range: v.setting = "range"; break;
    }
    v.trials = opts.trials;
    v.bandwidth = m;
    v.true_normalized_mean = sample_mean(true_normalized);
    v.mean_normalized = sample_mean(normalized);
    v.var_normalized = sample_variance(normalized);
    v.var_total = sample_variance(totals);
    const double p = static_cast<double>(opts.p);
    v.analytic_var_total = p / (4.0 * static_cast<double>(m));
    v.analytic_var_normalized = v.analytic_var_total / (p * p);
    return v;
}

void write_tm_validation(std::ostream& out, const TmValidation& v, OutputFormat fmt) {
    if (fmt == OutputFormat::json) {
        json j;
        j["schema"] = kSchemaVersion;
        j["setting"] = v.setting;
        j["trials"] = v.trials;
        j["bandwidth"] = v.bandwidth;
        j["true_normalized_mean"] = v.true_normalized_mean;
        j["mean_normalized_total_memory"] = v.mean_normalized;
        j["var_normalized_total_memory"] = v.var_normalized;
        j["var_total_memory"] = v.var_total;
        j["analytic_var_total_memory"] = v.analytic_var_total;
        j["analytic_var_normalized_total_memory"] = v.analytic_var_normalized;
        out << j.dump(2) << '\n';
        return;
    }
    out << "setting,trials,bandwidth,true_normalized_mean,mean_normalized,"
           "var_normalized,var_total,analytic_var_total,analytic_var_normalized\n";
    out << v.setting << ',' << v.trials << ',' << v.bandwidth << ','
        << format_double(v.true_normalized_mean) << ',' << format_double(v.mean_normalized)
        << ',' << format_double(v.var_normalized) << ',' << format_double(v.var_total) << ','
        << format_double(v.analytic_var_total) << ','
        << format_double(v.analytic_var_normalized) << '\n';
}

std::vector<double> parse_double_list(const std::string& csv_list) {
    std::vector<double> out;
    if (csv_list.empty()) return out;
    std::stringstream ss(csv_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw validation_error("cannot parse number '" + item + "'");
        }
    }
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& csv_list) {
    std::vector<std::size_t> out;
    for (double v : parse_double_list(csv_list)) {
        if (v < 0.0 || v != std::floor(v))
            throw validation_error("expected a nonnegative integer list");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

} // namespace longmem::cli
