#ifndef LONGMEM_TOOLS_COMMANDS_HPP
#define LONGMEM_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "longmem/gse.hpp"
#include "longmem/inference.hpp"
#include "longmem/simulate.hpp"
#include "longmem/time_series.hpp"

namespace longmem::cli {

enum class OutputFormat { json, csv };

/// "sqrt" rule or an explicit ordinate count.
struct BandwidthRule {
    std::optional<std::size_t> explicit_m;
    std::size_t resolve(Eigen::Index series_len, std::size_t available) const;
};

// ---- estimate / test -------------------------------------------------------

struct EstimateOptions {
    BandwidthRule bandwidth;
    double box_margin = 1e-3;
    double grad_tol = 1e-8;
    std::size_t max_iters = 500;
    bool with_gph = false;
    OutputFormat format = OutputFormat::json;
};

struct EstimateReport {
    gse::GseFit fit;
    std::vector<double> gph;
};

EstimateReport run_estimate(const TimeSeries& x, const EstimateOptions& opts);
void write_estimate(std::ostream& out, const EstimateReport& report, OutputFormat fmt);

struct TestOptions {
    EstimateOptions estimate;
    double null_value = 0.0;
    inference::Alternative alternative = inference::Alternative::greater;
    double alpha = 0.05;
    bool with_wald = false;
};

struct TestReport {
    EstimateReport estimate;
    inference::TestResult total_memory;
    std::optional<inference::TestResult> wald;
};

TestReport run_test(const TimeSeries& x, const TestOptions& opts);
void write_test(std::ostream& out, const TestReport& report, OutputFormat fmt);

// ---- plot data -------------------------------------------------------------

struct PeriodogramOptions {
    Eigen::Index coord = 0; // 0-based
    std::optional<std::size_t> points;
    std::optional<std::size_t> smooth_halfwidth; // when set, emit smoothed ordinates
};

void run_periodogram(std::ostream& out, const TimeSeries& x, const PeriodogramOptions& opts);

struct GridOptions {
    std::vector<Eigen::Index> coords{0}; // 1 or 2 entries, 0-based
    double from = -0.45;
    double to = 0.45;
    double step = 0.01;
    BandwidthRule bandwidth;
};

void run_grid(std::ostream& out, const TimeSeries& x, const GridOptions& opts);

struct AcovOptions {
    std::size_t max_lag = 100;
};

void run_acov(std::ostream& out, const TimeSeries& x, const AcovOptions& opts);

// ---- experiment harnesses --------------------------------------------------

struct BiasStudyOptions {
    std::vector<double> ar;
    std::vector<double> ma;
    double d = 0.25;
    double sigma = 1.0;
    std::vector<std::size_t> lengths; // prefix window sizes, m = floor(sqrt(N))
    std::size_t trials = 1;
    std::uint64_t seed = 0;
};

struct BiasRow {
    std::size_t window = 0;
    std::size_t bandwidth = 0;
    double lambda_cutoff = 0.0;
    double mean_d_hat = 0.0;
};

std::vector<BiasRow> bias_study(const BiasStudyOptions& opts);
void write_bias_rows(std::ostream& out, const std::vector<BiasRow>& rows);

struct CalibrateOptions {
    Eigen::Index p = 1;
    std::size_t length = 0;
    std::vector<std::size_t> bandwidths;
    std::size_t trials = 100;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

struct CalibrationRow {
    std::size_t bandwidth = 0;
    double wald_type1 = 0.0;
    double tm_type1 = 0.0;
    bool degenerate = false; // bandwidth below dimension
};

std::vector<CalibrationRow> calibrate(const CalibrateOptions& opts);
void write_calibration_rows(std::ostream& out, const std::vector<CalibrationRow>& rows);

struct ValidateTmOptions {
    simulate::MfdPreset setting = simulate::MfdPreset::zero;
    Eigen::Index p = 1;
    std::size_t length = 0;
    std::size_t trials = 50;
    std::uint64_t seed = 0;
};

struct TmValidation {
    std::string setting;
    std::size_t trials = 0;
    std::size_t bandwidth = 0;
    double true_normalized_mean = 0.0;  // of the generating memory vectors
    double mean_normalized = 0.0;       // sample mean of normalized total memory
    double var_normalized = 0.0;
    double var_total = 0.0;             // sample variance of the raw total memory
    double analytic_var_total = 0.0;    // p/(4m), identity-level reference
    double analytic_var_normalized = 0.0;
};

TmValidation validate_tm(const ValidateTmOptions& opts);
void write_tm_validation(std::ostream& out, const TmValidation& v, OutputFormat fmt);

// ---- shared plumbing ---------------------------------------------------------

std::vector<double> parse_double_list(const std::string& csv_list);
std::vector<std::size_t> parse_size_list(const std::string& csv_list);

} // namespace longmem::cli

#endif
