#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "csv.hpp"
#include "longmem/error.hpp"

namespace {

using namespace longmem;
using namespace longmem::cli;

constexpr int kExitValidation = 2;
constexpr int kExitDegeneracy = 3;

struct OutputTarget {
    explicit OutputTarget(std::string p) : path(std::move(p)) {}
    std::string path;
    std::ofstream file;
    std::ostream& stream() {
        if (path == "-") return std::cout;
        if (!file.is_open()) {
            file.open(path);
            if (!file) throw validation_error("cannot open output file: " + path);
        }
        return file;
    }
};

OutputFormat parse_format(const std::string& name) {
    if (name == "json") return OutputFormat::json;
    if (name == "csv") return OutputFormat::csv;
    throw validation_error("unknown format '" + name + "' (expected json or csv)");
}

inference::Alternative parse_alternative(const std::string& name) {
    if (name == "greater") return inference::Alternative::greater;
    if (name == "less") return inference::Alternative::less;
    if (name == "two-sided" || name == "two_sided") return inference::Alternative::two_sided;
    throw validation_error("unknown alternative '" + name +
                           "' (expected greater, less, or two-sided)");
}

// Sticky chain on `states` states: stay put with the given probability,
// otherwise move uniformly to one of the others.
Eigen::MatrixXd sticky_transition(int states, double stay) {
    if (states < 2) throw validation_error("chain needs at least 2 states");
    if (!(stay > 0.0 && stay < 1.0))
        throw validation_error("stay probability must lie in (0, 1)");
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(
        states, states, (1.0 - stay) / static_cast<double>(states - 1));
    p.diagonal().setConstant(stay);
    return p;
}

std::vector<double> identity_output_map(int states) {
    std::vector<double> g(static_cast<std::size_t>(states));
    for (int i = 0; i < states; ++i) g[static_cast<std::size_t>(i)] = i;
    return g;
}

int run(int argc, char** argv) {
    CLI::App app{"Estimation, testing, and simulation of long memory in time series"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Generate a series and write it as CSV");
    sim->require_subcommand(1);

    struct SimCommon {
        std::size_t length = 16384;
        std::uint64_t seed = 0;
        double sigma = 1.0;
        std::int64_t burn_in = -1; // -1: default (= length)
        std::string output = "-";
    };
    const auto add_common = [](CLI::App* cmd, SimCommon& c) {
        cmd->add_option("--length", c.length, "Series length T")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", c.seed, "Random seed");
        cmd->add_option("--sigma", c.sigma, "Innovation standard deviation");
        cmd->add_option("--burn-in", c.burn_in, "Burn-in length (default: T)");
        cmd->add_option("-o,--output", c.output, "Output file ('-' for stdout)");
    };
    const auto resolve_burn = [](const SimCommon& c) -> std::optional<std::size_t> {
        if (c.burn_in < 0) return std::nullopt;
        return static_cast<std::size_t>(c.burn_in);
    };

    SimCommon fd_common;
    double fd_d = 0.0;
    auto* sim_fd = sim->add_subcommand("fd", "Fractionally differenced Gaussian noise");
    sim_fd->add_option("--d", fd_d, "Memory parameter in (-1/2, 1/2)")->required();
    add_common(sim_fd, fd_common);

    SimCommon arfima_common;
    double arfima_d = 0.0;
    std::string arfima_ar, arfima_ma;
    auto* sim_arfima = sim->add_subcommand("arfima", "ARFIMA(p, d, q) process");
    sim_arfima->add_option("--ar", arfima_ar, "AR coefficients, comma separated");
    sim_arfima->add_option("--ma", arfima_ma, "MA coefficients, comma separated");
    sim_arfima->add_option("--d", arfima_d, "Memory parameter in (-1/2, 1/2)");
    add_common(sim_arfima, arfima_common);

    SimCommon mfd_common;
    std::string mfd_preset, mfd_d_list;
    Eigen::Index mfd_p = 0;
    auto* sim_mfd = sim->add_subcommand("mfd", "Coordinate-wise fractionally integrated noise");
    sim_mfd->add_option("--preset", mfd_preset, "zero | constant | subset | range");
    sim_mfd->add_option("--p", mfd_p, "Dimension (with --preset)");
    sim_mfd->add_option("--d", mfd_d_list, "Explicit memory vector, comma separated");
    add_common(sim_mfd, mfd_common);

    SimCommon arma_common;
    std::string arma_ar, arma_ma;
    auto* sim_arma = sim->add_subcommand("arma", "ARMA(p, q) process");
    sim_arma->add_option("--ar", arma_ar, "AR coefficients, comma separated");
    sim_arma->add_option("--ma", arma_ma, "MA coefficients, comma separated");
    add_common(sim_arma, arma_common);

    SimCommon markov_common;
    double markov_stay = 0.9;
    int markov_states = 2;
    auto* sim_markov = sim->add_subcommand("markov", "Finite-state sticky Markov chain");
    sim_markov->add_option("--stay", markov_stay, "Probability of staying in place");
    sim_markov->add_option("--states", markov_states, "Number of states");
    add_common(sim_markov, markov_common);

    SimCommon mtd_common;
    std::string mtd_weights = "0.6,0.4", mtd_stays = "0.7,0.5";
    int mtd_states = 3;
    auto* sim_mtd = sim->add_subcommand("mtd", "Mixture transition distribution chain");
    sim_mtd->add_option("--weights", mtd_weights, "Mixture weights, comma separated");
    sim_mtd->add_option("--stay", mtd_stays, "Stay probability per lag matrix");
    sim_mtd->add_option("--states", mtd_states, "Number of states");
    add_common(sim_mtd, mtd_common);

    SimCommon nlar_common;
    double nlar_a = 1.5, nlar_b = 0.3;
    auto* sim_nlar = sim->add_subcommand("nlar", "Nonlinear autoregression a*tanh(x) + b*x");
    sim_nlar->add_option("--a", nlar_a, "tanh scale");
    sim_nlar->add_option("--b", nlar_b, "Linear coefficient, |b| < 1");
    add_common(sim_nlar, nlar_common);

    // ---- estimate ----------------------------------------------------------
    std::string est_input = "-", est_bandwidth = "sqrt", est_format = "json",
                est_output = "-";
    EstimateOptions est_opts;
    auto* est = app.add_subcommand("estimate", "Fit the memory vector of a CSV series");
    est->add_option("input", est_input, "CSV file ('-' for stdin)");
    est->add_option("--bandwidth", est_bandwidth, "'sqrt' or an ordinate count");
    est->add_flag("--gph", est_opts.with_gph, "Also report log-periodogram regression");
    est->add_option("--box-margin", est_opts.box_margin, "Feasible box margin");
    est->add_option("--grad-tol", est_opts.grad_tol, "Convergence tolerance");
    est->add_option("--max-iters", est_opts.max_iters, "Optimizer iteration cap");
    est->add_option("--format", est_format, "json or csv");
    est->add_option("-o,--output", est_output, "Output file");

    // ---- test --------------------------------------------------------------
    std::string test_input = "-", test_bandwidth = "sqrt", test_format = "json",
                test_output = "-", test_alternative = "greater";
    TestOptions test_opts;
    auto* tst = app.add_subcommand("test", "Test the total memory of a CSV series");
    tst->add_option("input", test_input, "CSV file ('-' for stdin)");
    tst->add_option("--bandwidth", test_bandwidth, "'sqrt' or an ordinate count");
    tst->add_option("--null", test_opts.null_value, "Null total memory");
    tst->add_option("--alternative", test_alternative, "greater | less | two-sided");
    tst->add_option("--alpha", test_opts.alpha, "Test level");
    tst->add_flag("--wald", test_opts.with_wald, "Also run the Wald test");
    tst->add_option("--format", test_format, "json or csv");
    tst->add_option("-o,--output", test_output, "Output file");

    // ---- plot data ---------------------------------------------------------
    std::string pgm_input = "-", pgm_output = "-";
    Eigen::Index pgm_coord = 1;
    std::int64_t pgm_points = -1, pgm_smooth = -1;
    auto* pgm = app.add_subcommand("periodogram", "Log-periodogram plot data as CSV");
    pgm->add_option("input", pgm_input, "CSV file ('-' for stdin)");
    pgm->add_option("--coord", pgm_coord, "Coordinate (1-based)");
    pgm->add_option("--points", pgm_points, "Number of low-frequency points (default sqrt(T))");
    pgm->add_option("--smooth", pgm_smooth, "Emit the smoothed periodogram with this halfwidth");
    pgm->add_option("-o,--output", pgm_output, "Output file");

    std::string grid_input = "-", grid_coords = "1", grid_bandwidth = "sqrt",
                grid_output = "-";
    GridOptions grid_opts;
    auto* grd = app.add_subcommand("grid", "Objective values over a grid of d as CSV");
    grd->add_option("input", grid_input, "CSV file ('-' for stdin)");
    grd->add_option("--coords", grid_coords, "1 or 2 coordinates (1-based), comma separated");
    grd->add_option("--from", grid_opts.from, "Grid start");
    grd->add_option("--to", grid_opts.to, "Grid end");
    grd->add_option("--step", grid_opts.step, "Grid step");
    grd->add_option("--bandwidth", grid_bandwidth, "'sqrt' or an ordinate count");
    grd->add_option("-o,--output", grid_output, "Output file");

    std::string acov_input = "-", acov_output = "-";
    AcovOptions acov_opts;
    auto* acv = app.add_subcommand("acov", "Autocovariance-trace partial sums as CSV");
    acv->add_option("input", acov_input, "CSV file ('-' for stdin)");
    acv->add_option("--max-lag", acov_opts.max_lag, "Largest lag");
    acv->add_option("-o,--output", acov_output, "Output file");

    // ---- experiments -------------------------------------------------------
    std::string bias_ar = "0.8", bias_ma, bias_lengths = "4096,16384,65536",
                bias_output = "-";
    BiasStudyOptions bias_opts;
    auto* bias = app.add_subcommand("bias-study",
                                    "Estimate over prefix windows with m = sqrt(N)");
    bias->add_option("--ar", bias_ar, "AR coefficients of the generating model");
    bias->add_option("--ma", bias_ma, "MA coefficients of the generating model");
    bias->add_option("--d", bias_opts.d, "True memory parameter");
    bias->add_option("--sigma", bias_opts.sigma, "Innovation standard deviation");
    bias->add_option("--lengths", bias_lengths, "Window sizes N, comma separated");
    bias->add_option("--trials", bias_opts.trials, "Independent replications");
    bias->add_option("--seed", bias_opts.seed, "Random seed");
    bias->add_option("-o,--output", bias_output, "Output file");

    std::string cal_bandwidths = "64,128", cal_output = "-";
    CalibrateOptions cal_opts;
    auto* cal = app.add_subcommand("calibrate",
                                   "Empirical type-I error of the tests on white noise");
    cal->add_option("--p", cal_opts.p, "Dimension")->required();
    cal->add_option("--length", cal_opts.length, "Series length T")->required();
    cal->add_option("--m", cal_bandwidths, "Bandwidths, comma separated");
    cal->add_option("--trials", cal_opts.trials, "Trials per bandwidth");
    cal->add_option("--alpha", cal_opts.alpha, "Nominal level");
    cal->add_option("--seed", cal_opts.seed, "Random seed");
    cal->add_option("-o,--output", cal_output, "Output file");

    std::string vtm_setting = "zero", vtm_format = "json", vtm_output = "-";
    ValidateTmOptions vtm_opts;
    auto* vtm = app.add_subcommand("validate-tm",
                                   "Sampling behavior of the total-memory estimator");
    vtm->add_option("--setting", vtm_setting, "zero | constant | subset | range")->required();
    vtm->add_option("--p", vtm_opts.p, "Dimension")->required();
    vtm->add_option("--length", vtm_opts.length, "Series length T")->required();
    vtm->add_option("--trials", vtm_opts.trials, "Number of replications");
    vtm->add_option("--seed", vtm_opts.seed, "Random seed");
    vtm->add_option("--format", vtm_format, "json or csv");
    vtm->add_option("-o,--output", vtm_output, "Output file");

    app.parse(argc, argv);

    const auto write_series = [&](const TimeSeries& x, const std::string& path) {
        OutputTarget target{path};
        write_matrix_csv(target.stream(), x);
    };
    const auto parse_bandwidth = [](const std::string& text) {
        BandwidthRule rule;
        if (text != "sqrt") {
            try {
                std::size_t pos = 0;
                const long v = std::stol(text, &pos);
                if (pos != text.size() || v < 1) throw std::invalid_argument(text);
                rule.explicit_m = static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                throw validation_error("bandwidth must be 'sqrt' or a positive integer");
            }
        }
        return rule;
    };

    if (sim_fd->parsed()) {
        simulate::FracDiffSpec spec;
        spec.d = fd_d;
        spec.length = fd_common.length;
        spec.burn_in = resolve_burn(fd_common);
        spec.sigma = fd_common.sigma;
        spec.seed = fd_common.seed;
        write_series(simulate::fracdiff_noise(spec), fd_common.output);
    } else if (sim_arfima->parsed()) {
        simulate::ArfimaSpec spec;
        spec.ar = parse_double_list(arfima_ar);
        spec.ma = parse_double_list(arfima_ma);
        spec.d = arfima_d;
        spec.length = arfima_common.length;
        spec.burn_in = resolve_burn(arfima_common);
        spec.sigma = arfima_common.sigma;
        spec.seed = arfima_common.seed;
        write_series(simulate::arfima(spec), arfima_common.output);
    } else if (sim_mfd->parsed()) {
        simulate::MultiFdSpec spec;
        if (!mfd_preset.empty()) {
            if (mfd_p < 1) throw validation_error("--preset requires --p");
            spec = simulate::make_preset_spec(simulate::parse_preset(mfd_preset), mfd_p,
                                              mfd_common.length, mfd_common.seed);
        } else {
            const auto ds = parse_double_list(mfd_d_list);
            if (ds.empty())
                throw validation_error("provide either --preset with --p, or --d");
            spec.d = Eigen::Map<const Eigen::VectorXd>(ds.data(),
                                                       static_cast<Eigen::Index>(ds.size()));
            spec.length = mfd_common.length;
            spec.seed = mfd_common.seed;
        }
        spec.burn_in = resolve_burn(mfd_common);
        spec.sigma = mfd_common.sigma;
        write_series(simulate::multivariate_fd(spec), mfd_common.output);
    } else if (sim_arma->parsed()) {
        simulate::ArmaSpec spec;
        spec.ar = parse_double_list(arma_ar);
        spec.ma = parse_double_list(arma_ma);
        spec.length = arma_common.length;
        spec.burn_in = resolve_burn(arma_common);
        spec.sigma = arma_common.sigma;
        spec.seed = arma_common.seed;
        write_series(simulate::arma_series(spec), arma_common.output);
    } else if (sim_markov->parsed()) {
        simulate::MarkovSpec spec;
        spec.transition = sticky_transition(markov_states, markov_stay);
        spec.output_map = identity_output_map(markov_states);
        spec.length = markov_common.length;
        spec.seed = markov_common.seed;
        write_series(simulate::markov_series(spec), markov_common.output);
    } else if (sim_mtd->parsed()) {
        simulate::MtdSpec spec;
        spec.weights = parse_double_list(mtd_weights);
        for (double stay : parse_double_list(mtd_stays))
            spec.transitions.push_back(sticky_transition(mtd_states, stay));
        spec.output_map = identity_output_map(mtd_states);
        spec.length = mtd_common.length;
        spec.seed = mtd_common.seed;
        write_series(simulate::mtd_series(spec), mtd_common.output);
    } else if (sim_nlar->parsed()) {
        simulate::NonlinearArSpec spec;
        spec.tanh_scale = nlar_a;
        spec.linear_coef = nlar_b;
        spec.sigma = nlar_common.sigma;
        spec.length = nlar_common.length;
        spec.burn_in = resolve_burn(nlar_common);
        spec.seed = nlar_common.seed;
        write_series(simulate::nonlinear_ar_series(spec), nlar_common.output);
    } else if (est->parsed()) {
        est_opts.bandwidth = parse_bandwidth(est_bandwidth);
        const auto report = run_estimate(read_matrix_csv(est_input), est_opts);
        OutputTarget target{est_output};
        write_estimate(target.stream(), report, parse_format(est_format));
    } else if (tst->parsed()) {
        test_opts.estimate.bandwidth = parse_bandwidth(test_bandwidth);
        test_opts.alternative = parse_alternative(test_alternative);
        const auto report = run_test(read_matrix_csv(test_input), test_opts);
        OutputTarget target{test_output};
        write_test(target.stream(), report, parse_format(test_format));
    } else if (pgm->parsed()) {
        PeriodogramOptions opts;
        if (pgm_coord < 1) throw validation_error("--coord is 1-based");
        opts.coord = pgm_coord - 1;
        if (pgm_points >= 0) opts.points = static_cast<std::size_t>(pgm_points);
        if (pgm_smooth >= 0) opts.smooth_halfwidth = static_cast<std::size_t>(pgm_smooth);
        OutputTarget target{pgm_output};
        run_periodogram(target.stream(), read_matrix_csv(pgm_input), opts);
    } else if (grd->parsed()) {
        grid_opts.coords.clear();
        for (std::size_t c : parse_size_list(grid_coords)) {
            if (c < 1) throw validation_error("--coords entries are 1-based");
            grid_opts.coords.push_back(static_cast<Eigen::Index>(c - 1));
        }
        grid_opts.bandwidth = parse_bandwidth(grid_bandwidth);
        OutputTarget target{grid_output};
        run_grid(target.stream(), read_matrix_csv(grid_input), grid_opts);
    } else if (acv->parsed()) {
        OutputTarget target{acov_output};
        run_acov(target.stream(), read_matrix_csv(acov_input), acov_opts);
    } else if (bias->parsed()) {
        bias_opts.ar = parse_double_list(bias_ar);
        bias_opts.ma = parse_double_list(bias_ma);
        bias_opts.lengths = parse_size_list(bias_lengths);
        OutputTarget target{bias_output};
        write_bias_rows(target.stream(), bias_study(bias_opts));
    } else if (cal->parsed()) {
        cal_opts.bandwidths = parse_size_list(cal_bandwidths);
        OutputTarget target{cal_output};
        write_calibration_rows(target.stream(), calibrate(cal_opts));
    } else if (vtm->parsed()) {
        vtm_opts.setting = simulate::parse_preset(vtm_setting);
        OutputTarget target{vtm_output};
        write_tm_validation(target.stream(), validate_tm(vtm_opts), parse_format(vtm_format));
    }
    return 0;
}

void write_error(const char* kind, const std::string& message) {
    nlohmann::json j;
    j["kind"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0; // --help
        write_error("validation", e.what());
        return kExitValidation;
    } catch (const longmem::validation_error& e) {
        write_error("validation", e.what());
        return kExitValidation;
    } catch (const longmem::degeneracy_error& e) {
        write_error("degeneracy", e.what());
        return kExitDegeneracy;
    } catch (const std::exception& e) {
        write_error("internal", e.what());
        return 1;
    }
}
