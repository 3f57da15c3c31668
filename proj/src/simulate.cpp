#include "longmem/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "longmem/error.hpp"
#include "longmem/fft.hpp"
#include "longmem/rng.hpp"

namespace longmem::simulate {

namespace {

void check_memory_param(double d) {
    if (!(std::fabs(d) < 0.5))
        throw validation_error("memory parameter must lie in (-1/2, 1/2)");
}

void check_common(std::size_t length, double sigma) {
    if (length < 1) throw validation_error("length must be at least 1");
    if (!(sigma > 0.0)) throw validation_error("sigma must be positive");
}

std::vector<double> gaussian_block(rng::GaussianStream& stream, std::size_t n,
                                   double sigma) {
    std::vector<double> z(n);
    for (auto& v : z) v = sigma * stream.next();
    return z;
}

// Truncated MA(infinity) application of (1-B)^{-d}: the first `n` terms of
// psi * z. Passthrough when d == 0 so white noise stays bit-exact.
std::vector<double> fractional_integrate(std::vector<double> z, double d) {
    if (d == 0.0) return z;
    const std::vector<double> psi = frac_diff_coeffs(d, z.size());
    return fft::convolve_prefix(psi, z, z.size());
}

// AR stationarity: all roots of 1 - a_1 z - ... - a_p z^p outside the unit
// circle, located as eigenvalues of the companion matrix of the recursion.
void check_ar_stationary(const std::vector<double>& ar) {
    const std::size_t p = ar.size();
    if (p == 0) return;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                      static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i) companion(0, static_cast<Eigen::Index>(i)) = ar[i];
    for (std::size_t i = 1; i < p; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    const Eigen::VectorXcd eig = companion.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i)
        if (std::abs(eig(i)) >= 1.0 - 1e-10)
            throw validation_error("AR polynomial has a root on or inside the unit circle");
}

std::vector<double> scalar_arfima_path(const std::vector<double>& ar,
                                       const std::vector<double>& ma, double d,
                                       std::size_t length, std::size_t burn,
                                       double sigma, std::uint64_t seed) {
    const std::size_t total = length + burn;
    rng::GaussianStream stream(seed);
    std::vector<double> z = gaussian_block(stream, total, sigma);

    std::vector<double> w = z;
    for (std::size_t t = 0; t < total; ++t)
        for (std::size_t q = 0; q < ma.size() && q + 1 <= t; ++q)
            w[t] += ma[q] * z[t - q - 1];

    if (!ar.empty()) {
        for (std::size_t t = 0; t < total; ++t)
            for (std::size_t i = 0; i < ar.size() && i + 1 <= t; ++i)
                w[t] += ar[i] * w[t - i - 1];
    }

    std::vector<double> x = fractional_integrate(std::move(w), d);
    return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
}

TimeSeries column_series(const std::vector<double>& x) {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(x.size()), 1);
    for (std::size_t t = 0; t < x.size(); ++t)
        values(static_cast<Eigen::Index>(t), 0) = x[t];
    return TimeSeries(std::move(values));
}

// ---- finite-state chains -------------------------------------------------

void check_column_stochastic(const Eigen::MatrixXd& q, const char* what) {
    if (q.rows() != q.cols() || q.rows() < 1)
        throw validation_error(std::string(what) + " matrix must be square");
    if ((q.array() < 0.0).any())
        throw validation_error(std::string(what) + " matrix has negative entries");
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (std::fabs(q.col(j).sum() - 1.0) > 1e-12)
            throw validation_error(std::string(what) + " matrix columns must sum to 1");
}

// Irreducibility of a stochastic matrix: (I + P)^{n-1} must be entrywise
// positive. State spaces here are small, so the dense power is cheap.
bool is_irreducible(const Eigen::MatrixXd& p) {
    const Eigen::Index n = p.rows();
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n) + p;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
    Eigen::Index k = n - 1;
    while (k > 0) { // binary power
        if (k & 1) acc = acc * b;
        b = b * b;
        k >>= 1;
    }
    return (acc.array() > 0.0).all();
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p) {
    if (!is_irreducible(p))
        throw degeneracy_error("reducible chain: no unique stationary distribution");
    const Eigen::Index n = p.rows();
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 200000; ++it) {
        Eigen::VectorXd next = p * pi;
        next /= next.sum();
        if ((next - pi).lpNorm<1>() < 1e-14) return next;
        pi = next;
    }
    throw degeneracy_error("chain failed to reach a stationary distribution");
}

std::size_t sample_categorical(const Eigen::VectorXd& pmf, double u) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pmf.size(); ++i) {
        acc += pmf(i);
        if (u <= acc) return static_cast<std::size_t>(i);
    }
    return static_cast<std::size_t>(pmf.size() - 1);
}

// Order-q chain driven by a state-history mixture. The lifted chain over
// q-tuples supplies the stationary start.
TimeSeries run_mixture_chain(const std::vector<double>& weights,
                             const std::vector<Eigen::MatrixXd>& transitions,
                             const std::vector<double>& output_map,
                             std::size_t length, std::uint64_t seed) {
    const std::size_t order = weights.size();
    const Eigen::Index n_states = transitions.front().rows();
    const std::size_t m = static_cast<std::size_t>(n_states);
    if (output_map.size() != m)
        throw validation_error("output map size must match the number of states");
    if (length < 1) throw validation_error("length must be at least 1");

    std::size_t lifted_size = 1;
    for (std::size_t i = 0; i < order; ++i) {
        if (lifted_size > 100000 / m)
            throw validation_error("state space of the lifted chain is too large");
        lifted_size *= m;
    }

    // Lifted transition over tuples (x_{t-1},...,x_{t-q}), column-major order.
    Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(lifted_size), static_cast<Eigen::Index>(lifted_size));
    for (std::size_t from = 0; from < lifted_size; ++from) {
        std::size_t rem = from;
        std::vector<std::size_t> tuple(order);
        for (std::size_t i = 0; i < order; ++i) {
            tuple[i] = rem % m;
            rem /= m;
        }
        for (std::size_t next = 0; next < m; ++next) {
            double prob = 0.0;
            for (std::size_t l = 0; l < order; ++l)
                prob += weights[l] * transitions[l](static_cast<Eigen::Index>(next),
                                                    static_cast<Eigen::Index>(tuple[l]));
            std::size_t to = next;
            std::size_t base = m;
            for (std::size_t i = 0; i + 1 < order; ++i) {
                to += tuple[i] * base;
                base *= m;
            }
            lifted(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) += prob;
        }
    }

    const Eigen::VectorXd xi = stationary_distribution(lifted);

    rng::GaussianStream stream(seed);
    const std::size_t start = sample_categorical(xi, stream.next_uniform());
    std::vector<std::size_t> history(order);
    {
        std::size_t rem = start;
        for (std::size_t i = 0; i < order; ++i) {
            history[i] = rem % m;
            rem /= m;
        }
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(length), 1);
    Eigen::VectorXd pmf(n_states);
    for (std::size_t t = 0; t < length; ++t) {
        pmf.setZero();
        for (std::size_t l = 0; l < order; ++l)
            pmf += weights[l] * transitions[l].col(static_cast<Eigen::Index>(history[l]));
        const std::size_t state = sample_categorical(pmf, stream.next_uniform());
        values(static_cast<Eigen::Index>(t), 0) = output_map[state];
        for (std::size_t i = order; i-- > 1;) history[i] = history[i - 1];
        history[0] = state;
    }
    return TimeSeries(std::move(values));
}

} // namespace

std::vector<double> frac_diff_coeffs(double d, std::size_t n) {
    if (n < 1) throw validation_error("coefficient count must be at least 1");
    std::vector<double> psi(n);
    psi[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k)
        psi[k] = psi[k - 1] * (static_cast<double>(k) - 1.0 + d) / static_cast<double>(k);
    return psi;
}

TimeSeries fracdiff_noise(const FracDiffSpec& spec) {
    check_memory_param(spec.d);
    check_common(spec.length, spec.sigma);
    const std::size_t burn = spec.burn_in.value_or(spec.length);
    return column_series(scalar_arfima_path({}, {}, spec.d, spec.length, burn,
                                            spec.sigma, spec.seed));
}

TimeSeries arfima(const ArfimaSpec& spec) {
    check_memory_param(spec.d);
    check_common(spec.length, spec.sigma);
    check_ar_stationary(spec.ar);
    const std::size_t burn = spec.burn_in.value_or(spec.length);
    return column_series(scalar_arfima_path(spec.ar, spec.ma, spec.d, spec.length,
                                            burn, spec.sigma, spec.seed));
}

TimeSeries multivariate_fd(const MultiFdSpec& spec) {
    if (spec.d.size() < 1) throw validation_error("memory vector is empty");
    for (Eigen::Index i = 0; i < spec.d.size(); ++i) check_memory_param(spec.d(i));
    check_common(spec.length, spec.sigma);
    const std::size_t burn = spec.burn_in.value_or(spec.length);

    Eigen::MatrixXd values(static_cast<Eigen::Index>(spec.length), spec.d.size());
    for (Eigen::Index i = 0; i < spec.d.size(); ++i) {
        const std::uint64_t coord_seed =
            rng::derive_seed(spec.seed, static_cast<std::uint64_t>(i));
        const auto column = scalar_arfima_path({}, {}, spec.d(i), spec.length, burn,
                                               spec.sigma, coord_seed);
        for (std::size_t t = 0; t < spec.length; ++t)
            values(static_cast<Eigen::Index>(t), i) = column[t];
    }
    return TimeSeries(std::move(values));
}

MultiFdSpec make_preset_spec(MfdPreset preset, Eigen::Index p, std::size_t length,
                             std::uint64_t seed) {
    if (p < 1) throw validation_error("dimension must be at least 1");
    MultiFdSpec spec;
    spec.length = length;
    spec.seed = seed;
    spec.d = Eigen::VectorXd::Zero(p);
    switch (preset) {
        case MfdPreset::zero:
            break;
        case MfdPreset::constant:
            spec.d.setConstant(0.25);
            break;
        case MfdPreset::subset: {
            const Eigen::Index strong = (p + 9) / 10; // ceil(0.1 p)
            spec.d.head(strong).setConstant(0.4);
            break;
        }
        case MfdPreset::range: {
            // 0.25 * Beta(2,2): the median of three uniforms is Beta(2,2).
            // Coordinate streams use indices 0..p-1, so index p is free.
            rng::GaussianStream stream(rng::derive_seed(seed, static_cast<std::uint64_t>(p)));
            for (Eigen::Index i = 0; i < p; ++i) {
                double u1 = stream.next_uniform();
                double u2 = stream.next_uniform();
                double u3 = stream.next_uniform();
                const double median =
                    std::max(std::min(u1, u2), std::min(std::max(u1, u2), u3));
                spec.d(i) = 0.25 * median;
            }
            break;
        }
    }
    return spec;
}

MfdPreset parse_preset(const std::string& name) {
    if (name == "zero") return MfdPreset::zero;
    if (name == "constant") return MfdPreset::constant;
    if (name == "subset") return MfdPreset::subset;
    if (name == "range") return MfdPreset::range;
    throw validation_error("unknown preset '" + name +
                           "' (expected one of: zero, constant, subset, range)");
}

TimeSeries markov_series(const MarkovSpec& spec) {
    check_column_stochastic(spec.transition, "transition");
    return run_mixture_chain({1.0}, {spec.transition}, spec.output_map, spec.length,
                             spec.seed);
}

TimeSeries mtd_series(const MtdSpec& spec) {
    if (spec.weights.empty() || spec.weights.size() != spec.transitions.size())
        throw validation_error("weights and transition matrices must match in number");
    double total = 0.0;
    for (double w : spec.weights) {
        if (!(w > 0.0)) throw validation_error("mixture weights must be positive");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw validation_error("mixture weights must sum to 1");
    const Eigen::Index n_states = spec.transitions.front().rows();
    for (const auto& q : spec.transitions) {
        check_column_stochastic(q, "mixture transition");
        if (q.rows() != n_states)
            throw validation_error("mixture transition matrices must share a state space");
        if ((q.diagonal().array() <= 0.0).any())
            throw validation_error("mixture transition matrices need positive diagonals");
    }
    return run_mixture_chain(spec.weights, spec.transitions, spec.output_map,
                             spec.length, spec.seed);
}

TimeSeries arma_series(const ArmaSpec& spec) {
    ArfimaSpec full;
    full.ar = spec.ar;
    full.ma = spec.ma;
    full.d = 0.0;
    full.length = spec.length;
    full.burn_in = spec.burn_in;
    full.sigma = spec.sigma;
    full.seed = spec.seed;
    return arfima(full);
}

TimeSeries nonlinear_ar_series(const NonlinearArSpec& spec) {
    if (!(std::fabs(spec.linear_coef) < 1.0))
        throw validation_error("linear coefficient must have |b| < 1");
    check_common(spec.length, spec.sigma);
    const std::size_t burn = spec.burn_in.value_or(spec.length);
    rng::GaussianStream stream(spec.seed);

    Eigen::MatrixXd values(static_cast<Eigen::Index>(spec.length), 1);
    double x = 0.0;
    for (std::size_t t = 0; t < burn + spec.length; ++t) {
        x = spec.tanh_scale * std::tanh(x) + spec.linear_coef * x +
            spec.sigma * stream.next();
        if (t >= burn)
            values(static_cast<Eigen::Index>(t - burn), 0) = x;
    }
    return TimeSeries(std::move(values));
}

} // namespace longmem::simulate
