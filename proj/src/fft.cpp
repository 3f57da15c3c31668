#include "longmem/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace longmem::fft {

namespace {

// FFTW plan creation/destruction is not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct RealBuffer {
    double* data = nullptr;
    explicit RealBuffer(std::size_t n) : data(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(data); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
};

struct ComplexBuffer {
    fftw_complex* data = nullptr;
    explicit ComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(data); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
};

struct PlanGuard {
    fftw_plan plan = nullptr;
    ~PlanGuard() {
        if (plan) {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace

std::vector<std::complex<double>> real_dft_half(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("real_dft_half: empty input");

    RealBuffer in(n);
    ComplexBuffer out(n / 2 + 1);
    PlanGuard guard;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        guard.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data, out.data,
                                          FFTW_ESTIMATE);
    }
    std::copy(x.begin(), x.end(), in.data);
    fftw_execute(guard.plan);

    std::vector<std::complex<double>> result(n / 2 + 1);
    for (std::size_t j = 0; j < result.size(); ++j)
        result[j] = {out.data[j][0], out.data[j][1]};
    return result;
}

std::vector<double> convolve_prefix(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    std::size_t n) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("convolve_prefix: empty input");
    if (n > a.size() + b.size() - 1)
        throw std::invalid_argument("convolve_prefix: prefix longer than convolution");

    const std::size_t full = a.size() + b.size() - 1;
    const std::size_t m = next_pow2(full);

    RealBuffer ra(m), rb(m), rc(m);
    ComplexBuffer ca(m / 2 + 1), cb(m / 2 + 1);
    PlanGuard fwd_a, fwd_b, bwd;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_a.plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), ra.data, ca.data,
                                          FFTW_ESTIMATE);
        fwd_b.plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), rb.data, cb.data,
                                          FFTW_ESTIMATE);
        bwd.plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), ca.data, rc.data,
                                        FFTW_ESTIMATE);
    }

    std::fill(ra.data, ra.data + m, 0.0);
    std::fill(rb.data, rb.data + m, 0.0);
    std::copy(a.begin(), a.end(), ra.data);
    std::copy(b.begin(), b.end(), rb.data);
    fftw_execute(fwd_a.plan);
    fftw_execute(fwd_b.plan);

    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j <= m / 2; ++j) {
        const double re = ca.data[j][0] * cb.data[j][0] - ca.data[j][1] * cb.data[j][1];
        const double im = ca.data[j][0] * cb.data[j][1] + ca.data[j][1] * cb.data[j][0];
        ca.data[j][0] = re * scale;
        ca.data[j][1] = im * scale;
    }
    fftw_execute(bwd.plan);

    return std::vector<double>(rc.data, rc.data + n);
}

} // namespace longmem::fft
