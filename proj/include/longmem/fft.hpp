#ifndef LONGMEM_FFT_HPP
#define LONGMEM_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace longmem::fft {

/// Forward DFT of a real sequence, returning bins 0..floor(n/2)
/// of sum_{t=0}^{n-1} x[t] e^{-2*pi*i*j*t/n}. Any n >= 1.
std::vector<std::complex<double>> real_dft_half(const std::vector<double>& x);

/// First n terms of the linear convolution of a and b.
/// Requires n <= a.size() + b.size() - 1.
std::vector<double> convolve_prefix(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    std::size_t n);

} // namespace longmem::fft

#endif
