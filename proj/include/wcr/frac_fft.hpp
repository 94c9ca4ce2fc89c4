#pragma once

// Spectral (FFT) evaluation of the 1d fractional Laplacian
// (-Delta)^{alpha/2} f = F^{-1}[ |k|^alpha F[f] ] on a uniform grid.
// Used as a cross-validation oracle for the closed-form 1F1 path.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace wcr {

namespace detail {

// In-place iterative radix-2 FFT (forward: sign = -1).
inline void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                auto u = a[i + j];
                auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (sign > 0)
        for (auto& z : a) z /= static_cast<double>(n);
}

}  // namespace detail

struct FftOracleResult {
    std::vector<double> values;
    bool boundary_warning = false;  // |f| at the grid edge exceeded 1e-12
};

// samples: f on a uniform grid of spacing dx (power-of-two length).
// Returns (-Delta)^{alpha/2} f on the same grid. alpha = 2 is allowed here
// (classical Laplacian limit, oracle-only).
inline FftOracleResult frac_laplacian_fft_oracle(
    const std::vector<double>& samples, double dx, double alpha) {
    const std::size_t n = samples.size();
    if (n < 4) throw std::invalid_argument("frac_laplacian_fft_oracle: grid too small");
    if (!(dx > 0.0)) throw std::invalid_argument("frac_laplacian_fft_oracle: dx > 0");
    FftOracleResult out;
    if (std::abs(samples.front()) > 1e-12 || std::abs(samples.back()) > 1e-12)
        out.boundary_warning = true;

    std::vector<std::complex<double>> a(samples.begin(), samples.end());
    detail::fft_radix2(a, -1);
    const double dk = 2.0 * M_PI / (static_cast<double>(n) * dx);
    for (std::size_t j = 0; j < n; ++j) {
        // signed frequency for bin j
        double k = dk * (j <= n / 2 ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(n));
        a[j] *= std::pow(std::abs(k), alpha);
    }
    detail::fft_radix2(a, +1);
    out.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.values[j] = a[j].real();
    return out;
}

}  // namespace wcr
