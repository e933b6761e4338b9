#include "fft.hpp"

#include <cmath>

namespace lsngc::detail {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

// Bluestein: DFT of arbitrary n as a convolution, evaluated with two
// power-of-two FFTs. Chirp exponents use k^2 mod 2n to stay accurate for
// large k.
void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_power_of_two(2 * n - 1);
    const double sign = inverse ? 1.0 : -1.0;

    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const double angle = sign * kPi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = {std::cos(angle), std::sin(angle)};
    }

    std::vector<std::complex<double>> u(m), v(m);
    for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
    v[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) v[k] = v[m - k] = std::conj(chirp[k]);

    fft_radix2(u, false);
    fft_radix2(v, false);
    for (std::size_t k = 0; k < m; ++k) u[k] *= v[k];
    fft_radix2(u, true);

    for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * chirp[k];
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

} // namespace

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    if (data.size() <= 1) return;
    if (is_power_of_two(data.size()))
        fft_radix2(data, inverse);
    else
        fft_bluestein(data, inverse);
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& data) {
    std::vector<std::complex<double>> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = {data[i], 0.0};
    fft(out, false);
    return out;
}

} // namespace lsngc::detail
