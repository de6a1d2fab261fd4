#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bragg {

void fft_inplace(std::vector<complexd>& a, bool inverse) {
    size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_inplace: size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        complexd wl = std::polar(1.0, ang);
        for (size_t i = 0; i < n; i += len) {
            complexd w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                complexd u = a[i + k];
                complexd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

static size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void spectral_lowpass(std::vector<complexd>& samples, double dt, double cutoff) {
    size_t n = samples.size();
    if (n < 2) return;
    size_t m = next_pow2(n);
    std::vector<complexd> buf(m, complexd(0.0, 0.0));
    std::copy(samples.begin(), samples.end(), buf.begin());
    fft_inplace(buf, false);
    double dw = 2.0 * M_PI / (static_cast<double>(m) * dt);
    for (size_t j = 0; j < m; ++j) {
        double w = dw * (j <= m / 2 ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(m));
        double aw = std::abs(w);
        if (aw > cutoff) {
            // one-bin taper at the edge to limit ringing
            buf[j] *= (aw <= cutoff + dw) ? 0.5 : 0.0;
        }
    }
    fft_inplace(buf, true);
    std::copy(buf.begin(), buf.begin() + n, samples.begin());
}

std::vector<std::pair<double, double>> spectrum(const std::vector<complexd>& samples, double dt) {
    size_t m = next_pow2(std::max<size_t>(samples.size(), 2));
    std::vector<complexd> buf(m, complexd(0.0, 0.0));
    std::copy(samples.begin(), samples.end(), buf.begin());
    fft_inplace(buf, false);
    std::vector<std::pair<double, double>> out(m);
    double dw = 2.0 * M_PI / (static_cast<double>(m) * dt);
    for (size_t j = 0; j < m; ++j) {
        double w = dw * (j <= m / 2 ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(m));
        out[j] = {w, std::abs(buf[j])};
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace bragg
