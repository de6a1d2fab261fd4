#pragma once

#include <utility>
#include <vector>

#include "ladder.hpp"

namespace bragg {

// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<complexd>& a, bool inverse);

// Hard low-pass on a complex time series sampled at dt: angular-frequency
// components with |w| above `cutoff` are zeroed, with a half-gain taper on
// the first bin beyond the edge. The series is zero-padded to a power of two
// internally and truncated back.
void spectral_lowpass(std::vector<complexd>& samples, double dt, double cutoff);

// (angular frequency, |amplitude|) pairs over [-Nyquist, Nyquist).
std::vector<std::pair<double, double>> spectrum(const std::vector<complexd>& samples, double dt);

} // namespace bragg
