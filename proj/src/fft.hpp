#pragma once

#include <complex>
#include <vector>

namespace lsngc::detail {

/// In-place forward/inverse DFT for arbitrary n: iterative radix-2 for
/// powers of two, Bluestein's chirp-z reduction otherwise. The inverse is
/// scaled by 1/n.
void fft(std::vector<std::complex<double>>& data, bool inverse);

std::vector<std::complex<double>> fft_real(const std::vector<double>& data);

} // namespace lsngc::detail
