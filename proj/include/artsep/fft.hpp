#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace artsep {

// Iterative radix-2 FFT. Sizes must be powers of two. The transform is
// unnormalized; the inverse divides by n. Thread-safe (no shared tables), so
// frames can be transformed concurrently.
void fft(std::vector<std::complex<double>>& x, bool inverse);

// Real-input FFT of x zero-padded to n; returns the n/2 + 1 non-redundant bins.
std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t n);

// Inverse of rfft: reconstructs the length-n real signal from n/2 + 1 bins.
std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n);

}  // namespace artsep
