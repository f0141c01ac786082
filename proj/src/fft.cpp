#include "artsep/fft.hpp"

#include <cmath>

#include "artsep/common.hpp"

namespace artsep {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void fft(std::vector<std::complex<double>>& x, bool inverse) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  if (!is_pow2(n)) throw ConfigError("fft size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::size_t half = len >> 1;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(k));
        std::complex<double> u = x[i + k];
        std::complex<double> t = x[i + k + half] * w;
        x[i + k] = u + t;
        x[i + k + half] = u - t;
      }
    }
  }

  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& c : x) c *= inv;
  }
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t n) {
  std::vector<std::complex<double>> buf(n);
  const std::size_t m = x.size() < n ? x.size() : n;
  for (std::size_t i = 0; i < m; ++i) buf[i] = {x[i], 0.0};
  fft(buf, false);
  buf.resize(n / 2 + 1);
  return buf;
}

std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n) {
  if (bins.size() != n / 2 + 1) throw ConfigError("irfft: bin count does not match size");
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k < bins.size(); ++k) buf[k] = bins[k];
  for (std::size_t k = 1; k + 1 < bins.size(); ++k) buf[n - k] = std::conj(bins[k]);
  fft(buf, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace artsep
