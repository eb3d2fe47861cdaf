#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace swgeo::fft {

// Real-to-complex transforms backed by FFTW. Plans are cached per size and
// created under a lock; execution is thread-safe.
// out.size() == n / 2 + 1.
void forward_1d(std::span<double> in, std::span<std::complex<double>> out);
// in.size() == n / 2 + 1, out.size() == n; unnormalized, input is clobbered.
void inverse_1d(std::span<std::complex<double>> in, std::span<double> out);
// Row-major n0 x n1 input; output n0 x (n1 / 2 + 1).
void forward_2d(std::size_t n0, std::size_t n1, std::span<double> in, std::span<std::complex<double>> out);
// Unnormalized inverse of forward_2d; input is clobbered.
void inverse_2d(std::size_t n0, std::size_t n1, std::span<std::complex<double>> in, std::span<double> out);

}  // namespace swgeo::fft
