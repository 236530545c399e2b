#pragma once

#include <complex>
#include <cstddef>

namespace forcerecon::kernels {

using Complex = std::complex<double>;

/// Two interchangeable implementations of every kernel. Both process each FFT line and each
/// grid point with identical arithmetic, so results agree bit for bit; `serial` is the
/// reference the parallel variant is tested against.
enum class Backend { serial, parallel };

Backend active_backend();
void set_active_backend(Backend b);

/// In-place unnormalised DFT of a cube with `m` points per axis; sign -1 forward, +1 backward.
void fft(Backend b, Complex* data, int dim, int m, int sign);

/// Zeroes `buffer` and writes coeff_a + i*coeff_b at the positions given by `map`.
/// `coeff_b` may be null.
void scatter(Backend b, const Complex* coeff_a, const Complex* coeff_b, const std::size_t* map, std::size_t n,
             Complex* buffer, std::size_t buffer_size);

/// Inverse of `scatter` for a buffer holding the transform of a + i*b with a, b real:
/// separates the two real signals and scales by `scale`. `out_b` may be null.
/// The map must list the coefficient cube in order, so entry n-1-i is the partner of entry i.
void gather(Backend b, const Complex* buffer, const std::size_t* map, std::size_t n, double scale, Complex* out_a,
            Complex* out_b);

/// out[i] = sum_j a[j][i] * c[j][i]
void dot(Backend b, const double* const* a, const double* const* c, int count, std::size_t n, double* out);

/// Splits an interleaved complex buffer into its real and imaginary parts.
void split(Backend b, const Complex* buffer, std::size_t n, double* re, double* im);
/// Packs re + i*im into a complex buffer; `im` may be null.
void pack(Backend b, const double* re, const double* im, std::size_t n, Complex* buffer);

}  // namespace forcerecon::kernels
