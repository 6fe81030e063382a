#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace nwav::fft {

using cplx = std::complex<double>;

/// Extents of a (up to) 3-d row-major array; unused trailing axes are 1.
struct Shape3 {
  std::size_t n0 = 1;
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  std::size_t size() const { return n0 * n1 * n2; }
};

bool is_power_of_two(std::size_t n);

/// In-place complex FFT of one contiguous line. n must be a power of two.
/// Forward kernel is exp(-2*pi*i*j*k/n); inverse is unnormalized.
void transform_line(cplx* data, std::size_t n, bool inverse);

/// In-place forward 3-d FFT. `active` bounds the nonzero input block
/// (corner-anchored); passes over all-zero lines are skipped. Use
/// active == shape when the input is dense.
void forward3(cplx* data, const Shape3& shape, const Shape3& active);

/// In-place inverse 3-d FFT, normalized by 1/(n0*n1*n2). Only the
/// corner-anchored `needed` block of the output is guaranteed valid;
/// the rest of the buffer is scratch.
void inverse3(cplx* data, const Shape3& shape, const Shape3& needed);

inline void forward3(cplx* data, const Shape3& shape) { forward3(data, shape, shape); }
inline void inverse3(cplx* data, const Shape3& shape) { inverse3(data, shape, shape); }

}  // namespace nwav::fft
