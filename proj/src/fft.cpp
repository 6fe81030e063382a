#include "nwav/fft.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nwav::fft {

namespace {

struct Plan {
  std::size_t n = 0;
  std::vector<std::uint32_t> rev;  // bit-reversal permutation
  std::vector<cplx> tw;            // tw[j] = exp(-2*pi*i*j/n), j < n/2
};

const Plan& plan_for(std::size_t n) {
  static std::mutex mtx;
  static std::map<std::size_t, Plan> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Plan p;
  p.n = n;
  p.rev.resize(n);
  int bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    p.rev[i] = static_cast<std::uint32_t>(r);
  }
  p.tw.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    p.tw[j] = cplx(std::cos(ang), std::sin(ang));
  }
  return cache.emplace(n, std::move(p)).first->second;
}

// Radix-2 DIT butterflies on bit-reversed data.
void butterflies(cplx* a, const Plan& p, bool inverse) {
  const std::size_t n = p.n;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      // j = 0 twiddle is 1
      {
        cplx u = a[i], v = a[i + half];
        a[i] = u + v;
        a[i + half] = u - v;
      }
      for (std::size_t j = 1; j < half; ++j) {
        cplx w = p.tw[j * step];
        if (inverse) w = std::conj(w);
        cplx u = a[i + j];
        cplx v = a[i + j + half] * w;
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
}

void line_inplace(cplx* a, const Plan& p, bool inverse) {
  // in-place bit-reversal
  for (std::size_t i = 0; i < p.n; ++i) {
    std::size_t r = p.rev[i];
    if (r > i) std::swap(a[i], a[r]);
  }
  butterflies(a, p, inverse);
}

// Transform `count` lines along a strided axis. Lines are gathered into a
// contiguous scratch tile (bit-reversal folded into the gather), transformed,
// and scattered back. `tile` is the number of lines processed per pass; lines
// are adjacent in memory (stride `line_stride` between them).
void strided_lines(cplx* base, std::size_t n, std::size_t axis_stride,
                   std::size_t count, std::size_t line_stride, bool inverse,
                   std::vector<cplx>& scratch) {
  const Plan& p = plan_for(n);
  constexpr std::size_t kTile = 32;
  scratch.resize(kTile * n);
  for (std::size_t l0 = 0; l0 < count; l0 += kTile) {
    const std::size_t nt = std::min(kTile, count - l0);
    cplx* tile_base = base + l0 * line_stride;
    // gather transposed, applying bit reversal
    for (std::size_t k = 0; k < n; ++k) {
      const cplx* src = tile_base + k * axis_stride;
      const std::size_t r = p.rev[k];
      for (std::size_t t = 0; t < nt; ++t) scratch[t * n + r] = src[t * line_stride];
    }
    for (std::size_t t = 0; t < nt; ++t) butterflies(scratch.data() + t * n, p, inverse);
    for (std::size_t k = 0; k < n; ++k) {
      cplx* dst = tile_base + k * axis_stride;
      for (std::size_t t = 0; t < nt; ++t) dst[t * line_stride] = scratch[t * n + k];
    }
  }
}

void check_shape(const Shape3& s) {
  if (!is_power_of_two(s.n0) || !is_power_of_two(s.n1) || !is_power_of_two(s.n2))
    throw std::invalid_argument("fft: extents must be powers of two");
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void transform_line(cplx* data, std::size_t n, bool inverse) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
  line_inplace(data, plan_for(n), inverse);
}

void forward3(cplx* data, const Shape3& shape, const Shape3& active) {
  check_shape(shape);
  const std::size_t n0 = shape.n0, n1 = shape.n1, n2 = shape.n2;
  const std::size_t a0 = std::min(active.n0, n0), a1 = std::min(active.n1, n1);
  std::vector<cplx> scratch;

  // axis 2: contiguous lines, only those inside the active block
  if (n2 > 1) {
    const Plan& p2 = plan_for(n2);
    for (std::size_t i0 = 0; i0 < a0; ++i0)
      for (std::size_t i1 = 0; i1 < a1; ++i1)
        line_inplace(data + (i0 * n1 + i1) * n2, p2, false);
  }
  // axis 1: stride n2; planes with i0 >= a0 are all zero
  if (n1 > 1) {
    for (std::size_t i0 = 0; i0 < a0; ++i0)
      strided_lines(data + i0 * n1 * n2, n1, n2, n2, 1, false, scratch);
  }
  // axis 0: stride n1*n2, all lines
  if (n0 > 1) strided_lines(data, n0, n1 * n2, n1 * n2, 1, false, scratch);
}

void inverse3(cplx* data, const Shape3& shape, const Shape3& needed) {
  check_shape(shape);
  const std::size_t n0 = shape.n0, n1 = shape.n1, n2 = shape.n2;
  const std::size_t o0 = std::min(needed.n0, n0), o1 = std::min(needed.n1, n1);
  const std::size_t o2 = std::min(needed.n2, n2);
  std::vector<cplx> scratch;

  if (n0 > 1) strided_lines(data, n0, n1 * n2, n1 * n2, 1, true, scratch);
  if (n1 > 1) {
    for (std::size_t i0 = 0; i0 < o0; ++i0)
      strided_lines(data + i0 * n1 * n2, n1, n2, n2, 1, true, scratch);
  }
  if (n2 > 1) {
    const Plan& p2 = plan_for(n2);
    for (std::size_t i0 = 0; i0 < o0; ++i0)
      for (std::size_t i1 = 0; i1 < o1; ++i1)
        line_inplace(data + (i0 * n1 + i1) * n2, p2, true);
  }
  const double norm = 1.0 / static_cast<double>(shape.size());
  for (std::size_t i0 = 0; i0 < o0; ++i0)
    for (std::size_t i1 = 0; i1 < o1; ++i1) {
      cplx* line = data + (i0 * n1 + i1) * n2;
      for (std::size_t i2 = 0; i2 < o2; ++i2) line[i2] *= norm;
    }
}

}  // namespace nwav::fft
