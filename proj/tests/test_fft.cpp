#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "nwav/fft.hpp"

using nwav::fft::cplx;
using nwav::fft::Shape3;

namespace {

std::vector<cplx> naive_dft(const std::vector<cplx>& in, bool inverse) {
  const std::size_t n = in.size();
  std::vector<cplx> out(n, cplx(0.0, 0.0));
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n);
      out[k] += in[j] * cplx(std::cos(ang), std::sin(ang));
    }
  return out;
}

std::vector<cplx> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<cplx> v(n);
  for (cplx& x : v) x = cplx(dist(rng), dist(rng));
  return v;
}

}  // namespace

TEST_CASE("1-d transform matches the naive DFT") {
  for (std::size_t n : {8u, 16u, 64u}) {
    std::vector<cplx> a = random_values(n, 11 + n);
    std::vector<cplx> ref = naive_dft(a, false);
    nwav::fft::transform_line(a.data(), n, false);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - ref[i]) < 1e-10);
  }
}

TEST_CASE("3-d forward/inverse round trip") {
  Shape3 s{8, 8, 8};
  std::vector<cplx> a = random_values(s.size(), 7);
  std::vector<cplx> orig = a;
  nwav::fft::forward3(a.data(), s);
  nwav::fft::inverse3(a.data(), s);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - orig[i]) < 1e-12);
}

TEST_CASE("Parseval identity") {
  Shape3 s{16, 16, 16};
  std::vector<cplx> a = random_values(s.size(), 3);
  double space = 0.0;
  for (const cplx& v : a) space += std::norm(v);
  nwav::fft::forward3(a.data(), s);
  double freq = 0.0;
  for (const cplx& v : a) freq += std::norm(v);
  CHECK(freq / static_cast<double>(s.size()) == doctest::Approx(space).epsilon(1e-12));
}

TEST_CASE("active-block pruning agrees with a dense transform") {
  Shape3 s{16, 16, 16};
  Shape3 act{8, 8, 8};
  std::vector<cplx> dense(s.size(), cplx(0.0, 0.0));
  std::vector<cplx> seed = random_values(act.size(), 19);
  std::size_t k = 0;
  for (std::size_t i0 = 0; i0 < act.n0; ++i0)
    for (std::size_t i1 = 0; i1 < act.n1; ++i1)
      for (std::size_t i2 = 0; i2 < act.n2; ++i2)
        dense[(i0 * s.n1 + i1) * s.n2 + i2] = seed[k++];
  std::vector<cplx> pruned = dense;

  nwav::fft::forward3(dense.data(), s);
  nwav::fft::forward3(pruned.data(), s, act);
  for (std::size_t i = 0; i < dense.size(); ++i) CHECK(std::abs(dense[i] - pruned[i]) < 1e-12);

  // inverse with a needed block reproduces the dense inverse there
  std::vector<cplx> full = dense;
  nwav::fft::inverse3(full.data(), s);
  nwav::fft::inverse3(pruned.data(), s, act);
  for (std::size_t i0 = 0; i0 < act.n0; ++i0)
    for (std::size_t i1 = 0; i1 < act.n1; ++i1)
      for (std::size_t i2 = 0; i2 < act.n2; ++i2) {
        const std::size_t idx = (i0 * s.n1 + i1) * s.n2 + i2;
        CHECK(std::abs(full[idx] - pruned[idx]) < 1e-12);
      }
}
