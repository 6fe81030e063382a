#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "nwav/fft.hpp"

namespace nwav {

using cplx = std::complex<double>;

/// Uniform periodic grid on [-L, L)^dim with 2^k points per axis.
struct GridSpec {
  int dim = 3;
  std::size_t points = 0;       // per axis
  double half_length = 0.0;     // L
  double spacing = 0.0;         // dx = 2L/points
  std::vector<double> coords;   // x_j = -L + j*dx
  std::vector<double> wavenumbers;  // k_j = pi*j/L, FFT ordering

  std::size_t size() const;            // points^dim
  double cell_volume() const;          // dx^dim
  fft::Shape3 shape() const;
  std::uint64_t fingerprint() const;
  bool same_as(const GridSpec& other) const;
};

GridSpec make_grid(int dim, std::size_t points_per_axis, double half_length);

struct Field {
  GridSpec grid;
  std::vector<cplx> values;
};

Field make_field(const GridSpec& grid);
void require_finite(const Field& f);

/// Sum of Gaussian bumps, optionally rescaled to a target mass. Dilations
/// and sums collapse analytically onto the bump parameters.
class ProfileSpec {
 public:
  struct Bump {
    double amplitude = 1.0;  // multiplies the unit-mass Gaussian
    double sigma = 1.0;
    std::array<double, 3> center{0.0, 0.0, 0.0};
  };

  static ProfileSpec gaussian(double sigma, std::array<double, 3> center = {0.0, 0.0, 0.0});
  static ProfileSpec sum(const std::vector<ProfileSpec>& parts);
  ProfileSpec dilated(double s) const;       // u_s(x) = s^{N/2} u(s x)
  ProfileSpec with_mass(double c) const;

  const std::vector<Bump>& bumps() const { return bumps_; }
  std::optional<double> mass_target() const { return mass_target_; }

 private:
  std::vector<Bump> bumps_;
  std::optional<double> mass_target_;
};

Field sample_profile(const GridSpec& grid, const ProfileSpec& profile);

/// Mass-preserving dilation u_s(x) = s^{N/2} u(s x) by trigonometric
/// resampling of the periodic interpolant. `range_warning`, when given, is
/// set if s falls outside the well-resolved range [1/4, 4].
Field dilate_field(const Field& f, double s, bool* range_warning = nullptr);

/// Evaluate the trigonometric interpolant of `f` on a different grid
/// (same center, any box/resolution).
Field regrid_field(const Field& f, const GridSpec& target);

/// Cyclic shift by whole cells along each axis.
Field roll_field(const Field& f, const std::array<long, 3>& cells);

cplx inner_product(const Field& f, const Field& g);  // dx^N sum conj(f) g
double mass(const Field& f);
double norm_l2(const Field& f);

}  // namespace nwav
