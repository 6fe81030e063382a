#include "nwav/grid.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace nwav {

namespace {

constexpr double kPi = std::numbers::pi;

// Real periodic interpolation kernel for even point counts:
// D(y) = sin(M phi/2) cot(phi/2), phi = pi y / L, with D(0) = M.
// Interpolant: u(x) = (1/M) sum_k u_k D(x - x_k).
double dirichlet(double y, double half_length, std::size_t m) {
  const double phi = kPi * y / half_length;
  const double half = 0.5 * phi;
  const double s = std::sin(half);
  if (std::abs(s) < 1e-300) return static_cast<double>(m);
  return std::sin(0.5 * static_cast<double>(m) * phi) * std::cos(half) / s;
}

// M_out x M_in resampling weights: row j evaluates the interpolant of the
// source grid at target point t_j. Targets outside the source box get zero
// rows: the interpolant is periodic there and would alias, while the fields
// being resampled have decayed.
std::vector<double> resampling_matrix(const std::vector<double>& targets,
                                      const GridSpec& src) {
  const std::size_t m = src.points;
  std::vector<double> w(targets.size() * m, 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  const double L = src.half_length;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const double t = targets[j];
    if (t < -L || t >= L) continue;
    for (std::size_t k = 0; k < m; ++k)
      w[j * m + k] = dirichlet(t - src.coords[k], L, m) * inv_m;
  }
  return w;
}

// Apply an M_out x M_in matrix along `axis` of a row-major dim-d array.
// Axes before `axis` are assumed already resized to m_out by earlier passes.
std::vector<cplx> apply_axis_matrix(const std::vector<cplx>& in, int dim,
                                    std::size_t m_in, std::size_t m_out,
                                    int axis, const std::vector<double>& w) {
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= m_out;
  for (int d = axis + 1; d < dim; ++d) inner *= m_in;

  std::vector<cplx> out(outer * m_out * inner, cplx(0.0, 0.0));
  for (std::size_t o = 0; o < outer; ++o) {
    const cplx* slab_in = in.data() + o * m_in * inner;
    cplx* slab_out = out.data() + o * m_out * inner;
    for (std::size_t j = 0; j < m_out; ++j) {
      cplx* row_out = slab_out + j * inner;
      const double* wj = w.data() + j * m_in;
      for (std::size_t k = 0; k < m_in; ++k) {
        const double wk = wj[k];
        if (wk == 0.0) continue;
        const cplx* row_in = slab_in + k * inner;
        for (std::size_t i = 0; i < inner; ++i) row_out[i] += wk * row_in[i];
      }
    }
  }
  return out;
}

std::vector<cplx> resample_to_points(const Field& f,
                                     const std::vector<double>& targets_per_axis,
                                     std::size_t m_out) {
  const int dim = f.grid.dim;
  const std::vector<double> w = resampling_matrix(targets_per_axis, f.grid);
  std::vector<cplx> data = f.values;
  for (int axis = 0; axis < dim; ++axis)
    data = apply_axis_matrix(data, dim, f.grid.points, m_out, axis, w);
  return data;
}

}  // namespace

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= points;
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int d = 0; d < dim; ++d) v *= spacing;
  return v;
}

fft::Shape3 GridSpec::shape() const {
  fft::Shape3 s;
  if (dim == 1) s = {1, 1, points};
  else if (dim == 2) s = {1, points, points};
  else s = {points, points, points};
  return s;
}

std::uint64_t GridSpec::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(dim));
  mix(static_cast<std::uint64_t>(points));
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(half_length));
  std::memcpy(&bits, &half_length, sizeof(bits));
  mix(bits);
  return h;
}

bool GridSpec::same_as(const GridSpec& other) const {
  return dim == other.dim && points == other.points && half_length == other.half_length;
}

GridSpec make_grid(int dim, std::size_t points_per_axis, double half_length) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_grid: dim must be 1, 2 or 3");
  if (points_per_axis < 8 || !fft::is_power_of_two(points_per_axis))
    throw std::invalid_argument("make_grid: points per axis must be a power of two >= 8");
  if (!(half_length > 0.0)) throw std::invalid_argument("make_grid: half_length must be positive");

  GridSpec g;
  g.dim = dim;
  g.points = points_per_axis;
  g.half_length = half_length;
  g.spacing = 2.0 * half_length / static_cast<double>(points_per_axis);
  g.coords.resize(points_per_axis);
  g.wavenumbers.resize(points_per_axis);
  const std::size_t m = points_per_axis;
  for (std::size_t j = 0; j < m; ++j) {
    g.coords[j] = -half_length + static_cast<double>(j) * g.spacing;
    const long jw = (j < m / 2) ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(m);
    g.wavenumbers[j] = kPi * static_cast<double>(jw) / half_length;
  }
  return g;
}

Field make_field(const GridSpec& grid) {
  Field f;
  f.grid = grid;
  f.values.assign(grid.size(), cplx(0.0, 0.0));
  return f;
}

void require_finite(const Field& f) {
  for (const cplx& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::runtime_error("field contains a non-finite value");
}

ProfileSpec ProfileSpec::gaussian(double sigma, std::array<double, 3> center) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian profile: sigma must be positive");
  ProfileSpec p;
  p.bumps_.push_back({1.0, sigma, center});
  return p;
}

ProfileSpec ProfileSpec::sum(const std::vector<ProfileSpec>& parts) {
  ProfileSpec p;
  for (const ProfileSpec& part : parts)
    p.bumps_.insert(p.bumps_.end(), part.bumps_.begin(), part.bumps_.end());
  return p;
}

ProfileSpec ProfileSpec::dilated(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("dilated profile: s must be positive");
  ProfileSpec p(*this);
  for (Bump& b : p.bumps_) {
    b.sigma /= s;
    for (double& c : b.center) c /= s;
    // amplitude carries the s^{N/2} factor at sampling time via sigma
    // normalization; the unit-mass Gaussian with sigma/s already equals
    // s^{N/2} times the dilated unit-mass Gaussian, so amplitude is kept.
  }
  return p;
}

ProfileSpec ProfileSpec::with_mass(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("profile mass target must be positive");
  ProfileSpec p(*this);
  p.mass_target_ = c;
  return p;
}

Field sample_profile(const GridSpec& grid, const ProfileSpec& profile) {
  const double L = grid.half_length;
  for (const ProfileSpec::Bump& b : profile.bumps()) {
    double worst = 0.0;
    for (int d = 0; d < grid.dim; ++d) worst = std::max(worst, std::abs(b.center[d]));
    if ((L - worst) / b.sigma < 4.2)
      throw std::invalid_argument("sample_profile: profile too wide for the box (tail mass heuristic)");
  }

  Field f = make_field(grid);
  const std::size_t m = grid.points;
  const int dim = grid.dim;
  for (const ProfileSpec::Bump& b : profile.bumps()) {
    const double norm = b.amplitude *
        std::pow(kPi * b.sigma * b.sigma, -0.25 * static_cast<double>(dim));
    std::array<std::vector<double>, 3> axis_exp;
    for (int d = 0; d < dim; ++d) {
      axis_exp[d].resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double dxj = grid.coords[j] - b.center[d];
        axis_exp[d][j] = std::exp(-dxj * dxj / (4.0 * b.sigma * b.sigma));
      }
    }
    // exp(-|x-c|^2/(2 sigma^2)) factorizes; each axis factor is squared-rooted
    // above so the product over axes reassembles the full exponent.
    std::size_t idx = 0;
    if (dim == 1) {
      for (std::size_t j = 0; j < m; ++j) {
        double e = axis_exp[0][j];
        f.values[idx++] += norm * e * e;
      }
    } else if (dim == 2) {
      for (std::size_t j0 = 0; j0 < m; ++j0)
        for (std::size_t j1 = 0; j1 < m; ++j1) {
          double e = axis_exp[0][j0] * axis_exp[1][j1];
          f.values[idx++] += norm * e * e;
        }
    } else {
      for (std::size_t j0 = 0; j0 < m; ++j0)
        for (std::size_t j1 = 0; j1 < m; ++j1)
          for (std::size_t j2 = 0; j2 < m; ++j2) {
            double e = axis_exp[0][j0] * axis_exp[1][j1] * axis_exp[2][j2];
            f.values[idx++] += norm * e * e;
          }
    }
  }

  if (profile.mass_target()) {
    const double m0 = mass(f);
    if (!(m0 > 0.0)) throw std::runtime_error("sample_profile: cannot normalize a zero profile");
    const double scale = std::sqrt(*profile.mass_target() / m0);
    for (cplx& v : f.values) v *= scale;
  }
  return f;
}

Field dilate_field(const Field& f, double s, bool* range_warning) {
  if (!(s > 0.0)) throw std::invalid_argument("dilate_field: s must be positive");
  if (range_warning) *range_warning = (s < 0.25 || s > 4.0);
  if (s == 1.0) return f;

  const std::size_t m = f.grid.points;
  std::vector<double> targets(m);
  for (std::size_t j = 0; j < m; ++j) targets[j] = s * f.grid.coords[j];
  Field out;
  out.grid = f.grid;
  out.values = resample_to_points(f, targets, m);
  const double amp = std::pow(s, 0.5 * static_cast<double>(f.grid.dim));
  for (cplx& v : out.values) v *= amp;
  return out;
}

Field regrid_field(const Field& f, const GridSpec& target) {
  if (target.dim != f.grid.dim) throw std::invalid_argument("regrid_field: dimension mismatch");
  Field out;
  out.grid = target;
  out.values = resample_to_points(f, target.coords, target.points);
  return out;
}

Field roll_field(const Field& f, const std::array<long, 3>& cells) {
  const std::size_t m = f.grid.points;
  const int dim = f.grid.dim;
  const fft::Shape3 n = f.grid.shape();
  auto wrap = [m](long i) {
    long r = i % static_cast<long>(m);
    if (r < 0) r += static_cast<long>(m);
    return static_cast<std::size_t>(r);
  };
  // map the dim logical axes onto the trailing axes of the (n0,n1,n2) layout
  std::array<long, 3> shift{0, 0, 0};
  for (int d = 0; d < dim; ++d) shift[3 - dim + d] = cells[d];
  Field out = make_field(f.grid);
  for (std::size_t i0 = 0; i0 < n.n0; ++i0)
    for (std::size_t i1 = 0; i1 < n.n1; ++i1)
      for (std::size_t i2 = 0; i2 < n.n2; ++i2) {
        const std::size_t j0 = (n.n0 > 1) ? wrap(static_cast<long>(i0) + shift[0]) : i0;
        const std::size_t j1 = (n.n1 > 1) ? wrap(static_cast<long>(i1) + shift[1]) : i1;
        const std::size_t j2 = wrap(static_cast<long>(i2) + shift[2]);
        out.values[(j0 * n.n1 + j1) * n.n2 + j2] = f.values[(i0 * n.n1 + i1) * n.n2 + i2];
      }
  return out;
}

cplx inner_product(const Field& f, const Field& g) {
  if (!f.grid.same_as(g.grid)) throw std::invalid_argument("inner_product: grid mismatch");
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) acc += std::conj(f.values[i]) * g.values[i];
  return acc * f.grid.cell_volume();
}

double mass(const Field& f) {
  double acc = 0.0;
  for (const cplx& v : f.values) acc += std::norm(v);
  return acc * f.grid.cell_volume();
}

double norm_l2(const Field& f) { return std::sqrt(mass(f)); }

}  // namespace nwav
