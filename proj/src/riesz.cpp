#include "nwav/riesz.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nwav {

namespace {

constexpr double kPi = std::numbers::pi;

// 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
constexpr int kGL = 10;
constexpr double kGLx[kGL] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154196, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
constexpr double kGLw[kGL] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183821, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

template <typename F>
double gauss_legendre(double a, double b, F&& f) {
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGL; ++i) {
    acc += kGLw[i] * (f(mid + rad * kGLx[i]) + f(mid - rad * kGLx[i]));
  }
  return acc * rad;
}

// Oscillatory radial integrand of the truncated-kernel transform:
//   dim 3: s^{1-g} sin(s);  dim 2: s^{1-g} J0(s);  dim 1: s^{-g} cos(s).
double radial_integrand(int dim, double gamma, double s) {
  switch (dim) {
    case 3: return std::pow(s, 1.0 - gamma) * std::sin(s);
    case 2: return std::pow(s, 1.0 - gamma) * std::cyl_bessel_j(0.0, s);
    default: return std::pow(s, -gamma) * std::cos(s);
  }
}

// Power series of the cumulative integral on [0, kappa]; valid for small kappa.
double radial_series(int dim, double gamma, double kappa) {
  double acc = 0.0;
  if (dim == 3) {
    // integral of s^{1-g} sin s = sum (-1)^m kappa^{2m+3-g} / ((2m+1)! (2m+3-g))
    double fact = 1.0;  // (2m+1)!
    for (int m = 0; m < 24; ++m) {
      if (m > 0) fact *= (2.0 * m) * (2.0 * m + 1.0);
      const double p = 2.0 * m + 3.0 - gamma;
      const double term = std::pow(kappa, p) / (fact * p);
      acc += (m % 2 == 0) ? term : -term;
      if (term < 1e-18 * std::abs(acc) + 1e-300) break;
    }
  } else if (dim == 2) {
    // integral of s^{1-g} J0(s) = sum (-1)^m kappa^{2m+2-g} / (4^m (m!)^2 (2m+2-g))
    double denom = 1.0;  // 4^m (m!)^2
    for (int m = 0; m < 24; ++m) {
      if (m > 0) denom *= 4.0 * m * m;
      const double p = 2.0 * m + 2.0 - gamma;
      const double term = std::pow(kappa, p) / (denom * p);
      acc += (m % 2 == 0) ? term : -term;
      if (term < 1e-18 * std::abs(acc) + 1e-300) break;
    }
  } else {
    // integral of s^{-g} cos s = sum (-1)^m kappa^{2m+1-g} / ((2m)! (2m+1-g))
    double fact = 1.0;  // (2m)!
    for (int m = 0; m < 24; ++m) {
      if (m > 0) fact *= (2.0 * m - 1.0) * (2.0 * m);
      const double p = 2.0 * m + 1.0 - gamma;
      const double term = std::pow(kappa, p) / (fact * p);
      acc += (m % 2 == 0) ? term : -term;
      if (term < 1e-18 * std::abs(acc) + 1e-300) break;
    }
  }
  return acc;
}

// Cumulative radial integral with panel table beyond kappa0.
class RadialCumulative {
 public:
  RadialCumulative(int dim, double gamma, double kappa_max)
      : dim_(dim), gamma_(gamma) {
    const double reach = std::max(kappa_max, kappa0_) + 2.0 * width_;
    const std::size_t n = static_cast<std::size_t>((reach - kappa0_) / width_) + 2;
    table_.resize(n + 1);
    table_[0] = radial_series(dim_, gamma_, kappa0_);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = kappa0_ + i * width_;
      table_[i + 1] = table_[i] + gauss_legendre(a, a + width_, [this](double s) {
        return radial_integrand(dim_, gamma_, s);
      });
    }
  }

  double operator()(double kappa) const {
    if (kappa <= kappa0_) return radial_series(dim_, gamma_, kappa);
    const std::size_t i =
        std::min(static_cast<std::size_t>((kappa - kappa0_) / width_), table_.size() - 2);
    const double a = kappa0_ + i * width_;
    return table_[i] + gauss_legendre(a, kappa, [this](double s) {
      return radial_integrand(dim_, gamma_, s);
    });
  }

 private:
  int dim_;
  double gamma_;
  double kappa0_ = 2.0;
  double width_ = 0.25;
  std::vector<double> table_;
};

// Continuous Fourier transform of |x|^{-gamma} truncated at radius R.
double truncated_transform(int dim, double gamma, double k, double radius,
                           const RadialCumulative& cum) {
  if (k == 0.0) {
    switch (dim) {
      case 3: return 4.0 * kPi * std::pow(radius, 3.0 - gamma) / (3.0 - gamma);
      case 2: return 2.0 * kPi * std::pow(radius, 2.0 - gamma) / (2.0 - gamma);
      default: return 2.0 * std::pow(radius, 1.0 - gamma) / (1.0 - gamma);
    }
  }
  const double s = cum(k * radius);
  switch (dim) {
    case 3: return 4.0 * kPi * std::pow(k, gamma - 3.0) * s;
    case 2: return 2.0 * kPi * std::pow(k, gamma - 2.0) * s;
    default: return 2.0 * std::pow(k, gamma - 1.0) * s;
  }
}

fft::Shape3 padded_shape(const GridSpec& g) {
  const std::size_t p = 2 * g.points;
  if (g.dim == 1) return {1, 1, p};
  if (g.dim == 2) return {1, p, p};
  return {p, p, p};
}

// Offset coordinate of padded index t: t*dx for t < P/2, (t-P)*dx otherwise.
double offset_coord(std::size_t t, std::size_t p, double dx) {
  const long tt = (t < p / 2) ? static_cast<long>(t) : static_cast<long>(t) - static_cast<long>(p);
  return static_cast<double>(tt) * dx;
}

std::vector<double> spectral_spectrum(const GridSpec& g, double gamma) {
  const fft::Shape3 ps = padded_shape(g);
  const std::size_t p = 2 * g.points;
  const double radius = 2.0 * g.half_length;  // padded-box half extent
  const double dk = kPi / (2.0 * g.half_length);
  const double kmax = dk * std::sqrt(3.0) * static_cast<double>(p / 2);
  RadialCumulative cum(g.dim, gamma, kmax * radius);

  // K depends on |k| only; cache over the integer j0^2+j1^2+j2^2 lattice.
  const long half = static_cast<long>(g.points);
  std::vector<double> by_square(static_cast<std::size_t>(3 * half * half + 1), -1.0);
  auto value_for = [&](long jsq) {
    double& slot = by_square[static_cast<std::size_t>(jsq)];
    if (slot < 0.0) {
      const double k = dk * std::sqrt(static_cast<double>(jsq));
      slot = truncated_transform(g.dim, gamma, k, radius, cum) / g.cell_volume();
    }
    return slot;
  };

  std::vector<double> spec(ps.size());
  auto jof = [p](std::size_t t) {
    return (t < p / 2) ? static_cast<long>(t) : static_cast<long>(t) - static_cast<long>(p);
  };
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < ps.n0; ++i0) {
    const long j0 = (ps.n0 > 1) ? jof(i0) : 0;
    for (std::size_t i1 = 0; i1 < ps.n1; ++i1) {
      const long j1 = (ps.n1 > 1) ? jof(i1) : 0;
      for (std::size_t i2 = 0; i2 < ps.n2; ++i2) {
        const long j2 = jof(i2);
        spec[idx++] = value_for(j0 * j0 + j1 * j1 + j2 * j2);
      }
    }
  }
  return spec;
}

std::vector<double> sampled_spectrum(const GridSpec& g, double gamma) {
  const fft::Shape3 ps = padded_shape(g);
  const std::size_t p = 2 * g.points;
  const double dx = g.spacing;
  std::vector<cplx> table(ps.size());
  const double center = singular_cell_average(g.dim, dx, gamma);
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < ps.n0; ++i0) {
    const double y0 = (ps.n0 > 1) ? offset_coord(i0, p, dx) : 0.0;
    for (std::size_t i1 = 0; i1 < ps.n1; ++i1) {
      const double y1 = (ps.n1 > 1) ? offset_coord(i1, p, dx) : 0.0;
      for (std::size_t i2 = 0; i2 < ps.n2; ++i2) {
        const double y2 = offset_coord(i2, p, dx);
        const double r = std::sqrt(y0 * y0 + y1 * y1 + y2 * y2);
        table[idx++] = (r == 0.0) ? center : std::pow(r, -gamma);
      }
    }
  }
  fft::forward3(table.data(), ps);
  std::vector<double> spec(ps.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (std::abs(table[i].imag()) > 1e-9 * (std::abs(table[i].real()) + 1.0))
      throw std::runtime_error("sampled kernel spectrum unexpectedly complex");
    spec[i] = table[i].real();
  }
  return spec;
}

// Scatter rho = |u|^2 into the zero-padded buffer.
void pad_density(const Field& u, std::vector<cplx>& buf, const fft::Shape3& ps) {
  buf.assign(ps.size(), cplx(0.0, 0.0));
  const fft::Shape3 s = u.grid.shape();
  for (std::size_t i0 = 0; i0 < s.n0; ++i0)
    for (std::size_t i1 = 0; i1 < s.n1; ++i1) {
      const cplx* src = u.values.data() + (i0 * s.n1 + i1) * s.n2;
      cplx* dst = buf.data() + (i0 * ps.n1 + i1) * ps.n2;
      for (std::size_t i2 = 0; i2 < s.n2; ++i2) dst[i2] = std::norm(src[i2]);
    }
}

void check_kernel_grid(const RieszKernel& k, const Field& u) {
  if (!k.grid.same_as(u.grid)) throw std::invalid_argument("riesz: kernel/grid mismatch");
}

}  // namespace

double singular_cell_average(int dim, double dx, double gamma) {
  if (!(gamma > 0.0) || gamma >= static_cast<double>(dim))
    throw std::invalid_argument("singular_cell_average: need 0 < gamma < dim");
  if (dim == 1) {
    return 2.0 * std::pow(0.5 * dx, 1.0 - gamma) / ((1.0 - gamma) * dx);
  }
  // Unit-cell integral I over [-1/2,1/2]^dim via the self-similar shell
  // identity I = J / (1 - 2^{gamma-dim}), J the integral over the cell minus
  // its half-scale copy, which avoids the singularity.
  double shell = 0.0;
  const double quarter = 0.25;
  const int cells = 4;
  auto in_core = [](int a) { return a == -1 || a == 0; };
  if (dim == 2) {
    for (int a0 = -2; a0 < cells - 2; ++a0)
      for (int a1 = -2; a1 < cells - 2; ++a1) {
        if (in_core(a0) && in_core(a1)) continue;
        shell += gauss_legendre(a0 * quarter, (a0 + 1) * quarter, [&](double x) {
          return gauss_legendre(a1 * quarter, (a1 + 1) * quarter, [&](double y) {
            return std::pow(x * x + y * y, -0.5 * gamma);
          });
        });
      }
  } else {
    for (int a0 = -2; a0 < cells - 2; ++a0)
      for (int a1 = -2; a1 < cells - 2; ++a1)
        for (int a2 = -2; a2 < cells - 2; ++a2) {
          if (in_core(a0) && in_core(a1) && in_core(a2)) continue;
          shell += gauss_legendre(a0 * quarter, (a0 + 1) * quarter, [&](double x) {
            return gauss_legendre(a1 * quarter, (a1 + 1) * quarter, [&](double y) {
              return gauss_legendre(a2 * quarter, (a2 + 1) * quarter, [&](double z) {
                return std::pow(x * x + y * y + z * z, -0.5 * gamma);
              });
            });
          });
        }
  }
  const double unit_integral = shell / (1.0 - std::pow(2.0, gamma - dim));
  return unit_integral * std::pow(dx, -gamma);
}

RieszKernel build_kernel(const GridSpec& grid, double gamma, KernelScheme scheme) {
  if (!(gamma > 0.0) || gamma >= static_cast<double>(grid.dim))
    throw std::invalid_argument("build_kernel: need 0 < gamma < dim");
  RieszKernel k;
  k.grid = grid;
  k.gamma = gamma;
  k.scheme = scheme;
  k.padded = padded_shape(grid);
  k.spectrum = (scheme == KernelScheme::SpectralTruncated) ? spectral_spectrum(grid, gamma)
                                                           : sampled_spectrum(grid, gamma);
  return k;
}

RieszKernel combine_kernels(const RieszKernel& ka, double mu, const RieszKernel& kb) {
  if (!ka.grid.same_as(kb.grid)) throw std::invalid_argument("combine_kernels: grid mismatch");
  RieszKernel k = ka;
  for (std::size_t i = 0; i < k.spectrum.size(); ++i) k.spectrum[i] += mu * kb.spectrum[i];
  return k;
}

void density_spectrum(const RieszKernel& kernel, const Field& u, ConvolutionScratch& ws) {
  check_kernel_grid(kernel, u);
  pad_density(u, ws.padded, kernel.padded);
  ws.grid = u.grid;
  fft::forward3(ws.padded.data(), kernel.padded, u.grid.shape());
}

void scale_scratch(ConvolutionScratch& ws, double factor) {
  for (cplx& v : ws.padded) v *= factor;
}

double b_from_scratch(const RieszKernel& k, const ConvolutionScratch& ws) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ws.padded.size(); ++i)
    acc += k.spectrum[i] * std::norm(ws.padded[i]);
  const double w = ws.grid.cell_volume();
  return acc * w * w / static_cast<double>(k.padded.size());
}

std::pair<double, double> b_pair_from_scratch(const RieszKernel& ka, const RieszKernel& kb,
                                              const ConvolutionScratch& ws) {
  double aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < ws.padded.size(); ++i) {
    const double p = std::norm(ws.padded[i]);
    aa += ka.spectrum[i] * p;
    bb += kb.spectrum[i] * p;
  }
  const double w = ws.grid.cell_volume();
  const double scale = w * w / static_cast<double>(ka.padded.size());
  return {aa * scale, bb * scale};
}

Field potential_from_scratch(const RieszKernel& kernel, ConvolutionScratch& ws) {
  const fft::Shape3 s = ws.grid.shape();
  for (std::size_t i = 0; i < ws.padded.size(); ++i) ws.padded[i] *= kernel.spectrum[i];
  fft::inverse3(ws.padded.data(), kernel.padded, s);

  Field v = make_field(ws.grid);
  const double w = ws.grid.cell_volume();
  for (std::size_t i0 = 0; i0 < s.n0; ++i0)
    for (std::size_t i1 = 0; i1 < s.n1; ++i1) {
      const cplx* src = ws.padded.data() + (i0 * kernel.padded.n1 + i1) * kernel.padded.n2;
      cplx* dst = v.values.data() + (i0 * s.n1 + i1) * s.n2;
      for (std::size_t i2 = 0; i2 < s.n2; ++i2) dst[i2] = w * src[i2].real();
    }
  return v;
}

Field apply_potential(const RieszKernel& kernel, const Field& u) {
  static thread_local ConvolutionScratch ws;
  density_spectrum(kernel, u, ws);
  return potential_from_scratch(kernel, ws);
}

double b_value(const RieszKernel& kernel, const Field& u) {
  static thread_local ConvolutionScratch ws;
  density_spectrum(kernel, u, ws);
  return b_from_scratch(kernel, ws);
}

std::pair<double, double> b_pair(const RieszKernel& ka, const RieszKernel& kb, const Field& u) {
  if (!ka.grid.same_as(kb.grid)) throw std::invalid_argument("b_pair: grid mismatch");
  static thread_local ConvolutionScratch ws;
  density_spectrum(ka, u, ws);
  return b_pair_from_scratch(ka, kb, ws);
}

std::vector<double> kernel_real_table(const RieszKernel& kernel) {
  std::vector<cplx> buf(kernel.spectrum.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = kernel.spectrum[i];
  fft::inverse3(buf.data(), kernel.padded);
  std::vector<double> table(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) table[i] = buf[i].real();
  return table;
}

}  // namespace nwav
