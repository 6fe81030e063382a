#pragma once

#include <utility>
#include <vector>

#include "nwav/grid.hpp"

namespace nwav {

/// How the free-space |x|^{-gamma} kernel is discretized on the zero-padded
/// (doubled) grid.
///  - SpectralTruncated: analytic Fourier transform of the kernel truncated
///    at the padded-box radius, sampled on the padded frequency lattice.
///    Spectrally accurate for well-resolved densities.
///  - SampledCellAverage: real-space sampling of |x|^{-gamma} with the
///    singular cell replaced by its cell average, transformed once.
///    Second-order accurate; kept as an independently constructed reference.
enum class KernelScheme { SpectralTruncated, SampledCellAverage };

struct RieszKernel {
  GridSpec grid;
  double gamma = 0.0;
  KernelScheme scheme = KernelScheme::SpectralTruncated;
  fft::Shape3 padded;
  /// Discrete convolution multiplier S_m (real): the potential of a density
  /// rho sampled on the grid is v = dx^N * IDFT(S .* DFT(pad(rho))).
  std::vector<double> spectrum;
};

RieszKernel build_kernel(const GridSpec& grid, double gamma,
                         KernelScheme scheme = KernelScheme::SpectralTruncated);

/// Spectra add: returns a kernel applying  K_a + mu * K_b.
RieszKernel combine_kernels(const RieszKernel& ka, double mu, const RieszKernel& kb);

/// v = |x|^{-gamma} * |u|^2 evaluated on u's grid (free-space convolution).
Field apply_potential(const RieszKernel& kernel, const Field& u);

/// B_gamma(u) = <|u|^2, |x|^{-gamma} * |u|^2>.
double b_value(const RieszKernel& kernel, const Field& u);

/// Both B values from a single transform of |u|^2.
std::pair<double, double> b_pair(const RieszKernel& ka, const RieszKernel& kb, const Field& u);

/// Real-space weights table of the kernel on the padded grid (inverse
/// transform of the stored spectrum); offset index t along each axis
/// wraps to the offset (t - P) for t >= P/2. Intended for direct-sum checks.
std::vector<double> kernel_real_table(const RieszKernel& kernel);

/// Pipeline pieces for solvers that reuse one padded transform of |u|^2 for
/// several quantities. The scratch owns the padded buffer between stages.
struct ConvolutionScratch {
  std::vector<cplx> padded;
  GridSpec grid;
};

/// Zero-pad |u|^2 and transform; the spectrum stays in `ws`.
void density_spectrum(const RieszKernel& kernel, const Field& u, ConvolutionScratch& ws);

/// Scale the stored density spectrum (|c u|^2 has spectrum scaled by |c|^2).
void scale_scratch(ConvolutionScratch& ws, double factor);

/// B values of the stored spectrum under one or two kernels.
double b_from_scratch(const RieszKernel& k, const ConvolutionScratch& ws);
std::pair<double, double> b_pair_from_scratch(const RieszKernel& ka, const RieszKernel& kb,
                                              const ConvolutionScratch& ws);

/// Potential from the stored spectrum; consumes the buffer.
Field potential_from_scratch(const RieszKernel& kernel, ConvolutionScratch& ws);

/// Average of |x|^{-gamma} over the cell [-dx/2, dx/2]^dim (the origin cell
/// replacement used by the sampled scheme). Analytic for dim 1, quadrature
/// with a self-similar shell reduction for dim 2 and 3.
double singular_cell_average(int dim, double dx, double gamma);

}  // namespace nwav
