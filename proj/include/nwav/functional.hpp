#pragma once

#include <optional>

#include "nwav/grid.hpp"
#include "nwav/riesz.hpp"

namespace nwav {

/// Problem instance: the equation
///   i psi_t + Lap psi + (|x|^{-alpha} * |psi|^2) psi
///                     + mu_beta (|x|^{-beta} * |psi|^2) psi = 0
/// with prescribed L2 mass `mass_target`.
struct ModelParams {
  int dim = 3;
  double alpha = 2.5;
  double beta = 2.8;
  double mu_beta = -0.05;
  double mass_target = 1.0;
};

void validate_params(const ModelParams& p);

enum class Regime { CaseI, CaseII, CaseIII, CaseIV, Unclassified };

/// Fibering-map shape classification by (alpha, beta, sign of mu_beta).
Regime regime_classify(const ModelParams& p);
const char* regime_name(Regime r);

/// Scalar summary of a field: kinetic A, the two quartic terms, mass, the
/// energy E = A/2 - B_alpha/4 - mu B_beta/4 and the dilation derivative
/// Q = A - alpha B_alpha/4 - mu beta B_beta/4.
struct FunctionalValues {
  double A = 0.0;
  double B_alpha = 0.0;
  double B_beta = 0.0;
  double mass = 0.0;
  double E = 0.0;
  double Q = 0.0;
  std::optional<double> lambda;
};

/// The two Riesz kernels of a model plus their combined spectrum
/// (K_alpha + mu_beta K_beta), shared by gradient and time stepping.
struct KernelPair {
  RieszKernel alpha;
  RieszKernel beta;
  RieszKernel combined;
  double mu_beta = 0.0;
};

KernelPair make_kernel_pair(const GridSpec& grid, const ModelParams& p,
                            KernelScheme scheme = KernelScheme::SpectralTruncated);

double kinetic_energy(const Field& u);

FunctionalValues evaluate(const Field& u, const ModelParams& p, const KernelPair& k);

/// L2 gradient of E:  grad E(u) = -Lap u - (K_alpha*|u|^2) u - mu (K_beta*|u|^2) u.
Field l2_gradient(const Field& u, const ModelParams& p, const KernelPair& k);

struct EvalGrad {
  FunctionalValues values;
  Field gradient;
};
/// Values and gradient from one shared set of transforms.
EvalGrad evaluate_with_gradient(const Field& u, const ModelParams& p, const KernelPair& k);

/// lambda = (B_alpha - A + mu_beta B_beta) / c  (the multiplier that makes
/// grad E + lambda u orthogonal to u; exact at critical points by the
/// Nehari identity).
double lagrange_multiplier(const FunctionalValues& v, const ModelParams& p, double c);

/// Best constant of  B_gamma(u) <= S_gamma ||grad u||_2^gamma ||u||_2^{4-gamma}
/// from the squared L2 norm of the unit-frequency ground state:
///   S_gamma = ((4-gamma)/gamma)^{gamma/2} * 4 / ((4-gamma) ||Q_gamma||_2^2).
double gn_constant(double gamma, int dim, double q_gamma_mass);

struct Thresholds {
  double m_infty = 0.0;
  double S_alpha = 0.0;
  double S_beta = 0.0;
  double Gamma = 0.0;
  double mu_star = 0.0;
  double mu_admissible = 0.0;
};

/// Derived constants for the two-solution regime:
///   Gamma   = (2(b-2)/(b-a)) [ |mu| b (b-a) S_b c^{(4-b)/2} / (4(a-2)) ]^{(a-2)/(b-2)}
///   mu*     = 4(a-2)/(a(b-2) S_b c^{(4-b)/2}) ((b-a)/(b-2))^{(b-2)/(a-2)}
///             [ b(a-2)^2 / (2a^2(b-2) m_inf) ]^{(b-2)/2}
///   mu_adm  = min{ mu*, (a(b-2)/(b(b-a))) (2/a)^{(b-2)/(a-2)}
///                        (a(b-2)/(b(a-2)))^{(b-2)/2} mu* }.
Thresholds thresholds(const ModelParams& p, double m_infty, double S_alpha, double S_beta);

/// Mass scaling of the single-potential ground-state energy:
/// m(c) = m(c_ref) (c/c_ref)^{-(4-alpha)/(alpha-2)}.
double scale_ground_energy(double m_ref, double c_ref, double c, double alpha);

}  // namespace nwav
