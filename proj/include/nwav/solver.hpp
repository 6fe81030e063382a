#pragma once

#include "nwav/fibering.hpp"
#include "nwav/functional.hpp"
#include "nwav/grid.hpp"

namespace nwav {

enum class Branch { Baseline, Global, Local };
enum class SolveStatus {
  Converged,
  MaxIterations,
  Collapse,
  UnboundedSuspected,
  WitnessNotNegative,
  VdGuardFailure,
};
const char* branch_name(Branch b);
const char* status_name(SolveStatus s);

struct SolveOptions {
  int max_iter = 50000;
  double grad_tol = 1e-6;
  double q_tol = 1e-6;
  double step0 = 1e-2;       // Armijo initial step, reset each iteration
  double armijo_c1 = 1e-4;
  int max_backtracks = 60;
  double kinetic_cap = 0.0;  // collapse detector; 0 selects 0.5 c |k|_max^2
  KernelScheme scheme = KernelScheme::SpectralTruncated;
  double init_sigma = 0.0;   // initial Gaussian width; 0 selects L/10
  int log_every = 0;         // progress lines to stderr; 0 = silent
};

struct SolveReport {
  Branch branch = Branch::Baseline;
  SolveStatus status = SolveStatus::MaxIterations;
  bool converged = false;
  Field solution;
  FunctionalValues values;
  double lambda = 0.0;
  double grad_residual = 0.0;       // ||grad E + lambda u||_2 / ||u||_{H1}
  double pohozaev_residual = 0.0;   // |Q| / A
  int iterations = 0;
  MembershipFlags flags;
  double level = 0.0;               // E at the solution
  double g2_at_1 = 0.0;
  bool regime_certified = false;    // |mu_beta| inside the two-solution window
  double asymmetry = 0.0;           // distance to the octahedral symmetrization
  double s_init = 1.0;              // fiber dilation applied to the initial profile
};

/// Ground state of the single-potential problem at exponent `gamma` on the
/// mass sphere: alternates dilation to the unique fiber critical point with a
/// mass-projected tangential descent step.
SolveReport solve_hartree_baseline(double gamma, double c, const GridSpec& grid,
                                   const Field& init, const SolveOptions& opts = {});

/// Global minimizer over the mass sphere (negative level). Starts from a
/// Gaussian dilated to the most negative resolvable fiber point, then runs
/// projected descent; finishes with fiber dilations that drive |Q|/A down.
SolveReport solve_global(const ModelParams& p, const GridSpec& grid,
                         const SolveOptions& opts = {}, const Thresholds* th = nullptr,
                         const Field* init = nullptr);

/// Local minimizer on the local-maximum fiber stratum (positive level):
/// repeated projection by dilation, tangential descent step, mass
/// renormalization, keeping the V_D inequality as a guard.
SolveReport solve_local(const ModelParams& p, const GridSpec& grid, const Field& omega0,
                        const Thresholds& th, const SolveOptions& opts = {},
                        const Field* init = nullptr);

struct Diagnostics {
  double grad_residual = 0.0;
  double pohozaev_residual = 0.0;
  double nehari_residual = 0.0;
  double pohozaev_full_residual = 0.0;  // dimension-dependent identity
  double action_identity_residual = 0.0;
  double lambda = 0.0;
  bool lambda_positive = false;
  MembershipFlags flags;
  double asymmetry = 0.0;
};

Diagnostics verify_solution(const SolveReport& report, const ModelParams& p,
                            const KernelPair& kernels, const Thresholds* th = nullptr);

/// GN constant as the quotient B/(A^{g/2} m^{(4-g)/2}) of a converged ground
/// state (scale invariant, saturated there).
double gn_quotient(double gamma, const FunctionalValues& v);

/// ||u||_2^2 of the unit-frequency ground state obtained by rescaling a
/// mass-c ground state with multiplier lambda: lambda^{(gamma-2)/2} c.
double unit_frequency_mass(double gamma, double lambda, double c);

double octahedral_asymmetry(const Field& u);

/// Kinetic-energy estimate for the global branch from the GN balance of the
/// two quartic terms, floored by the explicit lower bound.
double estimate_global_kinetic(const ModelParams& p, const Thresholds& th);

/// Explicit kinetic lower bound for the global branch.
double global_kinetic_lower_bound(const ModelParams& p, const Thresholds& th);

/// Cube box sized to hold a state of kinetic energy A at mass c:
/// width sigma = sqrt(N c / (2A)), box half-length = span_sigmas * sigma.
GridSpec suggest_box(const ModelParams& p, double kinetic, std::size_t points,
                     double span_sigmas = 10.0);

}  // namespace nwav
