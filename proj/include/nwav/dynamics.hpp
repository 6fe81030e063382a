#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nwav/functional.hpp"
#include "nwav/grid.hpp"

namespace nwav {

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<double> kinetic;
  std::vector<std::array<double, 3>> momentum;  // first dim entries used
  std::vector<double> orbit_distance;           // empty without a reference
  std::vector<double> l4norm;                   // dispersion diagnostic, not serialized
  bool aborted_nan = false;
};

/// One Strang step: half nonlinear phase, exact kinetic step in Fourier
/// space, half nonlinear phase. Each substep preserves |psi| pointwise or is
/// unitary, so the discrete mass is conserved to roundoff.
Field strang_step(const Field& psi, double dt, const ModelParams& p, const KernelPair& k);

struct EvolveOptions {
  int monitor_every = 10;
  const Field* orbit_reference = nullptr;  // record H1 orbit distance to this
};

EvolutionTrace evolve(const Field& psi0, double t_final, double dt, const ModelParams& p,
                      const KernelPair& k, const EvolveOptions& opts = {});

/// min over global phase and grid translations of || e^{i theta} psi(.-a) - u ||_{H1};
/// the best premise is located by a cross-correlation peak, the distance is
/// then evaluated on the aligned difference directly.
double orbit_distance(const Field& psi, const Field& u);

struct StabilityReport {
  double perturbation_size = 0.0;  // initial H1 distance to the orbit, relative
  double max_distance = 0.0;       // over the run, relative to ||u||_{H1}
  bool stable_flag = false;
  EvolutionTrace trace;
};

struct StabilityOptions {
  double distance_factor = 5.0;  // stable iff max_distance < factor * delta0
  int monitor_every = 10;
  std::uint64_t seed = 20240817;
};

/// Perturb `u` by a seeded band-limited field of relative H1 size delta0,
/// renormalize the mass, evolve to t_final and track the orbit distance.
StabilityReport stability_experiment(const Field& u, const ModelParams& p,
                                     const KernelPair& k, double delta0, double t_final,
                                     double dt, const StabilityOptions& opts = {});

/// Conserved momentum P = Im integral conj(psi) grad psi.
std::array<double, 3> momentum(const Field& psi);

double h1_norm(const Field& f);

/// Deterministic band-limited complex field with unit H1 norm.
Field seeded_bandlimited_field(const GridSpec& grid, std::uint64_t seed);

}  // namespace nwav
