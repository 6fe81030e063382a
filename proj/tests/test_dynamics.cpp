#include <cmath>

#include "doctest.h"
#include "nwav/dynamics.hpp"
#include "nwav/solver.hpp"
#include "oracles.hpp"

using namespace nwav;

namespace {

ModelParams tame_params() { return {3, 2.5, 2.8, -0.05, 1.0}; }

Field random_complex_state(const GridSpec& g, unsigned seed) {
  Field f = oracles::random_smooth_field(g, seed, false);
  const double r = std::sqrt(1.0 / mass(f));
  for (cplx& v : f.values) v *= r;
  return f;
}

double l2_diff(const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(acc * a.grid.cell_volume());
}

}  // namespace

TEST_CASE("one step preserves mass to roundoff and zero stays zero") {
  GridSpec g = make_grid(3, 16, 5.0);
  ModelParams p = tame_params();
  KernelPair k = make_kernel_pair(g, p);
  Field psi = random_complex_state(g, 5);
  const double m0 = mass(psi);
  Field next = strang_step(psi, 1e-3, p, k);
  CHECK(std::abs(mass(next) - m0) / m0 < 1e-13);

  Field zero = make_field(g);
  Field znext = strang_step(zero, 1e-3, p, k);
  for (const cplx& v : znext.values) CHECK(v == cplx(0.0, 0.0));

  CHECK_THROWS(strang_step(psi, 0.0, p, k));
  CHECK_THROWS(evolve(psi, -1.0, 1e-3, p, k));
}

TEST_CASE("strang splitting is second order in dt") {
  GridSpec g = make_grid(3, 16, 5.0);
  ModelParams p = tame_params();
  KernelPair k = make_kernel_pair(g, p);
  Field psi0 = random_complex_state(g, 17);
  const double T = 0.08;

  auto advance = [&](double dt) {
    Field psi = psi0;
    const long n = std::lround(T / dt);
    for (long i = 0; i < n; ++i) psi = strang_step(psi, dt, p, k);
    return psi;
  };
  Field ref = advance(T / 256.0);
  const double e1 = l2_diff(advance(T / 16.0), ref);
  const double e2 = l2_diff(advance(T / 32.0), ref);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("momentum of even data stays zero; energy is conserved") {
  GridSpec g = make_grid(3, 32, 6.0);
  ModelParams p = tame_params();
  KernelPair k = make_kernel_pair(g, p);
  Field psi = sample_profile(g, ProfileSpec::gaussian(1.0).with_mass(1.0));
  EvolveOptions opts;
  opts.monitor_every = 20;
  EvolutionTrace tr = evolve(psi, 0.4, 1e-3, p, k, opts);
  REQUIRE_FALSE(tr.aborted_nan);
  REQUIRE(tr.times.size() >= 2);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    for (int d = 0; d < 3; ++d) CHECK(std::abs(tr.momentum[i][d]) < 1e-10);
  const double drift =
      std::abs(tr.energy.back() - tr.energy.front()) / std::max(1e-300, std::abs(tr.energy.front()));
  CHECK(drift < 1e-6);
  const double mass_drift =
      std::abs(tr.mass.back() - tr.mass.front()) / tr.mass.front();
  CHECK(mass_drift < 1e-13);
}

TEST_CASE("conjugation reverses the evolution exactly") {
  GridSpec g = make_grid(3, 16, 5.0);
  ModelParams p = tame_params();
  KernelPair k = make_kernel_pair(g, p);
  Field psi0 = random_complex_state(g, 23);
  Field psi = psi0;
  const double dt = 1e-3;
  for (int i = 0; i < 200; ++i) psi = strang_step(psi, dt, p, k);
  for (cplx& v : psi.values) v = std::conj(v);
  for (int i = 0; i < 200; ++i) psi = strang_step(psi, dt, p, k);
  for (cplx& v : psi.values) v = std::conj(v);
  CHECK(l2_diff(psi, psi0) < 1e-10);
}

TEST_CASE("orbit distance quotients phase and grid translations") {
  GridSpec g = make_grid(3, 16, 6.0);
  Field u = sample_profile(g, ProfileSpec::gaussian(1.0, {0.4, 0.0, -0.7}).with_mass(1.0));
  CHECK(orbit_distance(u, u) <= 1e-12);

  Field phased = u;
  for (cplx& v : phased.values) v *= cplx(std::cos(0.7), std::sin(0.7));
  CHECK(orbit_distance(phased, u) < 1e-10);

  Field rolled = roll_field(u, {3, -2, 1});
  CHECK(orbit_distance(rolled, u) < 1e-6);
}

TEST_CASE("a converged ground state evolves as a standing wave") {
  GridSpec g = make_grid(3, 32, 6.0);
  Field init = sample_profile(g, ProfileSpec::gaussian(1.0).with_mass(1.0));
  SolveOptions sopt;
  sopt.q_tol = 0.05;
  SolveReport r = solve_hartree_baseline(2.5, 1.0, g, init, sopt);
  REQUIRE(r.converged);

  ModelParams p{3, 2.5, 2.8, 0.0, 1.0};  // evolve under the matching flow
  KernelPair k = make_kernel_pair(g, p);
  Field psi = r.solution;
  const double dt = 1e-3;
  for (int i = 0; i < 500; ++i) psi = strang_step(psi, dt, p, k);
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.values.size(); ++i)
    worst = std::max(worst, std::abs(std::abs(psi.values[i]) - std::abs(r.solution.values[i])));
  // the single-potential ground state is a saddle of this flow, so splitting
  // noise is amplified; the tight stationarity bound is checked on the
  // orbitally stable branch in the acceptance suite
  CHECK(worst < 2e-3);
  // the phase should rotate at the Lagrange multiplier rate
  const cplx overlap = inner_product(r.solution, psi);
  const double measured_rate = std::arg(overlap) / (500.0 * dt);
  CHECK(measured_rate == doctest::Approx(r.lambda).epsilon(1e-3));
}

TEST_CASE("stability experiment is reproducible and well-formed") {
  GridSpec g = make_grid(3, 16, 6.0);
  ModelParams p = tame_params();
  KernelPair k = make_kernel_pair(g, p);
  Field u = sample_profile(g, ProfileSpec::gaussian(1.0).with_mass(1.0));
  StabilityOptions opts;
  opts.monitor_every = 25;
  StabilityReport a = stability_experiment(u, p, k, 1e-2, 0.3, 1e-3, opts);
  StabilityReport b = stability_experiment(u, p, k, 1e-2, 0.3, 1e-3, opts);
  CHECK(a.perturbation_size == doctest::Approx(1e-2).epsilon(0.3));
  CHECK(a.max_distance == b.max_distance);  // fixed seed
  CHECK(a.trace.orbit_distance.size() == a.trace.times.size());
  CHECK(a.stable_flag == (a.max_distance < 5.0 * a.perturbation_size));
}
