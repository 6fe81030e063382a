#include <cmath>

#include "doctest.h"
#include "nwav/solver.hpp"

using namespace nwav;

namespace {

// small-grid baseline shared across cases (solved once)
const SolveReport& baseline_32() {
  static SolveReport rep = [] {
    GridSpec g = make_grid(3, 32, 6.0);
    Field init = sample_profile(g, ProfileSpec::gaussian(1.0).with_mass(1.0));
    SolveOptions opts;
    opts.q_tol = 0.05;  // |Q|/A floor of this resolution
    return solve_hartree_baseline(2.5, 1.0, g, init, opts);
  }();
  return rep;
}

}  // namespace

TEST_CASE("hartree baseline converges to a positive-energy ground state") {
  const SolveReport& r = baseline_32();
  CHECK(r.converged);
  CHECK(r.grad_residual < 1e-6);
  CHECK(r.values.E > 0.0);
  CHECK(r.lambda > 0.0);
  CHECK(r.values.mass == doctest::Approx(1.0).epsilon(1e-10));
  // E = ((a-2)/2a) A up to the Pohozaev defect of the grid
  CHECK(r.values.E == doctest::Approx(0.5 * 0.5 / 2.5 * r.values.A).epsilon(0.05));
  CHECK(r.asymmetry < 1e-8);
}

TEST_CASE("re-running from the converged state is a fixed point") {
  const SolveReport& r = baseline_32();
  GridSpec g = r.solution.grid;
  SolveOptions opts;
  opts.q_tol = 0.05;
  SolveReport again = solve_hartree_baseline(2.5, 1.0, g, r.solution, opts);
  CHECK(again.converged);
  CHECK(std::abs(again.values.E - r.values.E) < 1e-10);
  CHECK(again.iterations <= 1);
}

TEST_CASE("ground-state energy scales with mass as the dilation law predicts") {
  GridSpec g = make_grid(3, 32, 7.0);
  SolveOptions opts;
  opts.q_tol = 0.05;
  Field init1 = sample_profile(g, ProfileSpec::gaussian(1.0).with_mass(1.0));
  SolveReport r1 = solve_hartree_baseline(2.5, 1.0, g, init1, opts);
  Field init2 = sample_profile(g, ProfileSpec::gaussian(1.6).with_mass(1.3));
  SolveReport r2 = solve_hartree_baseline(2.5, 1.3, g, init2, opts);
  REQUIRE(r1.converged);
  REQUIRE(r2.converged);
  const double predicted = scale_ground_energy(r1.values.E, 1.0, 1.3, 2.5);
  CHECK(r2.values.E == doctest::Approx(predicted).epsilon(0.02));
}

TEST_CASE("global solve flags nonnegative couplings as unbounded") {
  ModelParams p{3, 2.5, 2.8, 0.0, 1.0};
  GridSpec g = make_grid(3, 16, 6.0);
  SolveReport r = solve_global(p, g);
  CHECK_FALSE(r.converged);
  CHECK(r.status == SolveStatus::UnboundedSuspected);
}

TEST_CASE("local solve rejects an initializer outside V_D") {
  const SolveReport& base = baseline_32();
  ModelParams p{3, 2.5, 2.8, -10.0, 1.0};
  Thresholds th = thresholds(p, base.values.E, gn_quotient(2.5, base.values), 2.5);
  SolveOptions opts;
  opts.max_iter = 50;
  SolveReport r = solve_local(p, base.solution.grid, base.solution, th, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.status == SolveStatus::VdGuardFailure);
}

TEST_CASE("two-solution structure on a small grid") {
  // full pipeline at reduced resolution: baselines, thresholds, both branches
  const SolveReport& ra = baseline_32();
  GridSpec gb = make_grid(3, 32, 10.0);
  SolveOptions opts;
  opts.q_tol = 0.05;
  Field initb = sample_profile(gb, ProfileSpec::gaussian(1.5).with_mass(1.0));
  SolveReport rb = solve_hartree_baseline(2.8, 1.0, gb, initb, opts);
  REQUIRE(ra.converged);
  REQUIRE(rb.converged);

  ModelParams p{3, 2.5, 2.8, -1.0, 1.0};
  const double S_a = gn_quotient(2.5, ra.values);
  const double S_b = gn_quotient(2.8, rb.values);
  Thresholds th = thresholds(p, ra.values.E, S_a, S_b);
  p.mu_beta = -0.5 * th.mu_admissible;
  th = thresholds(p, ra.values.E, S_a, S_b);

  SolveOptions sopt;
  sopt.q_tol = 0.05;
  sopt.max_iter = 20000;

  GridSpec gg = suggest_box(p, estimate_global_kinetic(p, th), 32, 8.0);
  SolveReport rg = solve_global(p, gg, sopt, &th);
  REQUIRE(rg.converged);
  CHECK(rg.values.E < 0.0);
  CHECK(rg.lambda > 0.0);
  CHECK(rg.g2_at_1 > 0.0);
  CHECK(rg.regime_certified);

  GridSpec gl = make_grid(3, 32, 6.0);
  SolveReport rl = solve_local(p, gl, ra.solution, th, sopt);
  REQUIRE(rl.converged);
  CHECK(rl.values.E > 0.0);
  CHECK(rl.lambda > 0.0);
  CHECK(rl.g2_at_1 < 0.0);
  CHECK(rl.flags.in_Pminus);

  // two-solution separation and the level/kinetic windows
  const double a = p.alpha, b = p.beta, m = th.m_infty;
  const double shape = std::pow(a * (b - 2.0) / (b * (b - a)), 2.0 / (b - 2.0));
  const double level_bound = a * (b - 2.0) * (b - 2.0) * m / (b * b * (a - 2.0)) * shape;
  const double kinetic_bound = 2.0 * a * a * (b - 2.0) * m / (b * (a - 2.0) * (a - 2.0)) * shape;
  CHECK(rl.values.E < level_bound);
  CHECK(rl.values.A < kinetic_bound);
  CHECK(kinetic_bound < rg.values.A);
  CHECK(rl.values.A < rg.values.A);
  CHECK(rg.values.A > global_kinetic_lower_bound(p, th));

  // kinetic lower bound for the positive-level branch
  CHECK(rl.values.A >
        0.9 * std::pow(4.0 / (a * S_a * std::pow(1.0, 0.5 * (4.0 - a))), 2.0 / (a - 2.0)));

  Diagnostics diag = verify_solution(rl, p, make_kernel_pair(gl, p), &th);
  CHECK(diag.nehari_residual < 1e-5);
  CHECK(diag.lambda_positive);
  CHECK(diag.action_identity_residual < 1e-12);
}
