#include <cmath>

#include "doctest.h"
#include "nwav/fibering.hpp"
#include "nwav/functional.hpp"
#include "oracles.hpp"

using namespace nwav;

namespace {
ModelParams case_iv_params() { return {3, 2.5, 2.8, -0.05, 1.0}; }
}  // namespace

TEST_CASE("regime classification covers the four cases") {
  CHECK(regime_classify({3, 2.5, 2.8, -0.05, 1.0}) == Regime::CaseIV);
  CHECK(regime_classify({3, 1.0, 1.5, +1.0, 1.0}) == Regime::CaseI);
  CHECK(regime_classify({3, 1.0, 2.5, +1.0, 1.0}) == Regime::CaseII);
  CHECK(regime_classify({3, 2.5, 2.8, +1.0, 1.0}) == Regime::CaseIII);
  CHECK(regime_classify({3, 2.8, 2.5, -1.0, 1.0}) == Regime::CaseIII);
  CHECK(regime_classify({3, 1.5, 1.0, -1.0, 1.0}) == Regime::CaseI);
  // beta at the endpoint min{N,4} stays unclassified for N = 3
  CHECK(regime_classify({3, 2.5, 3.0, -0.05, 1.0}) == Regime::Unclassified);
  CHECK(regime_classify({3, 2.5, 2.8, 0.0, 1.0}) == Regime::Unclassified);

  CHECK_THROWS(validate_params({3, 2.5, 2.5, -0.05, 1.0}));
  CHECK_THROWS(validate_params({3, 0.0, 2.5, -0.05, 1.0}));
  CHECK_THROWS(validate_params({3, 2.5, 2.8, -0.05, -1.0}));
}

TEST_CASE("zero field has vanishing functionals") {
  GridSpec g = make_grid(3, 16, 4.0);
  ModelParams p = case_iv_params();
  KernelPair k = make_kernel_pair(g, p);
  FunctionalValues v = evaluate(make_field(g), p, k);
  CHECK(v.A == 0.0);
  CHECK(v.B_alpha == 0.0);
  CHECK(v.B_beta == 0.0);
  CHECK(v.E == 0.0);
  CHECK(v.Q == 0.0);
}

TEST_CASE("gaussian kinetic and energy composition") {
  GridSpec g = make_grid(3, 64, 8.0);
  ModelParams p = case_iv_params();
  p.mu_beta = 0.0;
  p.mu_beta = 0.0;
  KernelPair k = make_kernel_pair(g, p);
  Field u = sample_profile(g, ProfileSpec::gaussian(1.0).with_mass(1.0));
  FunctionalValues v = evaluate(u, p, k);
  CHECK(v.A == doctest::Approx(oracles::gaussian_kinetic(3, 1.0, 1.0)).epsilon(1e-6));
  const double b_alpha = oracles::gaussian_b_moment(3, p.alpha, 1.0, 1.0);
  CHECK(v.E == doctest::Approx(0.5 * v.A - 0.25 * b_alpha).epsilon(1e-4));
}

TEST_CASE("gradient matches central differences of the energy") {
  GridSpec g = make_grid(3, 16, 5.0);
  ModelParams p = case_iv_params();
  KernelPair k = make_kernel_pair(g, p);
  const double eps = 1e-4;
  for (unsigned trial = 0; trial < 3; ++trial) {
    Field u = oracles::random_smooth_field(g, 100 + trial);
    Field h = oracles::random_smooth_field(g, 200 + trial);
    Field grad = l2_gradient(u, p, k);
    const double directional = inner_product(grad, h).real();

    Field up = u, um = u;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      up.values[i] += eps * h.values[i];
      um.values[i] -= eps * h.values[i];
    }
    const double fd = (evaluate(up, p, k).E - evaluate(um, p, k).E) / (2.0 * eps);
    CHECK(directional == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("gradient of the zero field vanishes") {
  GridSpec g = make_grid(3, 16, 4.0);
  ModelParams p = case_iv_params();
  KernelPair k = make_kernel_pair(g, p);
  Field grad = l2_gradient(make_field(g), p, k);
  for (const cplx& v : grad.values) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("lagrange multiplier plug-ins") {
  ModelParams p = case_iv_params();
  FunctionalValues v;
  v.A = 1.0;
  v.B_alpha = 0.0;
  v.B_beta = 0.0;
  CHECK(lagrange_multiplier(v, p, 1.0) == doctest::Approx(-1.0));

  // on the Pohozaev set the two multiplier displays agree
  v.B_alpha = 1.6;
  CHECK(1.0 - 2.5 * 1.6 / 4.0 == doctest::Approx(0.0));
  const double first = lagrange_multiplier(v, p, 1.0);
  const double second = ((4.0 - p.alpha) / p.alpha) * v.A +
                        (std::abs(p.mu_beta) * (p.beta - p.alpha) / p.alpha) * v.B_beta;
  CHECK(first == doctest::Approx(0.6));
  CHECK(second == doctest::Approx(0.6));
}

TEST_CASE("gn_constant symbolic case gamma = 2") {
  const double q_mass = 3.7;
  CHECK(gn_constant(2.0, 3, q_mass) == doctest::Approx(4.0 / (2.0 * q_mass)));
  CHECK_THROWS(gn_constant(2.0, 3, 0.0));
}

TEST_CASE("thresholds formulas and scaling in S_beta") {
  ModelParams p = case_iv_params();
  const double m_inf = 0.5, s_a = 1.05;
  Thresholds t1 = thresholds(p, m_inf, s_a, 1.0);
  Thresholds t10 = thresholds(p, m_inf, s_a, 0.1);
  CHECK(t10.mu_star == doctest::Approx(10.0 * t1.mu_star).epsilon(1e-12));

  const double a = p.alpha, b = p.beta;
  const double gamma_ref = (2.0 * (b - 2.0) / (b - a)) *
      std::pow(std::abs(p.mu_beta) * b * (b - a) * 1.0 / (4.0 * (a - 2.0)), (a - 2.0) / (b - 2.0));
  CHECK(t1.Gamma == doctest::Approx(gamma_ref).epsilon(1e-12));

  ModelParams bad = p;
  bad.beta = p.alpha;
  CHECK_THROWS(thresholds(bad, m_inf, s_a, 1.0));
  ModelParams not_iv = p;
  not_iv.mu_beta = 0.05;
  CHECK_THROWS(thresholds(not_iv, m_inf, s_a, 1.0));
}

TEST_CASE("fiber polynomial reproduces d/ds E(u_s) = Q(u_s)/s") {
  ModelParams p = case_iv_params();
  const Triple t{1.3, 0.8, 2.1};
  for (double s : {0.4, 1.0, 1.7, 3.2}) {
    FiberPoint fp = fiber_eval(t, p, s);
    const Triple ts = dilate_triple(t, p, s);
    const double q_s = ts.A - 0.25 * p.alpha * ts.B_alpha - 0.25 * p.mu_beta * p.beta * ts.B_beta;
    CHECK(fp.g1 == doctest::Approx(q_s / s).epsilon(1e-10));
    // central difference of g along s
    const double ds = 1e-6 * s;
    const double fd = (fiber_eval(t, p, s + ds).g - fiber_eval(t, p, s - ds).g) / (2.0 * ds);
    CHECK(fp.g1 == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("case-iv fiber energy is eventually positive") {
  ModelParams p = case_iv_params();
  const Triple t{1.0, 0.1, 10.0};
  CHECK(fiber_eval(t, p, 8.0).g > 0.0);
  CHECK(fiber_eval(t, p, 1e4).g > fiber_eval(t, p, 8.0).g);
}

TEST_CASE("interpolation chain B_alpha <= eps B_beta + eps^{-theta/(1-theta)} B_1") {
  GridSpec g = make_grid(3, 16, 5.0);
  ModelParams p = case_iv_params();
  const double theta = (p.alpha - 1.0) / (p.beta - 1.0);
  const double eps = 0.5 * std::abs(p.mu_beta);
  RieszKernel ka = build_kernel(g, p.alpha, KernelScheme::SampledCellAverage);
  RieszKernel kb = build_kernel(g, p.beta, KernelScheme::SampledCellAverage);
  RieszKernel k1 = build_kernel(g, 1.0, KernelScheme::SampledCellAverage);
  for (unsigned trial = 0; trial < 5; ++trial) {
    Field u = oracles::random_smooth_field(g, 500 + trial);
    const double b_a = b_value(ka, u);
    const double bound = eps * b_value(kb, u) + std::pow(eps, -theta / (1.0 - theta)) * b_value(k1, u);
    CHECK((bound - b_a) / bound > -1e-6);
  }
}

TEST_CASE("ground-energy mass scaling formula") {
  CHECK(scale_ground_energy(0.5, 1.0, 2.0, 2.5) == doctest::Approx(0.5 * std::pow(2.0, -3.0)));
}
