#include <cmath>
#include <random>

#include "doctest.h"
#include "nwav/fibering.hpp"

using namespace nwav;

namespace {

ModelParams case_iv_params(double mu = -0.05) { return {3, 2.5, 2.8, mu, 1.0}; }

// dense geometric scan for g' sign changes, bisection-refined
std::vector<double> dense_scan_roots(const Triple& t, const ModelParams& p, double lo,
                                     double hi, std::size_t n = 1000000) {
  std::vector<double> roots;
  auto g1 = [&](double s) { return fiber_eval(t, p, s).g1; };
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(n));
  double s_prev = lo, w_prev = g1(lo);
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = lo * std::pow(ratio, static_cast<double>(i));
    const double w = g1(s);
    if (w_prev * w < 0.0) {
      double a = s_prev, b = s;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        if (g1(a) * g1(m) <= 0.0) b = m;
        else a = m;
      }
      roots.push_back(0.5 * (a + b));
    }
    s_prev = s;
    w_prev = w;
  }
  return roots;
}

Thresholds synthetic_thresholds(const ModelParams& p) {
  return thresholds(p, 0.52, 1.05, 2.5);
}

}  // namespace

TEST_CASE("fiber_eval basics") {
  ModelParams p = case_iv_params();
  FiberPoint fp = fiber_eval({1.0, 0.0, 0.0}, p, 1.0);
  CHECK(fp.g == doctest::Approx(0.5));
  CHECK(fp.g1 == doctest::Approx(1.0));
  CHECK(fp.g2 == doctest::Approx(1.0));

  // g'(1) equals Q of the same triple
  const Triple t{1.2, 0.7, 0.4};
  const double q = t.A - 0.25 * p.alpha * t.B_alpha - 0.25 * p.mu_beta * p.beta * t.B_beta;
  CHECK(fiber_eval(t, p, 1.0).g1 == doctest::Approx(q).epsilon(1e-15));

  // s g'(s) consistency with a central difference at s = 1.3
  const double s = 1.3, ds = 1e-5;
  const double fd = (fiber_eval(t, p, s + ds).g - fiber_eval(t, p, s - ds).g) / (2.0 * ds);
  CHECK(fiber_eval(t, p, s).g1 == doctest::Approx(fd).epsilon(1e-8));

  CHECK_THROWS(fiber_eval(t, p, 0.0));
}

TEST_CASE("pure kinetic triple has no critical points") {
  ModelParams p = case_iv_params();
  FiberScan scan = fiber_critical_points({1.0, 0.0, 0.0}, p);
  CHECK(scan.points.empty());
}

TEST_CASE("case-iv critical points match the dense scan") {
  ModelParams p = case_iv_params();
  const Triple t{1.0, 4.0, 1.0};
  FiberScan scan = fiber_critical_points(t, p, 1e-3, 1e7);
  REQUIRE(scan.points.size() == 2);
  CHECK(scan.points[0].kind == FiberKind::LocalMax);
  CHECK(scan.points[1].kind == FiberKind::LocalMin);

  std::vector<double> ref = dense_scan_roots(t, p, 1e-3, 1e7);
  REQUIRE(ref.size() == 2);
  CHECK(scan.points[0].s == doctest::Approx(ref[0]).epsilon(1e-8));
  CHECK(scan.points[1].s == doctest::Approx(ref[1]).epsilon(1e-8));

  const double s_hat = landmark_s_hat(t, p);
  const double s_star = landmark_s_star(t, p);
  CHECK(s_hat < scan.points[0].s);
  CHECK(scan.points[0].s < s_star);
  CHECK(s_star < scan.points[1].s);
}

TEST_CASE("case-ii produces a local minimum before a local maximum") {
  ModelParams p{3, 1.5, 2.5, +1.0, 1.0};
  const Triple t{6.0, 1.0, 1.0};
  FiberScan scan = fiber_critical_points(t, p);
  REQUIRE(scan.points.size() == 2);
  CHECK(scan.points[0].kind == FiberKind::LocalMin);
  CHECK(scan.points[1].kind == FiberKind::LocalMax);
}

TEST_CASE("case-i and case-iii have a single critical point") {
  {
    ModelParams p{3, 1.0, 1.5, +1.0, 1.0};
    FiberScan scan = fiber_critical_points({1.0, 0.8, 0.7}, p);
    REQUIRE(scan.points.size() == 1);
    CHECK(scan.points[0].kind == FiberKind::LocalMin);
  }
  {
    ModelParams p{3, 2.5, 2.8, +1.0, 1.0};
    FiberScan scan = fiber_critical_points({1.0, 0.8, 0.7}, p);
    REQUIRE(scan.points.size() == 1);
    CHECK(scan.points[0].kind == FiberKind::LocalMax);
  }
  {
    ModelParams p{3, 2.8, 2.5, -1.0, 1.0};  // mu < 0, alpha > max{beta, 2}
    FiberScan scan = fiber_critical_points({1.0, 0.8, 0.7}, p);
    REQUIRE(scan.points.size() == 1);
    CHECK(scan.points[0].kind == FiberKind::LocalMax);
  }
}

TEST_CASE("ordering property on random V_D triples") {
  ModelParams p = case_iv_params();
  Thresholds th = synthetic_thresholds(p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int tested = 0;
  while (tested < 200) {
    Triple t;
    t.A = 0.2 + 3.0 * uni(rng);
    const double vd_floor = th.Gamma * std::pow(t.A, 0.5 * p.alpha);
    t.B_alpha = vd_floor * (1.05 + 4.0 * uni(rng));
    // B_beta below its GN ceiling, as for any function with mass <= c
    const double bb_cap = th.S_beta * std::pow(t.A, 0.5 * p.beta) *
                          std::pow(p.mass_target, 0.5 * (4.0 - p.beta));
    t.B_beta = bb_cap * uni(rng);
    if (t.B_beta <= 0.0) continue;
    ++tested;

    FiberScan scan = fiber_critical_points(t, p, 1e-8, 1e12);
    REQUIRE(scan.points.size() == 2);
    CHECK(scan.points[0].kind == FiberKind::LocalMax);
    CHECK(scan.points[1].kind == FiberKind::LocalMin);
    const double s_hat = landmark_s_hat(t, p);
    const double s_star = landmark_s_star(t, p);
    CHECK(s_hat < scan.points[0].s);
    CHECK(scan.points[0].s < s_star);
    CHECK(s_star < scan.points[1].s);

    // fiber shape: increasing, decreasing, increasing
    const double s1 = scan.points[0].s, s2 = scan.points[1].s;
    CHECK(fiber_eval(t, p, 0.5 * s1).g1 > 0.0);
    CHECK(fiber_eval(t, p, std::sqrt(s1 * s2)).g1 < 0.0);
    CHECK(fiber_eval(t, p, 2.0 * s2).g1 > 0.0);

    // negative infimum at the explicit witness when the triple is in V_S
    const double s_w = std::pow(2.0 * (p.beta - 2.0) * t.A / ((p.beta - p.alpha) * t.B_alpha),
                                1.0 / (p.alpha - 2.0));
    CHECK(fiber_eval(t, p, s_w).g < 0.0);
  }
}

TEST_CASE("projection onto the local-maximum branch") {
  ModelParams p = case_iv_params();
  Thresholds th = synthetic_thresholds(p);

  // a triple already on the branch projects to s = 1
  Triple t{1.0, 4.0, 1.0};
  FiberScan scan = fiber_critical_points(t, p, 1e-3, 1e7);
  REQUIRE(scan.points.size() == 2);
  Triple on_branch = dilate_triple(t, p, scan.points[0].s);
  FiberPoint fixed = project_pminus(on_branch, p, th);
  CHECK(fixed.s == doctest::Approx(1.0).epsilon(1e-10));

  // Q < 0 implies the projection does not move outward
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int tested = 0;
  while (tested < 100) {
    Triple r;
    r.A = 0.2 + 2.0 * uni(rng);
    r.B_alpha = th.Gamma * std::pow(r.A, 0.5 * p.alpha) * (1.05 + 3.0 * uni(rng));
    const double bb_cap = th.S_beta * std::pow(r.A, 0.5 * p.beta);
    r.B_beta = bb_cap * uni(rng);
    if (r.B_beta <= 0.0) continue;
    ++tested;
    FiberPoint proj = project_pminus(r, p, th);
    const Triple moved = dilate_triple(r, p, proj.s);
    const double q_moved = moved.A - 0.25 * p.alpha * moved.B_alpha -
                           0.25 * p.mu_beta * p.beta * moved.B_beta;
    CHECK(std::abs(q_moved) < 1e-9 * moved.A);
    const double q0 = r.A - 0.25 * p.alpha * r.B_alpha - 0.25 * p.mu_beta * p.beta * r.B_beta;
    if (q0 <= 0.0) CHECK(proj.s <= 1.0 + 1e-10);
  }

  // V_D violation reports the deficit
  Triple bad{1.0, 1e-6, 0.2};
  CHECK_THROWS_AS(project_pminus(bad, p, th), VdViolation);
}

TEST_CASE("membership flags") {
  ModelParams p = case_iv_params();
  Thresholds th = synthetic_thresholds(p);

  CHECK_FALSE(membership({1.0, 0.0, 0.0}, 1.0, p, th).in_VD);

  // a projected triple lands on the local-maximum stratum
  Triple t{1.0, 4.0, 1.0};
  FiberPoint proj = project_pminus(t, p, th);
  Triple moved = dilate_triple(t, p, proj.s);
  MembershipFlags flags = membership(moved, 1.0, p, th);
  CHECK(flags.on_P);
  CHECK(flags.in_Pminus);
  CHECK_FALSE(flags.in_Pplus);
}

TEST_CASE("scaling consistency of the fiber polynomial") {
  ModelParams p = case_iv_params();
  const Triple t{0.9, 1.4, 0.6};
  for (double s : {0.3, 1.9}) {
    const FiberPoint a = fiber_eval(dilate_triple(t, p, s), p, 1.0);
    const FiberPoint b = fiber_eval(t, p, s);
    CHECK(a.g == doctest::Approx(b.g).epsilon(1e-14));
  }
}

TEST_CASE("tangency collapses to a single inflection with a warning") {
  ModelParams p = case_iv_params(-0.05);
  // tune B_beta so the dip of g'/s just touches zero
  Triple t{1.0, 4.0, 0.0};
  auto dip = [&](double bb) {
    Triple tt = t;
    tt.B_beta = bb;
    const double a = p.alpha, b = p.beta;
    const double c1 = 0.25 * a * (a - 2.0) * tt.B_alpha;
    const double c2 = 0.25 * p.mu_beta * b * (b - 2.0) * bb;
    const double s_m = std::pow(-c1 / c2, 1.0 / (b - a));
    return fiber_eval(tt, p, s_m).g1 / s_m;
  };
  double lo = 1.0, hi = 400.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dip(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  Triple tt = t;
  tt.B_beta = 0.5 * (lo + hi);
  FiberScan scan = fiber_critical_points(tt, p);
  CHECK(scan.tangency_warning);
  REQUIRE(scan.points.size() == 1);
  CHECK(scan.points[0].kind == FiberKind::Inflection);
}
