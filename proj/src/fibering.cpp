#include "nwav/fibering.hpp"

#include <algorithm>
#include <cmath>

namespace nwav {

namespace {

// w(s) = g'(s)/s = A - (alpha/4) s^{alpha-2} B_alpha - (mu beta/4) s^{beta-2} B_beta.
// Its derivative times s^{3-alpha} is linear in s^{beta-alpha}, so w is
// monotone or unimodal; g' has at most two roots for every parameter set.
struct FiberForms {
  double A, ba, bb, a, b, mu;

  double w(double s) const {
    return A - 0.25 * a * std::pow(s, a - 2.0) * ba - 0.25 * mu * b * std::pow(s, b - 2.0) * bb;
  }
  double w_scale(double s) const {
    return std::abs(A) + 0.25 * a * std::pow(s, a - 2.0) * ba +
           0.25 * std::abs(mu) * b * std::pow(s, b - 2.0) * bb;
  }
  // location of the single extremum of w, if any
  bool extremum(double& s_m) const {
    const double c1 = 0.25 * a * (a - 2.0) * ba;
    const double c2 = 0.25 * mu * b * (b - 2.0) * bb;
    if (c1 == 0.0 || c2 == 0.0) return false;
    const double ratio = -c1 / c2;
    if (!(ratio > 0.0)) return false;
    s_m = std::pow(ratio, 1.0 / (b - a));
    return std::isfinite(s_m) && s_m > 0.0;
  }
};

double bisect(const FiberForms& f, double lo, double hi) {
  double wlo = f.w(lo);
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double wm = f.w(mid);
    if ((wm > 0.0) == (wlo > 0.0)) {
      lo = mid;
      wlo = wm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Roots of w on [lo, hi]; w restricted to each side of its extremum is
// monotone. `expand` lets the bracket grow geometrically past [lo, hi]
// (used by the projection, where the two-root structure is known).
std::vector<double> fiber_roots(const FiberForms& f, double lo, double hi, bool expand,
                                bool* tangency) {
  std::vector<double> roots;
  if (tangency) *tangency = false;
  if (f.ba <= 0.0 && f.bb <= 0.0) return roots;

  double s_m = 0.0;
  const bool has_extremum = f.extremum(s_m);

  if (has_extremum) {
    // near-tangent double root collapses to one inflection
    if (std::abs(f.w(s_m)) <= 1e-11 * f.w_scale(s_m)) {
      if (tangency) *tangency = true;
      if (s_m >= lo && s_m <= hi) roots.push_back(s_m);
      return roots;
    }
    if (expand && f.w(s_m) < 0.0) {
      // both tails of w are positive here; widen until the sign flips back
      lo = std::min(lo, 0.5 * s_m);
      hi = std::max(hi, 2.0 * s_m);
      for (int it = 0; it < 2000 && f.w(lo) < 0.0 && lo > 1e-300; ++it) lo *= 0.5;
      for (int it = 0; it < 2000 && f.w(hi) < 0.0 && hi < 1e300; ++it) hi *= 2.0;
    }
  }

  std::vector<double> knots{lo};
  if (has_extremum && s_m > lo && s_m < hi) knots.push_back(s_m);
  knots.push_back(hi);

  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a0 = knots[i], a1 = knots[i + 1];
    if (f.w(a0) * f.w(a1) < 0.0) roots.push_back(bisect(f, a0, a1));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

FiberForms forms_of(const Triple& t, const ModelParams& p) {
  return {t.A, t.B_alpha, t.B_beta, p.alpha, p.beta, p.mu_beta};
}

FiberKind classify(const FiberPoint& fp, const FiberForms& f, double s) {
  const double scale = std::abs(f.A) + 0.25 * f.a * std::abs(f.a - 1.0) * std::pow(s, f.a - 2.0) * f.ba +
                       0.25 * std::abs(f.mu) * f.b * std::abs(f.b - 1.0) * std::pow(s, f.b - 2.0) * f.bb;
  if (fp.g2 < -1e-9 * scale) return FiberKind::LocalMax;
  if (fp.g2 > 1e-9 * scale) return FiberKind::LocalMin;
  return FiberKind::Inflection;
}

}  // namespace

Triple dilate_triple(const Triple& t, const ModelParams& p, double s) {
  return {s * s * t.A, std::pow(s, p.alpha) * t.B_alpha, std::pow(s, p.beta) * t.B_beta};
}

FiberPoint fiber_eval(const Triple& t, const ModelParams& p, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("fiber_eval: s must be positive");
  if (t.A < 0.0 || t.B_alpha < 0.0 || t.B_beta < 0.0)
    throw std::invalid_argument("fiber_eval: triple must be componentwise nonnegative");
  const double a = p.alpha, b = p.beta, mu = p.mu_beta;
  FiberPoint fp;
  fp.s = s;
  const double sa = std::pow(s, a), sb = std::pow(s, b);
  fp.g = 0.5 * s * s * t.A - 0.25 * sa * t.B_alpha - 0.25 * mu * sb * t.B_beta;
  fp.g1 = s * t.A - 0.25 * a * (sa / s) * t.B_alpha - 0.25 * mu * b * (sb / s) * t.B_beta;
  fp.g2 = t.A - 0.25 * a * (a - 1.0) * (sa / (s * s)) * t.B_alpha -
          0.25 * mu * b * (b - 1.0) * (sb / (s * s)) * t.B_beta;
  fp.kind = classify(fp, forms_of(t, p), s);
  return fp;
}

FiberScan fiber_critical_points(const Triple& t, const ModelParams& p, double s_min,
                                double s_max) {
  if (!(s_min > 0.0) || !(s_max > s_min))
    throw std::invalid_argument("fiber_critical_points: bad scan window");
  FiberScan scan;
  const FiberForms f = forms_of(t, p);
  const std::vector<double> roots = fiber_roots(f, s_min, s_max, false, &scan.tangency_warning);
  for (double s : roots) {
    FiberPoint fp = fiber_eval(t, p, s);
    if (scan.tangency_warning) fp.kind = FiberKind::Inflection;
    scan.points.push_back(fp);
  }
  return scan;
}

double landmark_s_hat(const Triple& t, const ModelParams& p) {
  if (!(t.B_alpha > 0.0) || !(p.alpha > 2.0))
    throw std::invalid_argument("landmark_s_hat: needs B_alpha > 0 and alpha > 2");
  return std::pow(4.0 * t.A / (p.alpha * t.B_alpha), 1.0 / (p.alpha - 2.0));
}

double landmark_s_star(const Triple& t, const ModelParams& p) {
  if (!(t.B_alpha > 0.0) || !(p.alpha > 2.0) || !(p.beta > p.alpha))
    throw std::invalid_argument("landmark_s_star: needs Case-iv parameters");
  return std::pow(4.0 * (p.beta - 2.0) * t.A / (p.alpha * (p.beta - p.alpha) * t.B_alpha),
                  1.0 / (p.alpha - 2.0));
}

FiberPoint project_pminus(const Triple& t, const ModelParams& p, const Thresholds& th) {
  const double lhs = th.Gamma * std::pow(t.A, 0.5 * p.alpha);
  if (!(lhs < t.B_alpha))
    throw VdViolation("project_pminus: V_D inequality fails", lhs - t.B_alpha);
  const FiberForms f = forms_of(t, p);
  bool tangency = false;
  const std::vector<double> roots = fiber_roots(f, 0.5, 2.0, true, &tangency);
  if (tangency || roots.size() != 2)
    throw RootBracketFailure("project_pminus: expected two fiber critical points");
  FiberPoint fp = fiber_eval(t, p, roots.front());
  if (fp.kind != FiberKind::LocalMax)
    throw RootBracketFailure("project_pminus: smaller critical point is not a local maximum");
  return fp;
}

MembershipFlags membership(const Triple& t, double mass_value, const ModelParams& p,
                           const Thresholds& th) {
  MembershipFlags flags;
  flags.in_VD = (th.Gamma * std::pow(t.A, 0.5 * p.alpha) < t.B_alpha) &&
                (mass_value <= p.mass_target * (1.0 + 1e-10));
  const FiberPoint at1 = fiber_eval(t, p, 1.0);
  flags.on_P = std::abs(at1.g1) < 1e-8 * std::max(t.A, 1.0);
  flags.in_Pminus = flags.on_P && at1.g2 < 0.0;
  flags.in_Pplus = flags.on_P && at1.g2 > 0.0;
  return flags;
}

}  // namespace nwav
