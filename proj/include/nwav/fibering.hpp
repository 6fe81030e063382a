#pragma once

#include <stdexcept>
#include <vector>

#include "nwav/functional.hpp"

namespace nwav {

/// Scalar triple (A, B_alpha, B_beta) that the fibering map
///   g(s) = s^2 A/2 - s^alpha B_alpha/4 - mu s^beta B_beta/4
/// depends on. Dilation by s acts exactly: A -> s^2 A, B_g -> s^g B_g.
struct Triple {
  double A = 0.0;
  double B_alpha = 0.0;
  double B_beta = 0.0;
};

inline Triple triple_of(const FunctionalValues& v) { return {v.A, v.B_alpha, v.B_beta}; }
Triple dilate_triple(const Triple& t, const ModelParams& p, double s);

enum class FiberKind { LocalMax, LocalMin, Inflection };

struct FiberPoint {
  double s = 1.0;
  double g = 0.0;   // g(s)
  double g1 = 0.0;  // g'(s)
  double g2 = 0.0;  // g''(s)
  FiberKind kind = FiberKind::Inflection;
};

/// Exact polynomial-in-s evaluation of g, g', g''. The returned kind is
/// meaningful only at critical points.
FiberPoint fiber_eval(const Triple& t, const ModelParams& p, double s);

struct FiberScan {
  std::vector<FiberPoint> points;  // critical points, increasing s
  bool tangency_warning = false;   // double root collapsed to an inflection
};

struct RootBracketFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All critical points of g on [s_min, s_max]. g'(s)/s is unimodal for every
/// admissible parameter set, so the roots (at most two) are bracketed from
/// the closed-form extremum of g'(s)/s and refined by bisection.
FiberScan fiber_critical_points(const Triple& t, const ModelParams& p,
                                double s_min = 1e-3, double s_max = 1e3);

struct VdViolation : std::runtime_error {
  double deficit;  // Gamma A^{alpha/2} - B_alpha  (>= 0 when thrown)
  VdViolation(const std::string& msg, double d) : std::runtime_error(msg), deficit(d) {}
};

/// Landmarks of the two-root structure:
///   s_hat  = (4A/(alpha B_alpha))^{1/(alpha-2)}          (zero of h-hat)
///   s_star = (4(beta-2)A/(alpha(beta-alpha)B_alpha))^{1/(alpha-2)}
double landmark_s_hat(const Triple& t, const ModelParams& p);
double landmark_s_star(const Triple& t, const ModelParams& p);

/// Smaller fiber critical point s_-^* (a local maximum of g), onto which any
/// triple satisfying the V_D inequality Gamma A^{alpha/2} < B_alpha projects.
FiberPoint project_pminus(const Triple& t, const ModelParams& p, const Thresholds& th);

struct MembershipFlags {
  bool in_VD = false;
  bool on_P = false;
  bool in_Pminus = false;
  bool in_Pplus = false;
};

MembershipFlags membership(const Triple& t, double mass_value, const ModelParams& p,
                           const Thresholds& th);

}  // namespace nwav
