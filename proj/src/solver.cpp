#include "nwav/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace nwav {

namespace {

void axpy(Field& y, double a, const Field& x) {
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
}

double l2_norm2(const Field& f) {
  double acc = 0.0;
  for (const cplx& v : f.values) acc += std::norm(v);
  return acc * f.grid.cell_volume();
}

void scale_field_local(Field& f, double a) {
  for (cplx& v : f.values) v *= a;
}

void renormalize_mass(Field& u, double c) {
  const double m = mass(u);
  if (!(m > 0.0)) throw std::runtime_error("solver: iterate lost all mass");
  const double r = std::sqrt(c / m);
  for (cplx& v : u.values) v *= r;
}

struct SmallSpectrum {
  std::vector<cplx> data;
  double kinetic_raw = 0.0;
  double mass_raw = 0.0;
};

void small_analysis(const Field& w, SmallSpectrum& out) {
  const fft::Shape3 s = w.grid.shape();
  out.data = w.values;
  fft::forward3(out.data.data(), s);
  const std::vector<double>& kn = w.grid.wavenumbers;
  double acc = 0.0;
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < s.n0; ++i0) {
    const double k0 = (s.n0 > 1) ? kn[i0] * kn[i0] : 0.0;
    for (std::size_t i1 = 0; i1 < s.n1; ++i1) {
      const double k01 = k0 + ((s.n1 > 1) ? kn[i1] * kn[i1] : 0.0);
      for (std::size_t i2 = 0; i2 < s.n2; ++i2)
        acc += (k01 + kn[i2] * kn[i2]) * std::norm(out.data[idx++]);
    }
  }
  out.kinetic_raw = acc * w.grid.cell_volume() / static_cast<double>(s.size());
  out.mass_raw = mass(w);
}

// consume the stored spectrum: -Lap of (amp * raw field)
Field neg_laplacian_from(const GridSpec& g, SmallSpectrum& ss, double amp) {
  const fft::Shape3 s = g.shape();
  const std::vector<double>& kn = g.wavenumbers;
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < s.n0; ++i0) {
    const double k0 = (s.n0 > 1) ? kn[i0] * kn[i0] : 0.0;
    for (std::size_t i1 = 0; i1 < s.n1; ++i1) {
      const double k01 = k0 + ((s.n1 > 1) ? kn[i1] * kn[i1] : 0.0);
      for (std::size_t i2 = 0; i2 < s.n2; ++i2) {
        ss.data[idx] *= amp * (k01 + kn[i2] * kn[i2]);
        ++idx;
      }
    }
  }
  fft::inverse3(ss.data.data(), s);
  Field out;
  out.grid = g;
  out.values = std::move(ss.data);
  return out;
}

// d/ds of the dilation family at s = 1: (N/2) u + x . grad u, with the
// gradient taken spectrally so this is the exact derivative of dilate_field.
Field fiber_direction(const Field& u) {
  const GridSpec& g = u.grid;
  const fft::Shape3 s = g.shape();
  Field out = u;
  for (cplx& v : out.values) v *= 0.5 * static_cast<double>(g.dim);
  std::vector<cplx> spec(u.values);
  fft::forward3(spec.data(), s);
  std::vector<cplx> dspec;
  for (int axis = 0; axis < g.dim; ++axis) {
    dspec = spec;
    const int a3 = axis + (3 - g.dim);  // position in the (n0,n1,n2) layout
    const std::size_t nyq = g.points / 2;
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < s.n0; ++i0)
      for (std::size_t i1 = 0; i1 < s.n1; ++i1)
        for (std::size_t i2 = 0; i2 < s.n2; ++i2) {
          const std::size_t ji = (a3 == 0) ? i0 : (a3 == 1 ? i1 : i2);
          dspec[idx] *= cplx(0.0, ji == nyq ? 0.0 : g.wavenumbers[ji]);
          ++idx;
        }
    fft::inverse3(dspec.data(), s);
    idx = 0;
    for (std::size_t i0 = 0; i0 < s.n0; ++i0)
      for (std::size_t i1 = 0; i1 < s.n1; ++i1)
        for (std::size_t i2 = 0; i2 < s.n2; ++i2) {
          const std::size_t ji = (a3 == 0) ? i0 : (a3 == 1 ? i1 : i2);
          out.values[idx] += g.coords[ji] * dspec[idx];
          ++idx;
        }
  }
  return out;
}

struct IterState {
  Field u;  // mass-normalized iterate
  SmallSpectrum small;
  FunctionalValues v;
  Field grad;  // grad E
  Field gt;    // grad E + lambda u
  double lambda = 0.0;
  double grad_res = std::numeric_limits<double>::infinity();
  double q_res = std::numeric_limits<double>::infinity();
};

struct TrialData {
  SmallSpectrum small;
  double scale = 1.0;  // c / mass_raw
  Triple triple;
};

class Engine {
 public:
  Engine(Branch branch, const ModelParams& p, const GridSpec& grid, const KernelPair& k,
         const Thresholds* th, const SolveOptions& opts)
      : branch_(branch), p_(p), grid_(grid), k_(k), th_(th), opts_(opts) {
    c_ = p.mass_target;
    const double kax = std::numbers::pi / grid.spacing;
    const double kmax2 = static_cast<double>(grid.dim) * kax * kax;
    cap_ = (opts.kinetic_cap > 0.0) ? opts.kinetic_cap : 0.5 * c_ * kmax2;
    // explicit-flow stability limit of the kinetic term; the merit cannot
    // detect growth of the highest modes, so the line search must not start
    // above it
    tau_cap_ = 1.8 / kmax2;
  }

  // root of s g'(s) = target near the unbiased branch root
  double projection_s_biased(const Triple& t, double target) const {
    const double s0 = projection_s(t);
    auto f = [&](double s) { return s * fiber_eval(t, p_, s).g1 - target; };
    double lo = s0, hi = s0;
    bool bracketed = false;
    for (double d = 1e-6; d < 0.3; d *= 2.0) {
      lo = s0 * (1.0 - d);
      hi = s0 * (1.0 + d);
      if (f(lo) * f(hi) < 0.0) {
        bracketed = true;
        break;
      }
    }
    if (!bracketed) return s0;
    double flo = f(lo);
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((f(mid) > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = f(mid);
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  double projection_s(const Triple& t) const {
    if (branch_ == Branch::Baseline) {
      if (!(t.B_alpha > 0.0)) return 1.0;
      return std::pow(4.0 * t.A / (p_.alpha * t.B_alpha), 1.0 / (p_.alpha - 2.0));
    }
    if (branch_ == Branch::Local) return project_pminus(t, p_, *th_).s;
    FiberScan scan = fiber_critical_points(t, p_, 1e-8, 1e8);
    for (auto it = scan.points.rbegin(); it != scan.points.rend(); ++it)
      if (it->kind == FiberKind::LocalMin) return it->s;
    return 1.0;
  }

  // line-search merit: energy at the branch's fiber projection (the fiber
  // value is a closed form of the triple, so trials never touch the grid)
  double merit(const Triple& t) const {
    if (branch_ == Branch::Global) return fiber_eval(t, p_, 1.0).g;
    return fiber_eval(t, p_, projection_s(t)).g;
  }

  bool vd_ok(const Triple& t) const {
    if (branch_ != Branch::Local) return true;
    return th_->Gamma * std::pow(t.A, 0.5 * p_.alpha) < t.B_alpha;
  }

  void full_eval(IterState& st) {
    small_analysis(st.u, st.small);
    density_spectrum(k_.alpha, st.u, scratch_);
    finish_eval(st, c_ / st.small.mass_raw);
  }

  void full_eval_into(IterState& st) { full_eval(st); }

  // complete an evaluation after small_analysis + density_spectrum of the
  // raw field behind st.u; r = c/mass_raw, st.u must hold sqrt(r) * raw.
  void finish_eval(IterState& st, double r) {
    FunctionalValues& v = st.v;
    v.A = r * st.small.kinetic_raw;
    scale_scratch(scratch_, r);
    const auto [ba, bb] = b_pair_from_scratch(k_.alpha, k_.beta, scratch_);
    v.B_alpha = ba;
    v.B_beta = bb;
    v.mass = c_;
    v.E = 0.5 * v.A - 0.25 * v.B_alpha - 0.25 * p_.mu_beta * v.B_beta;
    v.Q = v.A - 0.25 * p_.alpha * v.B_alpha - 0.25 * p_.mu_beta * p_.beta * v.B_beta;
    st.lambda = (v.B_alpha - v.A + p_.mu_beta * v.B_beta) / c_;

    Field vpot = potential_from_scratch(k_.combined, scratch_);
    Field grad = neg_laplacian_from(grid_, st.small, std::sqrt(r));
    for (std::size_t i = 0; i < grad.values.size(); ++i)
      grad.values[i] -= vpot.values[i].real() * st.u.values[i];
    st.grad = std::move(grad);
    st.gt = st.grad;
    axpy(st.gt, st.lambda, st.u);
    st.grad_res = std::sqrt(l2_norm2(st.gt) / (c_ + v.A));
    st.q_res = std::abs(v.Q) / std::max(v.A, 1e-300);
  }

  void eval_trial(const Field& w, TrialData& td) {
    small_analysis(w, td.small);
    if (!(td.small.mass_raw > 0.0)) throw std::runtime_error("solver: trial lost all mass");
    td.scale = c_ / td.small.mass_raw;
    density_spectrum(k_.alpha, w, scratch_);
    const auto [ba, bb] = b_pair_from_scratch(k_.alpha, k_.beta, scratch_);
    td.triple = {td.scale * td.small.kinetic_raw, td.scale * td.scale * ba,
                 td.scale * td.scale * bb};
  }

  void project_state(IterState& st, double s) {
    st.u = dilate_field(st.u, s);
    renormalize_mass(st.u, c_);
    full_eval(st);
  }

  // F(u) = grad E(u) + lambda(u) u with lambda = -<grad E, u>/<u,u>;
  // zeros of F on the sphere are the critical points of the discrete energy
  Field apply_F(const Field& u) {
    IterState tmp;
    tmp.u = u;
    small_analysis(tmp.u, tmp.small);
    density_spectrum(k_.alpha, tmp.u, scratch_);
    // inline finish_eval without forcing mass = c
    const double m = tmp.small.mass_raw;
    FunctionalValues v;
    v.A = tmp.small.kinetic_raw;
    const auto [ba, bb] = b_pair_from_scratch(k_.alpha, k_.beta, scratch_);
    v.B_alpha = ba;
    v.B_beta = bb;
    Field vpot = potential_from_scratch(k_.combined, scratch_);
    Field grad = neg_laplacian_from(grid_, tmp.small, 1.0);
    for (std::size_t i = 0; i < grad.values.size(); ++i)
      grad.values[i] -= vpot.values[i].real() * u.values[i];
    const double lam = (v.B_alpha - v.A + p_.mu_beta * v.B_beta) / m;
    axpy(grad, lam, u);
    return grad;
  }

  // Newton-Krylov polish: solve F = 0 with a finite-difference projected
  // Hessian and MINRES (the operator is symmetric and generally indefinite
  // on the tangent space). Returns true if the residual improved.
  bool newton_polish(IterState& st, int rounds, int krylov_iters);

  SolveReport run(Field u0, double s_init);

  Branch branch_;
  const ModelParams& p_;
  const GridSpec& grid_;
  const KernelPair& k_;
  const Thresholds* th_;
  SolveOptions opts_;
  double c_ = 1.0;
  double cap_ = 0.0;
  double tau_cap_ = 1e-2;
  ConvolutionScratch scratch_;
};

namespace {

void project_tangent(Field& v, const Field& u, double c) {
  const double coef = inner_product(u, v).real() / c;
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] -= coef * u.values[i];
}

}  // namespace

bool Engine::newton_polish(IterState& st, int rounds, int krylov_iters) {
  const double c = c_;
  bool improved = false;
  for (int round = 0; round < rounds; ++round) {
    Field F0 = st.gt;
    const double f0 = std::sqrt(l2_norm2(F0));
    if (!(f0 > 0.0)) return true;

    auto apply_hess = [&](const Field& vin) {
      Field w = vin;
      project_tangent(w, st.u, c);
      const double wn = std::sqrt(l2_norm2(w));
      if (!(wn > 0.0)) return w;
      const double eps = 1e-7 * std::sqrt(c) / wn;
      Field up = st.u;
      axpy(up, eps, w);
      Field out = apply_F(up);
      for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (out.values[i] - F0.values[i]) / eps;
      project_tangent(out, st.u, c);
      return out;
    };

    // MINRES on  P H P d = -F0
    Field b = F0;
    for (cplx& x : b.values) x = -x;
    project_tangent(b, st.u, c);
    Field x = make_field(grid_);
    double beta1 = std::sqrt(l2_norm2(b));
    if (!(beta1 > 0.0)) return improved;
    Field v_prev = make_field(grid_);
    Field v = b;
    scale_field_local(v, 1.0 / beta1);
    Field w0 = make_field(grid_), w1 = make_field(grid_);
    double eta = beta1, gamma1 = 1.0, gamma0 = 1.0, sigma1 = 0.0, sigma0 = 0.0;
    double beta = beta1;
    for (int k = 0; k < krylov_iters; ++k) {
      Field av = apply_hess(v);
      const double alpha = inner_product(v, av).real();
      for (std::size_t i = 0; i < av.values.size(); ++i)
        av.values[i] -= alpha * v.values[i] + beta * v_prev.values[i];
      const double beta_new = std::sqrt(l2_norm2(av));
      const double delta = gamma1 * alpha - gamma0 * sigma1 * beta;
      const double rho1 = std::sqrt(delta * delta + beta_new * beta_new);
      const double rho2 = sigma1 * alpha + gamma0 * gamma1 * beta;
      const double rho3 = sigma0 * beta;
      if (!(rho1 > 0.0)) break;
      const double gamma_new = delta / rho1;
      const double sigma_new = beta_new / rho1;
      Field w_new = v;
      for (std::size_t i = 0; i < w_new.values.size(); ++i)
        w_new.values[i] = (v.values[i] - rho3 * w0.values[i] - rho2 * w1.values[i]) / rho1;
      axpy(x, gamma_new * eta, w_new);
      eta = -sigma_new * eta;
      w0 = std::move(w1);
      w1 = std::move(w_new);
      if (std::abs(eta) < 0.02 * beta1) break;
      if (!(beta_new > 1e-300)) break;
      v_prev = std::move(v);
      v = std::move(av);
      scale_field_local(v, 1.0 / beta_new);
      gamma0 = gamma1;
      gamma1 = gamma_new;
      sigma0 = sigma1;
      sigma1 = sigma_new;
      beta = beta_new;
    }

    if (opts_.log_every > 0)
      std::fprintf(stderr, "  [newton] round=%d f0=%.3e minres_rel=%.3e dx=%.3e\n", round, f0,
                   std::abs(eta) / beta1, std::sqrt(l2_norm2(x)));
    // damped update with V_D guard
    bool stepped = false;
    for (double theta = 1.0; theta > 1.0 / 64.0; theta *= 0.5) {
      Field ut = st.u;
      axpy(ut, theta, x);
      renormalize_mass(ut, c);
      IterState trial;
      trial.u = std::move(ut);
      full_eval_into(trial);
      if (branch_ == Branch::Local && !vd_ok(triple_of(trial.v))) continue;
      const double f1 = trial.grad_res * std::sqrt(c + trial.v.A);
      if (f1 < (1.0 - 0.25 * theta) * f0) {
        st = std::move(trial);
        stepped = true;
        improved = true;
        break;
      }
    }
    if (!stepped) return improved;
    if (st.grad_res < opts_.grad_tol) return true;
  }
  return improved;
}

SolveReport Engine::run(Field u0, double s_init) {
  SolveReport rep;
  rep.branch = branch_;
  rep.s_init = s_init;

  IterState st;
  st.u = std::move(u0);
  renormalize_mass(st.u, c_);
  full_eval(st);

  constexpr double kProjEps = 1e-13;
  SolveStatus status = SolveStatus::MaxIterations;
  int iter = 0;
  int stalls = 0;

  // initial projection onto the branch manifold (skipped when the input is
  // already stationary, e.g. re-runs from a converged solution)
  if (branch_ != Branch::Global && st.grad_res > opts_.grad_tol) {
    try {
      const double s = projection_s(triple_of(st.v));
      if (std::abs(s - 1.0) > kProjEps) project_state(st, s);
    } catch (const VdViolation&) {
      rep.status = SolveStatus::VdGuardFailure;
      rep.solution = std::move(st.u);
      rep.values = st.v;
      return rep;
    } catch (const RootBracketFailure&) {
    }
  }

  // Phase 1 descends with the sphere-tangential gradient under an Armijo
  // search on the fiber-projected energy, snapping back to the fiber root of
  // the measured triple each step (the dilation direction is the unstable
  // mode of the constrained flow and must not accumulate). The projection
  // inherits the resampling defect of dilate_field, which leaves a residual
  // floor well above grad_tol on coarse grids, so once progress saturates a
  // Newton-Krylov polish solves the stationarity equation directly.
  double best_grad = st.grad_res;
  int best_iter = 0;
  int polish_rounds = 0;

  for (; iter < opts_.max_iter; ++iter) {
    if (st.v.A > cap_) {
      status = (p_.mu_beta >= 0.0) ? SolveStatus::UnboundedSuspected : SolveStatus::Collapse;
      break;
    }
    if (st.grad_res < opts_.grad_tol && st.q_res < opts_.q_tol) {
      status = SolveStatus::Converged;
      break;
    }
    if (st.grad_res < 0.6 * best_grad) {
      best_grad = st.grad_res;
      best_iter = iter;
    }

    const bool saturated = (iter - best_iter > 80) || st.grad_res < 3e-3 ||
                           (st.grad_res < 30.0 * opts_.grad_tol);
    if (saturated && polish_rounds < 12) {
      ++polish_rounds;
      const bool ok = newton_polish(st, 4, 56);
      best_grad = st.grad_res;
      best_iter = iter;
      if (st.grad_res < opts_.grad_tol) {
        // stationary point of the discrete energy reached; |Q|/A now reports
        // the dilation-identity defect of the grid and cannot be iterated away
        status = (st.q_res < opts_.q_tol) ? SolveStatus::Converged : SolveStatus::MaxIterations;
        break;
      }
      if (ok) continue;
    }

    const double gnorm2 = l2_norm2(st.gt);
    double merit_cur;
    try {
      merit_cur = merit(triple_of(st.v));
    } catch (const VdViolation&) {
      status = SolveStatus::VdGuardFailure;
      break;
    }

    double tau = std::min(opts_.step0, tau_cap_);
    bool accepted = false;
    TrialData td;
    Field w;
    for (int bt = 0; bt < opts_.max_backtracks; ++bt, tau *= 0.5) {
      w = st.u;
      axpy(w, -tau, st.gt);
      eval_trial(w, td);
      if (!vd_ok(td.triple)) continue;
      double merit_t;
      try {
        merit_t = merit(td.triple);
      } catch (const VdViolation&) {
        continue;
      } catch (const RootBracketFailure&) {
        continue;
      }
      const double decrease = opts_.armijo_c1 * tau * gnorm2;
      const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(merit_cur);
      const bool ok = (merit_t <= merit_cur - decrease) ||
                      (decrease < floor && merit_t <= merit_cur + floor);
      if (ok) {
        accepted = true;
        break;
      }
    }

    if (accepted) {
      stalls = 0;
      const double r = td.scale;
      for (cplx& vv : w.values) vv *= std::sqrt(r);
      st.u = std::move(w);
      st.small = std::move(td.small);
      finish_eval(st, r);
    } else {
      ++stalls;  // merit at its floating-point floor; hand over to the polish
    }

    // snap back to the fiber root of the measured triple; tiny drifts are
    // left alone (their growth rate is far slower than the projection
    // cadence) so most iterations skip the resampling
    if (branch_ != Branch::Global) {
      try {
        const double sp = projection_s(triple_of(st.v));
        if (std::abs(sp - 1.0) > 2e-4) project_state(st, sp);
      } catch (const VdViolation&) {
        status = SolveStatus::VdGuardFailure;
        break;
      } catch (const RootBracketFailure&) {
      }
    }

    if (opts_.log_every > 0 && iter % opts_.log_every == 0)
      std::fprintf(stderr, "[%s] it=%d E=%.9g A=%.6g res=%.3e q=%.3e tau=%.2e%s\n",
                   branch_name(branch_), iter, st.v.E, st.v.A, st.grad_res, st.q_res, tau,
                   accepted ? "" : " (stall)");
  }

  if (status == SolveStatus::MaxIterations && st.grad_res < opts_.grad_tol &&
      st.q_res < opts_.q_tol)
    status = SolveStatus::Converged;

  rep.status = status;
  rep.converged = (status == SolveStatus::Converged);
  rep.values = st.v;
  rep.values.lambda = st.lambda;
  rep.lambda = st.lambda;
  rep.grad_residual = st.grad_res;
  rep.pohozaev_residual = st.q_res;
  rep.iterations = iter;
  rep.level = st.v.E;
  rep.g2_at_1 = fiber_eval(triple_of(st.v), p_, 1.0).g2;
  if (th_) {
    // flags of the solution's fiber projection: the measured triple sits a
    // resampling defect away from its root, which the stratum must not see
    Triple flag_triple = triple_of(st.v);
    try {
      const double sp = projection_s(flag_triple);
      if (std::isfinite(sp) && sp > 0.0) flag_triple = dilate_triple(flag_triple, p_, sp);
    } catch (...) {
    }
    rep.flags = membership(flag_triple, st.v.mass, p_, *th_);
    const Regime reg = regime_classify(p_);
    rep.regime_certified =
        (reg == Regime::CaseIV) && (std::abs(p_.mu_beta) < th_->mu_admissible);
  }
  rep.asymmetry = octahedral_asymmetry(st.u);
  rep.solution = std::move(st.u);
  return rep;
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::Baseline: return "baseline";
    case Branch::Global: return "global";
    default: return "local";
  }
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Collapse: return "collapse";
    case SolveStatus::UnboundedSuspected: return "unbounded_suspected";
    case SolveStatus::WitnessNotNegative: return "witness_not_negative";
    default: return "vd_guard_failure";
  }
}

SolveReport solve_hartree_baseline(double gamma, double c, const GridSpec& grid,
                                   const Field& init, const SolveOptions& opts) {
  if (!(gamma > 2.0) || gamma >= std::min(static_cast<double>(grid.dim), 4.0))
    throw std::invalid_argument("baseline: exponent must satisfy 2 < gamma < min{N,4}");
  ModelParams p;
  p.dim = grid.dim;
  p.alpha = gamma;
  p.beta = gamma;
  p.mu_beta = 0.0;
  p.mass_target = c;

  KernelPair k;
  k.alpha = build_kernel(grid, gamma, opts.scheme);
  k.beta = k.alpha;
  k.combined = k.alpha;
  k.mu_beta = 0.0;

  Engine eng(Branch::Baseline, p, grid, k, nullptr, opts);
  return eng.run(init, 1.0);
}

SolveReport solve_global(const ModelParams& p, const GridSpec& grid, const SolveOptions& opts,
                         const Thresholds* th, const Field* init) {
  validate_params(p);
  SolveReport rep;
  rep.branch = Branch::Global;
  if (p.mu_beta >= 0.0) {
    rep.status = SolveStatus::UnboundedSuspected;
    return rep;
  }
  KernelPair k = make_kernel_pair(grid, p, opts.scheme);
  Engine eng(Branch::Global, p, grid, k, th, opts);

  Field u0;
  double s_init = 1.0;
  if (init) {
    u0 = *init;
    if (!u0.grid.same_as(grid)) u0 = regrid_field(u0, grid);
  } else {
    const double sigma0 = (opts.init_sigma > 0.0) ? opts.init_sigma : grid.half_length / 10.0;
    Field gauss = sample_profile(grid, ProfileSpec::gaussian(sigma0).with_mass(p.mass_target));
    TrialData td;
    eng.eval_trial(gauss, td);
    // dilate to the most negative fiber point that the grid still resolves
    const double s_lo = std::max(1e-6, 6.0 * sigma0 / grid.half_length);
    const double s_hi = std::max(2.0 * s_lo, sigma0 / (3.0 * grid.spacing));
    double best_s = 1.0;
    double best_g = std::numeric_limits<double>::infinity();
    FiberScan scan = fiber_critical_points(td.triple, p, s_lo, s_hi);
    for (const FiberPoint& fp : scan.points)
      if (fp.kind == FiberKind::LocalMin && fp.g < best_g) {
        best_g = fp.g;
        best_s = fp.s;
      }
    for (int i = 0; i <= 256; ++i) {
      const double s = s_lo * std::pow(s_hi / s_lo, i / 256.0);
      const double g = fiber_eval(td.triple, p, s).g;
      if (g < best_g) {
        best_g = g;
        best_s = s;
      }
    }
    if (!(best_g < 0.0)) {
      rep.status = SolveStatus::WitnessNotNegative;
      return rep;
    }
    s_init = best_s;
    u0 = dilate_field(gauss, s_init);
  }
  rep = eng.run(std::move(u0), s_init);
  if (rep.converged && !(rep.values.E < 0.0)) {
    rep.status = SolveStatus::WitnessNotNegative;
    rep.converged = false;
  }
  return rep;
}

SolveReport solve_local(const ModelParams& p, const GridSpec& grid, const Field& omega0,
                        const Thresholds& th, const SolveOptions& opts, const Field* init) {
  validate_params(p);
  SolveReport rep;
  rep.branch = Branch::Local;
  if (p.mu_beta >= 0.0) {
    rep.status = SolveStatus::UnboundedSuspected;
    return rep;
  }
  KernelPair k = make_kernel_pair(grid, p, opts.scheme);
  Engine eng(Branch::Local, p, grid, k, &th, opts);

  Field u0 = init ? *init : omega0;
  if (!u0.grid.same_as(grid)) u0 = regrid_field(u0, grid);
  return eng.run(std::move(u0), 1.0);
}

Diagnostics verify_solution(const SolveReport& report, const ModelParams& p,
                            const KernelPair& kernels, const Thresholds* th) {
  Diagnostics d;
  const Field& u = report.solution;
  EvalGrad eg = evaluate_with_gradient(u, p, kernels);
  const FunctionalValues& v = eg.values;
  const double c = v.mass;
  d.lambda = lagrange_multiplier(v, p, c);
  d.lambda_positive = d.lambda > 0.0;
  Field gt = eg.gradient;
  axpy(gt, d.lambda, u);
  d.grad_residual = std::sqrt(l2_norm2(gt) / (c + v.A));
  d.pohozaev_residual = std::abs(v.Q) / std::max(v.A, 1e-300);
  const double nehari = v.A + d.lambda * c - v.B_alpha - p.mu_beta * v.B_beta;
  d.nehari_residual = std::abs(nehari) / (v.A + std::abs(d.lambda) * c);
  const double n = static_cast<double>(p.dim);
  const double t1 = 0.5 * (n - 2.0) * v.A;
  const double t2 = 0.5 * d.lambda * n * c;
  const double t3 = 0.25 * (2.0 * n - p.alpha) * v.B_alpha;
  const double t4 = 0.25 * p.mu_beta * (2.0 * n - p.beta) * v.B_beta;
  d.pohozaev_full_residual =
      std::abs(t1 + t2 - t3 - t4) /
      (std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + 1e-300);
  const double e_lambda = v.E + 0.5 * d.lambda * c;
  const double m_lambda = report.level + 0.5 * report.lambda * c;
  d.action_identity_residual = std::abs(e_lambda - m_lambda) / (std::abs(e_lambda) + 1e-300);
  if (th) d.flags = membership(triple_of(v), v.mass, p, *th);
  d.asymmetry = octahedral_asymmetry(u);
  return d;
}

double gn_quotient(double gamma, const FunctionalValues& v) {
  // B_alpha holds B_gamma when the values come from a single-exponent solve
  return v.B_alpha / (std::pow(v.A, 0.5 * gamma) * std::pow(v.mass, 0.5 * (4.0 - gamma)));
}

double unit_frequency_mass(double gamma, double lambda, double c) {
  if (!(lambda > 0.0)) throw std::invalid_argument("unit_frequency_mass: lambda must be positive");
  return std::pow(lambda, 0.5 * (gamma - 2.0)) * c;
}

double octahedral_asymmetry(const Field& u) {
  const double nrm = norm_l2(u);
  if (!(nrm > 0.0)) return 0.0;
  const std::size_t m = u.grid.points;
  const int dim = u.grid.dim;
  Field sym = make_field(u.grid);
  auto refl = [m](std::size_t j, bool flip) { return flip ? (m - j) % m : j; };

  int count = 0;
  if (dim == 3) {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& pm : perms)
      for (int mask = 0; mask < 8; ++mask) {
        ++count;
        for (std::size_t i0 = 0; i0 < m; ++i0)
          for (std::size_t i1 = 0; i1 < m; ++i1)
            for (std::size_t i2 = 0; i2 < m; ++i2) {
              const std::size_t src[3] = {i0, i1, i2};
              const std::size_t j0 = refl(src[pm[0]], mask & 1);
              const std::size_t j1 = refl(src[pm[1]], mask & 2);
              const std::size_t j2 = refl(src[pm[2]], mask & 4);
              sym.values[(i0 * m + i1) * m + i2] += u.values[(j0 * m + j1) * m + j2];
            }
      }
  } else if (dim == 2) {
    static const int perms[2][2] = {{0, 1}, {1, 0}};
    for (const auto& pm : perms)
      for (int mask = 0; mask < 4; ++mask) {
        ++count;
        for (std::size_t i0 = 0; i0 < m; ++i0)
          for (std::size_t i1 = 0; i1 < m; ++i1) {
            const std::size_t src[2] = {i0, i1};
            const std::size_t j0 = refl(src[pm[0]], mask & 1);
            const std::size_t j1 = refl(src[pm[1]], mask & 2);
            sym.values[i0 * m + i1] += u.values[j0 * m + j1];
          }
      }
  } else {
    for (int mask = 0; mask < 2; ++mask) {
      ++count;
      for (std::size_t i = 0; i < m; ++i) sym.values[i] += u.values[refl(i, mask)];
    }
  }
  double diff2 = 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < sym.values.size(); ++i)
    diff2 += std::norm(u.values[i] - sym.values[i] * inv);
  return std::sqrt(diff2 * u.grid.cell_volume()) / nrm;
}

double global_kinetic_lower_bound(const ModelParams& p, const Thresholds& th) {
  const double a = p.alpha, b = p.beta;
  return std::pow(4.0 * (a - 2.0) /
                      (std::abs(p.mu_beta) * th.S_beta * b * (b - a) *
                       std::pow(p.mass_target, 0.5 * (4.0 - b))),
                  2.0 / (b - 2.0));
}

double estimate_global_kinetic(const ModelParams& p, const Thresholds& th) {
  const double a = p.alpha, b = p.beta;
  const double balance =
      std::pow(a * th.S_alpha / (std::abs(p.mu_beta) * b * th.S_beta), 2.0 / (b - a)) *
      p.mass_target;
  return std::max(balance, 1.5 * global_kinetic_lower_bound(p, th));
}

GridSpec suggest_box(const ModelParams& p, double kinetic, std::size_t points,
                     double span_sigmas) {
  if (!(kinetic > 0.0)) throw std::invalid_argument("suggest_box: kinetic must be positive");
  const double sigma = std::sqrt(static_cast<double>(p.dim) * p.mass_target / (2.0 * kinetic));
  return make_grid(p.dim, points, span_sigmas * sigma);
}

}  // namespace nwav
