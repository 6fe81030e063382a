#include "nwav/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace nwav {

namespace {

double exponent_cap(int dim) { return std::min(static_cast<double>(dim), 4.0); }

// |k|^2 of mode (i0,i1,i2) for a cube grid.
struct ModeWeights {
  const GridSpec& g;
  double ksq(std::size_t i0, std::size_t i1, std::size_t i2) const {
    const fft::Shape3 s = g.shape();
    double acc = 0.0;
    if (s.n0 > 1) acc += g.wavenumbers[i0] * g.wavenumbers[i0];
    if (s.n1 > 1) acc += g.wavenumbers[i1] * g.wavenumbers[i1];
    acc += g.wavenumbers[i2] * g.wavenumbers[i2];
    return acc;
  }
};

void check_pair(const Field& u, const KernelPair& k) {
  if (!u.grid.same_as(k.alpha.grid)) throw std::invalid_argument("functional: kernel/grid mismatch");
}

}  // namespace

void validate_params(const ModelParams& p) {
  const double cap = exponent_cap(p.dim);
  if (p.dim < 1) throw std::invalid_argument("params: dim must be >= 1");
  if (!(p.alpha > 0.0) || !(p.alpha < cap))
    throw std::invalid_argument("params: alpha outside (0, min{N,4})");
  if (!(p.beta > 0.0) || !(p.beta < cap))
    throw std::invalid_argument("params: beta outside (0, min{N,4})");
  if (p.alpha == p.beta) throw std::invalid_argument("params: alpha and beta must differ");
  if (!(p.mass_target > 0.0)) throw std::invalid_argument("params: mass target must be positive");
}

Regime regime_classify(const ModelParams& p) {
  const double a = p.alpha, b = p.beta, mu = p.mu_beta;
  const double cap = exponent_cap(p.dim);
  if (a <= 0.0 || b <= 0.0 || a >= cap || b >= cap || a == b || mu == 0.0)
    return Regime::Unclassified;
  if ((mu > 0.0 && a < b && b <= 2.0) || (mu < 0.0 && b < a && a < 2.0)) return Regime::CaseI;
  if (mu > 0.0 && a < 2.0 && 2.0 < b) return Regime::CaseII;
  if ((mu > 0.0 && 2.0 <= a && a < b) || (mu < 0.0 && a > std::max(b, 2.0))) return Regime::CaseIII;
  if (mu < 0.0 && 2.0 < a && a < b) return Regime::CaseIV;
  return Regime::Unclassified;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::CaseI: return "I";
    case Regime::CaseII: return "II";
    case Regime::CaseIII: return "III";
    case Regime::CaseIV: return "IV";
    default: return "Unclassified";
  }
}

KernelPair make_kernel_pair(const GridSpec& grid, const ModelParams& p, KernelScheme scheme) {
  KernelPair k;
  k.alpha = build_kernel(grid, p.alpha, scheme);
  k.beta = build_kernel(grid, p.beta, scheme);
  k.combined = combine_kernels(k.alpha, p.mu_beta, k.beta);
  k.mu_beta = p.mu_beta;
  return k;
}

double kinetic_energy(const Field& u) {
  const fft::Shape3 s = u.grid.shape();
  std::vector<cplx> spec(u.values);
  fft::forward3(spec.data(), s);
  ModeWeights mw{u.grid};
  double acc = 0.0;
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < s.n0; ++i0)
    for (std::size_t i1 = 0; i1 < s.n1; ++i1)
      for (std::size_t i2 = 0; i2 < s.n2; ++i2)
        acc += mw.ksq(i0, i1, i2) * std::norm(spec[idx++]);
  return acc * u.grid.cell_volume() / static_cast<double>(s.size());
}

FunctionalValues evaluate(const Field& u, const ModelParams& p, const KernelPair& k) {
  check_pair(u, k);
  FunctionalValues v;
  v.A = kinetic_energy(u);
  const auto [ba, bb] = b_pair(k.alpha, k.beta, u);
  v.B_alpha = ba;
  v.B_beta = bb;
  v.mass = mass(u);
  v.E = 0.5 * v.A - 0.25 * v.B_alpha - 0.25 * p.mu_beta * v.B_beta;
  v.Q = v.A - 0.25 * p.alpha * v.B_alpha - 0.25 * p.mu_beta * p.beta * v.B_beta;
  return v;
}

EvalGrad evaluate_with_gradient(const Field& u, const ModelParams& p, const KernelPair& k) {
  check_pair(u, k);
  EvalGrad out;
  FunctionalValues& v = out.values;
  const fft::Shape3 s = u.grid.shape();
  const std::size_t n = u.values.size();

  // one small transform gives A and -Lap u
  std::vector<cplx> spec(u.values);
  fft::forward3(spec.data(), s);
  ModeWeights mw{u.grid};
  double acc = 0.0;
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < s.n0; ++i0)
    for (std::size_t i1 = 0; i1 < s.n1; ++i1)
      for (std::size_t i2 = 0; i2 < s.n2; ++i2) {
        const double ksq = mw.ksq(i0, i1, i2);
        acc += ksq * std::norm(spec[idx]);
        spec[idx] *= ksq;
        ++idx;
      }
  v.A = acc * u.grid.cell_volume() / static_cast<double>(s.size());
  fft::inverse3(spec.data(), s);  // spec now holds -Lap u

  // one padded transform of |u|^2 gives both B values; the combined spectrum
  // gives the full interaction potential in one inverse
  static thread_local ConvolutionScratch ws;
  density_spectrum(k.alpha, u, ws);
  const auto [ba, bb] = b_pair_from_scratch(k.alpha, k.beta, ws);
  v.B_alpha = ba;
  v.B_beta = bb;
  Field vpot = potential_from_scratch(k.combined, ws);

  v.mass = mass(u);
  v.E = 0.5 * v.A - 0.25 * v.B_alpha - 0.25 * p.mu_beta * v.B_beta;
  v.Q = v.A - 0.25 * p.alpha * v.B_alpha - 0.25 * p.mu_beta * p.beta * v.B_beta;

  out.gradient = make_field(u.grid);
  for (std::size_t i = 0; i < n; ++i)
    out.gradient.values[i] = spec[i] - vpot.values[i].real() * u.values[i];
  return out;
}

Field l2_gradient(const Field& u, const ModelParams& p, const KernelPair& k) {
  return evaluate_with_gradient(u, p, k).gradient;
}

double lagrange_multiplier(const FunctionalValues& v, const ModelParams& p, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("lagrange_multiplier: mass must be positive");
  return (v.B_alpha - v.A + p.mu_beta * v.B_beta) / c;
}

double gn_constant(double gamma, int dim, double q_gamma_mass) {
  if (!(gamma > 0.0) || gamma >= exponent_cap(dim))
    throw std::invalid_argument("gn_constant: gamma outside (0, min{N,4})");
  if (!(q_gamma_mass > 0.0))
    throw std::invalid_argument("gn_constant: ground-state mass must be positive");
  return std::pow((4.0 - gamma) / gamma, 0.5 * gamma) * 4.0 / ((4.0 - gamma) * q_gamma_mass);
}

Thresholds thresholds(const ModelParams& p, double m_infty, double S_alpha, double S_beta) {
  validate_params(p);
  const double a = p.alpha, b = p.beta, c = p.mass_target;
  if (!(2.0 < a && a < b))
    throw std::invalid_argument("thresholds: parameters outside Case iv (need 2 < alpha < beta)");
  if (!(p.mu_beta < 0.0))
    throw std::invalid_argument("thresholds: parameters outside Case iv (need mu_beta < 0)");
  if (!(m_infty > 0.0) || !(S_beta > 0.0) || !(S_alpha > 0.0))
    throw std::invalid_argument("thresholds: need positive m_infty and GN constants");

  Thresholds t;
  t.m_infty = m_infty;
  t.S_alpha = S_alpha;
  t.S_beta = S_beta;
  const double cpow = std::pow(c, 0.5 * (4.0 - b));
  t.Gamma = (2.0 * (b - 2.0) / (b - a)) *
            std::pow(std::abs(p.mu_beta) * b * (b - a) * S_beta * cpow / (4.0 * (a - 2.0)),
                     (a - 2.0) / (b - 2.0));
  t.mu_star = (4.0 * (a - 2.0) / (a * (b - 2.0) * S_beta * cpow)) *
              std::pow((b - a) / (b - 2.0), (b - 2.0) / (a - 2.0)) *
              std::pow(b * (a - 2.0) * (a - 2.0) / (2.0 * a * a * (b - 2.0) * m_infty),
                       0.5 * (b - 2.0));
  const double window = (a * (b - 2.0) / (b * (b - a))) *
                        std::pow(2.0 / a, (b - 2.0) / (a - 2.0)) *
                        std::pow(a * (b - 2.0) / (b * (a - 2.0)), 0.5 * (b - 2.0));
  t.mu_admissible = std::min(t.mu_star, window * t.mu_star);
  return t;
}

double scale_ground_energy(double m_ref, double c_ref, double c, double alpha) {
  if (!(m_ref > 0.0) || !(c_ref > 0.0) || !(c > 0.0))
    throw std::invalid_argument("scale_ground_energy: positive inputs required");
  return m_ref * std::pow(c / c_ref, -(4.0 - alpha) / (alpha - 2.0));
}

}  // namespace nwav
