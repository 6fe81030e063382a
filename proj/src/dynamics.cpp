#include "nwav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nwav/riesz.hpp"

namespace nwav {

namespace {

// per-mode |k|^2 walker shared by the spectral passes
template <typename F>
void for_each_mode(const GridSpec& g, F&& f) {
  const fft::Shape3 s = g.shape();
  const std::vector<double>& kn = g.wavenumbers;
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < s.n0; ++i0) {
    const double k0 = (s.n0 > 1) ? kn[i0] : 0.0;
    for (std::size_t i1 = 0; i1 < s.n1; ++i1) {
      const double k1 = (s.n1 > 1) ? kn[i1] : 0.0;
      for (std::size_t i2 = 0; i2 < s.n2; ++i2) f(idx++, k0, k1, kn[i2]);
    }
  }
}

// interaction potential V = (K_alpha * |psi|^2) + mu (K_beta * |psi|^2)
Field interaction_potential(const Field& psi, const KernelPair& k) {
  static thread_local ConvolutionScratch ws;
  density_spectrum(k.combined, psi, ws);
  return potential_from_scratch(k.combined, ws);
}

void phase_kick(Field& psi, const Field& pot, double dt_half) {
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    const double phase = dt_half * pot.values[i].real();
    psi.values[i] *= cplx(std::cos(phase), std::sin(phase));
  }
}

void kinetic_step(Field& psi, double dt) {
  const fft::Shape3 s = psi.grid.shape();
  fft::forward3(psi.values.data(), s);
  for_each_mode(psi.grid, [&](std::size_t idx, double k0, double k1, double k2) {
    const double ksq = k0 * k0 + k1 * k1 + k2 * k2;
    const double phase = -dt * ksq;
    psi.values[idx] *= cplx(std::cos(phase), std::sin(phase));
  });
  fft::inverse3(psi.values.data(), s);
}

bool has_nan(const Field& f) {
  for (const cplx& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return true;
  return false;
}

struct Monitors {
  double mass = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  std::array<double, 3> mom{0.0, 0.0, 0.0};
  double l4 = 0.0;
};

Monitors measure(const Field& psi, const ModelParams& p, const KernelPair& k) {
  Monitors m;
  m.mass = mass(psi);
  const fft::Shape3 s = psi.grid.shape();
  std::vector<cplx> spec(psi.values);
  fft::forward3(spec.data(), s);
  double acc = 0.0;
  std::array<double, 3> mom{0.0, 0.0, 0.0};
  const double knyq_m = -std::numbers::pi / psi.grid.spacing;
  auto dk_m = [knyq_m](double k) { return k == knyq_m ? 0.0 : k; };
  for_each_mode(psi.grid, [&](std::size_t idx, double k0, double k1, double k2) {
    const double n = std::norm(spec[idx]);
    acc += (k0 * k0 + k1 * k1 + k2 * k2) * n;
    mom[0] += dk_m(k0) * n;
    mom[1] += dk_m(k1) * n;
    mom[2] += dk_m(k2) * n;
  });
  const double w = psi.grid.cell_volume() / static_cast<double>(s.size());
  m.kinetic = acc * w;
  // P = Im <psi, grad psi>; the 1-d layout packs the used axes last
  const int shift = 3 - psi.grid.dim;
  for (int d = 0; d < psi.grid.dim; ++d) m.mom[d] = mom[d + shift] * w;

  static thread_local ConvolutionScratch ws;
  density_spectrum(k.alpha, psi, ws);
  const auto [ba, bb] = b_pair_from_scratch(k.alpha, k.beta, ws);
  m.energy = 0.5 * m.kinetic - 0.25 * ba - 0.25 * p.mu_beta * bb;

  double l4 = 0.0;
  for (const cplx& v : psi.values) l4 += std::norm(v) * std::norm(v);
  m.l4 = std::pow(l4 * psi.grid.cell_volume(), 0.25);
  return m;
}

}  // namespace

Field strang_step(const Field& psi, double dt, const ModelParams& p, const KernelPair& k) {
  if (!(dt > 0.0)) throw std::invalid_argument("strang_step: dt must be positive");
  Field out = psi;
  Field pot = interaction_potential(out, k);
  phase_kick(out, pot, 0.5 * dt);
  kinetic_step(out, dt);
  pot = interaction_potential(out, k);
  phase_kick(out, pot, 0.5 * dt);
  return out;
}

EvolutionTrace evolve(const Field& psi0, double t_final, double dt, const ModelParams& p,
                      const KernelPair& k, const EvolveOptions& opts) {
  if (!(t_final > 0.0) || !(dt > 0.0)) throw std::invalid_argument("evolve: need positive T, dt");
  const long steps = std::lround(t_final / dt);
  const int cadence = std::max(1, opts.monitor_every);

  EvolutionTrace trace;
  Field psi = psi0;

  auto record = [&](double t) {
    Monitors m = measure(psi, p, k);
    trace.times.push_back(t);
    trace.mass.push_back(m.mass);
    trace.energy.push_back(m.energy);
    trace.kinetic.push_back(m.kinetic);
    trace.momentum.push_back(m.mom);
    trace.l4norm.push_back(m.l4);
    if (opts.orbit_reference) trace.orbit_distance.push_back(orbit_distance(psi, *opts.orbit_reference));
  };
  record(0.0);

  // consecutive half-phases merge exactly: the phase substep preserves |psi|,
  // so V is unchanged across the join and e^{i dt V/2} e^{i dt V/2} = e^{i dt V}
  Field pot = interaction_potential(psi, k);
  phase_kick(psi, pot, 0.5 * dt);
  for (long n = 1; n <= steps; ++n) {
    kinetic_step(psi, dt);
    if (has_nan(psi)) {
      trace.aborted_nan = true;
      break;
    }
    const bool boundary = (n % cadence == 0) || n == steps;
    pot = interaction_potential(psi, k);
    phase_kick(psi, pot, boundary ? 0.5 * dt : dt);
    if (boundary) {
      record(static_cast<double>(n) * dt);
      if (n < steps) {
        pot = interaction_potential(psi, k);
        phase_kick(psi, pot, 0.5 * dt);
      }
    }
  }
  return trace;
}

std::array<double, 3> momentum(const Field& psi) {
  const fft::Shape3 s = psi.grid.shape();
  std::vector<cplx> spec(psi.values);
  fft::forward3(spec.data(), s);
  // first-derivative convention: the unpaired Nyquist mode contributes zero
  const double knyq = -std::numbers::pi / psi.grid.spacing;
  auto dk = [knyq](double k) { return k == knyq ? 0.0 : k; };
  std::array<double, 3> mom{0.0, 0.0, 0.0};
  for_each_mode(psi.grid, [&](std::size_t idx, double k0, double k1, double k2) {
    const double n = std::norm(spec[idx]);
    mom[0] += dk(k0) * n;
    mom[1] += dk(k1) * n;
    mom[2] += dk(k2) * n;
  });
  const double w = psi.grid.cell_volume() / static_cast<double>(s.size());
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const int shift = 3 - psi.grid.dim;
  for (int d = 0; d < psi.grid.dim; ++d) out[d] = mom[d + shift] * w;
  return out;
}

double h1_norm(const Field& f) { return std::sqrt(mass(f) + kinetic_energy(f)); }

double orbit_distance(const Field& psi, const Field& u) {
  if (!psi.grid.same_as(u.grid)) throw std::invalid_argument("orbit_distance: grid mismatch");
  const fft::Shape3 s = psi.grid.shape();
  const std::size_t n = psi.values.size();

  // C(a) = <psi(.-a), u>_{H1} for all grid shifts via one correlation
  std::vector<cplx> ps(psi.values), us(u.values);
  fft::forward3(ps.data(), s);
  fft::forward3(us.data(), s);
  std::vector<cplx> corr(n);
  for_each_mode(psi.grid, [&](std::size_t idx, double k0, double k1, double k2) {
    const double w = 1.0 + k0 * k0 + k1 * k1 + k2 * k2;
    corr[idx] = std::conj(ps[idx]) * us[idx] * w;
  });
  fft::inverse3(corr.data(), s);

  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::abs(corr[i]);
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  // decode the flat index into per-axis shifts
  std::array<long, 3> shift{0, 0, 0};
  {
    std::size_t rest = best;
    std::size_t dims[3] = {s.n0, s.n1, s.n2};
    long idx3[3];
    for (int d = 2; d >= 0; --d) {
      idx3[d] = static_cast<long>(rest % dims[d]);
      rest /= dims[d];
    }
    const int off = 3 - psi.grid.dim;
    for (int d = 0; d < psi.grid.dim; ++d) shift[d] = idx3[d + off];
  }
  const double theta = std::arg(corr[best]);

  // aligned difference, evaluated directly to avoid cancellation
  Field moved = roll_field(psi, shift);
  const cplx rot(std::cos(theta), std::sin(theta));
  for (std::size_t i = 0; i < n; ++i) moved.values[i] = rot * moved.values[i] - u.values[i];
  return h1_norm(moved);
}

Field seeded_bandlimited_field(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const std::size_t m = grid.points;
  const std::size_t kcut = std::max<std::size_t>(2, m / 8);
  const fft::Shape3 s = grid.shape();
  std::vector<cplx> spec(grid.size(), cplx(0.0, 0.0));
  auto mode_ok = [&](std::size_t t) {
    const long j = (t < m / 2) ? static_cast<long>(t) : static_cast<long>(t) - static_cast<long>(m);
    return static_cast<std::size_t>(std::labs(j)) <= kcut;
  };
  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < s.n0; ++i0)
    for (std::size_t i1 = 0; i1 < s.n1; ++i1)
      for (std::size_t i2 = 0; i2 < s.n2; ++i2) {
        const bool ok = ((s.n0 == 1) || mode_ok(i0)) && ((s.n1 == 1) || mode_ok(i1)) && mode_ok(i2);
        if (ok) spec[idx] = cplx(dist(rng), dist(rng));
        ++idx;
      }
  fft::inverse3(spec.data(), s);
  Field f;
  f.grid = grid;
  f.values = std::move(spec);
  const double nrm = h1_norm(f);
  for (cplx& v : f.values) v /= nrm;
  return f;
}

StabilityReport stability_experiment(const Field& u, const ModelParams& p, const KernelPair& k,
                                     double delta0, double t_final, double dt,
                                     const StabilityOptions& opts) {
  if (delta0 < 0.0) throw std::invalid_argument("stability_experiment: delta0 must be >= 0");
  const double scale = h1_norm(u);
  Field psi0 = u;
  if (delta0 > 0.0) {
    Field noise = seeded_bandlimited_field(u.grid, opts.seed);
    for (std::size_t i = 0; i < psi0.values.size(); ++i)
      psi0.values[i] += delta0 * scale * noise.values[i];
  }
  const double c = mass(u);
  const double r = std::sqrt(c / mass(psi0));
  for (cplx& v : psi0.values) v *= r;

  StabilityReport report;
  report.perturbation_size = orbit_distance(psi0, u) / scale;

  EvolveOptions eopts;
  eopts.monitor_every = opts.monitor_every;
  eopts.orbit_reference = &u;
  report.trace = evolve(psi0, t_final, dt, p, k, eopts);
  double worst = 0.0;
  for (double d : report.trace.orbit_distance) worst = std::max(worst, d / scale);
  report.max_distance = worst;
  report.stable_flag = worst < opts.distance_factor * std::max(report.perturbation_size, 1e-300);
  return report;
}

}  // namespace nwav
