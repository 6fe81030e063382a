#include "nwav/sweep.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace nwav {

namespace {

ModelParams with_axis(const ModelParams& base, const std::string& axis, double value) {
  ModelParams p = base;
  if (axis == "mu_beta") p.mu_beta = value;
  else if (axis == "mass") p.mass_target = value;
  else if (axis == "alpha") p.alpha = value;
  else if (axis == "beta") p.beta = value;
  else throw std::invalid_argument("sweep: unknown axis " + axis);
  return p;
}

int worker_cap() {
  if (const char* env = std::getenv("NWAV_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepContext& ctx) {
  if (spec.values.empty()) throw std::invalid_argument("sweep: empty value list");
  if (spec.run_local && !ctx.omega0) throw std::invalid_argument("sweep: local branch needs the baseline state");

  std::vector<SweepRow> rows(spec.values.size());
  auto run_one = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = spec.values[i];
    try {
      ModelParams p = with_axis(ctx.base, spec.axis, spec.values[i]);
      validate_params(p);
      // rescale the reference ground-state energy to this row's mass
      const double m_inf =
          scale_ground_energy(ctx.thresholds.m_infty, ctx.baseline_mass_ref, p.mass_target, p.alpha);
      Thresholds th = thresholds(p, m_inf, ctx.thresholds.S_alpha, ctx.thresholds.S_beta);

      if (spec.run_global) {
        const double a_est = estimate_global_kinetic(p, th);
        GridSpec box = suggest_box(p, a_est, spec.points, 8.5);
        SolveReport rg = solve_global(p, box, ctx.solver, &th);
        // re-box once if the converged width missed the target window
        const double sigma = std::sqrt(0.5 * p.dim * p.mass_target / rg.values.A);
        const double ratio = sigma / box.spacing;
        if (rg.converged && (ratio < 3.4 || ratio > 6.0)) {
          box = suggest_box(p, rg.values.A, spec.points, 8.5);
          SolveReport rg2 = solve_global(p, box, ctx.solver, &th, &rg.solution);
          if (rg2.converged) rg = std::move(rg2);
        }
        row.global_ok = rg.converged;
        row.E_global = rg.values.E;
        row.A_global = rg.values.A;
        row.lambda_global = rg.lambda;
        if (!rg.converged) row.note += std::string("global:") + status_name(rg.status) + " ";
      }
      if (spec.run_local) {
        const double sigma0 = std::sqrt(0.5 * p.dim * p.mass_target / ctx.thresholds.m_infty /
                                        (2.0 * p.alpha / (p.alpha - 2.0)));
        GridSpec box = make_grid(p.dim, spec.points, 9.5 * std::max(sigma0, 0.3));
        SolveReport rl = solve_local(p, box, *ctx.omega0, th, ctx.solver);
        row.local_ok = rl.converged;
        row.E_local = rl.values.E;
        row.A_local = rl.values.A;
        row.lambda_local = rl.lambda;
        if (!rl.converged) row.note += std::string("local:") + status_name(rl.status) + " ";
      }
    } catch (const std::exception& ex) {
      row.note += std::string("error: ") + ex.what();
    }
  };

  const int workers = std::max(1, std::min<int>(spec.max_workers, worker_cap()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mtx;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mtx);
            if (next >= rows.size()) return;
            i = next++;
          }
          run_one(i);
        }
      });
    for (std::thread& t : pool) t.join();
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::string& axis,
                     const std::vector<SweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << axis << ",E_global,E_local,A_global,A_local,lambda_global,lambda_local,"
     << "global_converged,local_converged,note\n";
  os.precision(17);
  for (const SweepRow& r : rows) {
    os << r.value << "," << r.E_global << "," << r.E_local << "," << r.A_global << ","
       << r.A_local << "," << r.lambda_global << "," << r.lambda_local << ","
       << (r.global_ok ? 1 : 0) << "," << (r.local_ok ? 1 : 0) << "," << r.note << "\n";
  }
}

}  // namespace nwav
