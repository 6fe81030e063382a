// Command-line driver: baseline -> thresholds -> solves -> dynamics, plus
// classification, fibering scans and parameter sweeps. Each command prints a
// one-line JSON summary on stdout and writes its artifacts under the output
// directory. Exit codes: 0 success, 1 validation/usage error,
// 2 non-convergence, 3 I/O error.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nwav/dynamics.hpp"
#include "nwav/fibering.hpp"
#include "nwav/io.hpp"
#include "nwav/solver.hpp"
#include "nwav/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nwav;

namespace {

struct RunConfig {
  ModelParams model;
  int grid_dim = 3;
  std::size_t grid_points = 64;
  double grid_half_length = 12.0;
  SolveOptions solver;
  double t_max = 10.0;
  double dt = 1e-3;
  int monitor_cadence = 10;
  double delta0 = 1e-2;
  std::string output_dir = "out";
  std::uint64_t seed = 20240817;
};

void apply_json(RunConfig& cfg, const json& j) {
  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.contains("dim")) cfg.model.dim = m["dim"];
    if (m.contains("alpha")) cfg.model.alpha = m["alpha"];
    if (m.contains("beta")) cfg.model.beta = m["beta"];
    if (m.contains("mu_beta")) cfg.model.mu_beta = m["mu_beta"];
    if (m.contains("mass_target")) cfg.model.mass_target = m["mass_target"];
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.contains("dim")) cfg.grid_dim = g["dim"];
    if (g.contains("points")) cfg.grid_points = g["points"];
    if (g.contains("half_length")) cfg.grid_half_length = g["half_length"];
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (s.contains("max_iter")) cfg.solver.max_iter = s["max_iter"];
    if (s.contains("grad_tol")) cfg.solver.grad_tol = s["grad_tol"];
    if (s.contains("q_tol")) cfg.solver.q_tol = s["q_tol"];
    if (s.contains("step0")) cfg.solver.step0 = s["step0"];
  }
  if (j.contains("dynamics")) {
    const json& d = j["dynamics"];
    if (d.contains("t_max")) cfg.t_max = d["t_max"];
    if (d.contains("dt")) cfg.dt = d["dt"];
    if (d.contains("monitor_cadence")) cfg.monitor_cadence = d["monitor_cadence"];
    if (d.contains("delta0")) cfg.delta0 = d["delta0"];
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"];
  if (j.contains("seed")) cfg.seed = j["seed"];
}

GridSpec grid_of(const RunConfig& cfg) {
  return make_grid(cfg.grid_dim, cfg.grid_points, cfg.grid_half_length);
}

void emit(const json& j) { std::cout << j.dump() << std::endl; }

// thresholds from the persisted baseline records, rescaled to the model mass
Thresholds thresholds_from_store(const RunConfig& cfg, const io::BaselineStore& store,
                                 io::BaselineRecord* alpha_rec_out = nullptr) {
  const std::uint64_t fp = grid_of(cfg).fingerprint();
  auto rec_a = store.get(cfg.model.alpha, cfg.model.mass_target, fp);
  auto rec_b = store.get(cfg.model.beta, cfg.model.mass_target, fp);
  double ref_mass = cfg.model.mass_target;
  if (!rec_a) {
    // fall back to a record at any mass and rescale its ground-state energy
    for (double m : {1.0}) {
      rec_a = store.get(cfg.model.alpha, m, fp);
      rec_b = store.get(cfg.model.beta, m, fp);
      ref_mass = m;
    }
  }
  if (!rec_a || !rec_b) {
    throw std::runtime_error(
        "missing baseline record " +
        io::BaselineStore::key(cfg.model.alpha, cfg.model.mass_target, fp) + " (or beta twin); run `nwav baseline` first");
  }
  const double m_inf =
      scale_ground_energy(rec_a->m_infty, ref_mass, cfg.model.mass_target, cfg.model.alpha);
  if (alpha_rec_out) *alpha_rec_out = *rec_a;
  return thresholds(cfg.model, m_inf, rec_a->gn, rec_b->gn);
}

int cmd_baseline(const RunConfig& cfg) {
  GridSpec g = grid_of(cfg);
  fs::create_directories(cfg.output_dir);
  io::BaselineStore store(cfg.output_dir);
  json summary;
  SolveOptions opts = cfg.solver;
  Field init = sample_profile(
      g, ProfileSpec::gaussian(cfg.solver.init_sigma > 0 ? cfg.solver.init_sigma : g.half_length / 10.0)
             .with_mass(cfg.model.mass_target));
  bool all_ok = true;
  for (double gamma : {cfg.model.alpha, cfg.model.beta}) {
    SolveReport rep = solve_hartree_baseline(gamma, cfg.model.mass_target, g, init, opts);
    all_ok = all_ok && rep.converged;
    std::ostringstream name;
    name << "omega0_gamma" << gamma << ".nwav";
    const fs::path field_path = fs::path(cfg.output_dir) / name.str();
    io::write_field(field_path, rep.solution, io::FieldDType::Real64);
    io::BaselineRecord rec;
    rec.gamma = gamma;
    rec.mass = cfg.model.mass_target;
    rec.grid_fingerprint = g.fingerprint();
    rec.m_infty = rep.values.E;
    rec.gn = gn_quotient(gamma, rep.values);
    rec.lambda = rep.lambda;
    rec.kinetic = rep.values.A;
    rec.omega_mass = rep.values.mass;
    rec.grad_residual = rep.grad_residual;
    rec.field_path = field_path.string();
    store.put(rec);
    summary[gamma == cfg.model.alpha ? "alpha" : "beta"] = {
        {"gamma", gamma},       {"m_infty", rec.m_infty},   {"gn", rec.gn},
        {"lambda", rec.lambda}, {"status", status_name(rep.status)},
        {"grad_residual", rep.grad_residual}};
  }
  emit(summary);
  return all_ok ? 0 : 2;
}

int cmd_solve(const RunConfig& cfg, Branch branch) {
  fs::create_directories(cfg.output_dir);
  io::BaselineStore store(cfg.output_dir);
  io::BaselineRecord rec_a;
  Thresholds th = thresholds_from_store(cfg, store, &rec_a);
  GridSpec g = grid_of(cfg);
  SolveReport rep;
  if (branch == Branch::Global) {
    rep = solve_global(cfg.model, g, cfg.solver, &th);
  } else {
    Field omega0 = io::read_field(rec_a.field_path);
    rep = solve_local(cfg.model, g, omega0, th, cfg.solver);
  }
  const char* tag = branch == Branch::Global ? "global" : "local";
  const fs::path field_path = fs::path(cfg.output_dir) / (std::string(tag) + "_solution.nwav");
  io::write_field(field_path, rep.solution, io::FieldDType::Real64);
  io::write_report(fs::path(cfg.output_dir) / (std::string(tag) + "_report.json"), rep,
                   cfg.model, field_path.string());
  json j = io::report_to_json(rep, cfg.model, field_path.string());
  j["thresholds"] = {{"mu_star", th.mu_star},
                     {"mu_admissible", th.mu_admissible},
                     {"Gamma", th.Gamma},
                     {"m_infty", th.m_infty}};
  emit(j);
  return rep.converged ? 0 : 2;
}

int cmd_classify(const RunConfig& cfg) {
  json j;
  j["case"] = regime_name(regime_classify(cfg.model));
  j["alpha"] = cfg.model.alpha;
  j["beta"] = cfg.model.beta;
  j["mu_beta"] = cfg.model.mu_beta;
  emit(j);
  return 0;
}

int cmd_fibering_scan(const RunConfig& cfg, const std::string& triple_arg) {
  Triple t;
  if (std::sscanf(triple_arg.c_str(), "%lf,%lf,%lf", &t.A, &t.B_alpha, &t.B_beta) != 3)
    throw std::invalid_argument("--triple expects A,B_alpha,B_beta");
  fs::create_directories(cfg.output_dir);

  // widen the window so both branch roots are covered for small |mu_beta|
  double s_lo = 1e-3, s_hi = 1e3;
  FiberScan probe = fiber_critical_points(t, cfg.model, 1e-9, 1e12);
  for (const FiberPoint& fp : probe.points) {
    s_lo = std::min(s_lo, fp.s / 10.0);
    s_hi = std::max(s_hi, fp.s * 10.0);
  }
  const fs::path csv = fs::path(cfg.output_dir) / "fibering_scan.csv";
  std::ofstream os(csv);
  os.precision(17);
  os << "s,g,g1,g2\n";
  for (int i = 0; i <= 400; ++i) {
    const double s = s_lo * std::pow(s_hi / s_lo, i / 400.0);
    FiberPoint fp = fiber_eval(t, cfg.model, s);
    os << s << "," << fp.g << "," << fp.g1 << "," << fp.g2 << "\n";
  }
  os << "# critical points\n";
  os << "# s,g,g1,g2,kind\n";
  json jpts = json::array();
  for (const FiberPoint& fp : probe.points) {
    const char* kind = fp.kind == FiberKind::LocalMax   ? "local_max"
                       : fp.kind == FiberKind::LocalMin ? "local_min"
                                                        : "inflection";
    os << "# " << fp.s << "," << fp.g << "," << fp.g1 << "," << fp.g2 << "," << kind << "\n";
    jpts.push_back({{"s", fp.s}, {"g", fp.g}, {"kind", kind}});
  }
  json j;
  j["critical_points"] = jpts;
  j["tangency_warning"] = probe.tangency_warning;
  j["csv"] = csv.string();
  emit(j);
  return 0;
}

int cmd_evolve(const RunConfig& cfg, const std::string& input) {
  if (input.empty()) throw std::invalid_argument("evolve needs --in FIELD_FILE");
  Field psi0 = io::read_field(input);
  KernelPair k = make_kernel_pair(psi0.grid, cfg.model);
  fs::create_directories(cfg.output_dir);
  EvolveOptions opts;
  opts.monitor_every = cfg.monitor_cadence;
  EvolutionTrace trace = evolve(psi0, cfg.t_max, cfg.dt, cfg.model, k, opts);
  const fs::path csv = fs::path(cfg.output_dir) / "trace.csv";
  io::write_trace(csv, trace, psi0.grid.dim);
  json j;
  j["steps"] = trace.times.size();
  j["aborted_nan"] = trace.aborted_nan;
  if (!trace.times.empty()) {
    j["t_final"] = trace.times.back();
    j["mass_drift"] = std::abs(trace.mass.back() - trace.mass.front()) /
                      std::max(trace.mass.front(), 1e-300);
    j["energy_drift"] = std::abs(trace.energy.back() - trace.energy.front()) /
                        std::max(std::abs(trace.energy.front()), 1e-300);
  }
  j["trace"] = csv.string();
  emit(j);
  return trace.aborted_nan ? 2 : 0;
}

int cmd_stability(const RunConfig& cfg, const std::string& input) {
  if (input.empty()) throw std::invalid_argument("stability needs --in FIELD_FILE");
  Field u = io::read_field(input);
  KernelPair k = make_kernel_pair(u.grid, cfg.model);
  fs::create_directories(cfg.output_dir);
  StabilityOptions opts;
  opts.monitor_every = cfg.monitor_cadence;
  opts.seed = cfg.seed;
  StabilityReport rep = stability_experiment(u, cfg.model, k, cfg.delta0, cfg.t_max, cfg.dt, opts);
  const fs::path csv = fs::path(cfg.output_dir) / "stability_trace.csv";
  io::write_trace(csv, rep.trace, u.grid.dim);
  json j;
  j["perturbation_size"] = rep.perturbation_size;
  j["max_distance"] = rep.max_distance;
  j["stable_flag"] = rep.stable_flag;
  j["aborted_nan"] = rep.trace.aborted_nan;
  j["trace"] = csv.string();
  emit(j);
  return rep.trace.aborted_nan ? 2 : 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::string& values_arg,
              bool with_local) {
  std::vector<double> values;
  std::stringstream ss(values_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  if (values.empty()) throw std::invalid_argument("sweep needs --values v1,v2,...");

  fs::create_directories(cfg.output_dir);
  io::BaselineStore store(cfg.output_dir);
  io::BaselineRecord rec_a;
  Thresholds th = thresholds_from_store(cfg, store, &rec_a);

  SweepSpec spec;
  spec.axis = axis;
  spec.values = values;
  spec.run_global = true;
  spec.run_local = with_local;
  spec.points = cfg.grid_points;
  spec.max_workers = 64;  // capped by NWAV_THREADS / hardware

  SweepContext ctx;
  ctx.base = cfg.model;
  ctx.thresholds = th;
  ctx.baseline_mass_ref = cfg.model.mass_target;
  ctx.solver = cfg.solver;
  Field omega0;
  if (with_local) {
    omega0 = io::read_field(rec_a.field_path);
    ctx.omega0 = &omega0;
  }
  std::vector<SweepRow> rows = run_sweep(spec, ctx);
  const fs::path csv = fs::path(cfg.output_dir) / ("sweep_" + axis + ".csv");
  write_sweep_csv(csv, axis, rows);
  bool any_failed = false;
  json jrows = json::array();
  for (const SweepRow& r : rows) {
    if ((spec.run_global && !r.global_ok) || (spec.run_local && !r.local_ok)) any_failed = true;
    jrows.push_back({{"value", r.value},
                     {"E_global", r.E_global},
                     {"A_global", r.A_global},
                     {"global_ok", r.global_ok}});
  }
  json j;
  j["axis"] = axis;
  j["rows"] = jrows;
  j["csv"] = csv.string();
  emit(j);
  return any_failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver for normalized standing waves with competing Riesz potentials"};
  app.require_subcommand(1);

  std::string config_path, in_path, triple_arg, axis, values_arg;
  bool with_local = false;
  RunConfig cfg;

  // flags shared by all subcommands
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--alpha", cfg.model.alpha, "first interaction exponent");
    sub->add_option("--beta", cfg.model.beta, "second interaction exponent");
    sub->add_option("--mu-beta", cfg.model.mu_beta, "coupling of the beta term");
    sub->add_option("--mass", cfg.model.mass_target, "prescribed L2 mass");
    sub->add_option("--points", cfg.grid_points, "grid points per axis (power of two)");
    sub->add_option("--box", cfg.grid_half_length, "box half-length");
    sub->add_option("--tmax", cfg.t_max, "evolution time");
    sub->add_option("--dt", cfg.dt, "time step");
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--grad-tol", cfg.solver.grad_tol, "gradient residual tolerance");
    sub->add_option("--q-tol", cfg.solver.q_tol, "Pohozaev residual tolerance");
    sub->add_option("--max-iter", cfg.solver.max_iter, "iteration cap");
  };

  CLI::App* c_baseline = app.add_subcommand("baseline", "solve the single-potential ground states");
  CLI::App* c_global = app.add_subcommand("solve-global", "global minimizer on the mass sphere");
  CLI::App* c_local = app.add_subcommand("solve-local", "local minimizer on the P- stratum");
  CLI::App* c_classify = app.add_subcommand("classify", "fibering-map regime of the parameters");
  CLI::App* c_scan = app.add_subcommand("fibering-scan", "tabulate the fibering map of a triple");
  CLI::App* c_evolve = app.add_subcommand("evolve", "integrate the time-dependent equation");
  CLI::App* c_stab = app.add_subcommand("stability", "orbital-stability experiment");
  CLI::App* c_sweep = app.add_subcommand("sweep", "solve across a parameter list");
  for (CLI::App* sub : {c_baseline, c_global, c_local, c_classify, c_scan, c_evolve, c_stab, c_sweep})
    add_common(sub);
  c_scan->add_option("--triple", triple_arg, "A,B_alpha,B_beta")->required();
  c_evolve->add_option("--in", in_path, "input field file");
  c_stab->add_option("--in", in_path, "input field file");
  c_stab->add_option("--delta0", cfg.delta0, "relative H1 perturbation size");
  c_sweep->add_option("--axis", axis, "mu_beta | mass | alpha | beta")->required();
  c_sweep->add_option("--values", values_arg, "comma-separated value list");
  c_sweep->add_flag("--with-local", with_local, "also solve the local branch per value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      RunConfig defaults;
      apply_json(defaults, io::read_json(config_path));
      // re-parse so explicit flags override the config file
      cfg = defaults;
      try {
        app.clear();
        app.parse(argc, argv);
      } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
      }
    }

    if (app.got_subcommand(c_classify)) return cmd_classify(cfg);
    if (app.got_subcommand(c_scan)) return cmd_fibering_scan(cfg, triple_arg);

    if (app.got_subcommand(c_baseline)) return cmd_baseline(cfg);
    if (app.got_subcommand(c_global)) return cmd_solve(cfg, Branch::Global);
    if (app.got_subcommand(c_local)) return cmd_solve(cfg, Branch::Local);
    if (app.got_subcommand(c_evolve)) return cmd_evolve(cfg, in_path);
    if (app.got_subcommand(c_stab)) return cmd_stability(cfg, in_path);
    if (app.got_subcommand(c_sweep)) return cmd_sweep(cfg, axis, values_arg, with_local);
    std::cerr << "unknown subcommand\n";
    return 1;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::runtime_error& ex) {
    const std::string msg = ex.what();
    std::cerr << "error: " << msg << "\n";
    return msg.find("missing baseline record") != std::string::npos ? 1 : 3;
  }
  return 0;
}
