#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nwav/io.hpp"
#include "nwav/solver.hpp"

namespace nwav {

/// One parameter-sweep row: the model with the axis value substituted,
/// solved on auto-adapted boxes for the requested branches.
struct SweepRow {
  double value = 0.0;
  bool global_ok = false;
  bool local_ok = false;
  double E_global = 0.0, E_local = 0.0;
  double A_global = 0.0, A_local = 0.0;
  double lambda_global = 0.0, lambda_local = 0.0;
  std::string note;
};

struct SweepSpec {
  std::string axis;             // mu_beta | mass | alpha | beta
  std::vector<double> values;
  bool run_global = true;
  bool run_local = false;
  std::size_t points = 64;
  int max_workers = 1;          // capped by NWAV_THREADS
};

struct SweepContext {
  ModelParams base;
  Thresholds thresholds;        // at base parameters (m_infty, GN constants)
  double baseline_mass_ref = 1.0;  // mass at which m_infty was computed
  const Field* omega0 = nullptr;   // required when run_local
  SolveOptions solver;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepContext& ctx);

void write_sweep_csv(const std::filesystem::path& path, const std::string& axis,
                     const std::vector<SweepRow>& rows);

}  // namespace nwav
