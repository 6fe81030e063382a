#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "nwav/dynamics.hpp"
#include "nwav/solver.hpp"

namespace nwav::io {

enum class FieldDType : std::uint32_t { Real64 = 0, Complex128 = 1 };

/// Binary field container: magic "NWAV", version u32 = 1, dim u32,
/// points-per-axis u32, half-length f64, dtype u32, then the row-major
/// payload in little-endian doubles (pairs for complex128).
void write_field(const std::filesystem::path& path, const Field& f,
                 std::optional<FieldDType> dtype = std::nullopt);
Field read_field(const std::filesystem::path& path);

nlohmann::json report_to_json(const SolveReport& report, const ModelParams& params,
                              const std::string& field_path = "");
void write_report(const std::filesystem::path& path, const SolveReport& report,
                  const ModelParams& params, const std::string& field_path = "");
nlohmann::json read_json(const std::filesystem::path& path);

/// Trace CSV: one header line, then rows
/// t, mass, energy, kinetic, orbit_distance, momentum_0..momentum_{N-1}.
void write_trace(const std::filesystem::path& path, const EvolutionTrace& trace, int dim);

/// Per-exponent ground-state record, keyed by (gamma, mass, grid fingerprint).
struct BaselineRecord {
  double gamma = 0.0;
  double mass = 0.0;
  std::uint64_t grid_fingerprint = 0;
  double m_infty = 0.0;
  double gn = 0.0;       // GN constant (saturated quotient)
  double lambda = 0.0;
  double kinetic = 0.0;
  double omega_mass = 0.0;
  double grad_residual = 0.0;
  std::string field_path;
};

/// JSON-backed store of baseline records under <dir>/baselines.json.
class BaselineStore {
 public:
  explicit BaselineStore(const std::filesystem::path& dir);
  void put(const BaselineRecord& rec);
  std::optional<BaselineRecord> get(double gamma, double mass,
                                    std::uint64_t grid_fingerprint) const;
  static std::string key(double gamma, double mass, std::uint64_t grid_fingerprint);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::filesystem::path file_;
};

}  // namespace nwav::io
