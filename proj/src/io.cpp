#include "nwav/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace nwav::io {

namespace {

constexpr char kMagic[4] = {'N', 'W', 'A', 'V'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error(std::string("field file truncated reading ") + what);
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field& f,
                 std::optional<FieldDType> dtype) {
  FieldDType dt;
  if (dtype) {
    dt = *dtype;
  } else {
    dt = FieldDType::Real64;
    for (const cplx& v : f.values)
      if (v.imag() != 0.0) {
        dt = FieldDType::Complex128;
        break;
      }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::uint32_t>(f.grid.dim));
  put(os, static_cast<std::uint32_t>(f.grid.points));
  put(os, f.grid.half_length);
  put(os, static_cast<std::uint32_t>(dt));
  if (dt == FieldDType::Real64) {
    for (const cplx& v : f.values) put(os, v.real());
  } else {
    for (const cplx& v : f.values) {
      put(os, v.real());
      put(os, v.imag());
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("field file magic mismatch: " + path.string());
  const auto version = take<std::uint32_t>(is, "version");
  if (version != kVersion) throw std::runtime_error("unsupported field file version");
  const auto dim = take<std::uint32_t>(is, "dim");
  if (dim < 1 || dim > 3) throw std::runtime_error("field file dimension outside 1..3");
  const auto points = take<std::uint32_t>(is, "points");
  const auto half_length = take<double>(is, "half_length");
  const auto dtype = take<std::uint32_t>(is, "dtype");
  if (dtype > 1) throw std::runtime_error("field file dtype unknown");

  Field f = make_field(make_grid(static_cast<int>(dim), points, half_length));
  for (cplx& v : f.values) {
    if (dtype == 0) {
      v = cplx(take<double>(is, "payload"), 0.0);
    } else {
      const double re = take<double>(is, "payload");
      const double im = take<double>(is, "payload");
      v = cplx(re, im);
    }
  }
  return f;
}

nlohmann::json report_to_json(const SolveReport& report, const ModelParams& params,
                              const std::string& field_path) {
  nlohmann::json j;
  j["branch"] = branch_name(report.branch);
  j["status"] = status_name(report.status);
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["lambda"] = report.lambda;
  j["grad_residual"] = report.grad_residual;
  j["pohozaev_residual"] = report.pohozaev_residual;
  j["level"] = report.level;
  j["g2_at_1"] = report.g2_at_1;
  j["regime_certified"] = report.regime_certified;
  j["asymmetry"] = report.asymmetry;
  j["s_init"] = report.s_init;
  j["values"] = {{"A", report.values.A},       {"B_alpha", report.values.B_alpha},
                 {"B_beta", report.values.B_beta}, {"mass", report.values.mass},
                 {"E", report.values.E},       {"Q", report.values.Q}};
  j["flags"] = {{"in_VD", report.flags.in_VD},
                {"on_P", report.flags.on_P},
                {"in_Pminus", report.flags.in_Pminus},
                {"in_Pplus", report.flags.in_Pplus}};
  j["model"] = {{"dim", params.dim},
                {"alpha", params.alpha},
                {"beta", params.beta},
                {"mu_beta", params.mu_beta},
                {"mass_target", params.mass_target}};
  if (!field_path.empty()) j["solution_field"] = field_path;
  return j;
}

void write_report(const std::filesystem::path& path, const SolveReport& report,
                  const ModelParams& params, const std::string& field_path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << report_to_json(report, params, field_path).dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
  nlohmann::json j;
  is >> j;
  return j;
}

void write_trace(const std::filesystem::path& path, const EvolutionTrace& trace, int dim) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "t,mass,energy,kinetic,orbit_distance";
  for (int d = 0; d < dim; ++d) os << ",momentum_" << d;
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    os << trace.times[i] << "," << trace.mass[i] << "," << trace.energy[i] << ","
       << trace.kinetic[i] << ",";
    if (i < trace.orbit_distance.size()) os << trace.orbit_distance[i];
    else os << "nan";
    for (int d = 0; d < dim; ++d) os << "," << trace.momentum[i][d];
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

BaselineStore::BaselineStore(const std::filesystem::path& dir) : dir_(dir) {
  std::filesystem::create_directories(dir_);
  file_ = dir_ / "baselines.json";
}

std::string BaselineStore::key(double gamma, double mass, std::uint64_t grid_fingerprint) {
  std::ostringstream os;
  os.precision(17);
  os << gamma << ":" << mass << ":" << std::hex << grid_fingerprint;
  return os.str();
}

void BaselineStore::put(const BaselineRecord& rec) {
  nlohmann::json all = nlohmann::json::object();
  if (std::filesystem::exists(file_)) all = read_json(file_);
  nlohmann::json j;
  j["gamma"] = rec.gamma;
  j["mass"] = rec.mass;
  j["grid_fingerprint"] = rec.grid_fingerprint;
  j["m_infty"] = rec.m_infty;
  j["gn"] = rec.gn;
  j["lambda"] = rec.lambda;
  j["kinetic"] = rec.kinetic;
  j["omega_mass"] = rec.omega_mass;
  j["grad_residual"] = rec.grad_residual;
  j["field_path"] = rec.field_path;
  all[key(rec.gamma, rec.mass, rec.grid_fingerprint)] = j;
  std::ofstream os(file_);
  os << all.dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed: " + file_.string());
}

std::optional<BaselineRecord> BaselineStore::get(double gamma, double mass,
                                                 std::uint64_t grid_fingerprint) const {
  if (!std::filesystem::exists(file_)) return std::nullopt;
  nlohmann::json all = read_json(file_);
  const std::string k = key(gamma, mass, grid_fingerprint);
  if (!all.contains(k)) return std::nullopt;
  const nlohmann::json& j = all[k];
  BaselineRecord rec;
  rec.gamma = j["gamma"];
  rec.mass = j["mass"];
  rec.grid_fingerprint = j["grid_fingerprint"];
  rec.m_infty = j["m_infty"];
  rec.gn = j["gn"];
  rec.lambda = j["lambda"];
  rec.kinetic = j["kinetic"];
  rec.omega_mass = j["omega_mass"];
  rec.grad_residual = j["grad_residual"];
  rec.field_path = j["field_path"];
  return rec;
}

}  // namespace nwav::io
