#include "mwi/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace mwi::io {

using nlohmann::json;

namespace {

template <class T>
void readIf(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

json channelsJson(const ChannelPopulations& c) {
  return {{"minus2k", c.minus2k}, {"zero", c.zero},    {"plus2k", c.plus2k},
          {"mode", toString(c.mode)}, {"boundary", c.boundary}};
}

ChannelPopulations channelsFrom(const json& j) {
  ChannelPopulations c;
  c.minus2k = j.at("minus2k").get<double>();
  c.zero = j.at("zero").get<double>();
  c.plus2k = j.at("plus2k").get<double>();
  c.mode = channelModeFromString(j.at("mode").get<std::string>());
  c.boundary = j.at("boundary").get<double>();
  return c;
}

std::ofstream openOut(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

ProtocolConfig configFromJson(const json& j) {
  ProtocolConfig cfg;
  if (j.contains("system")) {
    const auto& s = j.at("system");
    readIf(s, "N", cfg.system.particles);
    readIf(s, "lambda0", cfg.system.lambda0);
    readIf(s, "gamma", cfg.system.gamma);
    readIf(s, "trap_a", cfg.system.trapCoefficient);
  }
  if (j.contains("grid")) {
    readIf(j.at("grid"), "L", cfg.gridLength);
    readIf(j.at("grid"), "n", cfg.gridPoints);
  }
  if (j.contains("solver")) cfg.solver = solverFromString(j.at("solver").get<std::string>());
  if (j.contains("pulse1")) {
    readIf(j.at("pulse1"), "k", cfg.pulse1.k);
    readIf(j.at("pulse1"), "chi", cfg.pulse1.chi);
  }
  bool k2Given = false;
  if (j.contains("pulse2")) {
    const auto& p = j.at("pulse2");
    k2Given = p.contains("k");
    readIf(p, "k", cfg.pulse2.k);
    readIf(p, "chi", cfg.pulse2.chi);
    readIf(p, "enabled", cfg.pulse2Enabled);
  }
  if (!k2Given) cfg.pulse2.k = cfg.pulse1.k;
  if (j.contains("recollision")) {
    readIf(j.at("recollision"), "j", cfg.recollisionIndex);
    readIf(j.at("recollision"), "window", cfg.recollisionWindow);
  }
  readIf(j, "t_sep", cfg.tSep);
  if (j.contains("integrator")) {
    const auto& i = j.at("integrator");
    readIf(i, "dt", cfg.integrator.dt);
    readIf(i, "rtol", cfg.integrator.rtol);
    readIf(i, "atol", cfg.integrator.atol);
    readIf(i, "eps_reg", cfg.integrator.epsReg);
    readIf(i, "snapshot_stride", cfg.integrator.snapshotStride);
  }
  readIf(j, "output_dir", cfg.outputDir);
  return cfg;
}

json toJson(const ProtocolConfig& cfg) {
  return {
      {"system",
       {{"N", cfg.system.particles},
        {"lambda0", cfg.system.lambda0},
        {"gamma", cfg.system.gamma},
        {"trap_a", cfg.system.trapCoefficient}}},
      {"grid", {{"L", cfg.gridLength}, {"n", cfg.gridPoints}}},
      {"solver", toString(cfg.solver)},
      {"pulse1", {{"k", cfg.pulse1.k}, {"chi", cfg.pulse1.chi}}},
      {"pulse2", {{"k", cfg.pulse2.k}, {"chi", cfg.pulse2.chi}, {"enabled", cfg.pulse2Enabled}}},
      {"recollision", {{"j", cfg.recollisionIndex}, {"window", cfg.recollisionWindow}}},
      {"t_sep", cfg.tSep},
      {"integrator",
       {{"dt", cfg.integrator.dt},
        {"rtol", cfg.integrator.rtol},
        {"atol", cfg.integrator.atol},
        {"eps_reg", cfg.integrator.epsReg},
        {"snapshot_stride", cfg.integrator.snapshotStride}}},
      {"output_dir", cfg.outputDir},
  };
}

ProtocolConfig loadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  try {
    return configFromJson(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
}

json toJson(const ProtocolReport& r) {
  json j = {
      {"solver", toString(r.solver)},
      {"recollision_index", r.recollisionIndex},
      {"t_recollision", r.tRecollision},
      {"channels", channelsJson(r.channels)},
      {"momentum_channels", channelsJson(r.momentumChannels)},
      {"visibility", r.visibility},
      {"n2_interferometric", nullptr},
      {"natural_occupations", nullptr},
      {"discrepancy", nullptr},
      {"files", r.files},
  };
  if (r.n2Interferometric) j["n2_interferometric"] = *r.n2Interferometric;
  if (r.occupations) j["natural_occupations"] = {r.occupations->n1, r.occupations->n2};
  if (r.discrepancy) j["discrepancy"] = *r.discrepancy;
  return j;
}

ProtocolReport reportFromJson(const json& j) {
  ProtocolReport r;
  r.solver = solverFromString(j.at("solver").get<std::string>());
  r.recollisionIndex = j.at("recollision_index").get<int>();
  r.tRecollision = j.at("t_recollision").get<double>();
  r.channels = channelsFrom(j.at("channels"));
  r.momentumChannels = channelsFrom(j.at("momentum_channels"));
  r.visibility = j.at("visibility").get<double>();
  if (!j.at("n2_interferometric").is_null())
    r.n2Interferometric = j.at("n2_interferometric").get<double>();
  if (!j.at("natural_occupations").is_null()) {
    const auto& o = j.at("natural_occupations");
    r.occupations = NaturalOccupations{o.at(0).get<double>(), o.at(1).get<double>()};
  }
  if (!j.at("discrepancy").is_null()) r.discrepancy = j.at("discrepancy").get<double>();
  r.files = j.at("files").get<std::map<std::string, std::string>>();
  return r;
}

void writeReport(const std::filesystem::path& path, const ProtocolReport& report) {
  auto out = openOut(path);
  out << std::setprecision(17) << toJson(report).dump(2) << '\n';
}

ProtocolReport readReport(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report " + path.string());
  return reportFromJson(json::parse(in));
}

void writeObservablesCsv(const std::filesystem::path& path,
                         const std::vector<Snapshot>& snapshots) {
  auto out = openOut(path);
  out << "t,norm,energy,n1_frac,n2_frac,centroid,central_density\n";
  out << std::setprecision(12);
  for (const auto& s : snapshots)
    out << s.t << ',' << s.norm << ',' << s.energy << ',' << s.n1 << ',' << s.n2
        << ',' << s.centroid << ',' << s.centralDensity << '\n';
}

void writeDensityBinary(const std::filesystem::path& binPath,
                        const std::filesystem::path& metaPath,
                        const std::vector<Snapshot>& snapshots, double length,
                        double dtSnapshot) {
  if (snapshots.empty()) throw std::invalid_argument("writeDensityBinary: no snapshots");
  const std::size_t cols = snapshots.front().density.size();
  if (cols == 0) throw std::invalid_argument("writeDensityBinary: snapshots carry no density");
  auto out = openOut(binPath, std::ios::binary);
  std::vector<unsigned char> row(cols * 8);
  for (const auto& s : snapshots) {
    if (s.density.size() != cols)
      throw std::invalid_argument("writeDensityBinary: ragged density rows");
    for (std::size_t i = 0; i < cols; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(s.density[i]);
      for (int b = 0; b < 8; ++b) row[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  const json meta = {{"n_rows", snapshots.size()},
                     {"n_cols", cols},
                     {"t0", snapshots.front().t},
                     {"dt_snapshot", dtSnapshot},
                     {"L", length}};
  auto m = openOut(metaPath);
  m << std::setprecision(17) << meta.dump(2) << '\n';
}

std::vector<double> readDensityBinary(const std::filesystem::path& binPath,
                                      const std::filesystem::path& metaPath,
                                      DensityMeta& meta) {
  std::ifstream m(metaPath);
  if (!m) throw std::runtime_error("cannot open " + metaPath.string());
  const json j = json::parse(m);
  meta.rows = j.at("n_rows").get<std::size_t>();
  meta.cols = j.at("n_cols").get<std::size_t>();
  meta.t0 = j.at("t0").get<double>();
  meta.dtSnapshot = j.at("dt_snapshot").get<double>();
  meta.length = j.at("L").get<double>();
  std::ifstream in(binPath, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + binPath.string());
  std::vector<unsigned char> raw(meta.rows * meta.cols * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("density file shorter than its sidecar claims");
  std::vector<double> values(meta.rows * meta.cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(raw[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace mwi::io
