#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwi/protocol.hpp"

namespace mwi::io {

ProtocolConfig configFromJson(const nlohmann::json& j);
nlohmann::json toJson(const ProtocolConfig& cfg);
ProtocolConfig loadConfig(const std::filesystem::path& path);

nlohmann::json toJson(const ProtocolReport& report);
ProtocolReport reportFromJson(const nlohmann::json& j);
void writeReport(const std::filesystem::path& path, const ProtocolReport& report);
ProtocolReport readReport(const std::filesystem::path& path);

/// Columns: t, norm, energy, n1_frac, n2_frac, centroid, central_density.
void writeObservablesCsv(const std::filesystem::path& path,
                         const std::vector<Snapshot>& snapshots);

struct DensityMeta {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double t0 = 0.0;
  double dtSnapshot = 0.0;
  double length = 0.0;
};
/// Row-major little-endian float64, one row per snapshot, plus a JSON sidecar
/// {n_rows, n_cols, t0, dt_snapshot, L}. Snapshots must carry densities.
void writeDensityBinary(const std::filesystem::path& binPath,
                        const std::filesystem::path& metaPath,
                        const std::vector<Snapshot>& snapshots, double length,
                        double dtSnapshot);
std::vector<double> readDensityBinary(const std::filesystem::path& binPath,
                                      const std::filesystem::path& metaPath,
                                      DensityMeta& meta);

}  // namespace mwi::io
