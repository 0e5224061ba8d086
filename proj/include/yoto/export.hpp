#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "yoto/harness.hpp"

namespace yoto {

enum class ExportFormat { kCsv, kJson };

ExportFormat parse_export_format(const std::string& text);

/// Header: t, mu_0..mu_K, lambda_0..lambda_K, l_0..l_K, L_e, L_r, val_basic_loss.
std::vector<std::string> trajectory_columns(std::size_t loss_count);

/// Writes a trajectory. loss_count fixes the schema when the trajectory is
/// empty (a header-only CSV / empty record list). Throws std::runtime_error
/// naming the path on I/O failure.
void export_trajectory(const std::vector<TrajectoryRecord>& trajectory, std::size_t loss_count,
                       ExportFormat format, const std::filesystem::path& path);

struct TrajectoryFile {
  std::size_t loss_count = 0;
  std::vector<TrajectoryRecord> records;
};

/// Reads either format back (detected from content); values round-trip
/// exactly. The loss count comes from the header, so empty files keep it.
TrajectoryFile import_trajectory_file(const std::filesystem::path& path);
std::vector<TrajectoryRecord> import_trajectory(const std::filesystem::path& path);

nlohmann::json to_json(const TrajectoryRecord& record);
nlohmann::json to_json(const RunResult& result);
nlohmann::json to_json(const GridResult& result);
nlohmann::json to_json(const SeedStudyReport& report);
nlohmann::json to_json(const InitSweepReport& report);

void write_json(const nlohmann::json& value, const std::filesystem::path& path);

}  // namespace yoto
