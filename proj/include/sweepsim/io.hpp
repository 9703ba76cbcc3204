#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sweepsim/analysis.hpp"
#include "sweepsim/integrator.hpp"

namespace sweepsim {

// Full-precision (17 significant digits) decimal-point formatting; CSV output
// is locale-independent by construction.
std::string format_double(double v);

// Writes through a temp file in the same directory, then renames.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

// Header `t,x_1,...,x_n`, one row per step, '\n' newlines.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

// (t, gap) series for external plotting.
std::string gap_series_csv(const StabilityReport& report);

nlohmann::json to_json(const StabilityReport& report);
nlohmann::json to_json(const AlmostPeriodReport& report);
nlohmann::json to_json(const ResponseReport& report);
nlohmann::json to_json(const RichardsonResult& result);

}  // namespace sweepsim
