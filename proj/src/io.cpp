#include "sweepsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sweepsim {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t";
    for (std::size_t d = 1; d <= traj.dim; ++d) out += ",x_" + std::to_string(d);
    out += '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out += format_double(traj.time(k));
        for (std::size_t d = 0; d < traj.dim; ++d) {
            out += ',';
            out += format_double(traj.data[k * traj.dim + d]);
        }
        out += '\n';
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    atomic_write_text(path, trajectory_csv(traj));
}

std::string gap_series_csv(const StabilityReport& report) {
    std::string out = "t,gap\n";
    for (const auto& [t, gap] : report.gap_samples) {
        out += format_double(t);
        out += ',';
        out += format_double(gap);
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const StabilityReport& report) {
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& [t, gap] : report.gap_samples) gaps.push_back({t, gap});
    return nlohmann::json{
        {"fitted_rate", report.fitted_rate},
        {"r_squared", report.r_squared},
        {"gap_samples", std::move(gaps)},
        {"gronwall_satisfied", report.gronwall_satisfied},
        {"rate_reliable", report.rate_reliable},
        {"alpha_declared", report.alpha_declared},
        {"floor", report.floor},
    };
}

nlohmann::json to_json(const AlmostPeriodReport& report) {
    nlohmann::json scan = nlohmann::json::array();
    for (const auto& [s, r] : report.scan) scan.push_back({s, r});
    return nlohmann::json{
        {"epsilon_tol", report.epsilon_tol},
        {"periods_found", report.periods_found},
        {"residual", std::move(scan)},
        {"shifts_rounded", report.shifts_rounded},
    };
}

nlohmann::json to_json(const ResponseReport& report) {
    return nlohmann::json{
        {"eps_values", report.eps_values},
        {"sup_gaps", report.sup_gaps},
        {"bound_values", report.bound_values},
        {"monotone_decreasing", report.monotone_decreasing},
        {"bounds_satisfied", report.bounds_satisfied},
        {"window_too_early", report.window_too_early},
        {"discretization_slack", report.discretization_slack},
        {"scaling_exponent", report.scaling_exponent},
    };
}

nlohmann::json to_json(const RichardsonResult& result) {
    return nlohmann::json{
        {"order", result.order},
        {"saturated", result.saturated},
        {"h_values", result.h_values},
        {"errors", result.errors},
        {"h_ref", result.h_ref},
    };
}

}  // namespace sweepsim
