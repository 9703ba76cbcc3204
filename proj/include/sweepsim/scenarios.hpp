#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sweepsim/integrator.hpp"

namespace sweepsim {

// Compiled-in problem registry. Fields with sqrt(2) and t/eps arguments need
// exact, auditable code, so scenarios are code, not a runtime expression
// language.
struct ScenarioSpec {
    std::string id;
    std::string description;
    Scenario scenario;  // registry defaults; callers override window/step/eps/x0
    std::optional<double> analytic_alpha;
    std::string averaged_id;  // averaged counterpart for high-frequency scenarios
    // Recomputes bound_M when the window moves (only families whose bound is
    // window-dependent set this).
    std::function<double(double t_start, double t_end)> bound_for_window;
};

const std::vector<std::string>& scenario_ids();
bool has_scenario(const std::string& id);
ScenarioSpec make_scenario(const std::string& id);

// Re-derives window-dependent quantities after overrides were applied.
void refresh_scenario(ScenarioSpec& spec);

}  // namespace sweepsim
