#pragma once

#include "p2gsim/scenario.hpp"

#include <filesystem>
#include <string>

namespace p2g::testkit {

inline std::filesystem::path data_dir() { return P2G_DATA_DIR; }

inline const scenario::Scenario& demo_scenario() {
    static const scenario::Scenario s = scenario::load_scenario(data_dir() / "demo" / "scenario.json");
    return s;
}

/// The demo scenario cut to `steps` steps starting at `first_step`.
inline scenario::Scenario demo_window(int first_step, int steps) {
    scenario::Scenario s = demo_scenario();
    const scenario::Instant at = s.time_grid.at(first_step);
    s.time_grid.start_date = {at.month, at.day};
    s.time_grid.start_minute_of_day = at.minute_of_day;
    s.time_grid.step_count = steps;
    for (auto& p : s.profiles) {
        p.samples.assign(p.samples.begin() + first_step, p.samples.begin() + first_step + steps);
    }
    return s;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("p2gsim_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace p2g::testkit
