#pragma once

#include "p2gsim/p2g_plant.hpp"

#include <span>
#include <vector>

namespace p2g::coord {

// Electrolyzer side: each plant follows the RES surplus of its own feeder.

/// Setpoint for one plant. Standby when the feeder has no surplus; otherwise the
/// surplus plus standby consumption, limited by nominal power and by the
/// hydrogen the buffer can still take (the current methanation draw counts as
/// freed room, so a full buffer passes hydrogen straight through).
double electrolyzer_setpoint(const plant::PlantConfig& config, const plant::PlantState& state, double surplus_kw,
                             double dt_h);

std::vector<double> electrolyzer_setpoints(std::span<const plant::PlantConfig> configs,
                                           std::span<const plant::PlantState> states,
                                           std::span<const double> feeder_surplus_kw, double dt_h);

// Methanation side: shared SNG budget of the gas network.

enum class DispatchRole { Idle, Balancing, Running, Ready, StartCandidate };

const char* to_string(DispatchRole role);

struct PlantDispatch {
    DispatchRole role = DispatchRole::Idle;
    double h2_target_kg_per_h = 0.0;
    double min_load_kg_per_h = 0.0;  // ramp-down bound for running units
    double max_load_kg_per_h = 0.0;  // nominal, ramp-up and buffer-sustainable bound
    double planned_sng_kg = 0.0;     // SNG this step if the target is followed
    bool curtailed = false;          // held below max_load (or start refused) by the budget
    bool started = false;
};

struct DispatchDiagnostics {
    double budget_kg = 0.0;
    double reserved_kg = 0.0;     // commitment of running units at their lowest reachable load
    double budget_used_kg = 0.0;  // commitment of the units producing this step
    double start_reserve_kg = 0.0;
    double overrun_kg = 0.0;      // reserved production beyond the budget
    int plants_curtailed = 0;
    bool binding = false;
};

struct DispatchResult {
    std::vector<PlantDispatch> plants;
    DispatchDiagnostics diagnostics;
};

/// Priority-ordered methanation dispatch. Each producing unit is charged its
/// SNG commitment: the production of this step plus a fastest ramp down to
/// zero, so later steps can always honour their ramp limits. Running units
/// first get the commitment of their lowest reachable load, then are filled in
/// order of decreasing stored hydrogen (ties by index). Units that finished
/// balancing follow.
/// Standby units whose buffer reached the trigger pressure are started only
/// when every producing unit sits at its maximum and the budget still covers
/// their first production step.
DispatchResult methanation_dispatch(std::span<const plant::PlantConfig> configs,
                                    std::span<const plant::PlantState> states, double sng_budget_kg, double dt_h);

struct CoordinatorDirective {
    std::vector<double> electrolyzer_setpoint_kw;
    DispatchResult dispatch;
};

}  // namespace p2g::coord
