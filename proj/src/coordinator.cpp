#include "p2gsim/coordinator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace p2g::coord {

using plant::MethMode;

double electrolyzer_setpoint(const plant::PlantConfig& config, const plant::PlantState& state, double surplus_kw,
                             double dt_h) {
    const auto& el = config.electrolyzer;
    if (!(surplus_kw > 0.0)) return el.standby_power_kw;

    const double full = plant::buffer_mass_kg(config.buffer, config.buffer.p_max_bar);
    const double draw = state.methanation.mode == MethMode::UpAndRunning ? state.methanation.load_kg_per_h * dt_h : 0.0;
    const double room = std::max(0.0, full - state.buffer.stored_mass_kg + draw);
    const double buffer_limited = plant::electrolyzer_power_for(el, room, dt_h);

    const double setpoint = std::min({surplus_kw + el.standby_power_kw, el.nominal_power_kw, buffer_limited});
    const double lowest = std::max(el.standby_power_kw, el.min_load_fraction * el.nominal_power_kw);
    return setpoint < lowest ? el.standby_power_kw : setpoint;
}

std::vector<double> electrolyzer_setpoints(std::span<const plant::PlantConfig> configs,
                                           std::span<const plant::PlantState> states,
                                           std::span<const double> feeder_surplus_kw, double dt_h) {
    if (configs.size() != states.size() || configs.size() != feeder_surplus_kw.size()) {
        throw std::invalid_argument("electrolyzer_setpoints: size mismatch");
    }
    std::vector<double> out(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        out[i] = electrolyzer_setpoint(configs[i], states[i], feeder_surplus_kw[i], dt_h);
    }
    return out;
}

const char* to_string(DispatchRole role) {
    switch (role) {
        case DispatchRole::Idle: return "idle";
        case DispatchRole::Balancing: return "balancing";
        case DispatchRole::Running: return "running";
        case DispatchRole::Ready: return "ready";
        case DispatchRole::StartCandidate: return "start_candidate";
    }
    return "unknown";
}

DispatchResult methanation_dispatch(std::span<const plant::PlantConfig> configs,
                                    std::span<const plant::PlantState> states, double sng_budget_kg, double dt_h) {
    if (configs.size() != states.size()) throw std::invalid_argument("methanation_dispatch: size mismatch");
    if (sng_budget_kg < 0.0) throw std::invalid_argument("methanation_dispatch: negative budget");

    const std::size_t n = configs.size();
    DispatchResult result;
    result.plants.resize(n);
    auto& diag = result.diagnostics;
    diag.budget_kg = sng_budget_kg;

    auto sng_per_load = [&](std::size_t i) { return configs[i].methanation.ch4_yield_kg_per_kg_h2 * dt_h; };
    // SNG a unit commits to when it runs at `load` now: this step plus the
    // fastest ramp down to zero afterwards.
    auto charge = [&](std::size_t i, double load) {
        const auto& m = configs[i].methanation;
        return m.ch4_yield_kg_per_kg_h2 * plant::shutdown_commitment_kg(m, load, dt_h);
    };
    // Highest load in [lo, hi] whose extra commitment over `lo` fits in `room`.
    auto highest_within = [&](std::size_t i, double lo, double hi, double room) {
        const double base = charge(i, lo);
        if (charge(i, hi) - base <= room) return hi;
        double a = lo;
        double z = hi;
        for (int k = 0; k < 80; ++k) {
            const double mid = 0.5 * (a + z);
            (charge(i, mid) - base <= room ? a : z) = mid;
        }
        return a;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = configs[i];
        const auto& s = states[i];
        PlantDispatch& d = result.plants[i];
        if (s.methanation.mode == MethMode::UpAndRunning) {
            d.role = DispatchRole::Running;
        } else if (plant::produces_this_step(c.methanation, s.methanation) &&
                   s.methanation.mode == MethMode::ReactorBalancing) {
            d.role = DispatchRole::Ready;
        } else if (s.methanation.mode == MethMode::ReactorBalancing) {
            d.role = DispatchRole::Balancing;
            d.h2_target_kg_per_h = c.methanation.nominal_h2_intake_kg_per_h;
            continue;
        } else if (plant::buffer_pressure_bar(c.buffer, s.buffer.stored_mass_kg) >= c.buffer.meth_trigger_bar) {
            d.role = DispatchRole::StartCandidate;
        } else {
            continue;
        }
        if (d.role == DispatchRole::StartCandidate && !plant::produces_this_step(c.methanation, s.methanation)) {
            continue;
        }
        d.min_load_kg_per_h = plant::min_reachable_load(c.methanation, s.methanation, dt_h);
        d.max_load_kg_per_h =
            plant::max_feasible_load(c.methanation, c.buffer, s.methanation, s.buffer.stored_mass_kg, dt_h);
        d.h2_target_kg_per_h = d.min_load_kg_per_h;
        diag.reserved_kg += charge(i, d.min_load_kg_per_h);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return states[a].buffer.stored_mass_kg > states[b].buffer.stored_mass_kg;
    });

    double remaining = sng_budget_kg - diag.reserved_kg;
    diag.overrun_kg = std::max(0.0, -remaining);
    remaining = std::max(0.0, remaining);

    auto fill = [&](DispatchRole role) {
        bool all_at_max = true;
        for (std::size_t i : order) {
            PlantDispatch& d = result.plants[i];
            if (d.role != role) continue;
            const double load = highest_within(i, d.min_load_kg_per_h, d.max_load_kg_per_h, remaining);
            d.h2_target_kg_per_h = load;
            remaining = std::max(0.0, remaining - (charge(i, load) - charge(i, d.min_load_kg_per_h)));
            if (load < d.max_load_kg_per_h) {
                d.curtailed = true;
                all_at_max = false;
            }
        }
        return all_at_max;
    };
    const bool running_full = fill(DispatchRole::Running);
    const bool ready_full = fill(DispatchRole::Ready);

    for (std::size_t i : order) {
        PlantDispatch& d = result.plants[i];
        if (d.role != DispatchRole::StartCandidate) continue;
        const auto& m = configs[i].methanation;
        const double first_step = std::min(m.nominal_h2_intake_kg_per_h, m.ramp_up_kg_per_h2 * dt_h);
        const double reserve = charge(i, first_step);
        const bool immediate = plant::produces_this_step(m, states[i].methanation);
        if (!(running_full && ready_full) || remaining < reserve || !(remaining > 0.0)) {
            d.curtailed = true;
            d.h2_target_kg_per_h = 0.0;
            continue;
        }
        d.started = true;
        if (immediate) {
            const double load = highest_within(i, 0.0, d.max_load_kg_per_h, remaining);
            d.h2_target_kg_per_h = load;
            remaining = std::max(0.0, remaining - charge(i, load));
        } else {
            d.h2_target_kg_per_h = m.nominal_h2_intake_kg_per_h;
            diag.start_reserve_kg += reserve;
            remaining -= reserve;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        PlantDispatch& d = result.plants[i];
        const bool produces = d.role == DispatchRole::Running || d.role == DispatchRole::Ready ||
                              (d.role == DispatchRole::StartCandidate && d.started &&
                               plant::produces_this_step(configs[i].methanation, states[i].methanation));
        if (produces) {
            d.planned_sng_kg = d.h2_target_kg_per_h * sng_per_load(i);
            diag.budget_used_kg += charge(i, d.h2_target_kg_per_h);
        }
        if (d.curtailed) ++diag.plants_curtailed;
    }
    diag.binding = diag.plants_curtailed > 0;
    return result;
}

}  // namespace p2g::coord
