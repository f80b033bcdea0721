#include "p2gsim/p2g_plant.hpp"

#include "p2gsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace p2g::plant {

namespace {

constexpr double kRelTol = 1e-9;

double min_operating_power(const ElectrolyzerConfig& c) {
    return std::max(c.standby_power_kw, c.min_load_fraction * c.nominal_power_kw);
}

}  // namespace

const char* to_string(MethMode mode) {
    switch (mode) {
        case MethMode::HotStandby: return "hot_standby";
        case MethMode::ReactorBalancing: return "reactor_balancing";
        case MethMode::UpAndRunning: return "up_and_running";
    }
    return "unknown";
}

MethMode meth_mode_from_string(const std::string& name) {
    if (name == "hot_standby") return MethMode::HotStandby;
    if (name == "reactor_balancing") return MethMode::ReactorBalancing;
    if (name == "up_and_running") return MethMode::UpAndRunning;
    throw std::invalid_argument("unknown methanation state '" + name + "'");
}

void validate(const PlantConfig& c) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("plant '" + c.name + "': " + what);
    };
    const auto& e = c.electrolyzer;
    if (!(e.nominal_power_kw > 0.0)) fail("electrolyzer nominal power must be positive");
    if (!(e.min_load_fraction >= 0.0 && e.min_load_fraction < 1.0)) fail("min_load_fraction must be in [0, 1)");
    if (!(e.standby_power_kw >= 0.0 && e.standby_power_kw < e.nominal_power_kw)) {
        fail("standby power must be in [0, nominal)");
    }
    if (!(e.specific_consumption_kwh_per_kg_h2 > kH2LhvKWhPerKg)) {
        fail("specific consumption must exceed the H2 lower heating value (efficiency < 100%)");
    }
    if (e.o2_yield_kg_per_kg_h2 < 0.0 || e.heat_yield_kwh_per_kg_h2 < 0.0) fail("yields must be non-negative");

    const auto& b = c.buffer;
    if (!(b.volume_m3 > 0.0 && b.temperature_k > 0.0)) fail("buffer volume and temperature must be positive");
    if (!(b.p_min_bar > 0.0 && b.p_min_bar < b.meth_trigger_bar && b.meth_trigger_bar <= b.p_max_bar)) {
        fail("buffer pressures must satisfy 0 < p_min < trigger <= p_max");
    }

    const auto& m = c.methanation;
    if (!(m.nominal_h2_intake_kg_per_h > 0.0)) fail("methanation nominal intake must be positive");
    if (!(m.ramp_up_kg_per_h2 > 0.0 && m.ramp_down_kg_per_h2 > 0.0)) fail("ramp limits must be positive");
    if (!(m.co2_ratio_kg_per_kg_h2 > 0.0 && m.ch4_yield_kg_per_kg_h2 > 0.0 && m.sng_lhv_kwh_per_kg > 0.0)) {
        fail("methanation yields must be positive");
    }
    if (m.heat_yield_kwh_per_kg_h2 < 0.0) fail("methanation heat yield must be non-negative");
    if (m.balancing_duration_steps < 0) fail("balancing duration must be non-negative");

    const auto& init = c.initial;
    if (init.buffer_pressure_bar < b.p_min_bar || init.buffer_pressure_bar > b.p_max_bar) {
        fail("initial buffer pressure outside [p_min, p_max]");
    }
    const MethState& s = init.methanation;
    if (s.mode != MethMode::UpAndRunning && s.load_kg_per_h != 0.0) fail("initial load must be 0 unless up_and_running");
    if (s.load_kg_per_h < 0.0 || s.load_kg_per_h > m.nominal_h2_intake_kg_per_h) {
        fail("initial methanation load outside [0, nominal]");
    }
    if (s.mode == MethMode::ReactorBalancing && s.balancing_steps_left < 0) fail("negative balancing counter");
}

ElectrolyzerOutput electrolyzer_step(const ElectrolyzerConfig& c, double setpoint_kw, double dt_h) {
    const bool standby = setpoint_kw == c.standby_power_kw;
    const double lower = min_operating_power(c);
    if (!standby && (setpoint_kw < lower * (1.0 - kRelTol) || setpoint_kw > c.nominal_power_kw * (1.0 + kRelTol))) {
        std::ostringstream os;
        os << "electrolyzer setpoint " << setpoint_kw << " kW outside {standby} U [" << lower << ", "
           << c.nominal_power_kw << "] kW";
        throw std::invalid_argument(os.str());
    }
    ElectrolyzerOutput out;
    out.h2_kg = std::max(0.0, setpoint_kw - c.standby_power_kw) * dt_h / c.specific_consumption_kwh_per_kg_h2;
    out.o2_kg = c.o2_yield_kg_per_kg_h2 * out.h2_kg;
    out.heat_kwh = c.heat_yield_kwh_per_kg_h2 * out.h2_kg;
    out.energy_kwh = setpoint_kw * dt_h;
    return out;
}

double electrolyzer_power_for(const ElectrolyzerConfig& c, double h2_kg, double dt_h) {
    return c.standby_power_kw + h2_kg * c.specific_consumption_kwh_per_kg_h2 / dt_h;
}

double buffer_pressure_bar(const H2BufferConfig& c, double mass_kg) {
    return mass_kg * kRHydrogen * c.temperature_k / (c.volume_m3 * 1e5);
}

double buffer_mass_kg(const H2BufferConfig& c, double pressure_bar) {
    return pressure_bar * 1e5 * c.volume_m3 / (kRHydrogen * c.temperature_k);
}

BufferUpdate buffer_apply(const H2BufferState& state, const H2BufferConfig& c, double h2_in_kg, double h2_out_kg) {
    if (h2_in_kg < 0.0 || h2_out_kg < 0.0) throw std::invalid_argument("buffer_apply: negative hydrogen flow");
    BufferUpdate u;
    u.state.stored_mass_kg = state.stored_mass_kg + h2_in_kg - h2_out_kg;
    u.pressure_bar = buffer_pressure_bar(c, u.state.stored_mass_kg);
    if (u.pressure_bar < c.p_min_bar * (1.0 - kRelTol) || u.pressure_bar > c.p_max_bar * (1.0 + kRelTol)) {
        std::ostringstream os;
        os << "hydrogen buffer pressure " << u.pressure_bar << " bar outside [" << c.p_min_bar << ", " << c.p_max_bar
           << "] bar";
        throw PlantModelError(os.str());
    }
    return u;
}

MethanationOutput methanation_step(const MethanationConfig& c, const MethState& state, double target, double dt_h) {
    if (target < 0.0) throw std::invalid_argument("methanation_step: negative H2 target");
    MethanationOutput out;
    out.state = state;

    bool running = state.mode == MethMode::UpAndRunning;
    double load = state.load_kg_per_h;
    switch (state.mode) {
        case MethMode::HotStandby:
            if (target > 0.0) {
                if (c.balancing_duration_steps > 0) {
                    out.state = MethState{MethMode::ReactorBalancing, 0.0, c.balancing_duration_steps - 1};
                    return out;
                }
                running = true;
                load = 0.0;
            } else {
                out.state = MethState{};
                return out;
            }
            break;
        case MethMode::ReactorBalancing:
            if (state.balancing_steps_left > 0) {
                out.state.balancing_steps_left = state.balancing_steps_left - 1;
                return out;
            }
            running = true;
            load = 0.0;
            break;
        case MethMode::UpAndRunning:
            break;
    }
    if (!running) return out;

    const double lo = std::max(0.0, load - c.ramp_down_kg_per_h2 * dt_h);
    const double hi = std::max(lo, std::min(c.nominal_h2_intake_kg_per_h, load + c.ramp_up_kg_per_h2 * dt_h));
    const double next = std::clamp(target, lo, hi);
    out.state = next > 0.0 ? MethState{MethMode::UpAndRunning, next, 0} : MethState{};
    out.h2_consumed_kg = next * dt_h;
    out.sng_kg = c.ch4_yield_kg_per_kg_h2 * out.h2_consumed_kg;
    out.co2_t = c.co2_ratio_kg_per_kg_h2 * out.h2_consumed_kg / 1000.0;
    out.heat_kwh = c.heat_yield_kwh_per_kg_h2 * out.h2_consumed_kg;
    return out;
}

bool produces_this_step(const MethanationConfig& c, const MethState& state) {
    switch (state.mode) {
        case MethMode::UpAndRunning: return true;
        case MethMode::ReactorBalancing: return state.balancing_steps_left == 0;
        case MethMode::HotStandby: return c.balancing_duration_steps == 0;
    }
    return false;
}

double min_reachable_load(const MethanationConfig& c, const MethState& state, double dt_h) {
    if (state.mode != MethMode::UpAndRunning) return 0.0;
    return std::max(0.0, state.load_kg_per_h - c.ramp_down_kg_per_h2 * dt_h);
}

double shutdown_commitment_kg(const MethanationConfig& c, double load, double dt_h) {
    const double drop = c.ramp_down_kg_per_h2 * dt_h;
    double total = 0.0;
    for (double l = load; l > 0.0; l -= drop) total += l * dt_h;
    return total;
}

double max_feasible_load(const MethanationConfig& c, const H2BufferConfig& b, const MethState& state,
                         double stored_mass_kg, double dt_h) {
    if (!produces_this_step(c, state)) return 0.0;
    const double lo = min_reachable_load(c, state, dt_h);
    const double base = state.mode == MethMode::UpAndRunning ? state.load_kg_per_h : 0.0;
    const double hi = std::max(lo, std::min(c.nominal_h2_intake_kg_per_h, base + c.ramp_up_kg_per_h2 * dt_h));
    const double available = stored_mass_kg - buffer_mass_kg(b, b.p_min_bar);
    if (shutdown_commitment_kg(c, hi, dt_h) <= available) return hi;
    if (shutdown_commitment_kg(c, lo, dt_h) >= available) return lo;
    double a = lo;
    double z = hi;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (a + z);
        (shutdown_commitment_kg(c, mid, dt_h) <= available ? a : z) = mid;
    }
    return a;
}

PlantState initial_state(const PlantConfig& config) {
    return PlantState{H2BufferState{buffer_mass_kg(config.buffer, config.initial.buffer_pressure_bar)},
                      config.initial.methanation};
}

PlantStepResult plant_step(const PlantConfig& cfg, PlantState& state, double setpoint_kw, double meth_target,
                           double surplus_kw, double dt_h) {
    PlantStepResult r;
    r.setpoint_kw = setpoint_kw;

    const MethanationOutput meth = methanation_step(cfg.methanation, state.methanation, meth_target, dt_h);

    const double mass = state.buffer.stored_mass_kg;
    const double room = std::max(0.0, buffer_mass_kg(cfg.buffer, cfg.buffer.p_max_bar) - mass + meth.h2_consumed_kg);
    double effective = setpoint_kw;
    ElectrolyzerOutput el = electrolyzer_step(cfg.electrolyzer, effective, dt_h);
    if (el.h2_kg > room) {
        effective = electrolyzer_power_for(cfg.electrolyzer, room, dt_h);
        if (effective < min_operating_power(cfg.electrolyzer)) effective = cfg.electrolyzer.standby_power_kw;
        el = electrolyzer_step(cfg.electrolyzer, effective, dt_h);
    }
    r.effective_setpoint_kw = effective;

    const BufferUpdate buf = buffer_apply(state.buffer, cfg.buffer, el.h2_kg, meth.h2_consumed_kg);
    state.buffer = buf.state;
    state.methanation = meth.state;

    r.electricity_surplus_kwh = std::min(effective, std::max(0.0, surplus_kw)) * dt_h;
    r.electricity_deficit_kwh = el.energy_kwh - r.electricity_surplus_kwh;
    r.h2_produced_kg = el.h2_kg;
    r.h2_to_methanation_kg = meth.h2_consumed_kg;
    r.sng_kg = meth.sng_kg;
    r.sng_kwh = meth.sng_kg * cfg.methanation.sng_lhv_kwh_per_kg;
    r.co2_t = meth.co2_t;
    r.o2_t = el.o2_kg / 1000.0;
    r.heat_kwh = el.heat_kwh + meth.heat_kwh;
    r.buffer_pressure_bar = buf.pressure_bar;
    return r;
}

}  // namespace p2g::plant
