#pragma once

#include <stdexcept>
#include <string>

namespace p2g::plant {

/// PEM electrolyzer with a linear (constant kWh/kg) conversion model.
struct ElectrolyzerConfig {
    double nominal_power_kw = 1200.0;
    double min_load_fraction = 0.0;
    double standby_power_kw = 20.0;
    double specific_consumption_kwh_per_kg_h2 = 55.0;  // stack + balance of plant
    double o2_yield_kg_per_kg_h2 = 8.0;
    double heat_yield_kwh_per_kg_h2 = 3.0;

    bool operator==(const ElectrolyzerConfig&) const = default;
};

/// Intermediate hydrogen storage, modelled as an ideal-gas tank.
struct H2BufferConfig {
    double volume_m3 = 120.0;
    double temperature_k = 293.0;
    double p_max_bar = 30.0;
    double p_min_bar = 2.0;
    double meth_trigger_bar = 15.0;

    bool operator==(const H2BufferConfig&) const = default;
};

struct MethanationConfig {
    double nominal_h2_intake_kg_per_h = 21.5;
    double ramp_up_kg_per_h2 = 3.8;     // kg(H2)/h gained per hour of operation
    double ramp_down_kg_per_h2 = 46.0;  // kg(H2)/h shed per hour
    double co2_ratio_kg_per_kg_h2 = 5.5;
    double ch4_yield_kg_per_kg_h2 = 2.0;
    double sng_lhv_kwh_per_kg = 13.1;
    double heat_yield_kwh_per_kg_h2 = 5.0;
    int balancing_duration_steps = 4;

    bool operator==(const MethanationConfig&) const = default;
};

/// Component sizes used for capital cost.
struct CapexSizing {
    double electrolyzer_kwe = 1200.0;
    double h2_buffer_m3 = 3312.0;  // m3 of stored H2 at normal conditions
    double methanation_kw_sng = 563.3;

    bool operator==(const CapexSizing&) const = default;
};

enum class MethMode { HotStandby = 1, ReactorBalancing = 2, UpAndRunning = 3 };

const char* to_string(MethMode mode);
MethMode meth_mode_from_string(const std::string& name);

struct MethState {
    MethMode mode = MethMode::HotStandby;
    double load_kg_per_h = 0.0;  // H2 intake, non-zero only when UpAndRunning
    int balancing_steps_left = 0;

    bool operator==(const MethState&) const = default;
};

struct H2BufferState {
    double stored_mass_kg = 0.0;

    bool operator==(const H2BufferState&) const = default;
};

struct PlantInitialState {
    double buffer_pressure_bar = 5.0;
    MethState methanation;

    bool operator==(const PlantInitialState&) const = default;
};

struct PlantConfig {
    std::string name;
    int en_bus = 0;
    int gn_node = 0;
    ElectrolyzerConfig electrolyzer;
    H2BufferConfig buffer;
    MethanationConfig methanation;
    CapexSizing sizing;
    PlantInitialState initial;

    bool operator==(const PlantConfig&) const = default;
};

/// Throws std::invalid_argument when a configuration violates its invariants.
void validate(const PlantConfig& config);

class PlantModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ElectrolyzerOutput {
    double h2_kg = 0.0;
    double o2_kg = 0.0;
    double heat_kwh = 0.0;
    double energy_kwh = 0.0;
};

/// Converts an electric setpoint held for dt_h hours into products.
ElectrolyzerOutput electrolyzer_step(const ElectrolyzerConfig& config, double power_setpoint_kw, double dt_h);

/// Electric power that yields `h2_kg` within dt_h (inverse of electrolyzer_step).
double electrolyzer_power_for(const ElectrolyzerConfig& config, double h2_kg, double dt_h);

double buffer_pressure_bar(const H2BufferConfig& config, double mass_kg);
double buffer_mass_kg(const H2BufferConfig& config, double pressure_bar);

struct BufferUpdate {
    H2BufferState state;
    double pressure_bar = 0.0;
};

/// Net mass update of the buffer; throws PlantModelError when the result leaves
/// [p_min, p_max].
BufferUpdate buffer_apply(const H2BufferState& state, const H2BufferConfig& config, double h2_in_kg,
                          double h2_out_kg);

struct MethanationOutput {
    MethState state;
    double h2_consumed_kg = 0.0;
    double sng_kg = 0.0;
    double co2_t = 0.0;
    double heat_kwh = 0.0;
};

/// Advances the methanation unit by one step toward a target H2 intake. The
/// load is held constant over the step after the ramp-limited update.
MethanationOutput methanation_step(const MethanationConfig& config, const MethState& state,
                                   double h2_feed_target_kg_per_h, double dt_h);

/// True when a positive target makes the unit consume hydrogen this step:
/// already running, at the end of balancing, or starting with no balancing.
bool produces_this_step(const MethanationConfig& config, const MethState& state);

/// Lowest load reachable this step from the current state (ramp-down bound).
double min_reachable_load(const MethanationConfig& config, const MethState& state, double dt_h);

/// H2 [kg] consumed from the start of this step if the unit runs at `load`
/// now and then ramps down to zero as fast as allowed.
double shutdown_commitment_kg(const MethanationConfig& config, double load_kg_per_h, double dt_h);

/// Highest load this step that keeps the buffer above p_min through a
/// fastest-possible shutdown, bounded by nominal intake and ramp-up. Never
/// below min_reachable_load.
double max_feasible_load(const MethanationConfig& methanation, const H2BufferConfig& buffer,
                         const MethState& state, double stored_mass_kg, double dt_h);

struct PlantState {
    H2BufferState buffer;
    MethState methanation;

    bool operator==(const PlantState&) const = default;
};

PlantState initial_state(const PlantConfig& config);

struct PlantStepResult {
    double setpoint_kw = 0.0;            // requested by the coordinator
    double effective_setpoint_kw = 0.0;  // after the buffer-full cap
    double electricity_surplus_kwh = 0.0;
    double electricity_deficit_kwh = 0.0;
    double h2_produced_kg = 0.0;
    double h2_to_methanation_kg = 0.0;
    double sng_kg = 0.0;
    double sng_kwh = 0.0;
    double co2_t = 0.0;
    double o2_t = 0.0;
    double heat_kwh = 0.0;
    double buffer_pressure_bar = 0.0;

    double electricity_kwh() const { return electricity_surplus_kwh + electricity_deficit_kwh; }
};

/// One plant step: methanation moves toward its target, the electrolyzer runs
/// at its setpoint capped so the buffer stays below p_max, and the buffer takes
/// the net hydrogen. Electricity is priced as surplus up to `surplus_kw`.
PlantStepResult plant_step(const PlantConfig& config, PlantState& state, double setpoint_kw,
                           double meth_target_kg_per_h, double surplus_kw, double dt_h);

}  // namespace p2g::plant
