#pragma once

#include "p2gsim/coordinator.hpp"
#include "p2gsim/economics.hpp"
#include "p2gsim/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2g::sim {

/// A module failure during the time loop, tagged with the step and its timestamp.
class SimulationError : public std::runtime_error {
public:
    SimulationError(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

struct SimOptions {
    double load_power_factor = 0.95;  // lagging, for electric demand only
    electric::PowerFlowOptions power_flow;
    gas::StepOptions gas_step;
};

struct FeederRecord {
    double demand_kw = 0.0;
    double res_kw = 0.0;
    double plant_load_kw = 0.0;
    double surplus_kw = 0.0;
    double absorbed_kw = 0.0;
    double rpf_kw = 0.0;           // final pass, with the dispatched plant load
    double tentative_rpf_kw = 0.0; // plants at standby
    double import_kw = 0.0;
    double losses_kw = 0.0;
};

struct PlantRecord {
    plant::PlantStepResult result;
    plant::PlantState state;  // after the step
    coord::PlantDispatch dispatch;
};

struct StepRecord {
    scenario::Season season = scenario::Season::Heating;
    std::vector<FeederRecord> feeders;
    std::vector<PlantRecord> plants;
    coord::DispatchDiagnostics dispatch;
    double gas_p_min_barg = 0.0;
    double gas_p_mean_barg = 0.0;
    double gas_p_max_barg = 0.0;
    double citygate_kg = 0.0;
    double withdrawal_kg = 0.0;
    double sng_injected_kg = 0.0;
    double stored_mass_kg = 0.0;  // after the step
    double power_flow_residual_kw = 0.0;
    int gas_substeps = 0;
};

struct FeederSeasonTotals {
    double el_demand_mwh = 0.0;
    double res_mwh = 0.0;
    double surplus_mwh = 0.0;
    double absorbed_mwh = 0.0;
    double rpf_mwh = 0.0;
};

struct GasSeasonTotals {
    double ng_demand_kg = 0.0;
    double ng_imported_kg = 0.0;
    double sng_kg = 0.0;
    double linepack_delta_kg = 0.0;
    double ng_demand_mwh = 0.0;
    double ng_imported_mwh = 0.0;
    double sng_mwh = 0.0;
    double linepack_delta_mwh = 0.0;

    double sng_share() const { return ng_demand_mwh > 0.0 ? sng_mwh / ng_demand_mwh : 0.0; }
};

struct PlantSeasonTotals {
    econ::AnnualAccounts accounts;  // not annualized
    double electricity_mwh = 0.0;
    double h2_produced_kg = 0.0;
    double h2_to_methanation_kg = 0.0;
    int running_steps = 0;
    int curtailed_steps = 0;
};

struct SeasonTable {
    int steps = 0;
    std::vector<FeederSeasonTotals> feeders;
    GasSeasonTotals gas;
    std::vector<PlantSeasonTotals> plants;
};

struct SeasonalTables {
    SeasonTable heating;
    SeasonTable non_heating;
    SeasonTable year;  // whole horizon
};

struct SimulationResult {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::string config_hash;
    scenario::TimeGrid time_grid;
    double ng_lhv_kwh_per_kg = 13.1;
    std::vector<int> transformer_ids;
    std::vector<std::string> plant_names;
    std::vector<plant::CapexSizing> plant_sizing;
    double initial_stored_mass_kg = 0.0;
    std::vector<plant::PlantState> initial_plant_states;
    std::vector<StepRecord> records;
    SeasonalTables seasonal;

    /// Multiplier that turns horizon totals into per-year accounts.
    double annualization_factor() const;
    /// Whole-horizon plant accounts scaled to one year.
    std::vector<econ::PlantEconomics> annual_plant_economics() const;
};

/// Runs the coupled simulation over the full time grid.
SimulationResult run(const scenario::Scenario& scenario, const SimOptions& options = {});

/// Seasonal totals per transformer, for the gas network and per plant.
SeasonalTables aggregate(const SimulationResult& result);

struct GasValidationOptions {
    double dt_s = 900.0;
    double settle_hours = 0.0;
    double check_hours = 24.0;
    double initial_pressure_barg = -1.0;  // negative: start at the citygate pressure
};

struct GasValidationReport {
    double max_relative_error = 0.0;  // over every node and every checked step
    std::vector<double> steady_bar_abs;
    std::vector<double> transient_bar_abs;   // at the end of the run
    std::vector<double> error_per_step;      // node-wise maximum, per checked step
};

/// Drives the transient gas model under constant withdrawals and injections
/// and compares it against the Newton steady state.
GasValidationReport validate_gas_model(const gas::GasNetwork& network, std::span<const double> withdrawals_kg_per_s,
                                       std::span<const double> injections_kg_per_s,
                                       const GasValidationOptions& options = {});

/// Constant-boundary validation case: network, per-node withdrawals (indexed
/// like the compiled network) and the horizon to simulate.
struct GasValidationCase {
    gas::GasNetwork network;
    std::vector<double> withdrawals_kg_per_s;
    double horizon_h = 24.0;
    double step_s = 900.0;
};

GasValidationCase load_gas_validation_case(const std::filesystem::path& json_path);

struct ReportOptions {
    std::vector<double> surplus_prices_eur_per_mwh{0.0, 5.0, 15.0, 30.0};
    std::vector<econ::CostScenario> cost_scenarios;  // empty: 2030 and 2050 defaults
};

/// Writes time series, dispatch log, seasonal tables, duration curves, plant
/// accounts, the LC_SNG grid and a run manifest into `out_dir`.
std::vector<std::filesystem::path> emit_reports(const SimulationResult& result,
                                                const std::filesystem::path& out_dir,
                                                const ReportOptions& options = {});

struct Violation {
    int step = -1;  // -1 for horizon-level checks
    std::string what;
};

struct InvariantTolerances {
    double gas_pressure_bar = 0.01;
    double buffer_relative = 1e-9;
    double ramp_kg_per_h = 1e-9;
    double feeder_ledger_kw = 1e-3;
    double gas_mass_relative = 1e-3;
    double aggregate_relative = 1e-9;
};

/// Checks the physical envelopes and ledgers of a finished run.
std::vector<Violation> check_invariants(const SimulationResult& result, const scenario::Scenario& scenario,
                                        const InvariantTolerances& tolerances = {});

/// Mismatch between the stored-mass change of the gas network and the net
/// injected mass over the whole horizon, relative to the mass that entered.
double gas_mass_balance_error(const SimulationResult& result);

/// Loads the per-plant annual accounts written by emit_reports.
std::vector<econ::PlantEconomics> read_plant_accounts(const std::filesystem::path& json_path);

}  // namespace p2g::sim
