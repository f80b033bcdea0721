#pragma once

#include "p2gsim/p2g_plant.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace p2g::econ {

struct ComponentValues {
    double electrolyzer = 0.0;
    double h2_buffer = 0.0;
    double methanation = 0.0;

    bool operator==(const ComponentValues&) const = default;
};

/// Cost and revenue assumptions of one scenario year. Prices in EUR; energy in MWh.
struct CostScenario {
    int year_label = 2030;
    ComponentValues capex{650.0, 75.0, 500.0};      // EUR per kWe, per m3 H2, per kW SNG
    ComponentValues opex_fraction{0.03, 0.015, 0.05};  // of CAPEX, per year
    int plant_lifetime_y = 20;
    double wacc = 0.08;
    double deficit_price_eur_per_mwh = 60.0;
    double surplus_price_eur_per_mwh = 15.0;
    double stack_replacement_fraction = 0.35;
    int replacement_period_y = 5;
    double co2_cost_eur_per_t = 50.0;
    double o2_revenue_eur_per_t = 70.0;
    double heat_revenue_eur_per_mwh = 30.0;

    bool operator==(const CostScenario&) const = default;
};

CostScenario cost_scenario_2030();
CostScenario cost_scenario_2050();

/// Throws std::invalid_argument on negative prices or a non-positive lifetime.
void validate(const CostScenario& scenario);

struct AnnualAccounts {
    double surplus_energy_mwh = 0.0;
    double deficit_energy_mwh = 0.0;
    double sng_mwh = 0.0;
    double co2_t = 0.0;
    double o2_t = 0.0;
    double heat_mwh = 0.0;

    bool operator==(const AnnualAccounts&) const = default;
    AnnualAccounts& operator+=(const AnnualAccounts& other);
    AnnualAccounts scaled(double factor) const;
};

struct CashFlow {
    double capex = 0.0;
    double opex = 0.0;
    double c_el = 0.0;
    double c_co2 = 0.0;
    double c_r = 0.0;
    double r_o2 = 0.0;
    double r_heat = 0.0;

    double net() const { return capex + opex + c_el + c_co2 + c_r - r_o2 - r_heat; }
};

double total_capex(const CostScenario& scenario, const plant::CapexSizing& sizing);

/// Cash flow of year i: CAPEX at i = 0 only, operation in years 1..lifetime,
/// stack replacement in years that are multiples of the replacement period
/// and fall before the end of life.
CashFlow annual_cashflow(const AnnualAccounts& accounts, const CostScenario& scenario,
                         const plant::CapexSizing& sizing, int year_index);

/// Discounted net cost over discounted SNG energy [EUR/MWh]; entries are
/// indexed by year starting at 0.
double lc_sng(std::span<const CashFlow> cashflows, std::span<const double> sng_mwh, double wacc);

/// Levelized cost for a plant whose operation repeats `accounts` every year.
double lc_sng(const AnnualAccounts& accounts, const CostScenario& scenario, const plant::CapexSizing& sizing);

/// Sum over i of values[i] / (1 + wacc)^i.
double discounted_sum(std::span<const double> values, double wacc);

/// Discounted surplus energy over discounted SNG energy: the derivative of the
/// levelized cost with respect to the surplus electricity price.
double surplus_price_slope(const AnnualAccounts& accounts, const CostScenario& scenario);

/// Discounted by-product revenue per discounted MWh of SNG.
double byproduct_credit(const AnnualAccounts& accounts, const CostScenario& scenario);

struct PlantEconomics {
    std::string name;
    AnnualAccounts accounts;
    plant::CapexSizing sizing;
};

struct SweepCell {
    std::string plant;
    int year_label = 0;
    double surplus_price_eur_per_mwh = 0.0;
    double lc_sng_eur_per_mwh = 0.0;
};

/// Every combination of scenario, surplus price and plant, in that nesting order.
std::vector<SweepCell> sensitivity_sweep(std::span<const CostScenario> scenarios,
                                         std::span<const double> surplus_prices_eur_per_mwh,
                                         std::span<const PlantEconomics> plants);

void to_json(nlohmann::json& j, const CostScenario& s);
void from_json(const nlohmann::json& j, CostScenario& s);
void to_json(nlohmann::json& j, const AnnualAccounts& a);
void from_json(const nlohmann::json& j, AnnualAccounts& a);

}  // namespace p2g::econ
