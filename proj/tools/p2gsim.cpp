#include "p2gsim/economics.hpp"
#include "p2gsim/scenario.hpp"
#include "p2gsim/sim_engine.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace p2g;

constexpr int kExitInvariant = 2;
constexpr int kExitFailure = 1;

econ::CostScenario cost_for_year(const econ::CostScenario& configured, int year) {
    if (configured.year_label == year) return configured;
    econ::CostScenario s = year == 2050 ? econ::cost_scenario_2050() : econ::cost_scenario_2030();
    s.plant_lifetime_y = configured.plant_lifetime_y;
    s.wacc = configured.wacc;
    s.deficit_price_eur_per_mwh = configured.deficit_price_eur_per_mwh;
    s.surplus_price_eur_per_mwh = configured.surplus_price_eur_per_mwh;
    s.stack_replacement_fraction = configured.stack_replacement_fraction;
    s.replacement_period_y = configured.replacement_period_y;
    s.co2_cost_eur_per_t = configured.co2_cost_eur_per_t;
    s.o2_revenue_eur_per_t = configured.o2_revenue_eur_per_t;
    s.heat_revenue_eur_per_mwh = configured.heat_revenue_eur_per_mwh;
    return s;
}

void print_grid(const std::vector<econ::SweepCell>& cells, std::ostream& out) {
    out << "plant,year,surplus_price_eur_per_mwh,lc_sng_eur_per_mwh\n";
    char buf[64];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g", c.year_label, c.surplus_price_eur_per_mwh, c.lc_sng_eur_per_mwh);
        out << c.plant << ',' << buf << '\n';
    }
}

int cmd_run(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::optional<int> year, std::optional<double> price) {
    scenario::LoadOptions lo;
    lo.seed_override = seed;
    scenario::Scenario sc = scenario::load_scenario(config, lo);
    if (year) sc.cost = cost_for_year(sc.cost, *year);
    if (price) sc.cost.surplus_price_eur_per_mwh = *price;

    const sim::SimulationResult result = sim::run(sc);
    sim::ReportOptions ro;
    ro.cost_scenarios = year ? std::vector{sc.cost}
                             : std::vector{cost_for_year(sc.cost, 2030), cost_for_year(sc.cost, 2050)};
    if (price) ro.surplus_prices_eur_per_mwh = {*price};
    for (const auto& f : sim::emit_reports(result, out_dir, ro)) std::cout << "wrote " << f.string() << '\n';

    const auto& y = result.seasonal.year;
    for (std::size_t p = 0; p < result.plant_names.size(); ++p) {
        const auto& a = y.plants[p].accounts;
        std::printf("%s: electricity %.1f MWh, SNG %.1f MWh, CO2 %.1f t, O2 %.1f t, heat %.1f MWh\n",
                    result.plant_names[p].c_str(), y.plants[p].electricity_mwh, a.sng_mwh, a.co2_t, a.o2_t, a.heat_mwh);
    }
    std::printf("SNG share of gas demand: %.2f %%\n", 100.0 * y.gas.sng_share());
    std::printf("config hash %s, seed %llu\n", result.config_hash.c_str(), static_cast<unsigned long long>(result.seed));

    const auto violations = sim::check_invariants(result, sc);
    for (const auto& v : violations) {
        std::fprintf(stderr, "invariant violated%s: %s\n", v.step >= 0 ? (" at step " + std::to_string(v.step)).c_str() : "",
                     v.what.c_str());
    }
    if (!violations.empty()) {
        std::fprintf(stderr, "%zu invariant violation(s)\n", violations.size());
        return kExitInvariant;
    }
    std::cout << "all invariants hold\n";
    return 0;
}

int cmd_validate_gas(const std::string& case_path, double limit) {
    const auto c = sim::load_gas_validation_case(case_path);
    sim::GasValidationOptions o;
    o.dt_s = c.step_s;
    o.check_hours = c.horizon_h;
    const std::vector<double> none(c.withdrawals_kg_per_s.size(), 0.0);
    const auto report = sim::validate_gas_model(c.network, c.withdrawals_kg_per_s, none, o);
    std::printf("steps checked: %zu\nmax relative pressure error: %.6g\nlimit: %.6g\n", report.error_per_step.size(),
                report.max_relative_error, limit);
    if (report.max_relative_error >= limit) {
        std::fprintf(stderr, "transient model departs from the steady-state solution\n");
        return kExitInvariant;
    }
    return 0;
}

int cmd_lcoe(const std::string& accounts, const std::string& cost_path, std::optional<int> year,
             std::optional<double> price, const std::string& out_path) {
    const auto plants = sim::read_plant_accounts(accounts);
    std::vector<econ::CostScenario> scenarios;
    if (!cost_path.empty()) {
        const auto base = scenario::read_cost_scenario(cost_path);
        scenarios = year ? std::vector{cost_for_year(base, *year)}
                         : std::vector{cost_for_year(base, 2030), cost_for_year(base, 2050)};
    } else if (year) {
        scenarios = {*year == 2050 ? econ::cost_scenario_2050() : econ::cost_scenario_2030()};
    } else {
        scenarios = {econ::cost_scenario_2030(), econ::cost_scenario_2050()};
    }
    const std::vector<double> prices = price ? std::vector{*price} : std::vector{0.0, 5.0, 15.0, 30.0};
    const auto cells = econ::sensitivity_sweep(scenarios, prices, plants);
    if (out_path.empty()) {
        print_grid(cells, std::cout);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
        print_grid(cells, out);
        std::cout << "wrote " << out_path << '\n';
    }
    return 0;
}

int cmd_synth(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed) {
    scenario::LoadOptions lo;
    lo.seed_override = seed;
    const scenario::Scenario sc = scenario::load_scenario(config, lo);
    const auto root = scenario::save_scenario(sc, out_dir);
    std::cout << "wrote " << root.string() << " (" << sc.profiles.size() << " profiles, config hash "
              << scenario::config_hash(sc) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled electricity/gas simulator for distributed power-to-gas plants"};
    app.require_subcommand(1);

    std::string config = P2G_DEFAULT_CONFIG;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> year;
    std::optional<double> price;

    auto* run = app.add_subcommand("run", "simulate the full horizon and write reports");
    run->add_option("-c,--config", config, "root scenario JSON")->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--year", year, "cost scenario year")->check(CLI::IsMember({2030, 2050}));
    run->add_option("--surplus-price", price, "surplus electricity price [EUR/MWh]")->check(CLI::NonNegativeNumber);

    std::string case_path = P2G_DEFAULT_GAS_CASE;
    double limit = 0.02;
    auto* vg = app.add_subcommand("validate-gas", "compare the transient gas model with the steady-state solver");
    vg->add_option("-c,--config", case_path, "validation case JSON")->check(CLI::ExistingFile);
    vg->add_option("--limit", limit, "maximum admissible relative pressure error");

    std::string accounts = "out/plant_accounts.json";
    std::string cost_path;
    std::string lc_out;
    auto* lc = app.add_subcommand("lcoe", "levelized cost of SNG grid from a run's plant accounts");
    lc->add_option("-a,--accounts", accounts, "plant_accounts.json written by run")->check(CLI::ExistingFile);
    lc->add_option("-c,--config", cost_path, "cost scenario JSON")->check(CLI::ExistingFile);
    lc->add_option("--year", year, "cost scenario year")->check(CLI::IsMember({2030, 2050}));
    lc->add_option("--surplus-price", price, "surplus electricity price [EUR/MWh]")->check(CLI::NonNegativeNumber);
    lc->add_option("-o,--out", lc_out, "CSV output file (default: stdout)");

    auto* sy = app.add_subcommand("synth", "materialize synthetic profiles into a self-contained scenario");
    sy->add_option("-c,--config", config, "root scenario JSON")->check(CLI::ExistingFile);
    sy->add_option("-o,--out", out_dir, "output directory");
    sy->add_option("--seed", seed, "override the scenario seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config, out_dir, seed, year, price);
        if (*vg) return cmd_validate_gas(case_path, limit);
        if (*lc) return cmd_lcoe(accounts, cost_path, year, price, lc_out);
        if (*sy) return cmd_synth(config, out_dir, seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
